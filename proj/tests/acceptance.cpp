// Acceptance checks: one pass/fail line per criterion.
//   acceptance                 run every criterion
//   acceptance --criterion N   run one criterion (exit 0 pass, 1 fail, 77 skipped)

#include "behavior_epi/analysis.hpp"
#include "behavior_epi/baseline.hpp"
#include "behavior_epi/calibration.hpp"
#include "behavior_epi/integrator.hpp"
#include "behavior_epi/metzler.hpp"
#include "behavior_epi/prcc.hpp"
#include "behavior_epi/scenarios.hpp"
#include "behavior_epi/sensitivity.hpp"
#include "oracles.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace behavior_epi;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Result {
    Outcome outcome = Outcome::Fail;
    std::string detail;
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

bool within_rel(double value, double target, double rel)
{
    return std::abs(value - target) <= rel * std::abs(target);
}

void set_rates(ModelParams& p, const oracle::Rates& k)
{
    p.beta_a = k.beta_a;
    p.beta_i = k.beta_i;
    p.beta_h = k.beta_h;
    p.xi = k.xi;
    p.sigma_e = k.sigma_e;
    p.sigma_i = k.sigma_i;
    p.gamma_a = k.gamma_a;
    p.gamma_h = k.gamma_h;
    p.delta_h = k.delta_h;
    p.r = k.r;
    p.q = k.q;
}

// 1. Behavior-free phase reproduction numbers
Result reproduction_table()
{
    const auto p = epidemiological_baseline();
    const std::array<double, 4> expected{2.43, 0.083, 0.961, 1.339};
    bool ok = true;
    std::string detail = "R_c =";
    for (std::size_t i = 0; i < 4; ++i) {
        const double rc = control_reproduction_number(p, kBehaviorFreeTheta[i]);
        ok = ok && std::abs(rc - expected[i]) <= 1e-3;
        detail += fmt(" %.5f", rc);
    }
    return {ok ? Outcome::Pass : Outcome::Fail, detail + " (tolerance 0.001)"};
}

// 2. Closed-form R_c against the spectral radius of a numerically built next-generation matrix
Result next_generation()
{
    std::mt19937_64 rng(20200229);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        auto p = epidemiological_baseline();
        const auto k = oracle::random_rates(rng);
        set_rates(p, k);
        const double theta = u(rng);
        const double a = control_reproduction_number(p, theta);
        const double b = oracle::next_generation_radius(k, theta);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(b), 1e-300));
    }
    return {worst <= 1e-8 ? Outcome::Pass : Outcome::Fail, "500 draws, max relative difference " + fmt("%.3g", worst)};
}

// 3. Long-horizon convergence to the predicted equilibrium class
Result convergence_suite()
{
    struct Scenario {
        double beta_a, beta_i, c12, c21;
    };
    const std::vector<Scenario> scenarios{{0.1, 0.05, 0.5, 0.25}, {0.1, 0.05, 0.25, 0.5}, {0.1, 0.05, 0.5, 0.5},
                                          {1.0, 0.5, 0.5, 0.25},  {1.0, 0.5, 0.25, 0.5},  {1.0, 0.5, 0.5, 0.5}};
    std::mt19937_64 rng(4000);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int passed = 0, total = 0;
    double worst_extinction = 0.0, worst_dfe = 0.0;
    for (const auto& sc : scenarios) {
        ModelParams p = two_group_baseline();
        p.theta = LockdownSchedule::constant(1.0);
        p.beta_a = sc.beta_a;
        p.beta_i = sc.beta_i;
        p.c_b(0, 1) = sc.c12;
        p.c_b(1, 0) = sc.c21;
        const double rc = control_reproduction_number(p, 1.0);
        for (int rep = 0; rep < 2; ++rep) {
            SystemState s = SystemState::zeros(2);
            for (int g = 0; g < 2; ++g) {
                s(Compartment::S, g) = u(rng);
                s(Compartment::E, g) = 0.01 * u(rng);
                s(Compartment::Ia, g) = 0.01 * u(rng);
                s(Compartment::Is, g) = 0.01 * u(rng);
                s(Compartment::R, g) = 0.1 * u(rng);
            }
            const double n0 = kNycPopulation;
            s.values *= n0 / s.values.sum();
            const auto traj = integrate(p, s, 4000.0, 100.0);
            const auto last = traj.size() - 1;
            const Eigen::VectorXd y = traj.states[last];
            const double n_end = traj.population(last);
            bool ok = false;
            if (rc > 1.0) {
                const double frac = n_end / n0;
                worst_extinction = std::max(worst_extinction, frac);
                ok = frac < 1e-3;
            }
            else {
                DfePoint target;
                const double k = traj.group_size(last, 0) / n_end;
                if (sc.c12 > sc.c21) target = DfePoint::g1(n_end);
                else if (sc.c12 < sc.c21) target = DfePoint::g2(n_end);
                else if (k > 0.0 && k < 1.0) target = DfePoint::g3(k, n_end);
                else target = DfePoint::trivial();
                const double dist = (y - target.state()).norm() / n_end;
                worst_dfe = std::max(worst_dfe, dist);
                ok = target.kind != DfeKind::TDFE && dist < 1e-3;
                if (target.kind == DfeKind::G3DFE) ok = ok && traj.infected(last) < 1e-6 * n0;
            }
            passed += ok ? 1 : 0;
            ++total;
        }
    }
    std::ostringstream d;
    d << passed << "/" << total << " combinations converge; R_c=0.78 max relative distance " << fmt("%.3g", worst_dfe)
      << "; R_c=7.8 max N(4000)/N(0) " << fmt("%.3g", worst_extinction) << " (threshold 1e-3)";
    return {passed == total ? Outcome::Pass : Outcome::Fail, d.str()};
}

// 4. Metzler stability test against a dense eigensolver
Result metzler_oracle()
{
    std::mt19937_64 rng(12);
    std::uniform_int_distribution<int> dim(2, 12);
    std::uniform_real_distribution<double> off(0.0, 1.0), shift(0.5, 1.5);
    int checked = 0, agree = 0, skipped = 0;
    while (checked < 1000) {
        const int n = dim(rng);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : off(rng);
        }
        const double rowmax = m.rowwise().sum().maxCoeff();
        for (int i = 0; i < n; ++i) m(i, i) = -shift(rng) * rowmax;
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
        const double lead = es.eigenvalues().real().maxCoeff();
        if (std::abs(lead) <= 1e-8) {
            ++skipped;
            continue;
        }
        ++checked;
        agree += metzler_stable(m) == (lead < 0.0) ? 1 : 0;
    }
    return {agree == checked ? Outcome::Pass : Outcome::Fail,
            std::to_string(agree) + "/" + std::to_string(checked) + " verdicts agree (" + std::to_string(skipped) +
                " near-marginal skipped)"};
}

// 5. Population conservation and positivity across a battery of integrations
Result conservation()
{
    reset_integration_audit();
    const InitialConditions ic{kNycPopulation};
    for (double k : {0.0, 0.2, 0.5, 1.0}) {
        InitialConditions c = ic;
        c.k = k;
        simulate(two_group_baseline(), c, calendar::kValidationEnd);
    }
    simulate(behavior_free_baseline(), ic, calendar::kValidationEnd);
    SweepSpec spec;
    spec.axes = {{"a1", 0.0, 12000.0, 5}, {"a2", 0.0, 4000.0, 5}};
    sweep(spec);
    spec.axes = {{"inv_c_b12", 1.0, 90.0, 5}, {"inv_c_b21", 1.0, 90.0, 5}};
    sweep(spec);
    lockdown_sweep({3, 14, 35}, {0.1, 0.5, 0.9});
    SensitivityConfig cfg;
    cfg.samples = 200;
    cfg.seed = 5;
    run_sensitivity(cfg);
    auto hot = two_group_baseline();
    hot.theta = LockdownSchedule::constant(1.0);
    hot.beta_a = 1.0;
    hot.beta_i = 0.5;
    integrate(hot, make_initial_state(ic), 4000.0, 10.0);
    const auto a = integration_audit();
    const bool ok = a.violations == 0 && a.max_conservation_defect <= 1e-6 && a.min_component_rel >= -1e-9;
    std::ostringstream d;
    d << a.integrations << " integrations, max |N+D-N0|/N0 " << fmt("%.3g", a.max_conservation_defect)
      << ", min component/N0 " << fmt("%.3g", a.min_component_rel) << ", violations " << a.violations;
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// 6. Two-group model without behavior reduces to the behavior-free model
Result reduction()
{
    ModelParams p = two_group_baseline();
    p.a.setZero();
    p.c_b.setZero();
    // The identity is exact; tight tolerances keep integrator error on the few-person compartments below the bound
    IntegratorOptions opts;
    opts.rtol = 1e-12;
    opts.atol_rel = 1e-14;
    double worst = 0.0;
    for (double k : {0.0, 0.3, 0.7}) {
        InitialConditions ic{kNycPopulation};
        ic.k = k;
        const auto two = integrate(p, make_initial_state(ic), 400.0, 1.0, opts);
        const auto y0 = aggregate_groups(2, make_initial_state(ic).values);
        const auto one = integrate_behavior_free(BehaviorFreeParams::from(p), y0, 400.0, 1.0, opts);
        for (std::size_t i = 0; i < two.size(); ++i) {
            const Eigen::VectorXd a = aggregate_groups(2, two.states[i]);
            const Eigen::VectorXd& b = one.states[i];
            for (int c = 0; c < kCompartments; ++c) {
                const double scale = std::max(std::abs(a(c)), std::abs(b(c)));
                if (scale == 0.0) continue;
                worst = std::max(worst, std::abs(a(c) - b(c)) / scale);
            }
        }
    }
    return {worst <= 1e-8 ? Outcome::Pass : Outcome::Fail,
            "max componentwise relative difference over 400 days " + fmt("%.3g", worst)};
}

// 7. First-wave anchors for k = 0 and k = 1
Result first_wave_anchors()
{
    const WaveWindows w;
    InitialConditions ic{kNycPopulation};
    const auto m0 = wave_metrics(simulate(two_group_baseline(), ic, w.wave1_end), w.wave1_start, w.wave1_end);
    ic.k = 1.0;
    const auto m1 = wave_metrics(simulate(two_group_baseline(), ic, w.wave1_end), w.wave1_start, w.wave1_end);
    const bool ok = within_rel(m0.peak_daily_hosp, 1630.0, 0.1) && within_rel(m0.cum_mortality, 17914.0, 0.1) &&
                    within_rel(m1.peak_daily_hosp, 736.0, 0.1);
    std::ostringstream d;
    d << "k=0 peak " << fmt("%.1f", m0.peak_daily_hosp) << " (1630 +-10%), mortality " << fmt("%.0f", m0.cum_mortality)
      << " (17914 +-10%); k=1 peak " << fmt("%.1f", m1.peak_daily_hosp) << " (736 +-10%)";
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// 8. Synthetic recovery of the phase multipliers from noisy model output
Result synthetic_recovery()
{
    auto cfg = FitConfig::behavior_free_default();
    cfg.initial.population = kNycPopulation;
    cfg.fit_end = calendar::kValidationEnd;  // the last phase begins after the first-wave window
    const auto traj = simulate(behavior_free_baseline(), cfg.initial, cfg.fit_end);
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 0.01);
    Targets targets;
    for (int d = 7; d <= cfg.fit_end; ++d) {
        targets.emplace_back(d, traj.hospitalized(static_cast<std::size_t>(d)) * (1.0 + noise(rng)));
    }
    const auto res = fit(cfg, targets);
    bool ok = true;
    std::ostringstream d;
    d << "fitted";
    for (int i = 0; i < 4; ++i) {
        const double truth = kBehaviorFreeTheta[static_cast<std::size_t>(i)];
        ok = ok && within_rel(res.values(i), truth, 0.05);
        d << ' ' << res.names[static_cast<std::size_t>(i)] << '=' << fmt("%.5f", res.values(i)) << " ("
          << fmt("%+.2f%%", 100.0 * (res.values(i) / truth - 1.0)) << ')';
    }
    return {ok ? Outcome::Pass : Outcome::Fail, d.str() + "; tolerance 5%"};
}

// 9. Fits to the public hospitalization series
Result nyc_fit()
{
    const char* path = std::getenv("BEHAVIOR_EPI_NYC_DATA");
    if (!path || !*path) return {Outcome::Skip, "BEHAVIOR_EPI_NYC_DATA not set; the hospitalization extract is required"};
    const auto series = load_series(path);
    auto bf = FitConfig::behavior_free_default();
    const auto bf_fit = fit(bf, series);
    const std::array<double, 4> expected{0.45, 0.0153, 0.178, 0.248};
    bool ok = true;
    std::ostringstream d;
    d << "behavior-free theta";
    for (int i = 0; i < 4; ++i) {
        ok = ok && within_rel(bf_fit.values(i), expected[static_cast<std::size_t>(i)], 0.15);
        d << ' ' << fmt("%.4f", bf_fit.values(i));
    }
    const auto bf_val = cross_validate(bf_fit, series, bf.validation_start, bf.validation_end);
    ok = ok && bf_val.relative_error_end >= 0.8 && bf_val.relative_error_end <= 1.3;
    d << "; end-of-window over-estimate " << fmt("%.1f%%", 100.0 * bf_val.relative_error_end);
    auto tg = FitConfig::two_group_default();
    const auto tg_fit = fit(tg, series);
    const auto tg_val = cross_validate(tg_fit, series, tg.validation_start, tg.validation_end);
    ok = ok && std::abs(tg_val.relative_error_end) <= 0.15;
    d << "; two-group end-of-window error " << fmt("%.1f%%", 100.0 * tg_val.relative_error_end);
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// 10. PRCC oracles and the full sensitivity pipeline
Result prcc_suite()
{
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd x(1000, 18);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = u(rng);
    }
    const Eigen::VectorXd mono = x.col(3).array().exp();
    const double mono_coef = prcc(x, mono)(3);
    Eigen::VectorXd null(1000);
    for (Eigen::Index i = 0; i < null.size(); ++i) null(i) = u(rng);
    const double null_max = prcc(x, null).cwiseAbs().maxCoeff();

    SensitivityConfig cfg;
    cfg.snapshots = {calendar::kSnapshotSpring};
    const auto run = run_sensitivity(cfg);
    const auto& peak = run.results.at(0);
    bool pipeline_ok = true;
    std::ostringstream d;
    d << "monotone " << fmt("%.4f", mono_coef) << ", null max |PRCC| " << fmt("%.3f", null_max) << "; April peak PRCC";
    for (const char* name : {"beta_a", "beta_i", "theta_l1", "sigma_e", "q"}) {
        const auto it = std::find(peak.parameters.begin(), peak.parameters.end(), name);
        const double c = peak.coefficients(static_cast<Eigen::Index>(it - peak.parameters.begin()));
        pipeline_ok = pipeline_ok && c > 0.4;
        d << ' ' << name << '=' << fmt("%.3f", c);
    }
    d << " (" << peak.sample_count << " samples, " << run.excluded << " excluded)";
    const bool ok = mono_coef > 0.99 && null_max < 0.15 && pipeline_ok;
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

// 11. Lockdown timing x efficacy anchors
Result lockdown_anchor()
{
    const double baseline_efficacy = 1.0 - kTwoGroupTheta[0];
    const auto cells = lockdown_sweep({14}, {baseline_efficacy, 0.5}, two_group_baseline(), {kNycPopulation});
    const double base = cells.at(0).cum_mortality.value_or(std::nan(""));
    const double half = cells.at(1).cum_mortality.value_or(std::nan(""));
    const bool ok = within_rel(base, 22000.0, 0.15) && within_rel(half, 14000.0, 0.15);
    std::ostringstream d;
    d << "(14 d, efficacy " << fmt("%.3f", baseline_efficacy) << ") " << fmt("%.0f", base)
      << " (22000 +-15%); (14 d, efficacy 0.5) " << fmt("%.0f", half) << " (14000 +-15%)";
    return {ok ? Outcome::Pass : Outcome::Fail, d.str()};
}

const std::vector<std::pair<std::string, std::function<Result()>>>& criteria()
{
    static const std::vector<std::pair<std::string, std::function<Result()>>> list{
        {"reproduction numbers of the behavior-free phases", reproduction_table},
        {"next-generation matrix oracle", next_generation},
        {"equilibrium convergence suite", convergence_suite},
        {"Metzler stability oracle", metzler_oracle},
        {"conservation and positivity", conservation},
        {"reduction to the behavior-free model", reduction},
        {"first-wave anchors", first_wave_anchors},
        {"synthetic calibration recovery", synthetic_recovery},
        {"hospitalization-data fits", nyc_fit},
        {"PRCC suite", prcc_suite},
        {"lockdown sweep anchors", lockdown_anchor},
    };
    return list;
}

Outcome run_one(int n)
{
    const auto& [name, fn] = criteria().at(static_cast<std::size_t>(n - 1));
    const auto t0 = std::chrono::steady_clock::now();
    Result r;
    try {
        r = fn();
    }
    catch (const std::exception& e) {
        r = {Outcome::Fail, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = r.outcome == Outcome::Pass ? "PASS" : r.outcome == Outcome::Fail ? "FAIL" : "SKIP";
    std::cout << "criterion " << n << " [" << tag << "] " << name << ": " << r.detail << " (" << fmt("%.1f", secs)
              << " s)" << std::endl;
    return r.outcome;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance checks"};
    int only = 0;
    app.add_option("--criterion", only, "run a single criterion")->check(CLI::Range(1, 11));
    CLI11_PARSE(app, argc, argv);
    if (only) {
        const auto o = run_one(only);
        return o == Outcome::Pass ? 0 : o == Outcome::Skip ? 77 : 1;
    }
    int failures = 0;
    for (int n = 1; n <= static_cast<int>(criteria().size()); ++n) failures += run_one(n) == Outcome::Fail ? 1 : 0;
    return failures ? 1 : 0;
}
