#ifndef BEHAVIOR_EPI_CALIBRATION_HPP
#define BEHAVIOR_EPI_CALIBRATION_HPP

#include "behavior_epi/baseline.hpp"
#include "behavior_epi/calendar.hpp"
#include "behavior_epi/integrator.hpp"
#include "behavior_epi/lhs.hpp"
#include "behavior_epi/optimize.hpp"
#include "behavior_epi/parallel.hpp"
#include "behavior_epi/parameters.hpp"
#include "behavior_epi/series.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <algorithm>
#include <string_view>
#include <tuple>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace behavior_epi {

enum class ModelKind { TwoGroup, BehaviorFree };

inline std::string_view model_kind_name(ModelKind k)
{
    return k == ModelKind::TwoGroup ? "two-group" : "behavior-free";
}

inline ModelKind parse_model_kind(std::string_view s)
{
    if (s == "two-group") return ModelKind::TwoGroup;
    if (s == "behavior-free") return ModelKind::BehaviorFree;
    throw std::invalid_argument("unknown model '" + std::string(s) + "' (expected two-group or behavior-free)");
}

struct FreeParameter {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;
    double initial = 0.5;
};

/// (day, observed value) pairs the model's total I_h is fitted to.
using Targets = std::vector<std::pair<int, double>>;

struct FitConfig {
    ModelKind model = ModelKind::TwoGroup;
    ModelParams base = two_group_baseline();   ///< values of the fixed parameters
    std::vector<FreeParameter> free;
    int fit_start = 0;
    int fit_end = calendar::kFitEnd;
    int validation_start = calendar::kValidationStart;
    int validation_end = calendar::kValidationEnd;
    InitialConditions initial;
    int starts = 8;                     ///< Latin-hypercube multi-starts
    bool include_initial_guess = true;  ///< additionally start from the configured initial guesses
    std::uint64_t seed = 20200229;
    unsigned threads = 0;
    BfgsOptions bfgs;
    NelderMeadOptions simplex;

    int groups() const
    {
        return model == ModelKind::TwoGroup ? 2 : 1;
    }

    void validate() const
    {
        if (free.empty()) throw std::invalid_argument("fit config: no free parameters");
        for (const auto& f : free) {
            if (!is_parameter(f.name)) throw std::invalid_argument("fit config: unknown parameter " + f.name);
            if (!(f.upper > f.lower)) throw std::invalid_argument("fit config: empty bounds for " + f.name);
            if (!(f.initial >= f.lower && f.initial <= f.upper)) {
                throw std::invalid_argument("fit config: initial guess outside bounds for " + f.name);
            }
        }
        if (!(fit_end > fit_start)) throw std::invalid_argument("fit config: empty fit window");
        if (!(validation_end >= validation_start)) throw std::invalid_argument("fit config: empty validation window");
        if (starts < 0) throw std::invalid_argument("fit config: negative number of starts");
        if (base.groups() != groups()) throw std::invalid_argument("fit config: base parameters have the wrong n");
    }

    /// The eight behavior and NPI parameters of the two-group model.
    static FitConfig two_group_default()
    {
        FitConfig c;
        c.model = ModelKind::TwoGroup;
        c.base = two_group_baseline();
        c.free = {{"a1", 0.0, 20000.0, 8000.0},     {"a2", 0.0, 10000.0, 2800.0},
                  {"c_b12", 1e-3, 1.0, 1.0 / 30.0}, {"c_b21", 1e-3, 1.0, 1.0 / 90.0},
                  {"theta_l1", 0.0, 1.0, 0.75},     {"theta_l2", 0.0, 1.0, 0.01},
                  {"theta_l3", 0.0, 1.0, 0.15},     {"theta_l4", 0.0, 1.0, 0.3}};
        return c;
    }

    /// The four NPI multipliers of the behavior-free model.
    static FitConfig behavior_free_default()
    {
        FitConfig c;
        c.model = ModelKind::BehaviorFree;
        c.base = behavior_free_baseline();
        c.free = {{"theta_l1", 0.0, 1.0, 0.45},
                  {"theta_l2", 0.0, 1.0, 0.02},
                  {"theta_l3", 0.0, 1.0, 0.2},
                  {"theta_l4", 0.0, 1.0, 0.25}};
        return c;
    }
};

/// Integrates the configured model from the epoch to @p t_end with daily output.
inline Trajectory simulate(const ModelParams& p, const InitialConditions& ic, double t_end,
                           const IntegratorOptions& opts = {})
{
    return integrate(p, make_initial_state(ic, p.groups()), t_end, 1.0, opts);
}

/**
 * @brief Model total I_h minus the target value on each target day.
 */
inline Eigen::VectorXd residuals(const ModelParams& p, const Targets& targets, const InitialConditions& ic)
{
    if (targets.empty()) throw std::invalid_argument("residuals: no target points");
    int last = 0;
    for (const auto& t : targets) {
        if (t.first < 0) throw std::invalid_argument("residuals: target day before the epoch");
        last = std::max(last, t.first);
    }
    const auto traj = simulate(p, ic, std::max(last, 1));
    Eigen::VectorXd r(static_cast<Eigen::Index>(targets.size()));
    for (std::size_t i = 0; i < targets.size(); ++i) {
        r(static_cast<Eigen::Index>(i)) = traj.hospitalized(static_cast<std::size_t>(targets[i].first)) - targets[i].second;
    }
    return r;
}

/// Residuals against the 7-day average of @p series on the days of [start, end] where it is defined.
inline Eigen::VectorXd residuals(const ModelParams& p, const HospitalizationSeries& series, int start, int end,
                                 const InitialConditions& ic)
{
    return residuals(p, series.targets(start, end), ic);
}

/// Sum of squared residuals, or +infinity if the candidate cannot be integrated.
inline double sse(const ModelParams& p, const Targets& targets, const InitialConditions& ic)
{
    try {
        return residuals(p, targets, ic).squaredNorm();
    }
    catch (const std::exception&) {
        return std::numeric_limits<double>::infinity();
    }
}

struct StartRecord {
    Eigen::VectorXd initial;
    double initial_sse = 0.0;
    Eigen::VectorXd final;
    double final_sse = 0.0;
    bool converged = false;
    std::string method;
};

struct FitResult {
    ModelKind model = ModelKind::TwoGroup;
    std::vector<std::string> names;
    Eigen::VectorXd values;
    Eigen::VectorXd ci_lower;      ///< approximate 95% interval (Gauss–Newton curvature)
    Eigen::VectorXd ci_upper;
    bool intervals_approximate = true;
    double sse = 0.0;
    int n_residuals = 0;
    ModelParams params;
    InitialConditions initial;
    std::vector<StartRecord> starts;
    int best_start = -1;
    bool converged = false;
};

inline ModelParams apply_free(const ModelParams& base, const std::vector<FreeParameter>& free, const Eigen::VectorXd& x)
{
    ModelParams p = base;
    for (std::size_t i = 0; i < free.size(); ++i) set_parameter(p, free[i].name, x(static_cast<Eigen::Index>(i)));
    return p;
}

/**
 * @brief Approximate 95% intervals from the finite-difference Gauss–Newton Hessian.
 *
 * cov = s^2 (J^T J)^-1 with s^2 = SSE / (m - p). Parameters the residuals do not depend on get infinite intervals.
 */
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> gauss_newton_intervals(const FitConfig& cfg, const Targets& targets,
                                                                          const Eigen::VectorXd& x, double sse_value)
{
    const Eigen::Index p = x.size();
    const Eigen::Index m = static_cast<Eigen::Index>(targets.size());
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(p, -inf), hi = Eigen::VectorXd::Constant(p, inf);
    if (m <= p) return {lo, hi};
    Eigen::MatrixXd jac(m, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& f = cfg.free[static_cast<std::size_t>(j)];
        const double h = 1e-5 * std::max(std::abs(x(j)), 1e-3 * (f.upper - f.lower));
        Eigen::VectorXd xp = x, xm = x;
        xp(j) = std::min(x(j) + h, f.upper);
        xm(j) = std::max(x(j) - h, f.lower);
        try {
            jac.col(j) = (residuals(apply_free(cfg.base, cfg.free, xp), targets, cfg.initial) -
                          residuals(apply_free(cfg.base, cfg.free, xm), targets, cfg.initial)) /
                         (xp(j) - xm(j));
        }
        catch (const std::exception&) {
            return {lo, hi};
        }
    }
    const double max_norm = jac.colwise().norm().maxCoeff();
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (jac.col(j).norm() > 1e-12 * std::max(max_norm, 1e-300)) active.push_back(j);
    }
    if (active.empty()) return {lo, hi};
    Eigen::MatrixXd ja(m, static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) ja.col(static_cast<Eigen::Index>(k)) = jac.col(active[k]);
    const double s2 = sse_value / static_cast<double>(m - static_cast<Eigen::Index>(active.size()));
    const Eigen::MatrixXd cov = s2 * (ja.transpose() * ja).completeOrthogonalDecomposition().pseudoInverse();
    for (std::size_t k = 0; k < active.size(); ++k) {
        const double var = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
        if (!(var >= 0.0) || !std::isfinite(var)) continue;
        const double half = 1.96 * std::sqrt(var);
        lo(active[k]) = x(active[k]) - half;
        hi(active[k]) = x(active[k]) + half;
    }
    return {lo, hi};
}

/**
 * @brief Multi-start bounded least-squares fit of the free parameters to @p targets.
 *
 * Every start runs BFGS in the sine-transformed coordinates; starts that do not converge continue with
 * Nelder–Mead. The best start wins (lowest index on ties), so the result does not depend on the thread count.
 */
inline FitResult fit(const FitConfig& cfg, const Targets& targets)
{
    cfg.validate();
    if (targets.empty()) throw std::invalid_argument("fit: no target points in the fit window");
    const Eigen::Index p = static_cast<Eigen::Index>(cfg.free.size());
    Eigen::VectorXd lower(p), upper(p), guess(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        lower(i) = cfg.free[static_cast<std::size_t>(i)].lower;
        upper(i) = cfg.free[static_cast<std::size_t>(i)].upper;
        guess(i) = cfg.free[static_cast<std::size_t>(i)].initial;
    }
    const BoxTransform box(lower, upper);
    auto loss_x = [&](const Eigen::VectorXd& x) {
        try {
            return sse(apply_free(cfg.base, cfg.free, x), targets, cfg.initial);
        }
        catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };
    const Objective loss_z = [&](const Eigen::VectorXd& z) { return loss_x(box.to_external(z)); };

    std::vector<Eigen::VectorXd> initial_points;
    if (cfg.include_initial_guess) initial_points.push_back(guess);
    if (cfg.starts > 0) {
        std::vector<std::pair<double, double>> ranges;
        for (Eigen::Index i = 0; i < p; ++i) ranges.emplace_back(lower(i), upper(i));
        const Eigen::MatrixXd lhs = latin_hypercube(ranges, std::max(cfg.starts, 2), cfg.seed);
        for (int s = 0; s < cfg.starts; ++s) initial_points.push_back(lhs.row(s).transpose());
    }
    if (initial_points.empty()) throw std::invalid_argument("fit: no starting points");

    std::vector<StartRecord> records(initial_points.size());
    parallel_for(initial_points.size(), cfg.threads, [&](std::size_t s) {
        StartRecord rec;
        rec.initial = initial_points[s];
        rec.initial_sse = loss_x(rec.initial);
        OptimResult best = bfgs(loss_z, box.to_internal(rec.initial), cfg.bfgs);
        rec.method = "bfgs";
        if (!best.converged || !std::isfinite(best.f)) {
            const Eigen::VectorXd z0 = std::isfinite(best.f) ? best.x : box.to_internal(rec.initial);
            OptimResult nm = nelder_mead(loss_z, z0, cfg.simplex);
            if (nm.f <= best.f || !std::isfinite(best.f)) {
                nm.converged = nm.converged && std::isfinite(nm.f);
                best = nm;
                rec.method = "bfgs+nelder-mead";
            }
        }
        rec.final = box.to_external(best.x);
        rec.final_sse = best.f;
        rec.converged = best.converged && std::isfinite(best.f);
        // never report a worse point than the starting guess
        if (!(rec.final_sse <= rec.initial_sse)) {
            rec.final = rec.initial;
            rec.final_sse = rec.initial_sse;
        }
        records[s] = std::move(rec);
    });

    FitResult res;
    res.model = cfg.model;
    res.initial = cfg.initial;
    for (const auto& f : cfg.free) res.names.push_back(f.name);
    for (std::size_t s = 0; s < records.size(); ++s) {
        if (std::isfinite(records[s].final_sse) &&
            (res.best_start < 0 || records[s].final_sse < records[static_cast<std::size_t>(res.best_start)].final_sse)) {
            res.best_start = static_cast<int>(s);
        }
    }
    if (res.best_start < 0) throw std::runtime_error("fit: every start failed");
    const auto& best = records[static_cast<std::size_t>(res.best_start)];
    res.values = best.final;
    res.sse = best.final_sse;
    res.converged = best.converged;
    res.n_residuals = static_cast<int>(targets.size());
    res.params = apply_free(cfg.base, cfg.free, res.values);
    std::tie(res.ci_lower, res.ci_upper) = gauss_newton_intervals(cfg, targets, res.values, res.sse);
    res.starts = std::move(records);
    return res;
}

/// Fits against the 7-day average of @p series over the configured fit window.
inline FitResult fit(const FitConfig& cfg, const HospitalizationSeries& series)
{
    return fit(cfg, series.targets(cfg.fit_start, cfg.fit_end));
}

struct ValidationRow {
    int day = 0;
    double observed = 0.0;
    double predicted = 0.0;
};

struct ValidationReport {
    int start = 0;
    int end = 0;
    double relative_error_end = 0.0;  ///< (predicted - observed) / observed on the last day with data
    double mape = 0.0;                ///< mean absolute percentage error over days with observed > 0
    double rmse = 0.0;
    bool second_wave_peak = false;    ///< the prediction has an interior maximum in the window
    double predicted_peak = 0.0;
    int predicted_peak_day = 0;
    std::vector<ValidationRow> rows;
};

/**
 * @brief Continues the fitted model through [start, end] and compares it with the target values.
 */
inline ValidationReport cross_validate(const FitResult& fit_result, const Targets& targets, int start, int end)
{
    if (!(end >= start)) throw std::invalid_argument("cross_validate: empty window");
    const auto traj = simulate(fit_result.params, fit_result.initial, std::max(end, 1));
    ValidationReport rep;
    rep.start = start;
    rep.end = end;
    double ape = 0.0, sq = 0.0;
    int n_ape = 0;
    for (const auto& [day, obs] : targets) {
        if (day < start || day > end) continue;
        const double pred = traj.hospitalized(static_cast<std::size_t>(day));
        rep.rows.push_back({day, obs, pred});
        sq += (pred - obs) * (pred - obs);
        if (obs > 0.0) {
            ape += std::abs(pred - obs) / obs;
            ++n_ape;
        }
    }
    if (rep.rows.empty()) throw std::invalid_argument("cross_validate: no observations in the window");
    rep.mape = n_ape ? ape / n_ape : std::numeric_limits<double>::quiet_NaN();
    rep.rmse = std::sqrt(sq / static_cast<double>(rep.rows.size()));
    const auto& last = rep.rows.back();
    rep.relative_error_end = last.observed > 0.0 ? (last.predicted - last.observed) / last.observed
                                                 : std::numeric_limits<double>::quiet_NaN();
    int peak_day = start;
    for (int d = start; d <= end; ++d) {
        const double h = traj.hospitalized(static_cast<std::size_t>(d));
        if (h > rep.predicted_peak) {
            rep.predicted_peak = h;
            peak_day = d;
        }
    }
    rep.predicted_peak_day = peak_day;
    rep.second_wave_peak = rep.predicted_peak > 0.0 && peak_day > start && peak_day < end;
    return rep;
}

inline ValidationReport cross_validate(const FitResult& fit_result, const HospitalizationSeries& series, int start,
                                       int end)
{
    return cross_validate(fit_result, series.targets(start, end), start, end);
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_CALIBRATION_HPP
