// Command-line front end: simulation, calibration, sensitivity, sweeps, stability and a full report bundle.

#include "behavior_epi/analysis.hpp"
#include "behavior_epi/baseline.hpp"
#include "behavior_epi/calibration.hpp"
#include "behavior_epi/integrator.hpp"
#include "behavior_epi/params_io.hpp"
#include "behavior_epi/scenarios.hpp"
#include "behavior_epi/sensitivity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace behavior_epi;

namespace {

struct Globals {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 20200229;
    unsigned threads = 0;
    json config = json::object();
};

json section(const Globals& g, const char* name)
{
    return g.config.contains(name) ? g.config.at(name) : json::object();
}

ModelParams model_params(const Globals& g, ModelKind kind)
{
    if (kind == ModelKind::TwoGroup) return params_from_json(section(g, "model"), two_group_baseline());
    return params_from_json(section(g, "behavior_free_model"), behavior_free_baseline());
}

InitialConditions initial_conditions(const Globals& g)
{
    const auto j = section(g, "initial");
    InitialConditions ic;
    ic.population = j.value("population", ic.population);
    ic.k = j.value("k", ic.k);
    ic.seed = j.value("seed", ic.seed);
    if (j.contains("seed_compartment")) ic.seed_compartment = parse_compartment(j.at("seed_compartment").get<std::string>());
    make_initial_state(ic);  // validates
    return ic;
}

FitConfig fit_config(const Globals& g, ModelKind kind)
{
    FitConfig c = kind == ModelKind::TwoGroup ? FitConfig::two_group_default() : FitConfig::behavior_free_default();
    c.base = model_params(g, kind);
    c.initial = initial_conditions(g);
    c.seed = g.seed;
    c.threads = g.threads;
    const auto j = section(g, "fit");
    c.starts = j.value("starts", c.starts);
    c.include_initial_guess = j.value("include_initial_guess", c.include_initial_guess);
    if (j.contains("fit_window")) {
        c.fit_start = calendar::parse_day(j.at("fit_window").at(0).get<std::string>());
        c.fit_end = calendar::parse_day(j.at("fit_window").at(1).get<std::string>());
    }
    if (j.contains("validation_window")) {
        c.validation_start = calendar::parse_day(j.at("validation_window").at(0).get<std::string>());
        c.validation_end = calendar::parse_day(j.at("validation_window").at(1).get<std::string>());
    }
    const char* key = kind == ModelKind::TwoGroup ? "two_group_free" : "behavior_free_free";
    if (j.contains(key)) {
        c.free.clear();
        for (const auto& f : j.at(key)) {
            c.free.push_back({f.at("name").get<std::string>(), f.at("lower").get<double>(), f.at("upper").get<double>(),
                              f.at("initial").get<double>()});
        }
    }
    c.validate();
    return c;
}

fs::path out_file(const Globals& g, const std::string& name)
{
    fs::create_directories(g.out_dir);
    return fs::path(g.out_dir) / name;
}

std::ofstream open_out(const fs::path& path)
{
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    return os;
}

void write_json(const fs::path& path, const json& j)
{
    auto os = open_out(path);
    os << j.dump(2) << '\n';
}

json wave_json(const WaveMetrics& w)
{
    json j{{"peak_daily_hosp", w.peak_daily_hosp},
           {"peak_date", calendar::iso_of_day(static_cast<int>(w.peak_day))},
           {"cum_mortality", w.cum_mortality}};
    j["wave_length_days"] = w.wave_length ? json(*w.wave_length) : json(nullptr);
    return j;
}

std::vector<fs::path> run_simulate(const Globals& g, ModelKind kind, std::optional<double> k, int t_end)
{
    const auto p = model_params(g, kind);
    auto ic = initial_conditions(g);
    if (k) ic.k = *k;
    const auto traj = simulate(p, ic, t_end);
    const WaveWindows w;
    json summary{{"model", model_kind_name(kind)}, {"parameters", to_json(p)}, {"k", ic.k},
                 {"R_c_by_phase", json::array()}};
    for (const auto& seg : p.theta.segments()) {
        summary["R_c_by_phase"].push_back(
            {{"start", calendar::iso_of_day(seg.start_day)}, {"R_c", control_reproduction_number(p, seg.value)}});
    }
    if (t_end >= w.wave1_end) summary["wave1"] = wave_json(wave_metrics(traj, w.wave1_start, w.wave1_end));
    if (t_end >= w.wave2_end) summary["wave2"] = wave_json(wave_metrics(traj, w.wave2_start, w.wave2_end));
    const auto csv = out_file(g, "trajectory.csv");
    auto os = open_out(csv);
    write_trajectory_csv(traj, os);
    const auto js = out_file(g, "simulation.json");
    write_json(js, summary);
    return {csv, js};
}

json fit_json(const FitResult& r)
{
    json j{{"model", model_kind_name(r.model)}, {"sse", r.sse}, {"residuals", r.n_residuals},
           {"converged", r.converged}, {"best_start", r.best_start}, {"intervals", "approximate"}};
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        auto bound = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        j["parameters"][r.names[i]] = {{"value", r.values(k)}, {"ci95", {bound(r.ci_lower(k)), bound(r.ci_upper(k))}}};
    }
    for (const auto& s : r.starts) {
        j["starts"].push_back({{"initial_sse", s.initial_sse},
                               {"final_sse", s.final_sse},
                               {"converged", s.converged},
                               {"method", s.method},
                               {"final", std::vector<double>(s.final.data(), s.final.data() + s.final.size())}});
    }
    j["fitted_parameters"] = to_json(r.params);
    return j;
}

void write_series_csv(const fs::path& path, const FitResult& r, const HospitalizationSeries& series, int end)
{
    const auto traj = simulate(r.params, r.initial, end);
    auto os = open_out(path);
    os << "day,date,observed_raw,observed_avg7,predicted_I_h\n";
    os.precision(10);
    for (int d = 0; d <= end; ++d) {
        os << d << ',' << calendar::iso_of_day(d) << ',';
        if (d >= series.first_day && d <= series.last_day()) os << series.raw[static_cast<std::size_t>(d - series.first_day)];
        os << ',';
        if (series.has_avg(d)) os << series.avg(d);
        os << ',' << traj.hospitalized(static_cast<std::size_t>(d)) << '\n';
    }
}

struct FitOutputs {
    FitResult result;
    std::vector<fs::path> files;
};

FitOutputs run_fit(const Globals& g, ModelKind kind, const HospitalizationSeries& series, const std::string& prefix)
{
    const auto cfg = fit_config(g, kind);
    FitOutputs out{fit(cfg, series), {}};
    const auto js = out_file(g, prefix + "fit.json");
    write_json(js, fit_json(out.result));
    const auto csv = out_file(g, prefix + "fit_series.csv");
    write_series_csv(csv, out.result, series, cfg.fit_end);
    out.files = {js, csv};
    return out;
}

std::vector<fs::path> run_validate(const Globals& g, const FitResult& r, const HospitalizationSeries& series,
                                   const std::string& prefix)
{
    const auto cfg = fit_config(g, r.model);
    const auto rep = cross_validate(r, series, cfg.validation_start, cfg.validation_end);
    json j{{"model", model_kind_name(r.model)},
           {"window", {calendar::iso_of_day(rep.start), calendar::iso_of_day(rep.end)}},
           {"relative_error_end", rep.relative_error_end},
           {"mape", rep.mape},
           {"rmse", rep.rmse},
           {"second_wave_peak", rep.second_wave_peak},
           {"predicted_peak", rep.predicted_peak},
           {"predicted_peak_date", calendar::iso_of_day(rep.predicted_peak_day)}};
    const auto js = out_file(g, prefix + "validation.json");
    write_json(js, j);
    const auto csv = out_file(g, prefix + "validation_series.csv");
    write_series_csv(csv, r, series, cfg.validation_end);
    return {js, csv};
}

std::vector<fs::path> run_prcc(const Globals& g, std::optional<int> samples, bool uncapped)
{
    const auto j = section(g, "sensitivity");
    SensitivityConfig cfg;
    cfg.base = model_params(g, ModelKind::TwoGroup);
    cfg.initial = initial_conditions(g);
    cfg.table = default_range_table(cfg.base, j.value("spread", 0.4));
    cfg.samples = samples.value_or(j.value("samples", cfg.samples));
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.cap_theta = !uncapped && j.value("cap_theta", true);
    if (j.contains("snapshots")) {
        cfg.snapshots.clear();
        for (const auto& d : j.at("snapshots")) cfg.snapshots.push_back(calendar::parse_day(d.get<std::string>()));
    }
    const auto run = run_sensitivity(cfg);
    const auto prcc_path = out_file(g, "prcc.csv");
    auto os = open_out(prcc_path);
    write_prcc_csv(run.results, os);
    const auto samples_path = out_file(g, "samples.csv");
    auto ss = open_out(samples_path);
    write_samples_csv(run, cfg, ss);
    std::cerr << "prcc: " << run.samples.rows() << " samples, " << run.excluded << " excluded\n";
    return {prcc_path, samples_path};
}

SweepAxis parse_axis(const std::string& text)
{
    // name:min:max:steps
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
    if (parts.size() != 4) throw std::invalid_argument("axis must be name:min:max:steps, got '" + text + "'");
    return {parts[0], std::stod(parts[1]), std::stod(parts[2]), std::stoi(parts[3])};
}

fs::path run_sweep(const Globals& g, const std::vector<SweepAxis>& axes, const std::vector<std::string>& metrics,
                   const std::map<std::string, double>& overrides, const std::string& name)
{
    SweepSpec spec;
    spec.axes = axes;
    spec.base = model_params(g, ModelKind::TwoGroup);
    spec.initial = initial_conditions(g);
    spec.overrides = overrides;
    spec.threads = g.threads;
    if (!metrics.empty()) {
        spec.metrics.clear();
        for (const auto& m : metrics) spec.metrics.push_back(parse_metric(m));
    }
    const auto res = sweep(spec);
    const auto path = out_file(g, name);
    auto os = open_out(path);
    write_sweep_csv(res, os);
    return path;
}

fs::path run_lockdown(const Globals& g, const SweepAxis& start, const SweepAxis& eff, const std::string& name)
{
    std::vector<int> days;
    for (double d : start.values()) days.push_back(static_cast<int>(std::lround(d)));
    const auto cells = lockdown_sweep(days, eff.values(), model_params(g, ModelKind::TwoGroup), initial_conditions(g),
                                      {}, g.threads);
    const auto path = out_file(g, name);
    auto os = open_out(path);
    write_lockdown_csv(cells, os);
    return path;
}

std::vector<fs::path> run_stability(const Globals& g, const SweepAxis& gamma, const SweepAxis& rc)
{
    const auto p = model_params(g, ModelKind::TwoGroup);
    const auto v = g1dfe_stability(p, 0.0, initial_conditions(g).population);
    auto cond = [](const StabilityVerdict::Condition& c) { return json{{"holds", c.holds}, {"value", c.lhs}}; };
    json j{{"equilibrium", "G1DFE"},
           {"condition_1_c12_minus_c21", cond(v.c1)},
           {"condition_2", cond(v.c2)},
           {"condition_3", cond(v.c3)},
           {"condition_4_R_c", cond(v.c4)},
           {"disease_block_metzler_stable", v.metzler_stable},
           {"max_real_eigenvalue", v.eigen_max_real_part},
           {"eigen_classification", stability_name(v.eigen_classification)},
           {"verdict", stability_name(v.verdict)},
           {"consistent", v.consistent()},
           {"influence_ratio", influence_ratio(p)}};
    const auto js = out_file(g, "stability.json");
    write_json(js, j);
    const auto csv = out_file(g, "stability_region.csv");
    auto os = open_out(csv);
    write_region_csv(stability_region(gamma.values(), rc.values()), os);
    return {js, csv};
}

std::string rel(const Globals& g, const fs::path& p)
{
    return fs::relative(p, g.out_dir).generic_string();
}

void run_report(const Globals& g, const std::string& data_path, bool quick)
{
    json manifest{{"seed", g.seed}, {"config", g.config}, {"outputs", json::object()}, {"partial", false}};
    auto record = [&](const std::string& key, const std::string& what, const std::vector<fs::path>& files) {
        json list = json::array();
        for (const auto& f : files) list.push_back(rel(g, f));
        manifest["outputs"][key] = {{"description", what}, {"files", list}};
    };
    auto stage = [&](const std::string& key, const std::function<void()>& body) {
        try {
            body();
        }
        catch (const std::exception& e) {
            manifest["partial"] = true;
            manifest["errors"][key] = e.what();
            std::cerr << "report: stage " << key << " failed: " << e.what() << '\n';
        }
    };
    stage("baseline_simulation", [&] {
        record("baseline_simulation", "two-group baseline trajectory over both waves",
               run_simulate(g, ModelKind::TwoGroup, std::nullopt, calendar::kValidationEnd));
    });
    if (!data_path.empty()) {
        stage("calibration", [&] {
            const auto series = load_series(data_path);
            for (auto kind : {ModelKind::TwoGroup, ModelKind::BehaviorFree}) {
                const std::string prefix = std::string(model_kind_name(kind)) + "_";
                auto f = run_fit(g, kind, series, prefix);
                record(prefix + "fit", "fitted parameters with approximate 95% intervals and the first-wave fit", f.files);
                record(prefix + "validation", "cross-validation over the second-wave window",
                       run_validate(g, f.result, series, prefix));
            }
        });
    }
    else {
        manifest["skipped"]["calibration"] = "no hospitalization series given (--data)";
    }
    stage("reproduction_numbers", [&] {
        json j = json::array();
        const auto base = epidemiological_baseline();
        for (auto t : kBehaviorFreeTheta) j.push_back({{"theta", t}, {"R_c", control_reproduction_number(base, t)}});
        const auto path = out_file(g, "reproduction_numbers.json");
        write_json(path, j);
        record("reproduction_numbers", "control reproduction number of each behavior-free phase", {path});
    });
    stage("stability", [&] {
        record("stability", "G1DFE verdict and (Gamma, R_c) equilibrium-class grid",
               run_stability(g, {"gamma", 0.1, 3.0, quick ? 10 : 59}, {"R_c", 0.1, 3.0, quick ? 10 : 59}));
    });
    stage("sensitivity", [&] {
        record("sensitivity", "PRCCs of the 18 parameters for both responses at both snapshots",
               run_prcc(g, quick ? std::optional<int>(100) : std::nullopt, false));
    });
    const int n = quick ? 5 : 40;
    stage("sweep_behavior_exponents", [&] {
        record("sweep_behavior_exponents", "wave metrics over the behavior exponents a1 x a2",
               {run_sweep(g, {{"a1", 0.0, 12000.0, n}, {"a2", 0.0, 4000.0, n}}, {}, {}, "sweep_a1_a2.csv")});
    });
    stage("sweep_influence_rates", [&] {
        record("sweep_influence_rates", "wave metrics over mean influence transition times 1/c_b12 x 1/c_b21",
               {run_sweep(g, {{"inv_c_b12", 1.0, 90.0, n}, {"inv_c_b21", 1.0, 90.0, n}}, {}, {}, "sweep_influence.csv")});
    });
    stage("sweep_initial_split", [&] {
        record("sweep_initial_split", "wave metrics over the initial risk-averse share k",
               {run_sweep(g, {{"k", 0.0, 1.0, 6}}, {}, {}, "sweep_k.csv")});
    });
    stage("lockdown_sweep", [&] {
        record("lockdown_sweep", "first-wave cumulative mortality over lockdown start day x efficacy",
               {run_lockdown(g, {"start_day", 3.0, 35.0, quick ? 5 : 33}, {"efficacy", 0.1, 0.9, quick ? 5 : 33},
                             "lockdown.csv")});
    });
    write_json(out_file(g, "manifest.json"), manifest);
    if (manifest["partial"].get<bool>()) throw std::runtime_error("report incomplete; see manifest.json");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Behavior-stratified epidemic model toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "JSON configuration document")->check(CLI::ExistingFile);
    app.add_option("--out", g.out_dir, "output directory");
    app.add_option("--seed", g.seed, "seed for every random choice");
    app.add_option("--threads", g.threads, "worker threads (0 = hardware concurrency)");

    std::string model = "two-group";
    auto add_model = [&](CLI::App* c) {
        c->add_option("--model", model, "two-group or behavior-free")->check(CLI::IsMember({"two-group", "behavior-free"}));
    };

    auto* sim = app.add_subcommand("simulate", "integrate the model and write the daily trajectory");
    add_model(sim);
    std::optional<double> k;
    int t_end = calendar::kValidationEnd;
    sim->add_option("--k", k, "initial share of susceptibles in Group 1");
    sim->add_option("--days", t_end, "horizon in days since the epoch");

    std::string data;
    auto* fit_cmd = app.add_subcommand("fit", "fit the free parameters to a hospitalization series");
    add_model(fit_cmd);
    fit_cmd->add_option("--data", data, "hospitalization CSV")->required()->check(CLI::ExistingFile);

    auto* val_cmd = app.add_subcommand("validate", "fit, then continue the fitted model through the validation window");
    add_model(val_cmd);
    val_cmd->add_option("--data", data, "hospitalization CSV")->required()->check(CLI::ExistingFile);

    std::optional<int> samples;
    bool uncapped = false;
    auto* prcc_cmd = app.add_subcommand("prcc", "Latin hypercube sampling and partial rank correlation coefficients");
    prcc_cmd->add_option("--samples", samples, "number of samples");
    prcc_cmd->add_flag("--uncapped", uncapped, "do not cap sampled theta values at 1");

    std::vector<std::string> axes, metrics, fixed;
    auto* sweep_cmd = app.add_subcommand("sweep", "wave metrics over a one- or two-parameter grid");
    sweep_cmd->add_option("--axis", axes, "name:min:max:steps (one or two)")->required();
    sweep_cmd->add_option("--metric", metrics, "metric name (repeatable; default all)");
    sweep_cmd->add_option("--set", fixed, "name=value override (repeatable)");

    std::string start_axis = "3:35:33", eff_axis = "0.1:0.9:33";
    auto* lock_cmd = app.add_subcommand("lockdown-sweep", "first-wave mortality over lockdown start day x efficacy");
    lock_cmd->add_option("--start", start_axis, "min:max:steps in days since the epoch");
    lock_cmd->add_option("--efficacy", eff_axis, "min:max:steps");

    std::string gamma_axis = "0.1:3:59", rc_axis = "0.1:3:59";
    auto* stab_cmd = app.add_subcommand("stability", "G1DFE stability verdict and equilibrium-class region grid");
    stab_cmd->add_option("--gamma", gamma_axis, "min:max:steps");
    stab_cmd->add_option("--rc", rc_axis, "min:max:steps");

    bool quick = false;
    auto* report_cmd = app.add_subcommand("report", "run every stage and write a manifest");
    report_cmd->add_option("--data", data, "hospitalization CSV (optional)")->check(CLI::ExistingFile);
    report_cmd->add_flag("--quick", quick, "coarse grids and 100 PRCC samples");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!g.config_path.empty()) {
            std::ifstream in(g.config_path);
            g.config = json::parse(in);
        }
        const auto kind = parse_model_kind(model);
        auto axis = [](const std::string& name, const std::string& spec) { return parse_axis(name + ":" + spec); };
        std::vector<fs::path> written;
        if (*sim) written = run_simulate(g, kind, k, t_end);
        if (*fit_cmd) written = run_fit(g, kind, load_series(data), "").files;
        if (*val_cmd) {
            const auto series = load_series(data);
            auto f = run_fit(g, kind, series, "");
            written = f.files;
            for (auto& p : run_validate(g, f.result, series, "")) written.push_back(p);
        }
        if (*prcc_cmd) written = run_prcc(g, samples, uncapped);
        if (*sweep_cmd) {
            std::vector<SweepAxis> parsed;
            for (const auto& a : axes) parsed.push_back(parse_axis(a));
            std::map<std::string, double> overrides;
            for (const auto& f : fixed) {
                const auto eq = f.find('=');
                if (eq == std::string::npos) throw std::invalid_argument("--set expects name=value");
                overrides[f.substr(0, eq)] = std::stod(f.substr(eq + 1));
            }
            written = {run_sweep(g, parsed, metrics, overrides, "sweep.csv")};
        }
        if (*lock_cmd) written = {run_lockdown(g, axis("start_day", start_axis), axis("efficacy", eff_axis), "lockdown.csv")};
        if (*stab_cmd) written = run_stability(g, axis("gamma", gamma_axis), axis("R_c", rc_axis));
        if (*report_cmd) {
            run_report(g, data, quick);
            written = {out_file(g, "manifest.json")};
        }
        for (const auto& p : written) std::cout << p.string() << '\n';
    }
    catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
