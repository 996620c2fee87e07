#ifndef BEHAVIOR_EPI_SCENARIOS_HPP
#define BEHAVIOR_EPI_SCENARIOS_HPP

#include "behavior_epi/baseline.hpp"
#include "behavior_epi/calendar.hpp"
#include "behavior_epi/integrator.hpp"
#include "behavior_epi/parallel.hpp"
#include "behavior_epi/parameters.hpp"

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace behavior_epi {

enum class Metric { PeakHospWave1, PeakHospWave2, CumMortWave1, CumMortWave2, Wave2Length };

inline constexpr std::array<Metric, 5> kAllMetrics{Metric::PeakHospWave1, Metric::PeakHospWave2, Metric::CumMortWave1,
                                                   Metric::CumMortWave2, Metric::Wave2Length};

inline std::string_view metric_name(Metric m)
{
    switch (m) {
    case Metric::PeakHospWave1: return "peak_hosp_wave1";
    case Metric::PeakHospWave2: return "peak_hosp_wave2";
    case Metric::CumMortWave1: return "cum_mort_wave1";
    case Metric::CumMortWave2: return "cum_mort_wave2";
    case Metric::Wave2Length: return "wave2_length";
    }
    return "?";
}

inline Metric parse_metric(std::string_view s)
{
    for (auto m : kAllMetrics) {
        if (metric_name(m) == s) return m;
    }
    throw std::invalid_argument("unknown metric '" + std::string(s) + "'");
}

/**
 * @brief One swept quantity: a parameter name, "k" (initial Group 1 share), or inv_c_b12 / inv_c_b21
 * (mean influence transition times, days).
 */
struct SweepAxis {
    std::string name;
    double min = 0.0;
    double max = 1.0;
    int steps = 2;

    std::vector<double> values() const
    {
        if (steps < 1) throw std::invalid_argument("sweep axis " + name + ": steps must be >= 1");
        if (steps == 1) return {min};
        if (!(max > min)) throw std::invalid_argument("sweep axis " + name + ": degenerate grid");
        std::vector<double> v(static_cast<std::size_t>(steps));
        for (int i = 0; i < steps; ++i) v[static_cast<std::size_t>(i)] = min + (max - min) * i / (steps - 1);
        return v;
    }
};

struct WaveWindows {
    double wave1_start = 0.0;
    double wave1_end = calendar::kFitEnd;
    double wave2_start = calendar::kValidationStart;
    double wave2_end = calendar::kValidationEnd;
};

struct SweepSpec {
    std::vector<SweepAxis> axes;                 ///< one or two axes
    ModelParams base = two_group_baseline();
    std::map<std::string, double> overrides;     ///< fixed-parameter overrides (same names as axes)
    InitialConditions initial;
    std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    WaveWindows windows;
    unsigned threads = 0;
};

/// Applies a named sweep value to parameters and initial conditions.
inline void apply_sweep_value(ModelParams& p, InitialConditions& ic, std::string_view name, double value)
{
    if (name == "k") {
        if (!(value >= 0.0 && value <= 1.0)) throw std::invalid_argument("k must lie in [0,1]");
        ic.k = value;
    }
    else if (name == "inv_c_b12" || name == "inv_c_b21") {
        if (!(value > 0.0)) throw std::invalid_argument("mean transition time must be positive");
        set_parameter(p, name.substr(4), 1.0 / value);
    }
    else {
        set_parameter(p, name, value);
    }
}

inline bool is_sweepable(std::string_view name)
{
    return name == "k" || name == "inv_c_b12" || name == "inv_c_b21" || is_parameter(name);
}

inline std::map<Metric, std::optional<double>> compute_metrics(const Trajectory& traj, const WaveWindows& w,
                                                               const std::vector<Metric>& metrics)
{
    const auto m1 = wave_metrics(traj, w.wave1_start, w.wave1_end);
    const auto m2 = wave_metrics(traj, w.wave2_start, w.wave2_end);
    std::map<Metric, std::optional<double>> out;
    for (auto m : metrics) {
        switch (m) {
        case Metric::PeakHospWave1: out[m] = m1.peak_daily_hosp; break;
        case Metric::PeakHospWave2: out[m] = m2.peak_daily_hosp; break;
        case Metric::CumMortWave1: out[m] = m1.cum_mortality; break;
        case Metric::CumMortWave2: out[m] = m2.cum_mortality; break;
        case Metric::Wave2Length: out[m] = m2.wave_length; break;
        }
    }
    return out;
}

struct SweepCell {
    std::vector<double> coords;
    bool ok = false;
    std::string error;
    std::map<Metric, std::optional<double>> values;
};

struct SweepResult {
    std::vector<std::string> axes;
    std::vector<Metric> metrics;
    std::vector<SweepCell> cells;  ///< first axis varies slowest

    std::size_t inner = 1;         ///< number of values of the second axis (1 for one-axis sweeps)

    const SweepCell& at(std::size_t i, std::size_t j = 0) const
    {
        return cells.at(i * inner + j);
    }
};

/**
 * @brief Integrates the model over the two-wave horizon for every grid cell and extracts the requested metrics.
 *
 * Cells are independent; failures are recorded per cell as missing values.
 */
inline SweepResult sweep(const SweepSpec& spec)
{
    if (spec.axes.empty() || spec.axes.size() > 2) throw std::invalid_argument("sweep: one or two axes required");
    for (const auto& a : spec.axes) {
        if (!is_sweepable(a.name)) throw std::invalid_argument("sweep: unknown axis '" + a.name + "'");
    }
    ModelParams base = spec.base;
    InitialConditions ic = spec.initial;
    for (const auto& [name, v] : spec.overrides) apply_sweep_value(base, ic, name, v);

    const auto first = spec.axes[0].values();
    const auto second = spec.axes.size() > 1 ? spec.axes[1].values() : std::vector<double>{};
    const std::size_t inner = second.empty() ? 1 : second.size();
    SweepResult res;
    for (const auto& a : spec.axes) res.axes.push_back(a.name);
    res.metrics = spec.metrics;
    res.inner = inner;
    res.cells.resize(first.size() * inner);
    const double horizon = std::max(spec.windows.wave1_end, spec.windows.wave2_end);
    parallel_for(res.cells.size(), spec.threads, [&](std::size_t idx) {
        SweepCell cell;
        cell.coords.push_back(first[idx / inner]);
        if (!second.empty()) cell.coords.push_back(second[idx % inner]);
        try {
            ModelParams p = base;
            InitialConditions cic = ic;
            for (std::size_t a = 0; a < cell.coords.size(); ++a) {
                apply_sweep_value(p, cic, spec.axes[a].name, cell.coords[a]);
            }
            const auto traj = integrate(p, make_initial_state(cic, p.groups()), horizon);
            cell.values = compute_metrics(traj, spec.windows, spec.metrics);
            cell.ok = true;
        }
        catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
            for (auto m : spec.metrics) cell.values[m] = std::nullopt;
        }
        res.cells[idx] = std::move(cell);
    });
    return res;
}

inline void write_sweep_csv(const SweepResult& r, std::ostream& os)
{
    for (const auto& a : r.axes) os << a << ',';
    for (auto m : r.metrics) os << metric_name(m) << ',';
    os << "status\n";
    os.precision(12);
    for (const auto& c : r.cells) {
        for (double x : c.coords) os << x << ',';
        for (auto m : r.metrics) {
            const auto it = c.values.find(m);
            if (it != c.values.end() && it->second) os << *it->second;
            os << ',';
        }
        os << (c.ok ? "ok" : "failed") << '\n';
    }
}

/// Schedule with the Phase 1 start moved to @p start_day and theta_l1 = 1 - efficacy; later phases unchanged.
inline LockdownSchedule shifted_schedule(const LockdownSchedule& base, int start_day, double efficacy)
{
    const auto& segs = base.segments();
    if (segs.size() < 3) throw std::invalid_argument("lockdown sweep: schedule needs at least two lockdown phases");
    if (start_day < 0 || start_day >= segs[2].start_day) {
        throw std::invalid_argument("lockdown sweep: Phase 1 start must precede the Phase 2 start");
    }
    if (!(efficacy >= 0.0 && efficacy <= 1.0)) throw std::invalid_argument("lockdown sweep: efficacy outside [0,1]");
    std::vector<LockdownSchedule::Segment> out;
    if (start_day > 0) out.push_back({0, segs[0].value});
    out.push_back({start_day, 1.0 - efficacy});
    for (std::size_t i = 2; i < segs.size(); ++i) out.push_back(segs[i]);
    return LockdownSchedule(std::move(out));
}

struct LockdownCell {
    int start_day = 0;
    double efficacy = 0.0;
    std::optional<double> cum_mortality;  ///< wave-1 cumulative mortality; empty for invalid cells
    std::string error;
};

/**
 * @brief Wave-1 cumulative mortality for every (Phase 1 start day, efficacy) combination; start days vary slowest.
 */
inline std::vector<LockdownCell> lockdown_sweep(const std::vector<int>& start_days, const std::vector<double>& efficacies,
                                                const ModelParams& base = two_group_baseline(),
                                                const InitialConditions& ic = {}, const WaveWindows& windows = {},
                                                unsigned threads = 0)
{
    std::vector<LockdownCell> cells(start_days.size() * efficacies.size());
    parallel_for(cells.size(), threads, [&](std::size_t idx) {
        LockdownCell c;
        c.start_day = start_days[idx / efficacies.size()];
        c.efficacy = efficacies[idx % efficacies.size()];
        try {
            ModelParams p = base;
            p.theta = shifted_schedule(base.theta, c.start_day, c.efficacy);
            const auto traj = integrate(p, make_initial_state(ic, p.groups()), windows.wave1_end);
            c.cum_mortality = wave_metrics(traj, windows.wave1_start, windows.wave1_end).cum_mortality;
        }
        catch (const std::exception& e) {
            c.error = e.what();
        }
        cells[idx] = std::move(c);
    });
    return cells;
}

inline void write_lockdown_csv(const std::vector<LockdownCell>& cells, std::ostream& os)
{
    os << "start_day,efficacy,cum_mort_wave1,status\n";
    os.precision(12);
    for (const auto& c : cells) {
        os << c.start_day << ',' << c.efficacy << ',';
        if (c.cum_mortality) os << *c.cum_mortality;
        os << ',' << (c.cum_mortality ? "ok" : "invalid") << '\n';
    }
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_SCENARIOS_HPP
