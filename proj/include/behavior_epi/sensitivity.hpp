#ifndef BEHAVIOR_EPI_SENSITIVITY_HPP
#define BEHAVIOR_EPI_SENSITIVITY_HPP

#include "behavior_epi/baseline.hpp"
#include "behavior_epi/calendar.hpp"
#include "behavior_epi/integrator.hpp"
#include "behavior_epi/lhs.hpp"
#include "behavior_epi/parallel.hpp"
#include "behavior_epi/parameters.hpp"
#include "behavior_epi/prcc.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace behavior_epi {

struct ParamRange {
    std::string name;
    double baseline = 0.0;
    double low = 0.0;
    double high = 0.0;
};

using ParamRangeTable = std::vector<ParamRange>;

/// The 18 model parameters with ranges of +-@p spread around their values in @p base.
inline ParamRangeTable default_range_table(const ModelParams& base = two_group_baseline(), double spread = 0.4)
{
    ParamRangeTable table;
    for (auto name : kSensitivityParameters) {
        const double b = get_parameter(base, name);
        table.push_back({std::string(name), b, (1.0 - spread) * b, (1.0 + spread) * b});
    }
    return table;
}

/**
 * @brief Latin hypercube sample over the table ranges; theta_l* values are capped at 1 unless @p cap_theta is false.
 */
inline Eigen::MatrixXd lhs_sample(const ParamRangeTable& table, int n_samples, std::uint64_t seed, bool cap_theta = true)
{
    std::vector<std::pair<double, double>> ranges;
    for (const auto& r : table) {
        if (!(r.low < r.high)) throw std::invalid_argument("lhs_sample: degenerate range for " + r.name);
        ranges.emplace_back(r.low, r.high);
    }
    Eigen::MatrixXd x = latin_hypercube(ranges, n_samples, seed);
    if (cap_theta) {
        for (std::size_t c = 0; c < table.size(); ++c) {
            if (table[c].name.rfind("theta_l", 0) == 0) {
                x.col(static_cast<Eigen::Index>(c)) = x.col(static_cast<Eigen::Index>(c)).cwiseMin(1.0);
            }
        }
    }
    return x;
}

enum class Response { PeakDailyHosp, CumulativeMortality };

inline std::string_view response_name(Response r)
{
    return r == Response::PeakDailyHosp ? "peak_daily_hosp" : "cumulative_mortality";
}

struct SensitivityConfig {
    ModelParams base = two_group_baseline();
    InitialConditions initial;
    ParamRangeTable table = default_range_table();
    std::vector<int> snapshots{calendar::kSnapshotSpring, calendar::kSnapshotWinter};
    int samples = 1000;
    std::uint64_t seed = 20200229;
    bool cap_theta = true;
    unsigned threads = 0;
    double max_exclusion_fraction = 0.01;
};

/// Responses of one parameter row: per snapshot, running-max total I_h and D(snapshot).
struct ResponseRow {
    std::vector<double> peak;
    std::vector<double> mortality;
};

inline ModelParams apply_row(const ModelParams& base, const ParamRangeTable& table, const Eigen::VectorXd& row)
{
    ModelParams p = base;
    for (std::size_t c = 0; c < table.size(); ++c) set_parameter(p, table[c].name, row(static_cast<Eigen::Index>(c)));
    return p;
}

inline ResponseRow responses(const ModelParams& p, const InitialConditions& ic, const std::vector<int>& snapshots)
{
    if (snapshots.empty()) throw std::invalid_argument("responses: no snapshots");
    const int horizon = *std::max_element(snapshots.begin(), snapshots.end());
    const auto traj = integrate(p, make_initial_state(ic, p.groups()), std::max(horizon, 1));
    ResponseRow out;
    for (int day : snapshots) {
        const auto w = wave_metrics(traj, 0.0, day);
        out.peak.push_back(w.peak_daily_hosp);
        out.mortality.push_back(w.cum_mortality);
    }
    return out;
}

inline ResponseRow responses(const SensitivityConfig& cfg, const Eigen::VectorXd& row)
{
    return responses(apply_row(cfg.base, cfg.table, row), cfg.initial, cfg.snapshots);
}

struct PrccResult {
    Response response = Response::PeakDailyHosp;
    int snapshot_day = 0;
    std::vector<std::string> parameters;
    Eigen::VectorXd coefficients;
    int sample_count = 0;
};

struct SensitivityRun {
    Eigen::MatrixXd samples;            ///< all sampled rows
    std::vector<bool> valid;            ///< false for rows whose integration failed
    Eigen::MatrixXd peak;               ///< rows x snapshots (NaN for excluded rows)
    Eigen::MatrixXd mortality;
    int excluded = 0;
    std::vector<PrccResult> results;    ///< ordered by snapshot, then response
};

/**
 * @brief Samples the parameter cube, evaluates both responses at every snapshot in parallel, and computes PRCCs.
 * @throws std::runtime_error if more than the allowed fraction of rows fail to integrate.
 */
inline SensitivityRun run_sensitivity(const SensitivityConfig& cfg)
{
    SensitivityRun run;
    run.samples = lhs_sample(cfg.table, cfg.samples, cfg.seed, cfg.cap_theta);
    const auto n = static_cast<std::size_t>(cfg.samples);
    const auto s = static_cast<Eigen::Index>(cfg.snapshots.size());
    run.peak = Eigen::MatrixXd::Constant(cfg.samples, s, std::nan(""));
    run.mortality = run.peak;
    run.valid.assign(n, false);
    std::vector<char> ok(n, 0);
    parallel_for(n, cfg.threads, [&](std::size_t i) {
        try {
            const auto r = responses(cfg, run.samples.row(static_cast<Eigen::Index>(i)).transpose());
            for (Eigen::Index k = 0; k < s; ++k) {
                run.peak(static_cast<Eigen::Index>(i), k) = r.peak[static_cast<std::size_t>(k)];
                run.mortality(static_cast<Eigen::Index>(i), k) = r.mortality[static_cast<std::size_t>(k)];
            }
            ok[i] = 1;
        }
        catch (const std::exception&) {
            ok[i] = 0;
        }
    });
    std::vector<Eigen::Index> keep;
    for (std::size_t i = 0; i < n; ++i) {
        run.valid[i] = ok[i] != 0;
        if (ok[i]) keep.push_back(static_cast<Eigen::Index>(i));
    }
    run.excluded = static_cast<int>(n - keep.size());
    if (run.excluded > cfg.max_exclusion_fraction * static_cast<double>(n)) {
        throw std::runtime_error("sensitivity: " + std::to_string(run.excluded) + " of " + std::to_string(n) +
                                 " integrations failed (more than the allowed fraction)");
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(keep.size()), run.samples.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) x.row(static_cast<Eigen::Index>(i)) = run.samples.row(keep[i]);
    std::vector<std::string> names;
    for (const auto& r : cfg.table) names.push_back(r.name);
    for (Eigen::Index k = 0; k < s; ++k) {
        for (Response resp : {Response::PeakDailyHosp, Response::CumulativeMortality}) {
            const Eigen::MatrixXd& source = resp == Response::PeakDailyHosp ? run.peak : run.mortality;
            Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
            for (std::size_t i = 0; i < keep.size(); ++i) y(static_cast<Eigen::Index>(i)) = source(keep[i], k);
            PrccResult res;
            res.response = resp;
            res.snapshot_day = cfg.snapshots[static_cast<std::size_t>(k)];
            res.parameters = names;
            res.coefficients = prcc(x, y);
            res.sample_count = static_cast<int>(keep.size());
            run.results.push_back(std::move(res));
        }
    }
    return run;
}

inline void write_prcc_csv(const std::vector<PrccResult>& results, std::ostream& os)
{
    os << "parameter,response,snapshot,coefficient\n";
    os.precision(10);
    for (const auto& r : results) {
        for (std::size_t j = 0; j < r.parameters.size(); ++j) {
            os << r.parameters[j] << ',' << response_name(r.response) << ',' << calendar::iso_of_day(r.snapshot_day)
               << ',' << r.coefficients(static_cast<Eigen::Index>(j)) << '\n';
        }
    }
}

inline void write_samples_csv(const SensitivityRun& run, const SensitivityConfig& cfg, std::ostream& os)
{
    os << "row";
    for (const auto& r : cfg.table) os << ',' << r.name;
    for (int d : cfg.snapshots) {
        os << ",peak_daily_hosp_" << calendar::iso_of_day(d) << ",cumulative_mortality_" << calendar::iso_of_day(d);
    }
    os << ",valid\n";
    os.precision(12);
    for (Eigen::Index i = 0; i < run.samples.rows(); ++i) {
        os << i;
        for (Eigen::Index c = 0; c < run.samples.cols(); ++c) os << ',' << run.samples(i, c);
        for (Eigen::Index k = 0; k < run.peak.cols(); ++k) os << ',' << run.peak(i, k) << ',' << run.mortality(i, k);
        os << ',' << (run.valid[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
    }
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_SENSITIVITY_HPP
