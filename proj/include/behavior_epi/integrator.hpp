#ifndef BEHAVIOR_EPI_INTEGRATOR_HPP
#define BEHAVIOR_EPI_INTEGRATOR_HPP

#include "behavior_epi/calendar.hpp"
#include "behavior_epi/model.hpp"
#include "behavior_epi/ode.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace behavior_epi {

/// Defaults are set so that halving both tolerances moves every daily output by well under 1e-5 relative.
struct IntegratorOptions {
    double rtol = 1e-10;
    /// Absolute tolerance as a fraction of N(0).
    double atol_rel = 1e-12;
    /// Negative values down to -clamp_rel*N(0) are clamped to zero.
    double clamp_rel = 1e-9;
    /// Allowed relative defect of N(t) + D(t) = N(0).
    double conservation_rel = 1e-6;
};

/**
 * @brief Daily-sampled solution of the model with cumulative deaths D(t).
 */
struct Trajectory {
    int n = 1;
    double initial_population = 0.0;
    Eigen::VectorXd a;                 ///< behavior exponents, kept for the contact-modifier series
    std::vector<double> times;         ///< days since epoch
    std::vector<Eigen::VectorXd> states;
    std::vector<double> deaths;        ///< D(t) = integral of delta_h * sum I_h

    std::size_t size() const
    {
        return times.size();
    }

    SystemState state(std::size_t k) const
    {
        return SystemState(n, states.at(k), times.at(k));
    }

    double compartment_total(std::size_t k, Compartment c) const
    {
        return states.at(k).segment(static_cast<int>(c) * n, n).sum();
    }

    double hospitalized(std::size_t k) const
    {
        return compartment_total(k, Compartment::Ih);
    }

    double infected(std::size_t k) const
    {
        double s = 0.0;
        for (auto c : kInfectedCompartments) s += compartment_total(k, c);
        return s;
    }

    double population(std::size_t k) const
    {
        return states.at(k).sum();
    }

    double group_size(std::size_t k, int group) const
    {
        double s = 0.0;
        for (auto c : kAllCompartments) s += states.at(k)(state_index(n, c, group));
        return s;
    }

    Eigen::VectorXd contact_modifiers(std::size_t k) const
    {
        Eigen::VectorXd out(n);
        const double ih = hospitalized(k);
        const double total = population(k);
        for (int i = 0; i < n; ++i) out(i) = contact_modifier(a.size() == n ? a(i) : 0.0, ih, total);
        return out;
    }

    /// Output index whose time equals @p day, or std::nullopt.
    std::optional<std::size_t> index_of(double day) const
    {
        auto it = std::lower_bound(times.begin(), times.end(), day - 1e-9);
        if (it == times.end() || std::abs(*it - day) > 1e-9) return std::nullopt;
        return static_cast<std::size_t>(it - times.begin());
    }

    std::vector<double> hospitalized_series() const
    {
        std::vector<double> out(size());
        for (std::size_t k = 0; k < size(); ++k) out[k] = hospitalized(k);
        return out;
    }

    /// Largest relative defect of N(t) + D(t) = N(0) over the output grid.
    double conservation_defect() const
    {
        double worst = 0.0;
        for (std::size_t k = 0; k < size(); ++k) {
            worst = std::max(worst, std::abs(population(k) + deaths[k] - initial_population) / initial_population);
        }
        return worst;
    }

    /// Smallest compartment value over the output grid, relative to N(0).
    double min_component_rel() const
    {
        double worst = std::numeric_limits<double>::infinity();
        for (const auto& s : states) worst = std::min(worst, s.minCoeff());
        return worst / initial_population;
    }
};

/**
 * @brief Process-wide record of the invariant checks of every integration performed.
 */
struct IntegrationAudit {
    long integrations = 0;
    double max_conservation_defect = 0.0;
    double min_component_rel = 0.0;
    long violations = 0;
};

namespace detail {

inline std::mutex& audit_mutex()
{
    static std::mutex m;
    return m;
}

inline IntegrationAudit& audit_storage()
{
    static IntegrationAudit a;
    return a;
}

inline void record_audit(double defect, double min_rel, bool violated)
{
    std::lock_guard<std::mutex> lock(audit_mutex());
    auto& a = audit_storage();
    ++a.integrations;
    a.max_conservation_defect = std::max(a.max_conservation_defect, defect);
    a.min_component_rel = std::min(a.min_component_rel, min_rel);
    if (violated) ++a.violations;
}

inline std::vector<double> output_grid(double t0, double t_end, double stride)
{
    std::vector<double> out;
    for (long k = 0;; ++k) {
        const double t = t0 + static_cast<double>(k) * stride;
        if (t > t_end + 1e-9 * stride) break;
        out.push_back(std::min(t, t_end));
    }
    if (out.back() < t_end - 1e-9 * stride) out.push_back(t_end);
    return out;
}

/**
 * Integrates an augmented system y' = f(t, y), D' = g(t, y) over [t0, t_end], restarting at @p breaks.
 */
template <class F>
Trajectory integrate_augmented(F&& f_aug, int n, const Eigen::VectorXd& a, const Eigen::VectorXd& y0, double t0,
                               double t_end, double stride, std::vector<double> breaks, const IntegratorOptions& opts)
{
    if (!(t_end > t0)) throw std::invalid_argument("integrate: t_end must exceed the initial time");
    if (!(stride > 0.0)) throw std::invalid_argument("integrate: output stride must be positive");
    const double n0 = y0.sum();
    if (!(n0 > 0.0)) throw DomainError("integrate: initial population must be positive");
    if (y0.minCoeff() < 0.0) throw DomainError("integrate: initial state has negative compartments");

    Trajectory traj;
    traj.n = n;
    traj.a = a;
    traj.initial_population = n0;
    const auto grid = output_grid(t0, t_end, stride);
    traj.times.reserve(grid.size());
    traj.states.reserve(grid.size());
    traj.deaths.reserve(grid.size());

    const Eigen::Index m = y0.size();
    Eigen::VectorXd y(m + 1);
    y.head(m) = y0;
    y(m) = 0.0;

    OdeOptions ode;
    ode.rtol = opts.rtol;
    ode.atol = opts.atol_rel * n0;
    const double clamp = opts.clamp_rel * n0;

    std::sort(breaks.begin(), breaks.end());
    std::vector<double> bounds{t0};
    for (double b : breaks) {
        if (b > t0 && b < t_end) bounds.push_back(b);
    }
    bounds.push_back(t_end);

    auto post = [&](double t, Eigen::VectorXd& z) {
        bool changed = false;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (z(i) < 0.0) {
                if (z(i) < -clamp) {
                    record_audit(0.0, z(i) / n0, true);
                    throw InvariantViolation("integrate: compartment " + std::to_string(i) + " fell to " +
                                             std::to_string(z(i)) + " at t=" + std::to_string(t));
                }
                z(i) = 0.0;
                changed = true;
            }
        }
        return changed;
    };
    auto out = [&](double t, const Eigen::VectorXd& z) {
        traj.times.push_back(t);
        traj.states.push_back(z.head(m));
        traj.deaths.push_back(z(m));
    };

    // Stages that land on a segment end must still see that segment's schedule value.
    double seg_lo = t0, seg_hi = t_end;
    Dopri5 solver([&](double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        f_aug(std::clamp(t, seg_lo, seg_hi), z, dz);
    }, ode);
    std::size_t g = 0;
    for (std::size_t s = 0; s + 1 < bounds.size(); ++s) {
        const double ta = bounds[s];
        const double tb = bounds[s + 1];
        seg_lo = ta;
        seg_hi = s + 2 == bounds.size() ? tb : std::nextafter(tb, ta);
        const bool last = s + 2 == bounds.size();
        std::vector<double> outs;
        while (g < grid.size() && (grid[g] < tb || (last && grid[g] <= tb))) {
            outs.push_back(grid[g]);
            ++g;
        }
        y = solver.solve(ta, tb, y, outs, out, post);
    }

    const double defect = traj.conservation_defect();
    const double min_rel = std::min(0.0, traj.min_component_rel());
    const bool violated = defect > opts.conservation_rel || min_rel < -opts.clamp_rel;
    record_audit(defect, min_rel, violated);
    if (violated) {
        throw InvariantViolation("integrate: conservation N + D = N(0) violated (relative defect " +
                                 std::to_string(defect) + ")");
    }
    return traj;
}

} // namespace detail

inline IntegrationAudit integration_audit()
{
    std::lock_guard<std::mutex> lock(detail::audit_mutex());
    return detail::audit_storage();
}

inline void reset_integration_audit()
{
    std::lock_guard<std::mutex> lock(detail::audit_mutex());
    detail::audit_storage() = IntegrationAudit{};
}

/**
 * @brief Integrates the n-group model from @p initial_state to @p t_end with output every @p output_stride days.
 *
 * The solver restarts at every discontinuity of theta_l. Cumulative deaths are integrated alongside the state,
 * and N(t) + D(t) = N(0) is verified on the output grid.
 */
inline Trajectory integrate(const ModelParams& params, const SystemState& initial_state, double t_end,
                            double output_stride = 1.0, const IntegratorOptions& opts = {})
{
    params.validate();
    const int n = params.groups();
    if (initial_state.n != n) throw std::invalid_argument("integrate: state and parameters disagree on n");
    const Eigen::Index m = initial_state.values.size();
    Eigen::VectorXd dy(m);
    auto f = [&](double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        rhs(params, t, z.head(m), dy);
        dz.head(m) = dy;
        dz(m) = params.delta_h * z.segment(static_cast<int>(Compartment::Ih) * n, n).sum();
    };
    return detail::integrate_augmented(f, n, params.a, initial_state.values, initial_state.t, t_end, output_stride,
                                       params.theta.breakpoints(), opts);
}

/// Integrates the behavior-free single-group system; the trajectory has n = 1.
inline Trajectory integrate_behavior_free(const BehaviorFreeParams& params, const Eigen::VectorXd& y0, double t_end,
                                          double output_stride = 1.0, const IntegratorOptions& opts = {},
                                          double t0 = 0.0)
{
    if (y0.size() != kCompartments) throw std::invalid_argument("integrate_behavior_free expects 6 compartments");
    Eigen::VectorXd dy(kCompartments);
    auto f = [&](double t, const Eigen::VectorXd& z, Eigen::VectorXd& dz) {
        rhs_behavior_free(params, t, z.head(kCompartments), dy);
        dz.head(kCompartments) = dy;
        dz(kCompartments) = params.delta_h * z(static_cast<int>(Compartment::Ih));
    };
    return detail::integrate_augmented(f, 1, Eigen::VectorXd::Zero(1), y0, t0, t_end, output_stride,
                                       params.theta.breakpoints(), opts);
}

/**
 * @brief Summary of one epidemic wave on a calendar window.
 */
struct WaveMetrics {
    double peak_daily_hosp = 0.0;
    double peak_day = 0.0;
    double cum_mortality = 0.0;       ///< D(t) at the window end (cumulative since the epoch)
    std::optional<double> wave_length; ///< days from window start to the post-peak day with infected < threshold
};

/**
 * @brief Peak hospital occupancy, its day, cumulative mortality and wave length on [t_start, t_end].
 */
inline WaveMetrics wave_metrics(const Trajectory& traj, double t_start, double t_end, double end_threshold = 200.0)
{
    if (!(t_end >= t_start)) throw std::invalid_argument("wave_metrics: empty window");
    if (traj.size() == 0 || t_start < traj.times.front() - 1e-9 || t_end > traj.times.back() + 1e-9) {
        throw std::invalid_argument("wave_metrics: window outside the trajectory span");
    }
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        if (traj.times[k] >= t_start - 1e-9 && traj.times[k] <= t_end + 1e-9) idx.push_back(k);
    }
    if (idx.empty()) throw std::invalid_argument("wave_metrics: empty window");
    WaveMetrics w;
    std::size_t peak_pos = 0;
    for (std::size_t j = 0; j < idx.size(); ++j) {
        const double h = traj.hospitalized(idx[j]);
        if (h > w.peak_daily_hosp) {
            w.peak_daily_hosp = h;
            peak_pos = j;
        }
    }
    w.peak_day = traj.times[idx[peak_pos]];
    w.cum_mortality = traj.deaths[idx.back()];
    if (w.peak_daily_hosp > 0.0) {
        for (std::size_t j = peak_pos + 1; j < idx.size(); ++j) {
            if (traj.infected(idx[j]) < end_threshold) {
                w.wave_length = traj.times[idx[j]] - t_start;
                break;
            }
        }
    }
    return w;
}

/**
 * @brief Writes one CSV row per output time: day, ISO date, every compartment of every group and derived series.
 */
inline void write_trajectory_csv(const Trajectory& traj, std::ostream& os)
{
    os << "day,date";
    for (auto c : kAllCompartments) {
        for (int g = 0; g < traj.n; ++g) os << ',' << compartment_name(c) << '_' << (g + 1);
    }
    os << ",N,I_h_total,infected_total,D";
    for (int g = 0; g < traj.n; ++g) os << ",cA_" << (g + 1);
    for (int g = 0; g < traj.n; ++g) os << ",frac_" << (g + 1);
    os << '\n';
    os << std::setprecision(12);
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        os << t << ',';
        if (std::abs(t - std::round(t)) < 1e-9) os << calendar::iso_of_day(static_cast<int>(std::lround(t)));
        for (Eigen::Index i = 0; i < traj.states[k].size(); ++i) os << ',' << traj.states[k](i);
        const double total = traj.population(k);
        os << ',' << total << ',' << traj.hospitalized(k) << ',' << traj.infected(k) << ',' << traj.deaths[k];
        const auto ca = traj.contact_modifiers(k);
        for (int g = 0; g < traj.n; ++g) os << ',' << ca(g);
        for (int g = 0; g < traj.n; ++g) os << ',' << traj.group_size(k, g) / total;
        os << '\n';
    }
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_INTEGRATOR_HPP
