#ifndef BEHAVIOR_EPI_ODE_HPP
#define BEHAVIOR_EPI_ODE_HPP

#include "behavior_epi/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace behavior_epi {

/// Raised when the adaptive step size collapses below machine resolution.
class StepSizeUnderflow : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a solution leaves the admissible region beyond the clamp tolerance.
class InvariantViolation : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct OdeOptions {
    double rtol = 1e-8;
    double atol = 1e-8;
    double h_max = std::numeric_limits<double>::infinity();
    long max_steps = 2'000'000;
    int max_domain_rejections = 50;
};

struct OdeStats {
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
};

/**
 * @brief Dormand–Prince 5(4) embedded Runge–Kutta pair with FSAL, adaptive steps and 4th-order dense output.
 *
 * The right-hand side may throw DomainError for stage values outside its domain; such steps are rejected
 * and retried with a smaller step.
 */
class Dopri5
{
public:
    using Rhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
    /// Called on every accepted step end state; may modify the state (returns true if it did).
    using PostStep = std::function<bool(double, Eigen::VectorXd&)>;
    /// Called for every requested output time with the interpolated state.
    using Output = std::function<void(double, const Eigen::VectorXd&)>;

    Dopri5(Rhs f, OdeOptions opts = {})
        : m_f(std::move(f))
        , m_opts(opts)
    {
    }

    const OdeStats& stats() const
    {
        return m_stats;
    }

    /**
     * @brief Integrates from t0 to t1, emitting dense output at the sorted times in @p out_times.
     *
     * Output times must lie in [t0, t1]. Returns the state at t1.
     */
    Eigen::VectorXd solve(double t0, double t1, Eigen::VectorXd y, const std::vector<double>& out_times,
                          const Output& output, const PostStep& post_step = nullptr)
    {
        if (!(t1 >= t0)) {
            throw std::invalid_argument("Dopri5::solve requires t1 >= t0");
        }
        std::size_t next_out = 0;
        while (next_out < out_times.size() && out_times[next_out] <= t0) {
            if (out_times[next_out] == t0) output(t0, y);
            ++next_out;
        }
        if (t1 == t0) {
            return y;
        }
        const Eigen::Index n = y.size();
        Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), y1(n), err(n);
        eval(t0, y, k1);
        double t = t0;
        double h = std::min(initial_step(t0, y, k1, t1 - t0), m_opts.h_max);
        bool last_rejected = false;
        int domain_rejections = 0;
        const double span = t1 - t0;

        while (t < t1) {
            if (m_stats.accepted + m_stats.rejected > m_opts.max_steps) {
                throw StepSizeUnderflow("Dopri5: maximum number of steps exceeded");
            }
            if (h < 1e-14 * std::max(std::abs(t), 1.0) || !std::isfinite(h)) {
                throw StepSizeUnderflow("Dopri5: step size underflow at t=" + std::to_string(t));
            }
            bool final_step = false;
            if (t + h >= t1 || (t1 - (t + h)) < 1e-12 * span) {
                h = t1 - t;
                final_step = true;
            }
            try {
                ytmp = y + h * (a21 * k1);
                eval(t + c2 * h, ytmp, k2);
                ytmp = y + h * (a31 * k1 + a32 * k2);
                eval(t + c3 * h, ytmp, k3);
                ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
                eval(t + c4 * h, ytmp, k4);
                ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
                eval(t + c5 * h, ytmp, k5);
                ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
                eval(t + h, ytmp, k6);
                y1 = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
                eval(t + h, y1, k7);
            }
            catch (const DomainError&) {
                if (++domain_rejections > m_opts.max_domain_rejections) {
                    throw;
                }
                ++m_stats.rejected;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
            err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            double acc = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double sc = m_opts.atol + m_opts.rtol * std::max(std::abs(y(i)), std::abs(y1(i)));
                const double q = err(i) / sc;
                acc += q * q;
            }
            const double enorm = std::sqrt(acc / static_cast<double>(n));
            if (!std::isfinite(enorm)) {
                ++m_stats.rejected;
                h *= 0.25;
                last_rejected = true;
                continue;
            }
            if (enorm <= 1.0) {
                const double t_new = final_step ? t1 : t + h;
                // dense-output coefficients from the unmodified step
                Eigen::VectorXd r1 = y;
                Eigen::VectorXd r2 = y1 - y;
                Eigen::VectorXd r3 = h * k1 - r2;
                Eigen::VectorXd r4 = r2 - h * k7 - r3;
                Eigen::VectorXd r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
                while (next_out < out_times.size() && out_times[next_out] <= t_new) {
                    const double tout = out_times[next_out];
                    if (tout == t_new) {
                        output(tout, y1);
                    }
                    else {
                        const double th = (tout - t) / h;
                        const double th1 = 1.0 - th;
                        ytmp = r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
                        output(tout, ytmp);
                    }
                    ++next_out;
                }
                t = t_new;
                y = y1;
                ++m_stats.accepted;
                if (post_step && post_step(t, y)) {
                    eval(t, y, k7);
                }
                k1 = k7;
                double fac = 0.9 * std::pow(std::max(enorm, 1e-10), -0.2);
                fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
                h = std::min(h * fac, m_opts.h_max);
                last_rejected = false;
                domain_rejections = 0;
            }
            else {
                ++m_stats.rejected;
                const double fac = std::max(0.2, 0.9 * std::pow(enorm, -0.2));
                h *= fac;
                last_rejected = true;
            }
        }
        return y;
    }

private:
    void eval(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dy)
    {
        ++m_stats.rhs_evals;
        m_f(t, y, dy);
    }

    // Starting step heuristic (Hairer, Nørsett & Wanner, Sec. II.4).
    double initial_step(double t0, const Eigen::VectorXd& y0, const Eigen::VectorXd& f0, double span)
    {
        const Eigen::Index n = y0.size();
        Eigen::VectorXd sc(n);
        for (Eigen::Index i = 0; i < n; ++i) sc(i) = m_opts.atol + m_opts.rtol * std::abs(y0(i));
        const double d0 = std::sqrt((y0.array() / sc.array()).square().mean());
        const double d1n = std::sqrt((f0.array() / sc.array()).square().mean());
        double h0 = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h0 = std::min(h0, span);
        Eigen::VectorXd y1 = y0 + h0 * f0;
        Eigen::VectorXd f1(n);
        try {
            eval(t0 + h0, y1, f1);
        }
        catch (const DomainError&) {
            return h0 * 0.01;
        }
        const double d2 = std::sqrt(((f1 - f0).array() / sc.array()).square().mean()) / h0;
        double h1;
        if (std::max(d1n, d2) <= 1e-15) {
            h1 = std::max(1e-6, h0 * 1e-3);
        }
        else {
            h1 = std::pow(0.01 / std::max(d1n, d2), 0.2);
        }
        return std::min({100.0 * h0, h1, span});
    }

    Rhs m_f;
    OdeOptions m_opts;
    OdeStats m_stats;

    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
    static constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                            d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                            d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;
};

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_ODE_HPP
