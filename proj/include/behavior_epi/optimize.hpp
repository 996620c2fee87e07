#ifndef BEHAVIOR_EPI_OPTIMIZE_HPP
#define BEHAVIOR_EPI_OPTIMIZE_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace behavior_epi {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
    Eigen::VectorXd x;
    double f = std::numeric_limits<double>::infinity();
    int iterations = 0;
    long evaluations = 0;
    bool converged = false;
    std::string message;
};

/**
 * @brief Box constraints handled by the sine transform x = lo + (sin z + 1)(hi - lo)/2.
 */
struct BoxTransform {
    Eigen::VectorXd lo;
    Eigen::VectorXd hi;

    BoxTransform(Eigen::VectorXd lower, Eigen::VectorXd upper)
        : lo(std::move(lower))
        , hi(std::move(upper))
    {
        if (lo.size() != hi.size()) throw std::invalid_argument("BoxTransform: bound sizes differ");
        for (Eigen::Index i = 0; i < lo.size(); ++i) {
            if (!(hi(i) > lo(i))) throw std::invalid_argument("BoxTransform: upper bound must exceed lower bound");
        }
    }

    Eigen::VectorXd to_external(const Eigen::VectorXd& z) const
    {
        return lo.array() + (z.array().sin() + 1.0) * (hi - lo).array() / 2.0;
    }

    Eigen::VectorXd to_internal(const Eigen::VectorXd& x) const
    {
        Eigen::VectorXd z(x.size());
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double u = std::clamp(2.0 * (x(i) - lo(i)) / (hi(i) - lo(i)) - 1.0, -1.0, 1.0);
            z(i) = std::asin(u);
        }
        return z;
    }
};

struct BfgsOptions {
    int max_iter = 200;
    double gtol = 1e-7;   ///< stop when max |grad| <= gtol * max(1, |f|)
    double ftol = 1e-12;  ///< stop when the relative decrease stays below ftol for two iterations
    double fd_step = 1e-6;
};

namespace detail {

inline Eigen::VectorXd central_gradient(const Objective& f, const Eigen::VectorXd& x, double step, long& evals)
{
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double h = step * std::max(1.0, std::abs(x(i)));
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g(i) = (f(xp) - f(xm)) / (2.0 * h);
        evals += 2;
    }
    return g;
}

} // namespace detail

/**
 * @brief Quasi-Newton (BFGS) minimization with central finite-difference gradients and Armijo backtracking.
 */
inline OptimResult bfgs(const Objective& f, const Eigen::VectorXd& x0, const BfgsOptions& opts = {})
{
    OptimResult res;
    const Eigen::Index n = x0.size();
    Eigen::VectorXd x = x0;
    double fx = f(x);
    res.evaluations = 1;
    if (!std::isfinite(fx)) {
        res.x = x;
        res.f = fx;
        res.message = "objective not finite at the starting point";
        return res;
    }
    Eigen::VectorXd g = detail::central_gradient(f, x, opts.fd_step, res.evaluations);
    Eigen::MatrixXd h_inv = Eigen::MatrixXd::Identity(n, n);
    int small_steps = 0;
    bool reset_done = false;
    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        if (!g.allFinite()) {
            res.message = "non-finite gradient";
            break;
        }
        if (g.cwiseAbs().maxCoeff() <= opts.gtol * std::max(1.0, std::abs(fx))) {
            res.converged = true;
            res.message = "gradient tolerance reached";
            break;
        }
        Eigen::VectorXd dir = -h_inv * g;
        double slope = g.dot(dir);
        if (!(slope < 0.0)) {
            h_inv.setIdentity();
            dir = -g;
            slope = -g.squaredNorm();
        }
        double alpha = 1.0;
        double f_new = std::numeric_limits<double>::infinity();
        Eigen::VectorXd x_new;
        bool accepted = false;
        for (int ls = 0; ls < 50; ++ls) {
            x_new = x + alpha * dir;
            f_new = f(x_new);
            ++res.evaluations;
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * alpha * slope) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            if (!reset_done) {
                h_inv.setIdentity();
                reset_done = true;
                continue;
            }
            res.message = "line search failed";
            break;
        }
        reset_done = false;
        const Eigen::VectorXd g_new = detail::central_gradient(f, x_new, opts.fd_step, res.evaluations);
        const Eigen::VectorXd s = x_new - x;
        const Eigen::VectorXd y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
            h_inv = (id - rho * s * y.transpose()) * h_inv * (id - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        const double rel_decrease = (fx - f_new) / std::max(std::abs(fx), 1e-300);
        x = x_new;
        fx = f_new;
        g = g_new;
        if (rel_decrease < opts.ftol) {
            if (++small_steps >= 2) {
                res.converged = true;
                res.message = "function tolerance reached";
                break;
            }
        }
        else {
            small_steps = 0;
        }
    }
    if (res.iterations >= opts.max_iter) res.message = "iteration limit reached";
    res.x = x;
    res.f = fx;
    return res;
}

struct NelderMeadOptions {
    int max_iter = 4000;
    double initial_step = 0.1;
    double ftol = 1e-12;
    double xtol = 1e-10;
};

/**
 * @brief Derivative-free Nelder–Mead simplex minimization (standard coefficients 1, 2, 0.5, 0.5).
 */
inline OptimResult nelder_mead(const Objective& f, const Eigen::VectorXd& x0, const NelderMeadOptions& opts = {})
{
    OptimResult res;
    const Eigen::Index n = x0.size();
    std::vector<Eigen::VectorXd> pts(static_cast<std::size_t>(n + 1), x0);
    std::vector<double> vals(static_cast<std::size_t>(n + 1));
    auto eval = [&](const Eigen::VectorXd& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };
    for (Eigen::Index i = 0; i < n; ++i) {
        pts[static_cast<std::size_t>(i + 1)](i) += opts.initial_step * std::max(1.0, std::abs(x0(i)));
    }
    for (std::size_t i = 0; i < pts.size(); ++i) vals[i] = eval(pts[i]);
    std::vector<std::size_t> order(pts.size());
    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[order.size() - 2];
        double x_spread = 0.0;
        for (const auto& p : pts) x_spread = std::max(x_spread, (p - pts[best]).cwiseAbs().maxCoeff());
        const double f_spread = vals[worst] - vals[best];
        if (std::isfinite(f_spread) && f_spread <= opts.ftol * std::max(1.0, std::abs(vals[best])) &&
            x_spread <= opts.xtol * std::max(1.0, pts[best].cwiseAbs().maxCoeff()) * 1e4) {
            res.converged = true;
            res.message = "simplex converged";
            break;
        }
        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i != worst) centroid += pts[i];
        }
        centroid /= static_cast<double>(n);
        const Eigen::VectorXd xr = centroid + (centroid - pts[worst]);
        const double fr = eval(xr);
        if (fr < vals[best]) {
            const Eigen::VectorXd xe = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = xe;
                vals[worst] = fe;
            }
            else {
                pts[worst] = xr;
                vals[worst] = fr;
            }
            continue;
        }
        if (fr < vals[second]) {
            pts[worst] = xr;
            vals[worst] = fr;
            continue;
        }
        const bool outside = fr < vals[worst];
        const Eigen::VectorXd xc = outside ? Eigen::VectorXd(centroid + 0.5 * (xr - centroid))
                                           : Eigen::VectorXd(centroid + 0.5 * (pts[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : vals[worst])) {
            pts[worst] = xc;
            vals[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (i == best) continue;
            pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
            vals[i] = eval(pts[i]);
        }
    }
    if (res.iterations >= opts.max_iter) res.message = "iteration limit reached";
    const auto it = std::min_element(vals.begin(), vals.end());
    res.x = pts[static_cast<std::size_t>(it - vals.begin())];
    res.f = *it;
    return res;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_OPTIMIZE_HPP
