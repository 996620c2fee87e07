#ifndef BEHAVIOR_EPI_ANALYSIS_HPP
#define BEHAVIOR_EPI_ANALYSIS_HPP

#include "behavior_epi/metzler.hpp"
#include "behavior_epi/model.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace behavior_epi {

/**
 * @brief Control reproduction number for a given value of the NPI multiplier theta_l.
 *
 * R_c = theta * (r beta_i / sigma_i + (1 - r) beta_a / gamma_a + r q beta_h / (gamma_h + delta_h)).
 */
inline double control_reproduction_number(const ModelParams& p, double theta)
{
    if (!(p.sigma_i > 0.0) || !(p.gamma_a > 0.0) || !(p.gamma_h + p.delta_h > 0.0)) {
        throw std::invalid_argument("control_reproduction_number: sigma_i, gamma_a and gamma_h + delta_h must be > 0");
    }
    return theta * (p.r * p.beta_i / p.sigma_i + (1.0 - p.r) * p.beta_a / p.gamma_a +
                    p.r * p.q * p.beta_h / (p.gamma_h + p.delta_h));
}

/// R_c with theta_l taken from the schedule at time @p t.
inline double control_reproduction_number_at(const ModelParams& p, double t)
{
    return control_reproduction_number(p, p.theta(t));
}

inline double basic_reproduction_number(const ModelParams& p)
{
    return control_reproduction_number(p, 1.0);
}

/// Relative influence ratio Gamma = c^B_12 / c^B_21 of a two-group model.
inline double influence_ratio(const ModelParams& p)
{
    if (p.groups() != 2) throw std::invalid_argument("influence_ratio: two-group parameters required");
    const double c21 = p.c_b(1, 0);
    if (!(c21 > 0.0)) throw std::invalid_argument("influence_ratio: c^B_21 must be positive");
    return p.c_b(0, 1) / c21;
}

enum class DfeKind { G1DFE, G2DFE, G3DFE, TDFE };

inline std::string_view dfe_name(DfeKind k)
{
    switch (k) {
    case DfeKind::G1DFE: return "G1DFE";
    case DfeKind::G2DFE: return "G2DFE";
    case DfeKind::G3DFE: return "G3DFE";
    case DfeKind::TDFE: return "TDFE";
    }
    return "?";
}

/**
 * @brief Disease-free equilibrium (kp, (1-k)p, 0, ..., 0) of the two-group model.
 */
struct DfePoint {
    DfeKind kind = DfeKind::G1DFE;
    double k = 1.0;
    double p = 1.0;

    static DfePoint g1(double p)
    {
        return {DfeKind::G1DFE, 1.0, p};
    }
    static DfePoint g2(double p)
    {
        return {DfeKind::G2DFE, 0.0, p};
    }
    static DfePoint g3(double k, double p)
    {
        if (!(k > 0.0 && k < 1.0)) throw std::invalid_argument("G3DFE requires 0 < k < 1");
        return {DfeKind::G3DFE, k, p};
    }
    static DfePoint trivial()
    {
        return {DfeKind::TDFE, 0.0, 0.0};
    }

    /// State vector in the model's compartment-major layout.
    Eigen::VectorXd state() const
    {
        Eigen::VectorXd y = Eigen::VectorXd::Zero(2 * kCompartments);
        y(state_index(2, Compartment::S, 0)) = k * p;
        y(state_index(2, Compartment::S, 1)) = (1.0 - k) * p;
        return y;
    }
};

/**
 * @brief Reordering of the two-group state used for the block-triangular Jacobian:
 * (S1, S2, R1, R2, E1, E2, I_a1, I_a2, I_s1, I_s2, I_h1, I_h2).
 */
inline std::array<int, 12> dfe_ordering()
{
    std::array<int, 12> order{};
    int pos = 0;
    for (auto c : {Compartment::S, Compartment::R, Compartment::E, Compartment::Ia, Compartment::Is, Compartment::Ih}) {
        for (int g = 0; g < 2; ++g) order[pos++] = static_cast<int>(state_index(2, c, g));
    }
    return order;
}

inline Eigen::MatrixXd reorder_for_dfe(const Eigen::MatrixXd& j_layout)
{
    const auto order = dfe_ordering();
    Eigen::MatrixXd out(12, 12);
    for (int r = 0; r < 12; ++r) {
        for (int c = 0; c < 12; ++c) out(r, c) = j_layout(order[r], order[c]);
    }
    return out;
}

/**
 * @brief Analytic Jacobian of the two-group model at a non-trivial DFE, in dfe_ordering().
 *
 * theta_l is evaluated from the schedule at time @p t.
 */
inline Eigen::MatrixXd jacobian_at_dfe(const ModelParams& p, const DfePoint& dfe, double t = 0.0)
{
    if (p.groups() != 2) throw std::invalid_argument("jacobian_at_dfe: two-group parameters required");
    if (dfe.kind == DfeKind::TDFE || !(dfe.p > 0.0)) {
        throw std::invalid_argument("jacobian_at_dfe: the trivial equilibrium is excluded");
    }
    const double k = dfe.k;
    const double c12 = p.c_b(0, 1);
    const double c21 = p.c_b(1, 0);
    const double theta = p.theta(t);
    const std::array<double, 2> share{k, 1.0 - k};
    constexpr int n = 2;
    auto at = [](Compartment c, int g) { return static_cast<int>(state_index(n, c, g)); };

    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(12, 12);
    // influence terms of the non-susceptible classes (only the direct terms survive at a DFE)
    for (auto c : kAllCompartments) {
        j(at(c, 0), at(c, 0)) += -c21 * (1.0 - k);
        j(at(c, 0), at(c, 1)) += c12 * k;
        j(at(c, 1), at(c, 0)) += c21 * (1.0 - k);
        j(at(c, 1), at(c, 1)) += -c12 * k;
    }
    // S influence: the group sizes in the influence weights depend on every compartment
    const double weight = c12 * (1.0 - k) + c21 * k;
    for (auto c : kAllCompartments) {
        j(at(Compartment::S, 0), at(c, 0)) += (1.0 - k) * weight;
        j(at(Compartment::S, 0), at(c, 1)) += -k * weight;
        j(at(Compartment::S, 1), at(c, 0)) -= (1.0 - k) * weight;
        j(at(Compartment::S, 1), at(c, 1)) -= -k * weight;
    }
    for (int g = 0; g < n; ++g) {
        // infection enters S and E through the infectious classes of both groups
        for (int h = 0; h < n; ++h) {
            const double base = theta * share[g];
            j(at(Compartment::S, g), at(Compartment::Ia, h)) -= base * p.beta_a;
            j(at(Compartment::S, g), at(Compartment::Is, h)) -= base * p.beta_i;
            j(at(Compartment::S, g), at(Compartment::Ih, h)) -= base * p.beta_h;
            j(at(Compartment::E, g), at(Compartment::Ia, h)) += base * p.beta_a;
            j(at(Compartment::E, g), at(Compartment::Is, h)) += base * p.beta_i;
            j(at(Compartment::E, g), at(Compartment::Ih, h)) += base * p.beta_h;
        }
        j(at(Compartment::S, g), at(Compartment::R, g)) += p.xi;
        j(at(Compartment::E, g), at(Compartment::E, g)) -= p.sigma_e;
        j(at(Compartment::Ia, g), at(Compartment::E, g)) += (1.0 - p.r) * p.sigma_e;
        j(at(Compartment::Ia, g), at(Compartment::Ia, g)) -= p.gamma_a;
        j(at(Compartment::Is, g), at(Compartment::E, g)) += p.r * p.sigma_e;
        j(at(Compartment::Is, g), at(Compartment::Is, g)) -= p.sigma_i;
        j(at(Compartment::Ih, g), at(Compartment::Is, g)) += p.q * p.sigma_i;
        j(at(Compartment::Ih, g), at(Compartment::Ih, g)) -= p.gamma_h + p.delta_h;
        j(at(Compartment::R, g), at(Compartment::Ia, g)) += p.gamma_a;
        j(at(Compartment::R, g), at(Compartment::Is, g)) += (1.0 - p.q) * p.sigma_i;
        j(at(Compartment::R, g), at(Compartment::Ih, g)) += p.gamma_h;
        j(at(Compartment::R, g), at(Compartment::R, g)) -= p.xi;
    }
    return reorder_for_dfe(j);
}

/**
 * @brief Finite-difference Jacobian of rhs() at @p y (model layout), step rel_step * max(1, max_i |y_i|).
 *
 * Central differences in the interior; where a backward step would leave the admissible region (a compartment
 * at zero) the fourth-order forward stencil (-25 f0 + 48 f1 - 36 f2 + 16 f3 - 3 f4) / 12h is used instead,
 * which keeps the truncation error negligible against the exp(-a I_h / N) curvature.
 */
inline Eigen::MatrixXd finite_difference_jacobian(const ModelParams& p, const Eigen::VectorXd& y, double t = 0.0,
                                                  double rel_step = 1e-6)
{
    const Eigen::Index m = y.size();
    const double scale = std::max(1.0, y.cwiseAbs().maxCoeff());
    const double h = rel_step * scale;
    Eigen::MatrixXd j(m, m);
    Eigen::VectorXd f0(m), fp(m), fm(m);
    rhs(p, t, y, f0);
    for (Eigen::Index c = 0; c < m; ++c) {
        Eigen::VectorXd yp = y, ym = y;
        yp(c) += h;
        ym(c) -= h;
        rhs(p, t, yp, fp);
        if (ym(c) >= -1e-9 * y.sum()) {
            rhs(p, t, ym, fm);
            j.col(c) = (fp - fm) / (2.0 * h);
        }
        else {
            static constexpr std::array<double, 5> w{-25.0, 48.0, -36.0, 16.0, -3.0};
            Eigen::VectorXd acc = w[0] * f0 + w[1] * fp;
            for (int k = 2; k <= 4; ++k) {
                Eigen::VectorXd yk = y;
                yk(c) += k * h;
                rhs(p, t, yk, fm);
                acc += w[static_cast<std::size_t>(k)] * fm;
            }
            j.col(c) = acc / (12.0 * h);
        }
    }
    return j;
}

enum class Stability { Stable, MarginallyStable, Unstable };

inline std::string_view stability_name(Stability s)
{
    switch (s) {
    case Stability::Stable: return "stable";
    case Stability::MarginallyStable: return "marginally-stable";
    case Stability::Unstable: return "unstable";
    }
    return "?";
}

/**
 * @brief Spectrum-based classification: all Re < -tol is stable; max Re <= tol with exactly one eigenvalue
 * of |Re| <= tol is marginally stable; anything else (including repeated zero modes) is unstable.
 */
inline Stability classify_spectrum(const Eigen::MatrixXd& j, double tol = 1e-9)
{
    Eigen::EigenSolver<Eigen::MatrixXd> es(j, false);
    if (es.info() != Eigen::Success) throw std::runtime_error("classify_spectrum: eigensolver failed");
    const Eigen::VectorXd re = es.eigenvalues().real();
    if (re.maxCoeff() > tol) return Stability::Unstable;
    int zero_modes = 0;
    for (Eigen::Index i = 0; i < re.size(); ++i) {
        if (std::abs(re(i)) <= tol) ++zero_modes;
    }
    if (zero_modes == 0) return Stability::Stable;
    return zero_modes == 1 ? Stability::MarginallyStable : Stability::Unstable;
}

/**
 * @brief Stability of the all-in-Group-1 equilibrium from the threshold conditions, with an eigenvalue cross-check.
 */
struct StabilityVerdict {
    struct Condition {
        bool holds = false;
        double lhs = 0.0; ///< evaluated left-hand side (c1: c12 - c21, compared with 0; others compared with 1)
    };
    Condition c1, c2, c3, c4;
    bool metzler_stable = false;
    double eigen_max_real_part = 0.0;
    Stability eigen_classification = Stability::Unstable;
    Stability verdict = Stability::Unstable;

    bool consistent() const
    {
        return verdict == eigen_classification;
    }
};

inline StabilityVerdict g1dfe_stability(const ModelParams& p, double t = 0.0, double population = 1.0)
{
    if (p.groups() != 2) throw std::invalid_argument("g1dfe_stability: two-group parameters required");
    StabilityVerdict v;
    const double theta = p.theta(t);
    const double c12 = p.c_b(0, 1);
    const double c21 = p.c_b(1, 0);
    v.c1 = {c12 > c21, c12 - c21};
    const double a_path = (1.0 - p.r) * p.beta_a * theta / p.gamma_a;
    v.c2 = {a_path < 1.0, a_path};
    const double as_path = p.r * p.beta_i * theta / p.sigma_i + a_path;
    v.c3 = {as_path < 1.0, as_path};
    const double rc = control_reproduction_number(p, theta);
    v.c4 = {rc < 1.0, rc};

    const Eigen::MatrixXd j = jacobian_at_dfe(p, DfePoint::g1(population), t);
    v.metzler_stable = metzler_stable(j.bottomRightCorner(8, 8));
    v.eigen_max_real_part = max_real_eigenvalue(j);
    v.eigen_classification = classify_spectrum(j);
    v.verdict = (v.c1.holds && v.c4.holds) ? Stability::MarginallyStable : Stability::Unstable;
    return v;
}

/// Attracting equilibrium class for a (Gamma, R_c) pair.
inline DfeKind stability_label(double gamma, double rc, double gamma_rel_tol = 1e-12)
{
    if (!(gamma > 0.0) || !(rc > 0.0)) throw std::invalid_argument("stability_label: grid values must be positive");
    if (rc >= 1.0) return DfeKind::TDFE;
    if (std::abs(gamma - 1.0) <= gamma_rel_tol) return DfeKind::G3DFE;
    return gamma > 1.0 ? DfeKind::G1DFE : DfeKind::G2DFE;
}

struct RegionCell {
    double gamma = 0.0;
    double rc = 0.0;
    DfeKind label = DfeKind::TDFE;
};

/// Labels every (Gamma, R_c) combination of the two grids, Gamma varying slowest.
inline std::vector<RegionCell> stability_region(const std::vector<double>& gammas, const std::vector<double>& rcs)
{
    std::vector<RegionCell> out;
    out.reserve(gammas.size() * rcs.size());
    for (double g : gammas) {
        for (double r : rcs) out.push_back({g, r, stability_label(g, r)});
    }
    return out;
}

inline void write_region_csv(const std::vector<RegionCell>& cells, std::ostream& os)
{
    os << "gamma,R_c,label\n";
    for (const auto& c : cells) os << c.gamma << ',' << c.rc << ',' << dfe_name(c.label) << '\n';
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_ANALYSIS_HPP
