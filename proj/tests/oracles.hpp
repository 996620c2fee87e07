#ifndef BEHAVIOR_EPI_TESTS_ORACLES_HPP
#define BEHAVIOR_EPI_TESTS_ORACLES_HPP

// Independent reference computations used to check the library. Nothing here calls the library's
// right-hand side or threshold formulas.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>

namespace oracle {

struct Rates {
    double beta_a, beta_i, beta_h, xi, sigma_e, sigma_i, gamma_a, gamma_h, delta_h, r, q;
};

/// Named two-group state; every field is a plain scalar.
struct TwoGroup {
    double S1, S2, E1, E2, Ia1, Ia2, Is1, Is2, Ih1, Ih2, R1, R2;
};

struct TwoGroupDerivative {
    double S1, S2, E1, E2, Ia1, Ia2, Is1, Is2, Ih1, Ih2, R1, R2;
};

/// Term-by-term transcription of the written-out two-group equations.
inline TwoGroupDerivative two_group_rhs(const Rates& k, double theta, double a1, double a2, double c12, double c21,
                                        const TwoGroup& x)
{
    const double N1 = x.S1 + x.E1 + x.Ia1 + x.Is1 + x.Ih1 + x.R1;
    const double N2 = x.S2 + x.E2 + x.Ia2 + x.Is2 + x.Ih2 + x.R2;
    const double N = N1 + N2;
    const double Ih = x.Ih1 + x.Ih2;
    const double cA1 = std::exp(-a1 * Ih / N);
    const double cA2 = std::exp(-a2 * Ih / N);
    const double pressure = cA1 * (k.beta_a * x.Ia1 + k.beta_i * x.Is1 + k.beta_h * x.Ih1) +
                            cA2 * (k.beta_a * x.Ia2 + k.beta_i * x.Is2 + k.beta_h * x.Ih2);
    const double inf1 = theta * cA1 * x.S1 / N * pressure;
    const double inf2 = theta * cA2 * x.S2 / N * pressure;
    auto mv1 = [&](double v1, double v2) { return c12 * v2 * N1 / N - c21 * v1 * N2 / N; };
    TwoGroupDerivative d{};
    d.S1 = k.xi * x.R1 - inf1 + mv1(x.S1, x.S2);
    d.S2 = k.xi * x.R2 - inf2 - mv1(x.S1, x.S2);
    d.E1 = inf1 - k.sigma_e * x.E1 + mv1(x.E1, x.E2);
    d.E2 = inf2 - k.sigma_e * x.E2 - mv1(x.E1, x.E2);
    d.Ia1 = (1 - k.r) * k.sigma_e * x.E1 - k.gamma_a * x.Ia1 + mv1(x.Ia1, x.Ia2);
    d.Ia2 = (1 - k.r) * k.sigma_e * x.E2 - k.gamma_a * x.Ia2 - mv1(x.Ia1, x.Ia2);
    d.Is1 = k.r * k.sigma_e * x.E1 - k.sigma_i * x.Is1 + mv1(x.Is1, x.Is2);
    d.Is2 = k.r * k.sigma_e * x.E2 - k.sigma_i * x.Is2 - mv1(x.Is1, x.Is2);
    d.Ih1 = k.q * k.sigma_i * x.Is1 - (k.gamma_h + k.delta_h) * x.Ih1 + mv1(x.Ih1, x.Ih2);
    d.Ih2 = k.q * k.sigma_i * x.Is2 - (k.gamma_h + k.delta_h) * x.Ih2 - mv1(x.Ih1, x.Ih2);
    d.R1 = k.gamma_a * x.Ia1 + (1 - k.q) * k.sigma_i * x.Is1 + k.gamma_h * x.Ih1 - k.xi * x.R1 + mv1(x.R1, x.R2);
    d.R2 = k.gamma_a * x.Ia2 + (1 - k.q) * k.sigma_i * x.Is2 + k.gamma_h * x.Ih2 - k.xi * x.R2 - mv1(x.R1, x.R2);
    return d;
}

/**
 * Spectral radius of F V^-1 for the infected subsystem (E, I_a, I_s, I_h) of the behavior-free model
 * linearized at a disease-free state.
 */
inline double next_generation_radius(const Rates& k, double theta)
{
    Eigen::Matrix4d F = Eigen::Matrix4d::Zero();
    F(0, 1) = theta * k.beta_a;
    F(0, 2) = theta * k.beta_i;
    F(0, 3) = theta * k.beta_h;
    Eigen::Matrix4d V = Eigen::Matrix4d::Zero();
    V(0, 0) = k.sigma_e;
    V(1, 0) = -(1 - k.r) * k.sigma_e;
    V(1, 1) = k.gamma_a;
    V(2, 0) = -k.r * k.sigma_e;
    V(2, 2) = k.sigma_i;
    V(3, 2) = -k.q * k.sigma_i;
    V(3, 3) = k.gamma_h + k.delta_h;
    const Eigen::Matrix4d K = F * V.inverse();
    Eigen::EigenSolver<Eigen::Matrix4d> es(K, false);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Random rates with every component strictly positive and fractions inside (0, 1).
template <class Rng>
Rates random_rates(Rng& rng)
{
    std::uniform_real_distribution<double> u(0.01, 2.0), f(0.05, 0.95);
    return {u(rng), u(rng), u(rng), u(rng) * 0.05, u(rng), u(rng), u(rng), u(rng), u(rng), f(rng), f(rng)};
}

} // namespace oracle

#endif // BEHAVIOR_EPI_TESTS_ORACLES_HPP
