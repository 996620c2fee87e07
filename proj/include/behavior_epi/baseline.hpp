#ifndef BEHAVIOR_EPI_BASELINE_HPP
#define BEHAVIOR_EPI_BASELINE_HPP

#include "behavior_epi/calendar.hpp"
#include "behavior_epi/model.hpp"

#include <array>
#include <stdexcept>

namespace behavior_epi {

/// New York City population used as N(0).
inline constexpr double kNycPopulation = 8'336'817.0;

/**
 * @brief Phased NPI schedule: theta = 1 before the first lockdown, then four calendar phases.
 */
inline LockdownSchedule phased_schedule(const std::array<double, 4>& theta, int phase1_start = calendar::kPhase1Start)
{
    return LockdownSchedule({{0, 1.0},
                             {phase1_start, theta[0]},
                             {calendar::kPhase2Start, theta[1]},
                             {calendar::kPhase3Start, theta[2]},
                             {calendar::kPhase4Start, theta[3]}});
}

/// Fitted phase multipliers of the two-group model.
inline constexpr std::array<double, 4> kTwoGroupTheta{0.74664, 0.00133, 0.15427, 0.30970};
/// Fitted phase multipliers of the behavior-free model.
inline constexpr std::array<double, 4> kBehaviorFreeTheta{0.45, 0.0153, 0.178, 0.248};

/// Fixed epidemiological rates shared by both model variants (beta_h = 0).
inline ModelParams epidemiological_baseline()
{
    ModelParams p;
    p.beta_a = 0.625;
    p.beta_i = 0.375;
    p.beta_h = 0.0;
    p.xi = 1.0 / 180.0;
    p.sigma_e = 0.25;
    p.sigma_i = 1.0 / 14.0;
    p.gamma_a = 1.0 / 9.0;
    p.gamma_h = 0.1;
    p.delta_h = 0.41;
    p.r = 0.6;
    p.q = 0.05;
    return p;
}

/// Two-group baseline: fitted behavior exponents, influence rates and phase multipliers.
inline ModelParams two_group_baseline()
{
    ModelParams p = epidemiological_baseline();
    p.a = Eigen::Vector2d(8000.0, 2800.0);
    p.c_b = Eigen::Matrix2d::Zero();
    p.c_b(0, 1) = 1.0 / 30.0;
    p.c_b(1, 0) = 1.0 / 90.0;
    p.theta = phased_schedule(kTwoGroupTheta);
    return p;
}

/// Single-group behavior-free baseline with its own fitted phase multipliers.
inline ModelParams behavior_free_baseline()
{
    ModelParams p = epidemiological_baseline();
    p.a = Eigen::VectorXd::Zero(1);
    p.c_b = Eigen::MatrixXd::Zero(1, 1);
    p.theta = phased_schedule(kBehaviorFreeTheta);
    return p;
}

/**
 * @brief Recipe for the epoch state: susceptibles split k : (1-k) between the extreme groups and an infected
 * seed placed in the most risk-tolerant group.
 */
struct InitialConditions {
    double population = kNycPopulation;
    double k = 0.0;
    double seed = 4500.0;
    Compartment seed_compartment = Compartment::Ia;
};

inline SystemState make_initial_state(const InitialConditions& ic, int n_groups = 2)
{
    if (!(ic.k >= 0.0 && ic.k <= 1.0)) throw std::invalid_argument("initial conditions: k must lie in [0,1]");
    if (!(ic.population > 0.0) || ic.seed < 0.0 || ic.seed > ic.population) {
        throw std::invalid_argument("initial conditions: need 0 <= seed <= population, population > 0");
    }
    if (n_groups < 1) throw std::invalid_argument("initial conditions: n must be >= 1");
    SystemState s = SystemState::zeros(n_groups);
    const double susceptible = ic.population - ic.seed;
    const int last = n_groups - 1;
    s(Compartment::S, 0) += ic.k * susceptible;
    s(Compartment::S, last) += (1.0 - ic.k) * susceptible;
    s(ic.seed_compartment, last) += ic.seed;
    return s;
}

} // namespace behavior_epi

#endif // BEHAVIOR_EPI_BASELINE_HPP
