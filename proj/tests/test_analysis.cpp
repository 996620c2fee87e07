#include "behavior_epi/analysis.hpp"
#include "behavior_epi/baseline.hpp"
#include "behavior_epi/integrator.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace behavior_epi;

namespace {

ModelParams low_transmission(double c12, double c21)
{
    ModelParams p = two_group_baseline();
    p.theta = LockdownSchedule::constant(1.0);
    p.beta_a = 0.1;
    p.beta_i = 0.05;
    p.c_b(0, 1) = c12;
    p.c_b(1, 0) = c21;
    return p;
}

ModelParams high_transmission(double c12, double c21)
{
    ModelParams p = low_transmission(c12, c21);
    p.beta_a = 1.0;
    p.beta_i = 0.5;
    return p;
}

} // namespace

TEST(ReproductionNumber, BehaviorFreePhaseValues)
{
    const auto p = epidemiological_baseline();
    const std::array<double, 4> expected{2.43, 0.083, 0.961, 1.339};
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_NEAR(control_reproduction_number(p, kBehaviorFreeTheta[i]), expected[i], 1e-3);
    }
}

TEST(ReproductionNumber, BasicValueMatchesNextGenerationOracle)
{
    const auto p = epidemiological_baseline();
    EXPECT_NEAR(basic_reproduction_number(p), 5.4, 1e-12);
    EXPECT_NEAR(basic_reproduction_number(p), oracle::next_generation_radius(test_support::rates_of(p), 1.0), 1e-10);
}

TEST(ReproductionNumber, TrivialCases)
{
    auto p = epidemiological_baseline();
    p.beta_a = p.beta_i = p.beta_h = 0.0;
    EXPECT_EQ(control_reproduction_number(p, 0.7), 0.0);
    p = epidemiological_baseline();
    p.beta_i = p.sigma_i;
    p.r = 1.0;
    p.beta_a = p.beta_h = 0.0;
    EXPECT_DOUBLE_EQ(basic_reproduction_number(p), 1.0);
    p = epidemiological_baseline();
    EXPECT_DOUBLE_EQ(control_reproduction_number(p, 0.3), 0.3 * basic_reproduction_number(p));
}

TEST(ReproductionNumber, ScheduleLookup)
{
    const auto p = two_group_baseline();
    EXPECT_DOUBLE_EQ(control_reproduction_number_at(p, 50.0), control_reproduction_number(p, kTwoGroupTheta[1]));
}

TEST(ReproductionNumber, RandomDrawsMatchNextGenerationMatrix)
{
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 500; ++trial) {
        auto p = epidemiological_baseline();
        const auto k = oracle::random_rates(rng);
        test_support::set_rates(p, k);
        const double theta = u(rng);
        EXPECT_LT(test_support::rel_diff(control_reproduction_number(p, theta), oracle::next_generation_radius(k, theta)),
                  1e-8);
    }
}

TEST(ReproductionNumber, ZeroDenominatorsAreRejected)
{
    auto p = epidemiological_baseline();
    p.gamma_a = 0.0;
    EXPECT_THROW(basic_reproduction_number(p), std::invalid_argument);
}

TEST(InfluenceRatio, Values)
{
    EXPECT_NEAR(influence_ratio(two_group_baseline()), 3.0, 1e-12);
    EXPECT_DOUBLE_EQ(influence_ratio(low_transmission(0.5, 0.5)), 1.0);
    EXPECT_DOUBLE_EQ(influence_ratio(low_transmission(0.5, 0.25)), 2.0);
    EXPECT_THROW(influence_ratio(low_transmission(0.5, 0.0)), std::invalid_argument);
    EXPECT_THROW(influence_ratio(behavior_free_baseline()), std::invalid_argument);
}

TEST(Jacobian, G1BlocksMatchHandDerivedMatrices)
{
    const auto p = two_group_baseline();
    const double c12 = p.c_b(0, 1), c21 = p.c_b(1, 0), xi = p.xi;
    const double theta = p.theta(0.0);
    const auto j = jacobian_at_dfe(p, DfePoint::g1(kNycPopulation));
    Eigen::Matrix4d a11;
    a11 << 0, c12 - c21, xi, -c21,
           0, c21 - c12, 0, c21 + xi,
           0, 0, -xi, c12,
           0, 0, 0, -c12 - xi;
    EXPECT_LT((j.topLeftCorner(4, 4) - a11).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(j.bottomLeftCorner(8, 4).cwiseAbs().maxCoeff(), 0.0);

    const double se = p.sigma_e, si = p.sigma_i, ga = p.gamma_a, hd = p.gamma_h + p.delta_h, r = p.r, q = p.q;
    const double ba = p.beta_a * theta, bi = p.beta_i * theta, bh = p.beta_h * theta;
    Eigen::Matrix<double, 8, 8> a22;
    a22 << -se, c12, ba, ba, bi, bi, bh, bh,
           0, -c12 - se, 0, 0, 0, 0, 0, 0,
           (1 - r) * se, 0, -ga, c12, 0, 0, 0, 0,
           0, (1 - r) * se, 0, -c12 - ga, 0, 0, 0, 0,
           r * se, 0, 0, 0, -si, c12, 0, 0,
           0, r * se, 0, 0, 0, -c12 - si, 0, 0,
           0, 0, 0, 0, q * si, 0, -hd, c12,
           0, 0, 0, 0, 0, q * si, 0, -c12 - hd;
    EXPECT_LT((j.bottomRightCorner(8, 8) - a22).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Jacobian, G1SpectrumOfNonDiseaseBlock)
{
    const auto p = two_group_baseline();
    const auto j = jacobian_at_dfe(p, DfePoint::g1(1e6));
    Eigen::EigenSolver<Eigen::MatrixXd> es(j.topLeftCorner(4, 4), false);
    std::vector<double> ev;
    for (int i = 0; i < 4; ++i) ev.push_back(es.eigenvalues()(i).real());
    std::sort(ev.begin(), ev.end());
    std::vector<double> expected{0.0, p.c_b(1, 0) - p.c_b(0, 1), -p.xi, -p.c_b(0, 1) - p.xi};
    std::sort(expected.begin(), expected.end());
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(ev[i], expected[i], 1e-12);
}

TEST(Jacobian, AllRatesZeroGivesZeroMatrix)
{
    ModelParams p;
    p.a = Eigen::VectorXd::Zero(2);
    p.c_b = Eigen::MatrixXd::Zero(2, 2);
    EXPECT_EQ(jacobian_at_dfe(p, DfePoint::g3(0.4, 100.0)).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Jacobian, MatchesFiniteDifferences)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        auto p = two_group_baseline();
        test_support::set_rates(p, oracle::random_rates(rng));
        p.a << 5000.0 * u(rng), 5000.0 * u(rng);
        p.c_b(0, 1) = u(rng);
        p.c_b(1, 0) = u(rng);
        p.theta = LockdownSchedule::constant(u(rng));
        for (const auto& dfe : {DfePoint::g1(1e6), DfePoint::g2(1e6), DfePoint::g3(u(rng), 1e6)}) {
            const Eigen::MatrixXd ja = jacobian_at_dfe(p, dfe);
            const Eigen::MatrixXd jf = reorder_for_dfe(finite_difference_jacobian(p, dfe.state()));
            const double scale = ja.cwiseAbs().maxCoeff();
            for (int r = 0; r < 12; ++r) {
                for (int c = 0; c < 12; ++c) {
                    const double tol = 1e-6 * std::max(std::abs(ja(r, c)), 1e-3 * scale);
                    EXPECT_NEAR(jf(r, c), ja(r, c), tol) << dfe_name(dfe.kind) << " entry " << r << "," << c;
                }
            }
        }
    }
}

TEST(Jacobian, RejectsTrivialEquilibriumAndWrongGroupCount)
{
    EXPECT_THROW(jacobian_at_dfe(two_group_baseline(), DfePoint::trivial()), std::invalid_argument);
    EXPECT_THROW(jacobian_at_dfe(behavior_free_baseline(), DfePoint::g1(1.0)), std::invalid_argument);
    EXPECT_THROW(DfePoint::g3(1.0, 1.0), std::invalid_argument);
}

TEST(Metzler, NegativeIdentityIsStable)
{
    for (int n = 1; n <= 12; ++n) EXPECT_TRUE(metzler_stable(-Eigen::MatrixXd::Identity(n, n)));
}

TEST(Metzler, HandComputedUnstableMatrix)
{
    Eigen::Matrix2d m;
    m << -1, 2, 2, -1;  // eigenvalues 1 and -3
    EXPECT_FALSE(metzler_stable(m));
}

TEST(Metzler, ZeroPivotIsNotStable)
{
    Eigen::Matrix2d m;
    m << 0, 0, 0, -1;
    EXPECT_FALSE(metzler_stable(m));
}

TEST(Metzler, RejectsNonMetzlerInput)
{
    Eigen::Matrix2d m;
    m << -1, -0.5, 0, -1;
    EXPECT_THROW(metzler_stable(m), std::invalid_argument);
    EXPECT_THROW(metzler_stable(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(Metzler, AgreesWithEigenvaluesOnRandomMatrices)
{
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> dim(2, 12);
    std::uniform_real_distribution<double> off(0.0, 1.0);
    int checked = 0;
    for (int trial = 0; checked < 1000; ++trial) {
        const int n = dim(rng);
        Eigen::MatrixXd m(n, n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) m(i, j) = i == j ? 0.0 : off(rng);
        }
        // diagonal shifted around the Perron root so that both verdicts occur
        std::uniform_real_distribution<double> diag(0.5, 1.5);
        const double rowmax = m.rowwise().sum().maxCoeff();
        for (int i = 0; i < n; ++i) m(i, i) = -diag(rng) * rowmax;
        const double lead = max_real_eigenvalue(m);
        if (std::abs(lead) < 1e-8) continue;
        ++checked;
        EXPECT_EQ(metzler_stable(m), lead < 0.0) << "n=" << n << " max Re=" << lead;
    }
}

TEST(G1Stability, LowTransmissionWithDominantGroupOneInfluence)
{
    const auto v = g1dfe_stability(low_transmission(0.5, 0.25));
    EXPECT_NEAR(v.c4.lhs, 0.78, 1e-12);
    EXPECT_TRUE(v.c1.holds);
    EXPECT_TRUE(v.c2.holds);
    EXPECT_TRUE(v.c3.holds);
    EXPECT_TRUE(v.c4.holds);
    EXPECT_TRUE(v.metzler_stable);
    EXPECT_EQ(v.verdict, Stability::MarginallyStable);
    EXPECT_TRUE(v.consistent());
    EXPECT_NEAR(v.eigen_max_real_part, 0.0, 1e-12);
}

TEST(G1Stability, HighTransmissionIsUnstable)
{
    const auto v = g1dfe_stability(high_transmission(0.5, 0.25));
    EXPECT_NEAR(v.c4.lhs, 7.8, 1e-12);
    EXPECT_EQ(v.verdict, Stability::Unstable);
    EXPECT_FALSE(v.metzler_stable);
    EXPECT_TRUE(v.consistent());
}

TEST(G1Stability, EqualInfluenceRatesAreNotStable)
{
    const auto v = g1dfe_stability(low_transmission(0.5, 0.5));
    EXPECT_FALSE(v.c1.holds);
    EXPECT_EQ(v.verdict, Stability::Unstable);
    EXPECT_TRUE(v.consistent());
}

TEST(G1Stability, ConditionsAgreeWithSpectrumOnRandomDraws)
{
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
        auto p = two_group_baseline();
        test_support::set_rates(p, oracle::random_rates(rng));
        p.xi = u(rng) * 0.1;
        p.c_b(0, 1) = u(rng);
        p.c_b(1, 0) = u(rng);
        p.theta = LockdownSchedule::constant(u(rng));
        const double rc = control_reproduction_number(p, p.theta(0.0));
        if (std::abs(rc - 1.0) < 1e-3 || std::abs(p.c_b(0, 1) - p.c_b(1, 0)) < 1e-3) continue;
        const auto v = g1dfe_stability(p);
        EXPECT_TRUE(v.consistent()) << "R_c=" << rc;
        EXPECT_EQ(v.metzler_stable, rc < 1.0);
        ++checked;
    }
    EXPECT_GT(checked, 250);
}

TEST(StabilityRegion, Labels)
{
    EXPECT_EQ(stability_label(2.0, 0.5), DfeKind::G1DFE);
    EXPECT_EQ(stability_label(0.5, 0.5), DfeKind::G2DFE);
    EXPECT_EQ(stability_label(1.0, 0.5), DfeKind::G3DFE);
    EXPECT_EQ(stability_label(0.5, 1.5), DfeKind::TDFE);
    EXPECT_THROW(stability_label(0.0, 0.5), std::invalid_argument);
    const auto cells = stability_region({0.5, 1.0, 2.0}, {0.5, 2.0});
    ASSERT_EQ(cells.size(), 6u);
    EXPECT_EQ(cells[4].label, DfeKind::G1DFE);
    EXPECT_EQ(cells[5].label, DfeKind::TDFE);
}

namespace {

SystemState random_start(std::mt19937_64& rng, double total)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SystemState s = SystemState::zeros(2);
    for (int g = 0; g < 2; ++g) {
        s(Compartment::S, g) = u(rng);
        s(Compartment::E, g) = 0.01 * u(rng);
        s(Compartment::Ia, g) = 0.01 * u(rng);
        s(Compartment::Is, g) = 0.01 * u(rng);
        s(Compartment::R, g) = 0.1 * u(rng);
    }
    s.values *= total / s.values.sum();
    return s;
}

} // namespace

TEST(Convergence, LowTransmissionApproachesPredictedEquilibrium)
{
    std::mt19937_64 rng(4242);
    for (auto [c12, c21] : {std::pair{0.5, 0.25}, std::pair{0.25, 0.5}, std::pair{0.5, 0.5}}) {
        const auto p = low_transmission(c12, c21);
        const auto traj = integrate(p, random_start(rng, 1e6), 4000.0, 100.0);
        const std::size_t last = traj.size() - 1;
        const double n_end = traj.population(last);
        const double n1 = traj.group_size(last, 0) / n_end;
        EXPECT_LT(traj.infected(last), 1e-6 * 1e6);
        if (c12 > c21) { EXPECT_GT(n1, 1.0 - 1e-3); }
        if (c12 < c21) { EXPECT_LT(n1, 1e-3); }
        if (c12 == c21) {
            EXPECT_GT(n1, 1e-3);
            EXPECT_LT(n1, 1.0 - 1e-3);
        }
    }
}

TEST(Convergence, KermackMcKendrickWithoutWaning)
{
    auto p = high_transmission(0.5, 0.25);
    p.xi = 0.0;
    std::mt19937_64 rng(99);
    const auto traj = integrate(p, random_start(rng, 1e6), 2000.0, 10.0);
    const std::size_t last = traj.size() - 1;
    EXPECT_GT(traj.compartment_total(last, Compartment::S), 0.0);
    EXPECT_LT(traj.infected(last), 1.0);
}
