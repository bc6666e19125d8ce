// test_analytic.cpp - closed-form pure dephasing

#include <gtest/gtest.h>

#include <cmath>

#include "quapi/analytic.hpp"

using namespace quapi;

namespace {

BathSpec bx(double beta = 5.0) { return {{1.0 / 16, 10.0, 1.0}, beta, Axis::X}; }

} // namespace

TEST(Analytic, PopulationsInXBasisAreStationary) {
    const TwoLevelSystem tls;
    const auto r0 = DensityMatrix::spin_up();
    for (double t : {0.3, 3.0, 9.0}) {
        const auto r = analytic_dephasing(bx(), tls, r0, t, LMode::ContinuousQuadrature).to_x_basis();
        EXPECT_NEAR(r(0, 0).real(), 0.5, 1e-14);
        EXPECT_NEAR(r(1, 1).real(), 0.5, 1e-14);
        EXPECT_NEAR(std::abs(r(0, 1)), 0.5 * std::exp(-4.0 * l_of_t(bx(), t, LMode::ContinuousQuadrature).value.real()), 1e-13);
    }
}

TEST(Analytic, RenormalizationFactorIsOne) {
    for (int a : {1, -1})
        for (int b : {1, -1}) EXPECT_EQ(renormalization_factor(a, b, cplx(0.3, 1.7)), cplx(1.0));
}

TEST(Analytic, DiscreteAndContinuousAgree) {
    const TwoLevelSystem tls;
    const auto r0 = DensityMatrix::pure(1.0, cplx(0.2, 0.4));
    const auto d = analytic_dephasing(bx(), tls, r0, 3.0, LMode::DiscreteSum, 0.3);
    const auto c = analytic_dephasing(bx(), tls, r0, 3.0, LMode::ContinuousQuadrature);
    EXPECT_LT((d.matrix() - c.matrix()).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Analytic, TruncatedContinuesLinearly) {
    const TwoLevelSystem tls;
    const auto r0 = DensityMatrix::spin_up();
    const double tm = 0.9, dt = 0.3;
    // at t = t_mem the truncated form coincides with the exact one
    const auto at_cut = analytic_truncated_dephasing(bx(), tls, r0, tm, tm, LMode::DiscreteSum, dt);
    const auto exact = analytic_dephasing(bx(), tls, r0, tm, LMode::DiscreteSum, dt);
    EXPECT_LT((at_cut.matrix() - exact.matrix()).cwiseAbs().maxCoeff(), 1e-14);
    // past it, log|rho_x01| falls on a line of slope -4 Re Ldot
    const auto table = truncate_eta(EtaTable::build(bx(), dt, 4), tm);
    const double slope = spurious_decay_slope(discrete_l_rate(table));
    const auto lg = [&](double t) {
        return std::log(std::abs(analytic_truncated_dephasing(bx(), tls, r0, t, tm, LMode::DiscreteSum, dt).to_x_basis()(0, 1)));
    };
    EXPECT_NEAR((lg(9.0) - lg(3.0)) / 6.0, slope, 1e-12);
    // and the spurious rate exceeds the true late-time one
    const auto lg_exact = [&](double t) {
        return std::log(std::abs(analytic_dephasing(bx(), tls, r0, t, LMode::ContinuousQuadrature).to_x_basis()(0, 1)));
    };
    EXPECT_LT(slope, (lg_exact(9.0) - lg_exact(3.0)) / 6.0);
}

TEST(Analytic, TrajectoryFollowsTable) {
    const TwoLevelSystem tls;
    const auto r0 = DensityMatrix::spin_up();
    const auto tr = analytic_dephasing_trajectory(EtaTable::build(bx(), 0.3, 10), tls, r0);
    ASSERT_EQ(tr.rho.size(), 11u);
    EXPECT_LT((tr.rho[0].matrix() - r0.matrix()).cwiseAbs().maxCoeff(), 1e-15);
    for (std::size_t n = 1; n < tr.rho.size(); ++n) {
        const auto d = analytic_dephasing(bx(), tls, r0, tr.times[n], LMode::DiscreteSum, 0.3);
        EXPECT_LT((d.matrix() - tr.rho[n].matrix()).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(Analytic, Errors) {
    const TwoLevelSystem tls;
    const auto r0 = DensityMatrix::spin_up();
    EXPECT_THROW(analytic_truncated_dephasing(bx(), tls, r0, 0.5, 0.9), DomainError);
    EXPECT_THROW(analytic_dephasing(BathSpec{{0.1, 10, 1}, 5, Axis::Z}, tls, r0, 1.0, LMode::ContinuousQuadrature), DomainError);
    EXPECT_THROW(analytic_dephasing(bx(), tls, r0, -1.0, LMode::ContinuousQuadrature), DomainError);
}
