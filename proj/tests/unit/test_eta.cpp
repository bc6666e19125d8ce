// test_eta.cpp - influence coefficients against time-domain integrals of the pole-series C(t)

#include <gtest/gtest.h>

#include <cmath>

#include "oracles/correlation_oracle.hpp"
#include "quapi/eta.hpp"

using namespace quapi;

namespace {

constexpr double kDt = 0.3;
constexpr int kN = 10;

BathSpec bath(Axis axis, double beta = 5.0) { return BathSpec{{1.0 / 16, 10.0, 1.0}, beta, axis}; }
oracle::Ohmic ref(double beta = 5.0) { return {1.0 / 16, 10.0, beta}; }

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

} // namespace

TEST(Classify, GeneralCases) {
    EXPECT_EQ(classify_general(4, 2, 10), EtaCase::Interior);
    EXPECT_EQ(classify_general(4, 0, 10), EtaCase::FromStart);
    EXPECT_EQ(classify_general(10, 3, 10), EtaCase::ToEnd);
    EXPECT_EQ(classify_general(10, 0, 10), EtaCase::StartToEnd);
    EXPECT_EQ(classify_general(5, 5, 10), EtaCase::DiagonalInterior);
    EXPECT_EQ(classify_general(0, 0, 10), EtaCase::DiagonalStart);
    EXPECT_EQ(classify_general(10, 10, 10), EtaCase::DiagonalEnd);
    EXPECT_EQ(classify_dephasing(3, 3), EtaCase::DephasingDiagonal);
    EXPECT_EQ(classify_dephasing(3, 1), EtaCase::DephasingOffDiagonal);
    EXPECT_THROW(classify_general(2, 3, 10), DomainError);
    EXPECT_THROW(classify_general(11, 3, 10), DomainError);
}

TEST(EtaGeneral, EveryCaseMatchesTimeQuadrature) {
    const auto t = EtaTable::build(bath(Axis::Z), kDt, kN);
    const auto o = ref();
    int checked = 0;
    const auto check = [&](int j, int jp) {
        const cplx want = oracle::eta_general(o, j, jp, kN, kDt);
        EXPECT_LT(rel(t(j, jp), want), 1e-6) << "j " << j << " j' " << jp;
        EXPECT_LT(rel(eta_general(bath(Axis::Z), j, jp, kN, kDt), want), 1e-6) << "j " << j << " j' " << jp;
        ++checked;
    };
    for (int lag = 0; lag <= 8; ++lag) {
        if (lag == 0) {
            check(0, 0);
            check(5, 5);
            check(kN, kN);
            continue;
        }
        check(lag + 1, 1);   // interior
        check(lag, 0);       // from start
        check(kN, kN - lag); // to end
    }
    check(kN, 0); // start to end, lag 10
    EXPECT_EQ(checked, 3 + 8 * 3 + 1);
}

TEST(EtaDephasing, BothCasesMatchTimeQuadrature) {
    const auto t = EtaTable::build(bath(Axis::X), kDt, kN);
    const auto o = ref();
    for (int lag = 0; lag <= 8; ++lag) {
        const cplx want = oracle::eta_dephasing(o, lag + 1, 1, kDt);
        EXPECT_LT(rel(t(lag + 1, 1), want), 1e-6) << "lag " << lag;
        EXPECT_LT(rel(eta_dephasing(bath(Axis::X), lag + 1, 1, kDt), want), 1e-6);
    }
}

TEST(EtaTable, Symmetries) {
    const auto z = EtaTable::build(bath(Axis::Z), kDt, kN);
    const auto x = EtaTable::build(bath(Axis::X), kDt, kN);
    for (int lag = 1; lag < kN; ++lag) {
        EXPECT_EQ(z.coefficient(EtaCase::FromStart, lag), z.coefficient(EtaCase::ToEnd, lag));
        EXPECT_EQ(x.coefficient(EtaCase::DephasingOffDiagonal, lag), z.coefficient(EtaCase::Interior, lag));
    }
    EXPECT_EQ(x.coefficient(EtaCase::DephasingDiagonal, 0), z.coefficient(EtaCase::DiagonalInterior, 0));
    EXPECT_EQ(z.coefficient(EtaCase::DiagonalStart, 0), z.coefficient(EtaCase::DiagonalEnd, 0));
    // interior coefficients do not depend on the horizon
    EXPECT_EQ(z.at(6, 2, 7), z.at(6, 2, 10));
    EXPECT_NE(z.at(7, 2, 7), z.at(7, 2, 10));
}

TEST(EtaTable, RealPartOfDiagonalIsPositive) {
    // Re eta_jj is a variance of the bath force over the cell.
    for (double beta : {0.5, 5.0, 50.0}) {
        const auto z = EtaTable::build(bath(Axis::Z, beta), kDt, 4);
        EXPECT_GT(z(2, 2).real(), 0.0);
        EXPECT_GT(z(0, 0).real(), 0.0);
    }
}

TEST(EtaTable, BuildValidation) {
    EXPECT_THROW(EtaTable::build(bath(Axis::Z), 0.0, 4), DomainError);
    EXPECT_THROW(EtaTable::build(bath(Axis::Z), kDt, 0), DomainError);
    auto b = bath(Axis::Z);
    b.beta = -1.0;
    EXPECT_THROW(EtaTable::build(b, kDt, 4), DomainError);
    const auto z = EtaTable::build(bath(Axis::Z), kDt, 4);
    EXPECT_THROW(z.at(5, 0, 5), DomainError);
    EXPECT_THROW(z.coefficient(EtaCase::Interior, 5), DomainError);
    const auto x = EtaTable::build(bath(Axis::X), kDt, 4);
    EXPECT_THROW(x(4, 0), DomainError);
}

TEST(Truncation, ZeroesBeyondMemory) {
    const auto z = EtaTable::build(bath(Axis::Z), kDt, kN);
    const auto tz = truncate_eta(z, 0.9);
    EXPECT_EQ(memory_steps(0.9, kDt), 3);
    EXPECT_EQ(tz.mem_steps(), 3);
    for (int j = 0; j <= kN; ++j)
        for (int jp = 0; jp <= j; ++jp) {
            const cplx want = (j - jp) * kDt > 0.9 + 1e-12 ? cplx{} : z(j, jp);
            EXPECT_EQ(tz(j, jp), want);
        }
    EXPECT_EQ(truncate_eta(tz, 0.9), tz);
    EXPECT_EQ(truncate_eta(z, 100.0), z);
    EXPECT_THROW(truncate_eta(z, 0.0), DomainError);
}

TEST(MemorySteps, RobustToRepresentation) {
    EXPECT_EQ(memory_steps(1.8, 0.3), 6);
    EXPECT_EQ(memory_steps(0.3, 0.3), 1);
    EXPECT_EQ(memory_steps(0.29, 0.3), 0);
    EXPECT_EQ(memory_steps(0.6 - 1e-15, 0.2), 3);
}

TEST(LOfT, DiscreteEqualsContinuousAndOracle) {
    for (Axis axis : {Axis::Z, Axis::X}) {
        const auto b = bath(axis);
        for (int n : {1, 4, 10}) {
            const double t = n * kDt;
            const auto d = l_of_t(b, t, LMode::DiscreteSum, kDt);
            const auto c = l_of_t(b, t, LMode::ContinuousQuadrature);
            const cplx want = oracle::cell_integral(ref(), 0.0, t, 0.0, t, true);
            EXPECT_LT(rel(d.value, c.value), 1e-8) << to_string(axis) << " n " << n;
            EXPECT_LT(rel(c.value, want), 1e-7) << to_string(axis) << " n " << n;
        }
    }
}

TEST(LOfT, DerivativeIsIntegralOfC) {
    const auto b = bath(Axis::X);
    for (double t : {0.3, 0.9, 2.1}) {
        const auto c = l_of_t(b, t, LMode::ContinuousQuadrature);
        // Int_0^t C(u) du by composite Gauss on the oracle
        cplx want{};
        const int panels = 200;
        const double h = t / panels;
        for (int p = 0; p < panels; ++p)
            for (auto [x, w] : oracle::gl10()) want += 0.5 * h * w * oracle::correlation(ref(), (p + 0.5) * h + 0.5 * h * x, 400);
        EXPECT_LT(rel(c.derivative, want), 1e-7) << "t " << t;
    }
}

TEST(LOfT, ErrorsAndTrivialCases) {
    const auto b = bath(Axis::X);
    EXPECT_THROW(l_of_t(b, -0.1, LMode::ContinuousQuadrature), DomainError);
    EXPECT_THROW(l_of_t(b, 0.45, LMode::DiscreteSum, kDt), DomainError);
    EXPECT_THROW(l_of_t(b, 0.6, LMode::DiscreteSum), DomainError);
    EXPECT_EQ(l_of_t(b, 0.0, LMode::ContinuousQuadrature).value, cplx{});
}

TEST(DiscreteL, TruncatedGrowsLinearly) {
    const auto x = truncate_eta(EtaTable::build(bath(Axis::X), kDt, 20), 0.9);
    const auto l = discrete_l_series(x);
    const cplx rate = discrete_l_rate(x);
    for (int n = 3; n <= 20; ++n) EXPECT_LT(std::abs(l[n] - l[3] - rate * kDt * double(n - 3)), 1e-14);
    for (int n = 0; n <= 20; ++n) EXPECT_LT(std::abs(l[n] - discrete_l(x, n)), 1e-15);
}
