#include "riskpen/error.hpp"
#include "riskpen/grid.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace riskpen;
using namespace testing_support;

TEST(Grid, Geometry) {
    Grid g(3);
    EXPECT_EQ(g.size(), 3u);
    EXPECT_EQ(g.n_cells(), 4u);
    EXPECT_DOUBLE_EQ(g.h(), 0.25);
    EXPECT_DOUBLE_EQ(g.node(0), 0.25);
    EXPECT_DOUBLE_EQ(g.cell_midpoint(3), 0.875);
    EXPECT_THROW(Grid(0), Error);
}

TEST(Assemble, ConstantConductivityStencil) {
    Grid g(3);
    const std::vector<double> a(4, 1.0);
    const auto op = assemble(g, a);
    for (double d : op.diagonal()) EXPECT_DOUBLE_EQ(d, 32.0);
    ASSERT_EQ(op.off_diagonal().size(), 2u);
    for (double o : op.off_diagonal()) EXPECT_DOUBLE_EQ(o, -16.0);
}

TEST(Assemble, SingleNode) {
    Grid g(1);
    const auto op = assemble(g, std::vector<double>{2.0, 2.0});
    ASSERT_EQ(op.diagonal().size(), 1u);
    EXPECT_DOUBLE_EQ(op.diagonal()[0], 16.0);
    EXPECT_TRUE(op.off_diagonal().empty());
}

TEST(Assemble, PiecewiseMatchesHandAssembly) {
    Grid g(5);
    const std::vector<double> a{1.0, 1.0, 3.0, 3.0, 0.5, 0.5};
    const auto op = assemble(g, a);
    const Matrix m = hand_matrix(5, a);
    for (std::size_t j = 0; j < 5; ++j) {
        EXPECT_DOUBLE_EQ(op.diagonal()[j], m[j][j]);
        if (j + 1 < 5) EXPECT_DOUBLE_EQ(op.off_diagonal()[j], m[j][j + 1]);
    }
}

TEST(Assemble, RejectsNonpositiveConductivity) {
    Grid g(3);
    try {
        (void)assemble(g, std::vector<double>{1.0, 0.0, 1.0, 1.0});
        FAIL() << "expected an ellipticity error";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::EllipticityViolation);
    }
    EXPECT_THROW((void)assemble(g, std::vector<double>{1.0, 1.0}), Error);
}

TEST(SolveState, PoissonMidpoint) {
    Grid g(199);
    const auto op = assemble(g, std::vector<double>(200, 1.0));
    const auto u = solve_state(op, std::vector<double>(199, 1.0));
    EXPECT_NEAR(u[99], 0.125, 1e-4);
}

TEST(SolveState, ZeroRhs) {
    Grid g(17);
    const auto op = assemble(g, std::vector<double>(18, 1.7));
    for (double v : solve_state(op, std::vector<double>(17, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(SolveState, MatchesDenseSolver) {
    std::mt19937_64 rng(11);
    for (std::size_t n : {2u, 9u, 50u}) {
        Grid g(n);
        const auto a = random_vector(rng, n + 1, 0.2, 3.0);
        const auto rhs = random_vector(rng, n);
        const auto u = solve_state(assemble(g, a), rhs);
        const auto ref = dense_solve(hand_matrix(n, a), rhs);
        double scale = 0.0;
        for (double v : ref) scale = std::max(scale, std::abs(v));
        for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(u[j], ref[j], 1e-12 * scale);
    }
}

TEST(SolveState, AdjointSolveIdentical) {
    std::mt19937_64 rng(3);
    Grid g(40);
    const auto op = assemble(g, random_vector(rng, 41, 0.5, 2.0));
    const auto rhs = random_vector(rng, 40);
    EXPECT_EQ(solve_state(op, rhs), apply_adjoint_solve(op, rhs));
}

TEST(SolveState, SecondOrderConvergence) {
    // u = sin(pi s) solves -u'' = pi^2 sin(pi s).
    std::vector<double> logs_h, logs_e;
    for (std::size_t n : {15u, 31u, 63u, 127u, 255u}) {
        Grid g(n);
        std::vector<double> f(n);
        for (std::size_t j = 0; j < n; ++j) f[j] = M_PI * M_PI * std::sin(M_PI * g.node(j));
        const auto u = solve_state(assemble(g, std::vector<double>(n + 1, 1.0)), f);
        double err = 0.0;
        for (std::size_t j = 0; j < n; ++j) err = std::max(err, std::abs(u[j] - std::sin(M_PI * g.node(j))));
        logs_h.push_back(std::log(g.h()));
        logs_e.push_back(std::log(err));
    }
    const double m = static_cast<double>(logs_h.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < logs_h.size(); ++i) {
        sx += logs_h[i];
        sy += logs_e[i];
        sxx += logs_h[i] * logs_h[i];
        sxy += logs_h[i] * logs_e[i];
    }
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    EXPECT_NEAR(slope, 2.0, 0.1);
}

TEST(Operator, SelfAdjoint) {
    std::mt19937_64 rng(5);
    Grid g(64);
    const auto op = assemble(g, random_vector(rng, 65, 0.3, 4.0));
    for (int t = 0; t < 10; ++t) {
        const auto u = random_vector(rng, 64);
        const auto v = random_vector(rng, 64);
        const double lhs = inner_h(g, op.apply(u), v);
        const double rhs = inner_h(g, u, op.apply(v));
        EXPECT_LE(std::abs(lhs - rhs), 1e-10 * std::max(1.0, std::abs(lhs)));
    }
}

TEST(InnerH, Examples) {
    Grid g(3);
    const std::vector<double> ones(3, 1.0);
    EXPECT_DOUBLE_EQ(inner_h(g, ones, ones), 0.75);
    EXPECT_EQ(inner_h(g, std::vector<double>{1, 0, 0}, std::vector<double>{0, 1, 0}), 0.0);
    EXPECT_DOUBLE_EQ(norm_h(g, ones), std::sqrt(0.75));
}

TEST(InnerH, MatchesTrapezoidRule) {
    // Interior values padded with the zero boundary values: the trapezoid rule
    // on the full node set reduces to the lumped sum.
    std::mt19937_64 rng(9);
    Grid g(25);
    const auto u = random_vector(rng, 25);
    const auto v = random_vector(rng, 25);
    std::vector<double> pu(27, 0.0), pv(27, 0.0);
    std::copy(u.begin(), u.end(), pu.begin() + 1);
    std::copy(v.begin(), v.end(), pv.begin() + 1);
    double trap = 0.0;
    for (std::size_t i = 0; i + 1 < pu.size(); ++i) trap += 0.5 * g.h() * (pu[i] * pv[i] + pu[i + 1] * pv[i + 1]);
    EXPECT_NEAR(inner_h(g, u, v), trap, 1e-14);
}

TEST(InnerH, ShapeMismatch) {
    Grid g(3);
    EXPECT_THROW((void)inner_h(g, std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), Error);
}
