#include "riskpen/error.hpp"
#include "riskpen/solver.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace riskpen;
using namespace testing_support;

TEST(Minimize, ReachableTargetMatchesDenseOptimum) {
    // One scenario, slack constraint: the optimum solves
    // (mu I + A^-2) x = A^-1 y_D in the lumped inner product.
    SmallProblem p;
    p.n = 15;
    p.scenarios = 1;
    p.psi = 1e3;
    p.mu = 1e-4;
    auto data = p.build();
    Control star(p.n);
    for (std::size_t j = 0; j < p.n; ++j) star[j] = 3.0 * data.grid.node(j) * (1.0 - data.grid.node(j));
    const Matrix a = hand_matrix(p.n, data.scenarios.conductivities[0]);
    data.target = dense_solve(a, star);

    Matrix ainv(p.n, std::vector<double>(p.n));
    for (std::size_t c = 0; c < p.n; ++c) {
        std::vector<double> e(p.n, 0.0);
        e[c] = 1.0;
        const auto col = dense_solve(a, e);
        for (std::size_t r = 0; r < p.n; ++r) ainv[r][c] = col[r];
    }
    Matrix hess(p.n, std::vector<double>(p.n, 0.0));
    for (std::size_t r = 0; r < p.n; ++r) {
        for (std::size_t c = 0; c < p.n; ++c) {
            for (std::size_t m = 0; m < p.n; ++m) hess[r][c] += ainv[m][r] * ainv[m][c];
        }
        hess[r][r] += p.mu;
    }
    std::vector<double> rhs(p.n, 0.0);
    for (std::size_t r = 0; r < p.n; ++r) {
        for (std::size_t m = 0; m < p.n; ++m) rhs[r] += ainv[m][r] * data.target[m];
    }
    const auto x_ref = dense_solve(hess, rhs);
    const double j_ref = objective_only(data, 1.0, x_ref);

    SolveOptions opts;
    opts.tol_stationarity = 1e-11;
    const auto res = minimize(data, 1.0, opts);
    ASSERT_TRUE(res.converged);
    EXPECT_NEAR(res.bundle.j_gamma, j_ref, 1e-8);
    // The reachable control itself costs only its regularization.
    EXPECT_LE(res.bundle.j_gamma, 0.5 * p.mu * inner_h(data.grid, star, star) + 1e-12);
}

TEST(Minimize, SingletonBox) {
    SmallProblem p;
    p.lo = 0.7;
    p.hi = 0.7;
    const auto data = p.build();
    const auto res = minimize(data, 10.0, SolveOptions{});
    EXPECT_EQ(res.iterations, 0u);
    EXPECT_TRUE(res.converged);
    for (std::size_t j = 0; j < p.n; ++j) {
        EXPECT_EQ(res.x1_opt[j], 0.7);
        EXPECT_EQ(res.xi[j], -res.bundle.gradient[j]);
    }
}

TEST(Minimize, AcceleratedAndPlainAgree) {
    SmallProblem p;
    p.psi = 0.02;
    const auto data = p.build();
    SolveOptions plain;
    plain.accelerated = false;
    const auto a = minimize(data, 100.0, plain);
    const auto b = minimize(data, 100.0, SolveOptions{});
    ASSERT_TRUE(a.converged && b.converged);
    EXPECT_EQ(a.method, "projected-gradient");
    EXPECT_EQ(b.method, "fista");
    EXPECT_NEAR(a.bundle.j_gamma, b.bundle.j_gamma, 1e-8);
}

TEST(Minimize, PlainDescentIsMonotone) {
    SmallProblem p;
    p.psi = 0.02;
    const auto data = p.build();
    SolveOptions opts;
    opts.accelerated = false;
    const auto res = minimize(data, 1e3, opts);
    ASSERT_GT(res.log.size(), 2u);
    for (std::size_t i = 1; i < res.log.size(); ++i) EXPECT_LE(res.log[i].j_gamma, res.log[i - 1].j_gamma);
}

TEST(Minimize, ActiveBoxBounds) {
    SmallProblem p;
    p.lo = -0.5;
    p.hi = 0.5;
    const auto data = p.build();
    const auto res = minimize(data, 10.0, SolveOptions{});
    ASSERT_TRUE(res.converged);
    bool any_active = false;
    for (std::size_t j = 0; j < p.n; ++j) {
        EXPECT_GE(res.x1_opt[j], -0.5);
        EXPECT_LE(res.x1_opt[j], 0.5);
        if (res.x1_opt[j] == 0.5 || res.x1_opt[j] == -0.5) any_active = true;
    }
    EXPECT_TRUE(any_active);
    EXPECT_LE(stationarity_residual(data, 10.0, res.x1_opt), 1e-8);
}

TEST(Minimize, IterationLimitIsNotAnError) {
    SmallProblem p;
    const auto data = p.build();
    SolveOptions opts;
    opts.max_iters = 2;
    const auto res = minimize(data, 1e4, opts);
    EXPECT_FALSE(res.converged);
    EXPECT_EQ(res.iterations, 2u);
}

TEST(Minimize, SubgradientModeForExactAvar) {
    SmallProblem p;
    p.risk = RiskMeasure::avar(0.5);
    const auto data = p.build();
    SolveOptions opts;
    opts.max_iters = 300;
    const auto res = minimize(data, 10.0, opts);
    EXPECT_EQ(res.method, "subgradient");
    EXPECT_LT(res.bundle.j_gamma, objective_only(data, 10.0, Control(p.n, 0.0)));
}

TEST(Minimize, SmoothedAvarConverges) {
    SmallProblem p;
    p.risk = RiskMeasure::avar(0.5, 1e-3);
    const auto data = p.build();
    const auto res = minimize(data, 10.0, SolveOptions{});
    EXPECT_TRUE(res.converged);
    EXPECT_LE(res.stationarity_norm, 1e-8);
}

TEST(Stationarity, PositiveAwayFromOptimum) {
    std::mt19937_64 rng(51);
    SmallProblem p;
    const auto data = p.build();
    EXPECT_GT(stationarity_residual(data, 10.0, random_vector(rng, p.n)), 0.0);
}

TEST(Minimize, RejectsBadOptions) {
    SmallProblem p;
    const auto data = p.build();
    SolveOptions opts;
    opts.shrink = 1.5;
    EXPECT_THROW((void)minimize(data, 1.0, opts), Error);
    EXPECT_THROW((void)minimize(data, -1.0, SolveOptions{}), Error);
}
