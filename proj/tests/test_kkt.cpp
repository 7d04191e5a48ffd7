#include "riskpen/error.hpp"
#include "riskpen/kkt.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace riskpen;
using namespace testing_support;

TEST(GammaSystem, ConvergedSolveHasSmallResiduals) {
    SmallProblem p;
    const auto data = p.build();
    const auto res = minimize(data, 1e3, SolveOptions{});
    ASSERT_TRUE(res.converged);
    const auto r = full_report(data, res);
    EXPECT_LE(r.stationarity_x1, 1e-8);
    EXPECT_LE(r.adjoint_residual_max, 1e-10);
    EXPECT_LE(r.rho_consistency, 1e-10);
    EXPECT_LE(r.state_residual, 1e-10);
    EXPECT_LE(r.multiplier_formula_residual, 1e-10);
    EXPECT_EQ(r.normal_cone_violation, 0.0);
    EXPECT_EQ(r.dual_cone_violation, 0.0);
}

TEST(GammaSystem, AdjointPerturbationIsLinear) {
    SmallProblem p;
    const auto data = p.build();
    auto res = minimize(data, 1e2, SolveOptions{});
    const double base = check_gamma_system(data, res.bundle, res).adjoint_residual[1];
    std::vector<double> delta(p.n, 0.0);
    delta[7] = 1e-3;
    for (std::size_t j = 0; j < p.n; ++j) res.bundle.lambda_e[1][j] += delta[j];
    const auto r = check_gamma_system(data, res.bundle, res);
    // The residual picks up e_x2^* delta = h A delta, measured in the dual norm.
    const auto a_delta = data.operators[1].apply(delta);
    double expect = 0.0;
    for (double v : a_delta) expect += (data.grid.h() * v) * (data.grid.h() * v);
    expect = std::sqrt(expect / data.grid.h());
    EXPECT_NEAR(r.adjoint_residual[1], expect, base + 1e-12 * expect);
    EXPECT_LE(r.adjoint_residual[0], 1e-10);
}

TEST(GammaSystem, DenseRecomputation) {
    std::mt19937_64 rng(61);
    SmallProblem p;
    p.n = 11;
    const auto data = p.build();
    const Control x = random_vector(rng, p.n);
    SolveResult res;
    res.bundle = evaluate(data, 30.0, x);
    res.x1_opt = x;
    res.xi.assign(p.n, 0.0);
    const auto r = check_gamma_system(data, res.bundle, res);
    // Stationarity without a normal-cone term is the dual norm of the gradient.
    double sum = 0.0;
    for (double g : res.bundle.gradient) sum += g * g;
    EXPECT_NEAR(r.stationarity_x1, std::sqrt(sum / data.grid.h()), 1e-13);
    EXPECT_LE(r.adjoint_residual_max, 1e-10);
    // States against dense solves.
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        const auto y = dense_solve(hand_matrix(p.n, data.scenarios.conductivities[k]), x);
        for (std::size_t j = 0; j < p.n; ++j) EXPECT_NEAR(res.bundle.states[k][j], y[j], 1e-13);
    }
}

TEST(LimitSystem, SlackProblemHasNoMultipliers) {
    SmallProblem p;
    p.psi = 1e3;
    const auto data = p.build();
    const auto res = minimize(data, 1e4, SolveOptions{});
    const auto r = full_report(data, res);
    EXPECT_EQ(r.primal_feasibility, 0.0);
    EXPECT_EQ(r.complementarity, 0.0);
    EXPECT_EQ(r.multiplier_l1, 0.0);
    EXPECT_EQ(r.concentration_index, 0.0);
}

TEST(LimitSystem, PrimalFeasibilityOfInfeasiblePoint) {
    SmallProblem p;
    p.n = 9;
    p.psi = 0.0;
    const auto data = p.build();
    Control x(p.n, 0.0);
    x[4] = 5.0;
    SolveResult res;
    res.bundle = evaluate(data, 10.0, x);
    res.xi.assign(p.n, 0.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        const auto y = dense_solve(hand_matrix(p.n, data.scenarios.conductivities[k]), x);
        for (std::size_t j = 0; j < p.n; ++j) worst = std::max(worst, y[j] - p.epsilon * x[j]);
    }
    const auto r = check_limit_system(data, res.bundle, res);
    EXPECT_NEAR(r.primal_feasibility, worst, 1e-13);
    EXPECT_NEAR(r.complementarity, 10.0 * r.sq_violation, 1e-12 * r.complementarity);
}

TEST(Concentration, Examples) {
    const std::vector<double> w(10, 0.1);
    EXPECT_NEAR(concentration_index(std::vector<double>(10, 2.0), w, 0.1), 0.1, 1e-15);
    std::vector<double> one(10, 0.0);
    one[6] = 3.0;
    EXPECT_DOUBLE_EQ(concentration_index(one, w, 0.1), 1.0);
    EXPECT_EQ(concentration_index(std::vector<double>(10, 0.0), w, 0.1), 0.0);
    EXPECT_THROW((void)concentration_index(one, w, 0.0), Error);
}

TEST(Concentration, MatchesSubsetSearch) {
    std::mt19937_64 rng(62);
    const std::size_t n = 10;
    const std::vector<double> w(n, 0.1);
    for (int t = 0; t < 20; ++t) {
        const auto m = random_vector(rng, n, 0.0, 1.0);
        double total = 0.0;
        for (std::size_t k = 0; k < n; ++k) total += w[k] * m[k];
        for (double q : {0.1, 0.25, 0.5}) {
            double best = 0.0;
            for (unsigned mask = 0; mask < (1u << n); ++mask) {
                double prob = 0.0, carried = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (mask & (1u << k)) {
                        prob += w[k];
                        carried += w[k] * m[k];
                    }
                }
                if (prob <= q + 1e-12) best = std::max(best, carried);
            }
            EXPECT_NEAR(concentration_index(m, w, q), best / total, 1e-14);
        }
    }
}

TEST(Complementarity, HandBuiltScalar) {
    SmallProblem p;
    p.n = 3;
    p.scenarios = 1;
    p.constraint = "volume";
    const auto data = p.build();
    EvalBundle b;
    b.lambda_i = {{1.0}};
    b.constraint_values = {{0.5}};
    b.residuals = {{0.5}};
    EXPECT_DOUBLE_EQ(complementarity_value(data, b), 0.5);
    EXPECT_DOUBLE_EQ(squared_violation(data, b), 0.25);
    b.lambda_i = {{0.0}};
    b.constraint_values = {{-0.5}};
    EXPECT_EQ(complementarity_value(data, b), 0.0);
}

TEST(Complementarity, IdentityWithSquaredViolation) {
    std::mt19937_64 rng(63);
    SmallProblem p;
    p.psi = 0.0;
    const auto data = p.build();
    for (double gamma : {1.0, 1e3, 1e6}) {
        const auto b = evaluate(data, gamma, random_vector(rng, p.n, -1, 3));
        const double c = complementarity_value(data, b);
        EXPECT_NEAR(c, gamma * squared_violation(data, b), 1e-12 * std::max(1.0, c));
    }
}
