#include "riskpen/error.hpp"
#include "riskpen/objective.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace riskpen;
using namespace testing_support;

namespace {

double directional_fd(const ProblemData& data, double gamma, const Control& x, const std::vector<double>& d,
                      double s) {
    Control xp = x, xm = x;
    for (std::size_t j = 0; j < x.size(); ++j) {
        xp[j] += s * d[j];
        xm[j] -= s * d[j];
    }
    return (objective_only(data, gamma, xp) - objective_only(data, gamma, xm)) / (2 * s);
}

} // namespace

TEST(Objective, ZeroControlZeroTarget) {
    SmallProblem p;
    auto data = p.build();
    std::fill(data.target.begin(), data.target.end(), 0.0);
    const auto b = evaluate(data, 10.0, Control(p.n, 0.0));
    EXPECT_EQ(b.j1, 0.0);
    EXPECT_EQ(b.risk_value, 0.0);
    EXPECT_EQ(b.penalty_term, 0.0);
    EXPECT_EQ(b.j_gamma, 0.0);
}

TEST(Objective, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(41);
    for (const char* kind : {"mixed", "volume", "gradient"}) {
        SmallProblem p;
        p.constraint = kind;
        p.psi = 0.01;
        p.delta = 1e-3;
        const auto data = p.build();
        const double gamma = 100.0;
        for (int t = 0; t < 3; ++t) {
            const Control x = random_vector(rng, p.n, -2, 2);
            const auto b = evaluate(data, gamma, x);
            for (int dir = 0; dir < 3; ++dir) {
                const auto d = random_vector(rng, p.n);
                const double fd = directional_fd(data, gamma, x, d, 1e-5);
                const double an = dot(b.gradient, d);
                EXPECT_LE(std::abs(fd - an), 1e-6 * std::max(std::abs(an), 1e-3)) << kind;
            }
        }
    }
}

TEST(Objective, ObjectiveOnlyConsistent) {
    std::mt19937_64 rng(42);
    SmallProblem p;
    p.risk = RiskMeasure::avar(0.3);
    const auto data = p.build();
    for (int t = 0; t < 3; ++t) {
        const Control x = random_vector(rng, p.n, -5, 5);
        const double a = evaluate(data, 1e3, x).j_gamma;
        EXPECT_NEAR(objective_only(data, 1e3, x), a, 1e-14 * std::max(1.0, std::abs(a)));
    }
}

TEST(Objective, RecomputedFromScratch) {
    // Independent dense recomputation of j^gamma for the mixed constraint.
    std::mt19937_64 rng(43);
    SmallProblem p;
    p.n = 15;
    const auto data = p.build();
    const Control x = random_vector(rng, p.n, -3, 3);
    const double gamma = 50.0;
    const double h = data.grid.h();
    double j1 = 0.0;
    for (double v : x) j1 += 0.5 * p.mu * h * v * v;
    double tracking = 0.0, pen = 0.0;
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        const auto y = dense_solve(hand_matrix(p.n, data.scenarios.conductivities[k]), x);
        double jk = 0.0, pk = 0.0;
        for (std::size_t j = 0; j < p.n; ++j) {
            jk += 0.5 * h * (y[j] - data.target[j]) * (y[j] - data.target[j]);
            const double i = y[j] - data.scenarios.node_bounds[k][j] - p.epsilon * x[j];
            pk += 0.5 * gamma * h * std::max(0.0, i) * std::max(0.0, i);
        }
        tracking += data.scenarios.weights[k] * jk;
        pen += data.scenarios.weights[k] * pk;
    }
    EXPECT_NEAR(objective_only(data, gamma, x), j1 + tracking + pen, 1e-11 * (j1 + tracking + pen));
}

TEST(Objective, ThreadCountDoesNotChangeResults) {
    std::mt19937_64 rng(44);
    SmallProblem p;
    p.scenarios = 7;
    auto data = p.build();
    const Control x = random_vector(rng, p.n, -3, 3);
    const auto serial = evaluate(data, 1e2, x);
    data.threads = 3;
    const auto parallel = evaluate(data, 1e2, x);
    EXPECT_EQ(serial.gradient, parallel.gradient);
    EXPECT_EQ(serial.j_gamma, parallel.j_gamma);
}

TEST(Objective, FaultInjectionBreaksGradient) {
    SmallProblem p;
    auto data = p.build();
    const Control x(p.n, 1.0);
    const auto good = evaluate(data, 1e2, x);
    data.fault = FaultInjection::FlipAdjointSign;
    const auto bad = evaluate(data, 1e2, x);
    EXPECT_NE(good.gradient, bad.gradient);
}

TEST(Unpenalized, SlackBoundsFeasible) {
    SmallProblem p;
    p.psi = 100.0;
    const auto data = p.build();
    const auto v = unpenalized_objective(data, Control(p.n, 1.0));
    EXPECT_TRUE(v.feasible);
    EXPECT_EQ(v.max_violation, 0.0);
}

TEST(Unpenalized, ViolationMatchesScript) {
    SmallProblem p;
    p.n = 15;
    p.psi = 0.01;
    const auto data = p.build();
    const Control x(p.n, 1.0);
    double worst = 0.0;
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        const auto y = dense_solve(hand_matrix(p.n, data.scenarios.conductivities[k]), x);
        for (std::size_t j = 0; j < p.n; ++j) {
            worst = std::max(worst, y[j] - data.scenarios.node_bounds[k][j] - p.epsilon * x[j]);
        }
    }
    const auto v = unpenalized_objective(data, x);
    EXPECT_FALSE(v.feasible);
    EXPECT_GT(v.max_violation, 0.0);
    EXPECT_NEAR(v.max_violation, worst, 1e-13);
}

TEST(Objective, RejectsBadInput) {
    SmallProblem p;
    const auto data = p.build();
    EXPECT_THROW((void)evaluate(data, 0.0, Control(p.n, 0.0)), Error);
    EXPECT_THROW((void)evaluate(data, 1.0, Control(p.n + 1, 0.0)), Error);
    Control nan(p.n, 0.0);
    nan[3] = std::nan("");
    try {
        (void)objective_only(data, 1.0, nan);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Diverged);
    }
    SmallProblem bad = p;
    bad.mu = -1.0;
    EXPECT_THROW((void)bad.build(), Error);
}

TEST(Riesz, DividesByMass) {
    Grid g(3);
    EXPECT_EQ(riesz(g, std::vector<double>{0.25, 0.5, -1.0}), (std::vector<double>{1.0, 2.0, -4.0}));
}
