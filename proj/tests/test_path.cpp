#include "riskpen/error.hpp"
#include "riskpen/kkt.hpp"
#include "riskpen/path.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace riskpen;
using namespace testing_support;

namespace {
std::vector<PathRecord> synthetic(const std::function<double(double)>& f) {
    std::vector<PathRecord> out;
    for (int e = 0; e <= 6; ++e) {
        PathRecord r;
        r.gamma = std::pow(10.0, e);
        r.sq_violation = f(r.gamma);
        out.push_back(r);
    }
    return out;
}
} // namespace

TEST(Schedule, Validation) {
    EXPECT_THROW(GammaSchedule({}), Error);
    EXPECT_THROW(GammaSchedule({1.0, 1.0}), Error);
    EXPECT_THROW(GammaSchedule({-1.0, 1.0}), Error);
    const auto s = GammaSchedule::decades(0, 2, 2);
    ASSERT_EQ(s.size(), 5u);
    EXPECT_DOUBLE_EQ(s.values().front(), 1.0);
    EXPECT_NEAR(s.values()[1], std::sqrt(10.0), 1e-12);
    EXPECT_DOUBLE_EQ(s.values().back(), 100.0);
}

TEST(SlopeFit, InverseGamma) {
    const auto fit = fit_decay_slope(synthetic([](double g) { return 1.0 / g; }), "sq_violation");
    EXPECT_NEAR(fit.slope, -1.0, 1e-12);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
    EXPECT_EQ(fit.points, 7u);
}

TEST(SlopeFit, Constant) {
    const auto fit = fit_decay_slope(synthetic([](double) { return 3.0; }), "sq_violation");
    EXPECT_NEAR(fit.slope, 0.0, 1e-12);
}

TEST(SlopeFit, InsufficientData) {
    auto recs = synthetic([](double g) { return g < 1e3 ? 1.0 / g : 0.0; });
    try {
        (void)fit_decay_slope(recs, "sq_violation");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
    }
    EXPECT_THROW((void)record_field(recs[0], "no_such_column"), Error);
}

TEST(Path, SlackProblemIsInert) {
    SmallProblem p;
    p.psi = 1e3;
    const auto data = p.build();
    PathOptions opts;
    const auto path = run_path(data, GammaSchedule::decades(0, 3), opts);
    ASSERT_EQ(path.records.size(), 4u);
    for (const auto& r : path.records) {
        EXPECT_EQ(r.penalty_term, 0.0);
        EXPECT_EQ(r.multiplier_l1, 0.0);
    }
    for (const auto& x : path.controls) EXPECT_EQ(x, path.controls.front());
}

TEST(Path, SingleGammaMatchesDirectSolve) {
    SmallProblem p;
    const auto data = p.build();
    PathOptions opts;
    const auto path = run_path(data, GammaSchedule({100.0}), opts);
    ASSERT_EQ(path.records.size(), 1u);
    const auto res = minimize(data, 100.0, opts.solve, std::span<const double>(Control(p.n, 0.0)));
    const auto kkt = full_report(data, res);
    EXPECT_EQ(path.records[0].j_gamma, res.bundle.j_gamma);
    EXPECT_EQ(path.records[0].iterations, res.iterations);
    EXPECT_EQ(path.records[0].complementarity, kkt.complementarity);
    EXPECT_EQ(path.controls[0], res.x1_opt);
}

TEST(Path, FeasibleScaling) {
    SmallProblem p;
    p.psi = 0.01;
    const auto data = p.build();
    const auto ref = feasible_by_scaling(data, Control(p.n, 5.0), 60);
    ASSERT_TRUE(ref.has_value());
    EXPECT_TRUE(unpenalized_objective(data, *ref).feasible);
    SmallProblem infeasible = p;
    infeasible.psi = -1.0;
    EXPECT_FALSE(feasible_by_scaling(infeasible.build(), Control(p.n, 5.0), 60).has_value());
}

TEST(Path, ColdComparisonRecorded) {
    SmallProblem p;
    const auto data = p.build();
    PathOptions opts;
    opts.compare_cold = true;
    const auto path = run_path(data, GammaSchedule::decades(0, 2), opts);
    for (const auto& r : path.records) EXPECT_TRUE(r.cold_iterations.has_value());
}

class DefaultFixturePath : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        SmallProblem p;
        p.n = 127;
        p.scenarios = 16;
        data_ = new ProblemData(p.build());
        PathOptions opts;
        opts.reference_from_first_solution = true;
        path_ = new PathResult(run_path(*data_, GammaSchedule::decades(0, 6), opts));
    }
    static void TearDownTestSuite() {
        delete path_;
        delete data_;
    }
    static ProblemData* data_;
    static PathResult* path_;
};
ProblemData* DefaultFixturePath::data_ = nullptr;
PathResult* DefaultFixturePath::path_ = nullptr;

TEST_F(DefaultFixturePath, SqViolationStrictlyDecreasing) {
    const auto& recs = path_->records;
    ASSERT_EQ(recs.size(), 7u);
    for (std::size_t i = 2; i < recs.size(); ++i) EXPECT_LT(recs[i].sq_violation, recs[i - 1].sq_violation);
}

TEST_F(DefaultFixturePath, SlopeMatchesIndependentRegression) {
    std::vector<double> x, y;
    for (const auto& r : path_->records) {
        x.push_back(std::log(r.gamma));
        y.push_back(std::log(r.sq_violation));
    }
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    EXPECT_NEAR(fit_decay_slope(path_->records, "sq_violation").slope, sxy / sxx, 0.2);
}

TEST_F(DefaultFixturePath, ComplementarityScalesFromEarlierPoint) {
    const auto& recs = path_->records;
    const double c = recs[4].complementarity * std::sqrt(recs[4].gamma);
    EXPECT_LE(recs[6].complementarity, c / std::sqrt(recs[6].gamma));
}

TEST_F(DefaultFixturePath, ChecksPass) {
    // The control-change trend is tested separately below.
    for (const auto& c : check_path(*path_)) {
        if (c.name != "control_change_vanishing") EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
    }
}

TEST_F(DefaultFixturePath, ComplementarityNonincreasingPastKnee) {
    const auto& recs = path_->records;
    std::size_t knee = 0;
    for (std::size_t i = 1; i < recs.size(); ++i) {
        if (recs[i].complementarity > recs[knee].complementarity) knee = i;
    }
    for (std::size_t i = knee + 1; i < recs.size(); ++i) {
        EXPECT_LE(recs[i].complementarity, recs[i - 1].complementarity);
    }
}

TEST_F(DefaultFixturePath, ControlChangeShrinksAndIsATrendCheck) {
    const auto& recs = path_->records;
    for (std::size_t i = 2; i < recs.size(); ++i) EXPECT_LT(recs[i].control_change, recs[i - 1].control_change);
    bool found = false;
    for (const auto& c : check_path(*path_)) {
        if (c.name == "control_change_vanishing") {
            found = true;
            EXPECT_FALSE(c.hard);
        }
    }
    EXPECT_TRUE(found);
}
