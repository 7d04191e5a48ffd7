#pragma once

#include "riskpen/config.hpp"
#include "riskpen/objective.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing_support {

using Matrix = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting on a dense copy.
inline std::vector<double> dense_solve(Matrix a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
        x[i] = s / a[i][i];
    }
    return x;
}

// Literal stencil loop for -(a u')' with zero Dirichlet data.
inline Matrix hand_matrix(std::size_t n, const std::vector<double>& a) {
    const double h = 1.0 / static_cast<double>(n + 1);
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        m[j][j] = (a[j] + a[j + 1]) / (h * h);
        if (j > 0) m[j][j - 1] = -a[j] / (h * h);
        if (j + 1 < n) m[j][j + 1] = -a[j + 1] / (h * h);
    }
    return m;
}

inline std::vector<double> matvec(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    }
    return out;
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = dist(rng);
    return v;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Small problem in the shape of the default fixture.
struct SmallProblem {
    std::size_t n = 31;
    std::size_t scenarios = 4;
    std::uint64_t seed = 42;
    double psi = 0.05;
    double epsilon = 0.01;
    double mu = 1e-3;
    double lo = -100.0;
    double hi = 100.0;
    std::string constraint = "mixed";
    double delta = 1e-8;
    riskpen::RiskMeasure risk = riskpen::RiskMeasure::expectation();

    [[nodiscard]] riskpen::ProblemData build() const {
        riskpen::Grid grid(n);
        riskpen::ScenarioConfig sc;
        sc.n_scenarios = scenarios;
        sc.seed = seed;
        sc.a0 = 1.0;
        sc.sigma = {0.3, 0.15};
        sc.a_min = 0.1;
        sc.bound_spec.kind = riskpen::BoundSpec::Kind::Constant;
        sc.bound_spec.value = psi;
        auto set = riskpen::sample(grid, sc);
        riskpen::GridFunction target(n);
        for (std::size_t j = 0; j < n; ++j) target[j] = 0.1 * std::sin(M_PI * grid.node(j));
        return riskpen::ProblemData::make(grid, std::move(set),
                                          riskpen::ConstraintMap(riskpen::constraint_kind_from_string(constraint),
                                                                 epsilon, delta),
                                          risk, target, mu, riskpen::GridFunction(n, lo),
                                          riskpen::GridFunction(n, hi));
    }
};

} // namespace testing_support
