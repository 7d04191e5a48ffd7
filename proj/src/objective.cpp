#include "riskpen/objective.hpp"

#include "riskpen/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace riskpen {

void for_each_scenario(std::size_t threads, std::size_t count, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), count);
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) body(k);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (std::size_t k = w; k < count; k += workers) body(k);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

ProblemData ProblemData::make(const Grid& grid, ScenarioSet scenarios, const ConstraintMap& constraint,
                              const RiskMeasure& risk, GridFunction target, double mu_tik, GridFunction lo,
                              GridFunction hi, double tol_feas) {
    const std::size_t n = grid.size();
    require(mu_tik > 0.0 && std::isfinite(mu_tik), ErrorKind::InvalidArgument, "mu_tik must be positive");
    require(target.size() == n, ErrorKind::ShapeMismatch, "target length must equal n_interior");
    require(lo.size() == n && hi.size() == n, ErrorKind::ShapeMismatch, "control bounds length mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        require(lo[j] <= hi[j], ErrorKind::InvalidArgument,
                "control bounds empty at node " + std::to_string(j) + " (lo > hi)");
    }
    require(tol_feas >= 0.0, ErrorKind::InvalidArgument, "tol_feas must be >= 0");
    require(scenarios.n_interior == n, ErrorKind::ShapeMismatch, "scenario set was built for another grid");
    scenarios.validate();

    ProblemData data;
    data.grid = grid;
    data.operators.reserve(scenarios.size());
    for (const auto& a : scenarios.conductivities) {
        data.operators.emplace_back(grid, a);
    }
    data.scenarios = std::move(scenarios);
    data.constraint = constraint;
    data.cone = constraint.cone(grid);
    data.risk = risk;
    data.target = std::move(target);
    data.mu_tik = mu_tik;
    data.lo = std::move(lo);
    data.hi = std::move(hi);
    data.tol_feas = tol_feas;
    return data;
}

bool ProblemData::singleton_controls() const { return lo == hi; }

Control riesz(const Grid& grid, std::span<const double> dual) {
    Control out(dual.begin(), dual.end());
    for (double& v : out) v /= grid.h();
    return out;
}

namespace {

void check_control(const ProblemData& data, std::span<const double> x1) {
    require(x1.size() == data.grid.size(), ErrorKind::ShapeMismatch,
            "control length " + std::to_string(x1.size()) + " != " + std::to_string(data.grid.size()));
    for (double v : x1) {
        require(std::isfinite(v), ErrorKind::Diverged, "control has a non-finite entry");
    }
}

double tracking_cost(const Grid& grid, std::span<const double> state, std::span<const double> target) {
    double sum = 0.0;
    for (std::size_t j = 0; j < state.size(); ++j) {
        const double d = state[j] - target[j];
        sum += d * d;
    }
    return 0.5 * grid.h() * sum;
}

double tikhonov(const ProblemData& data, std::span<const double> x1) {
    return 0.5 * data.mu_tik * inner_h(data.grid, x1, x1);
}

} // namespace

EvalBundle evaluate(const ProblemData& data, double gamma, std::span<const double> x1) {
    require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be positive and finite");
    check_control(data, x1);
    const std::size_t count = data.n_scenarios();
    const std::size_t n = data.grid.size();
    const double h = data.grid.h();

    EvalBundle b;
    b.gamma = gamma;
    b.x1.assign(x1.begin(), x1.end());
    b.states.resize(count);
    b.j2.resize(count);
    b.constraint_values.resize(count);
    b.residuals.resize(count);
    b.penalties.resize(count);
    b.lambda_i.resize(count);
    b.lambda_e.resize(count);
    b.zeta1.assign(count, GridFunction(n, 0.0));
    b.zeta2.resize(count);
    b.rho.resize(count);

    for_each_scenario(data.threads, count, [&](std::size_t k) {
        b.states[k] = solve_state(data.operators[k], x1);
        b.j2[k] = tracking_cost(data.grid, b.states[k], data.target);
        b.zeta2[k].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            b.zeta2[k][j] = h * (b.states[k][j] - data.target[j]);
        }
        b.constraint_values[k] = data.constraint.evaluate(data.grid, data.scenarios, k, x1, b.states[k]);
        auto pv = penalty(data.cone, gamma, b.constraint_values[k]);
        b.penalties[k] = pv.value;
        b.residuals[k] = std::move(pv.residual);
        b.lambda_i[k] = penalty_multiplier(data.cone, gamma, b.constraint_values[k]);
    });

    const auto& weights = data.scenarios.weights;
    b.theta = subgradient(data.risk, b.j2, weights).theta;
    b.risk_value = evaluate(data.risk, b.j2, weights);
    b.j1 = tikhonov(data, x1);
    b.penalty_term = empirical_expectation(data.scenarios, b.penalties);
    b.j_gamma = b.j1 + b.risk_value + b.penalty_term;
    require(std::isfinite(b.j_gamma), ErrorKind::Diverged, "objective evaluated to a non-finite value");

    std::vector<std::size_t> tie_breaks(count, 0);
    for_each_scenario(data.threads, count, [&](std::size_t k) {
        auto adj = data.constraint.adjoints(data.grid, data.scenarios, k, x1, b.states[k], b.lambda_i[k]);
        tie_breaks[k] = adj.tie_breaks;
        // e_x2^* lambda_e = -(theta zeta2 + i_x2^* lambda_i) with e_x2 = h A.
        GridFunction rhs(n);
        for (std::size_t j = 0; j < n; ++j) {
            rhs[j] = -(b.theta[k] * b.zeta2[k][j] + adj.d_state[j]) / h;
        }
        b.lambda_e[k] = apply_adjoint_solve(data.operators[k], rhs);
        if (data.fault == FaultInjection::FlipAdjointSign) {
            for (double& v : b.lambda_e[k]) v = -v;
        }
        // rho = theta zeta1 + e_x1^* lambda_e + i_x1^* lambda_i with e_x1 = -h I.
        b.rho[k].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            b.rho[k][j] = b.theta[k] * b.zeta1[k][j] - h * b.lambda_e[k][j] + adj.d_control[j];
        }
    });
    for (std::size_t t : tie_breaks) b.tie_breaks += t;

    b.eta.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        b.eta[j] = data.mu_tik * h * x1[j];
    }
    b.expected_rho.assign(n, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            b.expected_rho[j] += weights[k] * b.rho[k][j];
        }
    }
    b.gradient.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        b.gradient[j] = b.eta[j] + b.expected_rho[j];
    }
    return b;
}

double objective_only(const ProblemData& data, double gamma, std::span<const double> x1) {
    require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be positive and finite");
    check_control(data, x1);
    const std::size_t count = data.n_scenarios();
    std::vector<double> j2(count);
    std::vector<double> pen(count);
    for_each_scenario(data.threads, count, [&](std::size_t k) {
        const auto state = solve_state(data.operators[k], x1);
        j2[k] = tracking_cost(data.grid, state, data.target);
        const auto i = data.constraint.evaluate(data.grid, data.scenarios, k, x1, state);
        pen[k] = penalty(data.cone, gamma, i).value;
    });
    const double value = tikhonov(data, x1) + evaluate(data.risk, j2, data.scenarios.weights) +
                         empirical_expectation(data.scenarios, pen);
    require(std::isfinite(value), ErrorKind::Diverged, "objective evaluated to a non-finite value");
    return value;
}

UnpenalizedValue unpenalized_objective(const ProblemData& data, std::span<const double> x1) {
    check_control(data, x1);
    const std::size_t count = data.n_scenarios();
    std::vector<double> j2(count);
    std::vector<double> worst(count);
    for_each_scenario(data.threads, count, [&](std::size_t k) {
        const auto state = solve_state(data.operators[k], x1);
        j2[k] = tracking_cost(data.grid, state, data.target);
        const auto i = data.constraint.evaluate(data.grid, data.scenarios, k, x1, state);
        worst[k] = *std::max_element(i.begin(), i.end());
    });
    UnpenalizedValue out;
    out.j = tikhonov(data, x1) + evaluate(data.risk, j2, data.scenarios.weights);
    const double max_i = *std::max_element(worst.begin(), worst.end());
    out.max_violation = std::max(0.0, max_i);
    out.feasible = max_i <= data.tol_feas;
    return out;
}

} // namespace riskpen
