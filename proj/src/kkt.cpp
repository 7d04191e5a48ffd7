#include "riskpen/kkt.hpp"

#include "riskpen/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace riskpen {

namespace {

// Norm of a dual vector under the lumped mass: sqrt(sum v^2 / h).
double dual_norm(const Grid& grid, std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += x * x;
    return std::sqrt(sum / grid.h());
}

void check_bundle(const ProblemData& data, const EvalBundle& b) {
    const std::size_t count = data.n_scenarios();
    require(b.states.size() == count && b.lambda_e.size() == count && b.lambda_i.size() == count &&
                b.rho.size() == count && b.theta.size() == count,
            ErrorKind::ShapeMismatch, "kkt: bundle does not match the scenario set");
    require(b.x1.size() == data.grid.size(), ErrorKind::ShapeMismatch, "kkt: control length mismatch");
}

double l1_h(const ConeSpec& cone, std::span<const double> v) {
    double sum = 0.0;
    for (double x : v) sum += std::abs(x);
    return cone.weight * sum;
}

} // namespace

KktReport check_gamma_system(const ProblemData& data, const EvalBundle& b, const SolveResult& result) {
    check_bundle(data, b);
    require(result.xi.size() == b.x1.size(), ErrorKind::ShapeMismatch, "kkt: normal-cone element length mismatch");
    const Grid& grid = data.grid;
    const std::size_t n = grid.size();
    const double h = grid.h();
    const std::size_t count = data.n_scenarios();

    KktReport r;
    r.gamma = b.gamma;

    GridFunction station(n);
    for (std::size_t j = 0; j < n; ++j) {
        station[j] = b.eta[j] + b.expected_rho[j] + result.xi[j];
    }
    r.stationarity_x1 = dual_norm(grid, station);

    // xi must lie in the normal cone of C at x1.
    double nc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = b.x1[j];
        const double v = result.xi[j];
        const bool at_lo = x <= data.lo[j];
        const bool at_hi = x >= data.hi[j];
        if (at_lo && at_hi) continue;
        if (at_lo) nc = std::max(nc, std::max(0.0, v));
        else if (at_hi) nc = std::max(nc, std::max(0.0, -v));
        else nc = std::max(nc, std::abs(v));
    }
    r.normal_cone_violation = nc;

    r.adjoint_residual.assign(count, 0.0);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& op = data.operators[k];
        const auto adj = data.constraint.adjoints(grid, data.scenarios, k, b.x1, b.states[k], b.lambda_i[k]);
        const GridFunction a_lambda = op.apply(b.lambda_e[k]);
        GridFunction res(n);
        GridFunction rho_res(n);
        for (std::size_t j = 0; j < n; ++j) {
            res[j] = b.theta[k] * b.zeta2[k][j] + h * a_lambda[j] + adj.d_state[j];
            rho_res[j] = b.theta[k] * b.zeta1[k][j] - h * b.lambda_e[k][j] + adj.d_control[j] - b.rho[k][j];
        }
        r.adjoint_residual[k] = dual_norm(grid, res);
        r.rho_consistency = std::max(r.rho_consistency, dual_norm(grid, rho_res));

        const GridFunction ax = op.apply(b.states[k]);
        GridFunction state_res(n);
        for (std::size_t j = 0; j < n; ++j) state_res[j] = ax[j] - b.x1[j];
        r.state_residual = std::max(r.state_residual, norm_h(grid, state_res));

        const auto i = data.constraint.evaluate(grid, data.scenarios, k, b.x1, b.states[k]);
        std::vector<double> minus_i(i.size());
        std::transform(i.begin(), i.end(), minus_i.begin(), [](double v) { return -v; });
        const auto proj = project(data.cone, minus_i);
        HElement formula(i.size());
        for (std::size_t c = 0; c < i.size(); ++c) {
            formula[c] = b.lambda_i[k][c] - b.gamma * (i[c] + proj[c]);
        }
        r.multiplier_formula_residual = std::max(r.multiplier_formula_residual, data.cone.norm(formula));
    }
    r.adjoint_residual_max = *std::max_element(r.adjoint_residual.begin(), r.adjoint_residual.end());

    double box = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        box = std::max({box, data.lo[j] - b.x1[j], b.x1[j] - data.hi[j]});
    }
    r.state_residual = std::max(r.state_residual, box);
    return r;
}

KktReport check_limit_system(const ProblemData& data, const EvalBundle& b, const SolveResult& /*result*/,
                             const LimitTolerances& tol) {
    check_bundle(data, b);
    const std::size_t count = data.n_scenarios();
    const auto& weights = data.scenarios.weights;
    KktReport r;
    r.gamma = b.gamma;

    std::vector<double> masses(count);
    for (std::size_t k = 0; k < count; ++k) {
        const auto& i = b.constraint_values[k];
        const auto& lam = b.lambda_i[k];
        for (std::size_t c = 0; c < i.size(); ++c) {
            r.primal_feasibility = std::max(r.primal_feasibility, i[c]);
            r.dual_cone_violation = std::max(r.dual_cone_violation, -lam[c]);
        }
        masses[k] = l1_h(data.cone, lam);
        r.multiplier_l1 += weights[k] * masses[k];
        r.multiplier_max = std::max(r.multiplier_max, data.cone.norm(lam));
        double lambda_e_l1 = 0.0;
        for (double v : b.lambda_e[k]) lambda_e_l1 += std::abs(v);
        r.adjoint_l1 += weights[k] * data.grid.h() * lambda_e_l1;
    }
    r.primal_feasibility = std::max(0.0, r.primal_feasibility);
    r.dual_cone_violation = std::max(0.0, r.dual_cone_violation);
    r.complementarity_signed = complementarity_value(data, b);
    r.complementarity = std::abs(r.complementarity_signed);
    r.sq_violation = squared_violation(data, b);
    r.concentration_index = concentration_index(masses, weights, tol.concentration_q);
    return r;
}

KktReport full_report(const ProblemData& data, const SolveResult& result, const LimitTolerances& tol) {
    KktReport r = check_gamma_system(data, result.bundle, result);
    const KktReport lim = check_limit_system(data, result.bundle, result, tol);
    r.primal_feasibility = lim.primal_feasibility;
    r.dual_cone_violation = lim.dual_cone_violation;
    r.complementarity = lim.complementarity;
    r.complementarity_signed = lim.complementarity_signed;
    r.sq_violation = lim.sq_violation;
    r.multiplier_l1 = lim.multiplier_l1;
    r.adjoint_l1 = lim.adjoint_l1;
    r.multiplier_max = lim.multiplier_max;
    r.concentration_index = lim.concentration_index;
    return r;
}

double concentration_index(std::span<const double> masses, std::span<const double> weights, double q) {
    require(q > 0.0 && q < 1.0, ErrorKind::InvalidArgument, "concentration index: q must lie in (0, 1)");
    require(masses.size() == weights.size(), ErrorKind::ShapeMismatch, "concentration index: length mismatch");
    double total = 0.0;
    for (std::size_t k = 0; k < masses.size(); ++k) total += weights[k] * masses[k];
    if (!(total > 0.0)) return 0.0;

    std::vector<std::size_t> order(masses.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return masses[a] > masses[b]; });
    double carried = 0.0;
    double used = 0.0;
    for (std::size_t k : order) {
        if (used + weights[k] > q + 1e-12) break;
        used += weights[k];
        carried += weights[k] * masses[k];
    }
    return std::clamp(carried / total, 0.0, 1.0);
}

double complementarity_value(const ProblemData& data, const EvalBundle& b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        sum += data.scenarios.weights[k] * data.cone.inner(b.lambda_i[k], b.constraint_values[k]);
    }
    return sum;
}

double squared_violation(const ProblemData& data, const EvalBundle& b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        sum += data.scenarios.weights[k] * data.cone.inner(b.residuals[k], b.residuals[k]);
    }
    return sum;
}

} // namespace riskpen
