#pragma once

#include "riskpen/cone.hpp"
#include "riskpen/grid.hpp"
#include "riskpen/risk.hpp"
#include "riskpen/scenario.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace riskpen {

using Control = GridFunction;

/// Deliberate defects for mutation testing of the verification battery.
enum class FaultInjection { None, FlipAdjointSign };

/// Everything needed to evaluate the penalized risk-averse tracking problem
///   min_{lo <= x1 <= hi}  mu/2 ||x1||^2 + R[ 1/2 ||x2(w) - y_D||^2 ] + E[ beta_gamma(-i(x1, x2(w); w)) ]
/// with A(w) x2(w) = x1 for every scenario w.
struct ProblemData {
    Grid grid{1};
    ScenarioSet scenarios;
    std::vector<EllipticOperator> operators;
    ConstraintMap constraint;
    ConeSpec cone;
    RiskMeasure risk;
    GridFunction target;
    double mu_tik = 1e-2;
    GridFunction lo;
    GridFunction hi;
    double tol_feas = 1e-9;
    /// Worker threads for the per-scenario loops. Results do not depend on it.
    std::size_t threads = 1;
    FaultInjection fault = FaultInjection::None;

    /// Validates every field and assembles one operator per scenario.
    static ProblemData make(const Grid& grid, ScenarioSet scenarios, const ConstraintMap& constraint,
                            const RiskMeasure& risk, GridFunction target, double mu_tik, GridFunction lo,
                            GridFunction hi, double tol_feas = 1e-9);

    [[nodiscard]] std::size_t n_scenarios() const noexcept { return scenarios.size(); }
    [[nodiscard]] bool singleton_controls() const;
};

/// Per-scenario and aggregated quantities of one evaluation of j^gamma.
///
/// Dual vectors (zeta, rho, eta, gradient, constraint adjoints) pair with
/// control/state directions through plain sums; divide by h for the
/// L2-Riesz representative.
struct EvalBundle {
    double gamma = 0.0;
    Control x1;

    std::vector<GridFunction> states;
    std::vector<double> j2;
    std::vector<HElement> constraint_values;
    std::vector<HElement> residuals;     // max(0, i)
    std::vector<double> penalties;       // beta_gamma(-i) per scenario
    std::vector<HElement> lambda_i;
    std::vector<GridFunction> lambda_e;
    std::vector<GridFunction> zeta1;
    std::vector<GridFunction> zeta2;
    std::vector<GridFunction> rho;

    double j1 = 0.0;
    double risk_value = 0.0;
    double penalty_term = 0.0;
    double j_gamma = 0.0;
    std::vector<double> theta;
    GridFunction eta;
    GridFunction expected_rho;
    GridFunction gradient;
    std::size_t tie_breaks = 0;
};

/// Full evaluation: states, penalty, multipliers, adjoints and reduced gradient.
EvalBundle evaluate(const ProblemData& data, double gamma, std::span<const double> x1);

/// j^gamma(x1) only (no adjoint solves).
double objective_only(const ProblemData& data, double gamma, std::span<const double> x1);

struct UnpenalizedValue {
    double j = 0.0;
    bool feasible = true;
    double max_violation = 0.0;
};

/// j(x1) = J1 + R[J2] without penalty, plus max-norm feasibility of i <= 0.
UnpenalizedValue unpenalized_objective(const ProblemData& data, std::span<const double> x1);

/// Riesz representative of a dual control vector under the lumped mass.
Control riesz(const Grid& grid, std::span<const double> dual);

/// Runs body(k) for k in [0, count) on up to `threads` workers.
void for_each_scenario(std::size_t threads, std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace riskpen
