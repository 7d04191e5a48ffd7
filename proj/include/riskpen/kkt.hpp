#pragma once

#include "riskpen/objective.hpp"
#include "riskpen/solver.hpp"

#include <span>
#include <vector>

namespace riskpen {

/// Residuals of the discrete optimality systems at one penalty level.
///
/// Gamma system (penalized problem):
///   stationarity_x1      ||eta + E[rho] + xi||            (dual norm)
///   adjoint_residual     ||theta zeta2 + e_x2^* lambda_e + i_x2^* lambda_i||, per scenario
///   rho_consistency      ||theta zeta1 + e_x1^* lambda_e + i_x1^* lambda_i - rho||
///   state_residual       ||A x2 - x1||_h, plus distance of x1 to C
///   multiplier_formula   ||lambda_i - gamma (i + proj(-i))||_H
/// Limit system (distance to the unpenalized KKT conditions):
///   primal_feasibility   max(0, max i)
///   dual_cone_violation  max(0, -min lambda_i)
///   complementarity      |E[(lambda_i, i)_H]|
/// Norms over scenarios are weighted L1 of the per-scenario H-norms.
struct KktReport {
    double gamma = 0.0;

    double stationarity_x1 = 0.0;
    double normal_cone_violation = 0.0;
    std::vector<double> adjoint_residual;
    double adjoint_residual_max = 0.0;
    double rho_consistency = 0.0;
    double state_residual = 0.0;
    double multiplier_formula_residual = 0.0;

    double primal_feasibility = 0.0;
    double dual_cone_violation = 0.0;
    double complementarity = 0.0;
    double complementarity_signed = 0.0;
    double sq_violation = 0.0;
    double multiplier_l1 = 0.0;
    double adjoint_l1 = 0.0;
    double multiplier_max = 0.0;
    double concentration_index = 0.0;
};

struct LimitTolerances {
    /// Fraction q of probability mass for the concentration index.
    double concentration_q = 0.125;
};

/// Evaluates the five gamma-system residuals. `result.xi` supplies the
/// normal-cone element; the bundle must come from the same control.
KktReport check_gamma_system(const ProblemData& data, const EvalBundle& bundle, const SolveResult& result);

/// Evaluates feasibility, dual-cone membership, complementarity and the
/// multiplier norms that measure the distance to the limit system.
KktReport check_limit_system(const ProblemData& data, const EvalBundle& bundle, const SolveResult& result,
                             const LimitTolerances& tol = {});

/// Both systems in one report.
KktReport full_report(const ProblemData& data, const SolveResult& result, const LimitTolerances& tol = {});

/// Share of sum_k p_k m_k carried by the largest-mass scenarios whose total
/// probability stays within q (taken in descending mass, ties by index).
/// Returns 0 when the total mass is zero.
double concentration_index(std::span<const double> masses, std::span<const double> weights, double q);

/// E[(lambda_i, i)_H]; equals gamma E[||max(0, i)||_H^2] at the penalty multiplier.
double complementarity_value(const ProblemData& data, const EvalBundle& bundle);

/// E[||max(0, i)||_H^2]
double squared_violation(const ProblemData& data, const EvalBundle& bundle);

} // namespace riskpen
