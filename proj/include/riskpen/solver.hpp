#pragma once

#include "riskpen/objective.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace riskpen {

struct SolveOptions {
    enum class StepRule { Fixed, Backtracking };

    std::size_t max_iters = 50000;
    /// Bound on ||x - clamp(x - grad_h j(x))||_h, grad_h the L2-Riesz gradient.
    double tol_stationarity = 1e-8;
    StepRule step_rule = StepRule::Backtracking;
    double armijo = 1e-4;
    double shrink = 0.5;
    /// FISTA momentum with adaptive restart.
    bool accelerated = true;
    /// Diminishing-step constant for subgradient mode; <= 0 picks the first
    /// gradient step length.
    double subgradient_scale = 0.0;
    std::size_t power_iters = 5;
    /// Keep the per-iteration log in the result.
    bool record_log = true;

    void validate() const;
};

struct IterationRecord {
    std::size_t iter = 0;
    double j_gamma = 0.0;
    double stationarity = 0.0;
    double step = 0.0;
};

struct SolveResult {
    Control x1_opt;
    EvalBundle bundle;
    /// Normal-cone element at x1_opt: -g on the active bounds, 0 elsewhere (dual vector).
    GridFunction xi;
    std::size_t iterations = 0;
    double stationarity_norm = 0.0;
    bool converged = false;
    /// "projected-gradient", "fista" or "subgradient".
    std::string method;
    double lipschitz_estimate = 0.0;
    std::vector<IterationRecord> log;
};

/// Minimizes j^gamma over the box C = [lo, hi]. Smooth problems use projected
/// gradient (optionally accelerated) with backtracking; a nonsmooth risk
/// measure switches to diminishing-step subgradient descent with best-iterate
/// tracking. Deterministic for identical inputs.
SolveResult minimize(const ProblemData& data, double gamma, const SolveOptions& opts,
                     std::optional<std::span<const double>> warm_start = std::nullopt);

/// ||x1 - clamp(x1 - grad_h j^gamma(x1), lo, hi)||_h
double stationarity_residual(const ProblemData& data, double gamma, std::span<const double> x1);

/// Same residual from an already computed dual gradient.
double projected_gradient_norm(const ProblemData& data, std::span<const double> x1,
                               std::span<const double> gradient);

/// Normal-cone element -g restricted to the active bounds.
GridFunction normal_cone_element(const ProblemData& data, std::span<const double> x1,
                                 std::span<const double> gradient);

Control clamp_to_box(const ProblemData& data, std::span<const double> x);

} // namespace riskpen
