#pragma once

#include <span>
#include <string>
#include <vector>

namespace riskpen {

/// Coherent risk measure on a finite probability space.
///
/// `smoothing` > 0 replaces max(0, xi - t) in the AVaR minimization formula by
/// tau * softplus((xi - t) / tau). The smoothed functional is differentiable,
/// sits within tau log(2) / alpha above the exact value, and its gradient
/// density still lies in the AVaR dual set.
struct RiskMeasure {
    enum class Kind { Expectation, AVaR };
    Kind kind = Kind::Expectation;
    double alpha = 1.0;
    double smoothing = 0.0;

    static RiskMeasure expectation();
    static RiskMeasure avar(double alpha, double smoothing = 0.0);

    [[nodiscard]] bool is_smooth() const noexcept {
        return kind == Kind::Expectation || alpha >= 1.0 || smoothing > 0.0;
    }
    [[nodiscard]] std::string name() const;
};

/// Density theta with respect to the scenario weights.
struct RiskSubgradient {
    std::vector<double> theta;
};

/// R[xi]. AVaR is evaluated exactly at the alpha-quantile minimizer (or via the
/// softplus formula when smoothing is set).
double evaluate(const RiskMeasure& rm, std::span<const double> xi, std::span<const double> weights);

/// An element of the subdifferential of R at xi. For exact AVaR the quantile
/// atom receives the fractional density, filled in ascending scenario index;
/// constant xi returns theta = 1.
RiskSubgradient subgradient(const RiskMeasure& rm, std::span<const double> xi,
                            std::span<const double> weights);

struct DualityGap {
    double value = 0.0;
    bool feasible = true;
    std::string reason;
};

/// R[xi] - E[xi theta] for theta in the dual set of R; +infinity with a reason
/// when theta is infeasible. Always uses the exact (unsmoothed) measure.
DualityGap duality_gap(const RiskMeasure& rm, std::span<const double> xi, std::span<const double> theta,
                       std::span<const double> weights);

/// Minimizer t of t + E[max(0, xi - t)] / alpha: the (1 - alpha)-quantile of xi.
double avar_threshold(double alpha, std::span<const double> xi, std::span<const double> weights);

} // namespace riskpen
