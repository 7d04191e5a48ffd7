#include "riskpen/risk.hpp"

#include "riskpen/error.hpp"
#include "riskpen/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace riskpen {

namespace {

void check_samples(std::span<const double> xi, std::span<const double> weights) {
    require(!xi.empty(), ErrorKind::InvalidArgument, "risk: empty sample");
    require(xi.size() == weights.size(), ErrorKind::ShapeMismatch, "risk: sample/weight length mismatch");
}

void check_alpha(double alpha) {
    require(alpha > 0.0 && alpha <= 1.0, ErrorKind::InvalidArgument, "risk: alpha must lie in (0, 1]");
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

std::vector<std::size_t> ascending_order(std::span<const double> xi) {
    std::vector<std::size_t> order(xi.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xi[a] < xi[b]; });
    return order;
}

// Root t of sum_k p_k logistic((xi_k - t) / tau) = alpha.
double smooth_threshold(double alpha, double tau, std::span<const double> xi, std::span<const double> weights) {
    const auto [min_it, max_it] = std::minmax_element(xi.begin(), xi.end());
    const double margin = tau * (std::abs(std::log(alpha / (1.0 - alpha))) + 40.0);
    double lo = *min_it - margin;
    double hi = *max_it + margin;
    auto tail_mass = [&](double t) {
        double m = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k) {
            m += weights[k] * logistic((xi[k] - t) / tau);
        }
        return m;
    };
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (tail_mass(mid) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    double t = 0.5 * (lo + hi);
    // Newton polish; the mass function is smooth and monotone.
    for (int it = 0; it < 3; ++it) {
        double m = 0.0;
        double dm = 0.0;
        for (std::size_t k = 0; k < xi.size(); ++k) {
            const double s = logistic((xi[k] - t) / tau);
            m += weights[k] * s;
            dm -= weights[k] * s * (1.0 - s) / tau;
        }
        if (dm == 0.0) break;
        const double next = t - (m - alpha) / dm;
        if (!std::isfinite(next)) break;
        t = next;
    }
    return t;
}

double smooth_avar(double alpha, double tau, std::span<const double> xi, std::span<const double> weights,
                   double t) {
    double acc = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        acc += weights[k] * tau * softplus((xi[k] - t) / tau);
    }
    return t + acc / alpha;
}

bool uses_expectation(const RiskMeasure& rm) {
    return rm.kind == RiskMeasure::Kind::Expectation || rm.alpha >= 1.0;
}

double expectation_of(std::span<const double> xi, std::span<const double> weights) {
    double sum = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        sum += weights[k] * xi[k];
    }
    return sum;
}

} // namespace

RiskMeasure RiskMeasure::expectation() { return RiskMeasure{}; }

RiskMeasure RiskMeasure::avar(double alpha, double smoothing) {
    check_alpha(alpha);
    require(smoothing >= 0.0, ErrorKind::InvalidArgument, "risk: smoothing must be >= 0");
    return RiskMeasure{Kind::AVaR, alpha, smoothing};
}

std::string RiskMeasure::name() const {
    if (kind == Kind::Expectation) return "expectation";
    std::string s = "avar(" + format_real(alpha) + ")";
    if (smoothing > 0.0) s += "~softplus(" + format_real(smoothing) + ")";
    return s;
}

double avar_threshold(double alpha, std::span<const double> xi, std::span<const double> weights) {
    check_alpha(alpha);
    check_samples(xi, weights);
    const auto order = ascending_order(xi);
    const double level = 1.0 - alpha;
    double cumulative = 0.0;
    for (std::size_t idx : order) {
        cumulative += weights[idx];
        if (cumulative >= level - 1e-14) {
            return xi[idx];
        }
    }
    return xi[order.back()];
}

double evaluate(const RiskMeasure& rm, std::span<const double> xi, std::span<const double> weights) {
    check_samples(xi, weights);
    if (uses_expectation(rm)) {
        return expectation_of(xi, weights);
    }
    check_alpha(rm.alpha);
    if (rm.smoothing > 0.0) {
        const double t = smooth_threshold(rm.alpha, rm.smoothing, xi, weights);
        return smooth_avar(rm.alpha, rm.smoothing, xi, weights, t);
    }
    const double t = avar_threshold(rm.alpha, xi, weights);
    double excess = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        excess += weights[k] * std::max(0.0, xi[k] - t);
    }
    return t + excess / rm.alpha;
}

RiskSubgradient subgradient(const RiskMeasure& rm, std::span<const double> xi, std::span<const double> weights) {
    check_samples(xi, weights);
    RiskSubgradient out;
    out.theta.assign(xi.size(), 1.0);
    if (uses_expectation(rm)) {
        return out;
    }
    const auto [min_it, max_it] = std::minmax_element(xi.begin(), xi.end());
    if (*min_it == *max_it) {
        return out;
    }
    const double cap = 1.0 / rm.alpha;
    if (rm.smoothing > 0.0) {
        const double t = smooth_threshold(rm.alpha, rm.smoothing, xi, weights);
        for (std::size_t k = 0; k < xi.size(); ++k) {
            out.theta[k] = cap * logistic((xi[k] - t) / rm.smoothing);
        }
        return out;
    }

    const double t = avar_threshold(rm.alpha, xi, weights);
    double budget = 1.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        if (xi[k] > t) {
            out.theta[k] = cap;
            budget -= weights[k] * cap;
        } else {
            out.theta[k] = 0.0;
        }
    }
    for (std::size_t k = 0; k < xi.size(); ++k) {
        if (xi[k] != t || weights[k] <= 0.0) continue;
        const double share = std::clamp(budget / weights[k], 0.0, cap);
        out.theta[k] = share;
        budget -= weights[k] * share;
    }
    return out;
}

DualityGap duality_gap(const RiskMeasure& rm, std::span<const double> xi, std::span<const double> theta,
                       std::span<const double> weights) {
    check_samples(xi, weights);
    require(theta.size() == xi.size(), ErrorKind::ShapeMismatch, "duality gap: theta length mismatch");
    constexpr double kInf = std::numeric_limits<double>::infinity();
    constexpr double kTol = 1e-12;

    double mass = 0.0;
    double pairing = 0.0;
    for (std::size_t k = 0; k < xi.size(); ++k) {
        if (theta[k] < -kTol) {
            return {kInf, false, "theta negative at scenario " + std::to_string(k)};
        }
        mass += weights[k] * theta[k];
        pairing += weights[k] * theta[k] * xi[k];
    }
    if (std::abs(mass - 1.0) > kTol) {
        return {kInf, false, "E[theta] = " + format_real(mass) + " != 1"};
    }
    if (uses_expectation(rm)) {
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (weights[k] > 0.0 && std::abs(theta[k] - 1.0) > kTol) {
                return {kInf, false, "expectation dual set is theta = 1; scenario " + std::to_string(k)};
            }
        }
    } else {
        const double cap = 1.0 / rm.alpha;
        for (std::size_t k = 0; k < theta.size(); ++k) {
            if (theta[k] > cap + kTol) {
                return {kInf, false, "theta exceeds 1/alpha at scenario " + std::to_string(k)};
            }
        }
    }
    RiskMeasure exact = rm;
    exact.smoothing = 0.0;
    return {evaluate(exact, xi, weights) - pairing, true, {}};
}

} // namespace riskpen
