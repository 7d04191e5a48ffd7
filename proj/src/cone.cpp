#include "riskpen/cone.hpp"

#include "riskpen/error.hpp"

#include <algorithm>
#include <cmath>

namespace riskpen {

namespace {

void check_dim(const ConeSpec& cone, std::span<const double> k, const char* where) {
    require(k.size() == cone.dim, ErrorKind::ShapeMismatch,
            std::string(where) + ": expected H-element of size " + std::to_string(cone.dim) + ", got " +
                std::to_string(k.size()));
}

void check_gamma(double gamma) {
    require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument,
            "penalty parameter gamma must be positive and finite");
}

} // namespace

ConeSpec ConeSpec::nonneg_grid(std::size_t dim, double weight) {
    require(dim > 0 && weight > 0.0, ErrorKind::InvalidArgument, "grid cone needs dim > 0 and weight > 0");
    return ConeSpec{Kind::NonnegGrid, dim, weight};
}

ConeSpec ConeSpec::nonneg_scalar() { return ConeSpec{Kind::NonnegScalar, 1, 1.0}; }

double ConeSpec::inner(std::span<const double> a, std::span<const double> b) const {
    check_dim(*this, a, "cone inner");
    check_dim(*this, b, "cone inner");
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        sum += a[j] * b[j];
    }
    return weight * sum;
}

double ConeSpec::norm(std::span<const double> a) const { return std::sqrt(inner(a, a)); }

HElement project(const ConeSpec& cone, std::span<const double> k) {
    check_dim(cone, k, "project");
    HElement p(k.size());
    std::transform(k.begin(), k.end(), p.begin(), [](double v) { return std::max(0.0, v); });
    return p;
}

double envelope(const ConeSpec& cone, double gamma, std::span<const double> k) {
    check_gamma(gamma);
    check_dim(cone, k, "envelope");
    double sum = 0.0;
    for (double v : k) {
        const double d = std::min(0.0, v); // k - max(0, k)
        sum += d * d;
    }
    return 0.5 * gamma * cone.weight * sum;
}

HElement envelope_gradient(const ConeSpec& cone, double gamma, std::span<const double> k) {
    check_gamma(gamma);
    check_dim(cone, k, "envelope gradient");
    HElement g(k.size());
    std::transform(k.begin(), k.end(), g.begin(), [gamma](double v) { return gamma * std::min(0.0, v); });
    return g;
}

PenaltyValue penalty(const ConeSpec& cone, double gamma, std::span<const double> i_value) {
    check_gamma(gamma);
    check_dim(cone, i_value, "penalty");
    PenaltyValue out;
    out.residual.resize(i_value.size());
    double sum = 0.0;
    for (std::size_t j = 0; j < i_value.size(); ++j) {
        const double r = std::max(0.0, i_value[j]);
        out.residual[j] = r;
        sum += r * r;
    }
    out.value = 0.5 * gamma * cone.weight * sum;
    return out;
}

HElement penalty_multiplier(const ConeSpec& cone, double gamma, std::span<const double> i_value) {
    check_gamma(gamma);
    check_dim(cone, i_value, "penalty multiplier");
    HElement lambda(i_value.size());
    std::transform(i_value.begin(), i_value.end(), lambda.begin(),
                   [gamma](double v) { return gamma * std::max(0.0, v); });
    return lambda;
}

ConstraintMap::ConstraintMap(Kind kind, double epsilon, double delta)
    : kind_(kind), epsilon_(epsilon), delta_(delta) {
    require(epsilon >= 0.0 && std::isfinite(epsilon), ErrorKind::InvalidArgument, "epsilon must be >= 0");
    require(delta >= 0.0 && std::isfinite(delta), ErrorKind::InvalidArgument, "delta must be >= 0");
}

ConeSpec ConstraintMap::cone(const Grid& grid) const {
    switch (kind_) {
    case Kind::Mixed: return ConeSpec::nonneg_grid(grid.size(), grid.h());
    case Kind::Volume: return ConeSpec::nonneg_scalar();
    case Kind::Gradient: return ConeSpec::nonneg_grid(grid.n_cells(), grid.h());
    }
    throw Error(ErrorKind::InvalidArgument, "unknown constraint kind");
}

namespace {

void check_fields(const Grid& grid, const ScenarioSet& set, std::size_t k, std::span<const double> x1,
                  std::span<const double> x2) {
    require(k < set.size(), ErrorKind::InvalidArgument, "scenario index out of range");
    require(set.n_interior == grid.size(), ErrorKind::ShapeMismatch, "scenario set / grid size mismatch");
    require(x1.size() == grid.size() && x2.size() == grid.size(), ErrorKind::ShapeMismatch,
            "constraint: control/state length mismatch");
}

// Forward differences on the n+1 cells with zero boundary values.
std::vector<double> cell_gradient(const Grid& grid, std::span<const double> u) {
    const std::size_t n = grid.size();
    std::vector<double> du(n + 1);
    for (std::size_t c = 0; c <= n; ++c) {
        const double right = c < n ? u[c] : 0.0;
        const double left = c > 0 ? u[c - 1] : 0.0;
        du[c] = (right - left) / grid.h();
    }
    return du;
}

} // namespace

HElement ConstraintMap::evaluate(const Grid& grid, const ScenarioSet& set, std::size_t k,
                                 std::span<const double> x1, std::span<const double> x2) const {
    check_fields(grid, set, k, x1, x2);
    const std::size_t n = grid.size();
    switch (kind_) {
    case Kind::Mixed: {
        const auto& psi = set.node_bounds[k];
        HElement i(n);
        for (std::size_t j = 0; j < n; ++j) {
            i[j] = x2[j] - psi[j] - epsilon_ * x1[j];
        }
        return i;
    }
    case Kind::Volume: {
        double integral = 0.0;
        for (double v : x2) integral += v;
        return HElement{grid.h() * integral - set.scalar_bounds[k]};
    }
    case Kind::Gradient: {
        const auto& psi = set.cell_bounds[k];
        const auto du = cell_gradient(grid, x2);
        HElement i(n + 1);
        for (std::size_t c = 0; c <= n; ++c) {
            i[c] = std::sqrt(du[c] * du[c] + delta_ * delta_) - delta_ - psi[c];
        }
        return i;
    }
    }
    throw Error(ErrorKind::InvalidArgument, "unknown constraint kind");
}

ConstraintAdjoints ConstraintMap::adjoints(const Grid& grid, const ScenarioSet& set, std::size_t k,
                                           std::span<const double> x1, std::span<const double> x2,
                                           std::span<const double> lambda) const {
    check_fields(grid, set, k, x1, x2);
    const ConeSpec h_cone = cone(grid);
    check_dim(h_cone, lambda, "constraint adjoints");
    const std::size_t n = grid.size();
    const double h = grid.h();
    ConstraintAdjoints out;
    out.d_control.assign(n, 0.0);
    out.d_state.assign(n, 0.0);
    switch (kind_) {
    case Kind::Mixed:
        for (std::size_t j = 0; j < n; ++j) {
            out.d_state[j] = h * lambda[j];
            out.d_control[j] = -epsilon_ * h * lambda[j];
        }
        break;
    case Kind::Volume:
        std::fill(out.d_state.begin(), out.d_state.end(), h * lambda[0]);
        break;
    case Kind::Gradient: {
        // (lambda, i'(x2) dy)_H = sum_c h lambda_c w_c (D dy)_c with w = Du / |Du|_delta.
        const auto du = cell_gradient(grid, x2);
        std::vector<double> flux(n + 1);
        for (std::size_t c = 0; c <= n; ++c) {
            const double r = std::sqrt(du[c] * du[c] + delta_ * delta_);
            double w = 0.0;
            if (r > 0.0) {
                w = du[c] / r;
            } else {
                ++out.tie_breaks;
            }
            flux[c] = lambda[c] * w;
        }
        for (std::size_t j = 0; j < n; ++j) {
            out.d_state[j] = flux[j] - flux[j + 1];
        }
        break;
    }
    }
    return out;
}

const char* to_string(ConstraintMap::Kind kind) noexcept {
    switch (kind) {
    case ConstraintMap::Kind::Mixed: return "mixed";
    case ConstraintMap::Kind::Volume: return "volume";
    case ConstraintMap::Kind::Gradient: return "gradient";
    }
    return "unknown";
}

ConstraintMap::Kind constraint_kind_from_string(const std::string& name) {
    if (name == "mixed") return ConstraintMap::Kind::Mixed;
    if (name == "volume") return ConstraintMap::Kind::Volume;
    if (name == "gradient") return ConstraintMap::Kind::Gradient;
    throw Error(ErrorKind::InvalidArgument, "unknown constraint kind '" + name + "'");
}

HElement constraint_eval(const ConstraintMap& map, const Grid& grid, const ScenarioSet& scenarios,
                         std::size_t scenario, std::span<const double> x1, std::span<const double> x2) {
    return map.evaluate(grid, scenarios, scenario, x1, x2);
}

ConstraintAdjoints constraint_adjoints(const ConstraintMap& map, const Grid& grid,
                                       const ScenarioSet& scenarios, std::size_t scenario,
                                       std::span<const double> x1, std::span<const double> x2,
                                       std::span<const double> lambda) {
    return map.adjoints(grid, scenarios, scenario, x1, x2, lambda);
}

} // namespace riskpen
