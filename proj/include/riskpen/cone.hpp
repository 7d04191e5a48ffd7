#pragma once

#include "riskpen/grid.hpp"
#include "riskpen/scenario.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace riskpen {

/// An element of the constraint Hilbert space H: nodal, cellwise or scalar values.
using HElement = std::vector<double>;

/// Nonnegativity cone K_H together with the (diagonal) inner product of H.
///
/// NonnegGrid: pointwise nonnegative functions, (u, v)_H = weight * sum u v.
/// NonnegScalar: the half line, plain product.
struct ConeSpec {
    enum class Kind { NonnegGrid, NonnegScalar };
    Kind kind = Kind::NonnegScalar;
    std::size_t dim = 1;
    double weight = 1.0;

    static ConeSpec nonneg_grid(std::size_t dim, double weight);
    static ConeSpec nonneg_scalar();

    [[nodiscard]] double inner(std::span<const double> a, std::span<const double> b) const;
    [[nodiscard]] double norm(std::span<const double> a) const;
};

/// Metric projection onto K_H: componentwise max(0, k).
HElement project(const ConeSpec& cone, std::span<const double> k);

/// beta(k) = gamma/2 ||k - proj(k)||_H^2
double envelope(const ConeSpec& cone, double gamma, std::span<const double> k);

/// grad beta(k) = gamma (k - proj(k)), as an element of H.
HElement envelope_gradient(const ConeSpec& cone, double gamma, std::span<const double> k);

struct PenaltyValue {
    double value = 0.0;
    /// max(0, i): the part of the constraint value outside the cone.
    HElement residual;
};

/// Penalty beta(-i) for a constraint i <= 0. For nonnegativity cones this is
/// gamma/2 ||max(0, i)||_H^2.
PenaltyValue penalty(const ConeSpec& cone, double gamma, std::span<const double> i_value);

/// Penalty multiplier gamma (i + proj(-i)) = gamma max(0, i).
HElement penalty_multiplier(const ConeSpec& cone, double gamma, std::span<const double> i_value);

/// Partial adjoints of a constraint map applied to a multiplier, as dual
/// vectors (plain sums pair them with control/state directions).
struct ConstraintAdjoints {
    GridFunction d_control;
    GridFunction d_state;
    /// Gradient constraint with delta = 0: number of cells where the zero
    /// subgradient was used because the state gradient vanished exactly.
    std::size_t tie_breaks = 0;
};

/// The three pointwise almost-sure constraint maps i(x1, x2; omega) <= 0.
///   Mixed:    x2 - psi - epsilon x1            (nodal, H = L2 lumped)
///   Volume:   sum_j h x2_j - b                 (scalar)
///   Gradient: sqrt((D x2)^2 + delta^2) - delta - psi   (cellwise)
class ConstraintMap {
public:
    enum class Kind { Mixed, Volume, Gradient };

    ConstraintMap() = default;
    ConstraintMap(Kind kind, double epsilon, double delta);

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] double epsilon() const noexcept { return epsilon_; }
    [[nodiscard]] double delta() const noexcept { return delta_; }

    /// The cone and H-inner product this map's values live in.
    [[nodiscard]] ConeSpec cone(const Grid& grid) const;

    [[nodiscard]] HElement evaluate(const Grid& grid, const ScenarioSet& scenarios, std::size_t scenario,
                                    std::span<const double> x1, std::span<const double> x2) const;

    [[nodiscard]] ConstraintAdjoints adjoints(const Grid& grid, const ScenarioSet& scenarios,
                                              std::size_t scenario, std::span<const double> x1,
                                              std::span<const double> x2,
                                              std::span<const double> lambda) const;

private:
    Kind kind_ = Kind::Mixed;
    double epsilon_ = 0.0;
    double delta_ = 1e-8;
};

const char* to_string(ConstraintMap::Kind kind) noexcept;
ConstraintMap::Kind constraint_kind_from_string(const std::string& name);

HElement constraint_eval(const ConstraintMap& map, const Grid& grid, const ScenarioSet& scenarios,
                         std::size_t scenario, std::span<const double> x1, std::span<const double> x2);

ConstraintAdjoints constraint_adjoints(const ConstraintMap& map, const Grid& grid,
                                       const ScenarioSet& scenarios, std::size_t scenario,
                                       std::span<const double> x1, std::span<const double> x2,
                                       std::span<const double> lambda);

} // namespace riskpen
