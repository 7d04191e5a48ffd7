#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace riskpen {

/// Nodal values on the interior nodes of a grid; boundary values are implicitly zero.
using GridFunction = std::vector<double>;

/// Uniform grid of the unit interval. Only interior nodes carry unknowns.
class Grid {
public:
    explicit Grid(std::size_t n_interior);

    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] std::size_t n_cells() const noexcept { return n_ + 1; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] double node(std::size_t j) const noexcept { return static_cast<double>(j + 1) * h_; }
    [[nodiscard]] double cell_midpoint(std::size_t c) const noexcept {
        return (static_cast<double>(c) + 0.5) * h_;
    }
    [[nodiscard]] std::vector<double> nodes() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    std::size_t n_;
    double h_;
};

/// Lumped-mass inner product sum_j h u_j v_j.
double inner_h(const Grid& grid, std::span<const double> u, std::span<const double> v);
double norm_h(const Grid& grid, std::span<const double> u);

/// Finite-difference discretization of -(a u')' with homogeneous Dirichlet
/// conditions. The conductivity lives on the n+1 cells; row j reads
///   ((a_{j-1/2} + a_{j+1/2}) u_j - a_{j-1/2} u_{j-1} - a_{j+1/2} u_{j+1}) / h^2.
///
/// Immutable once built; the Thomas factorization is computed at construction
/// so concurrent solves only touch their own output buffers.
class EllipticOperator {
public:
    EllipticOperator(const Grid& grid, std::span<const double> conductivity);

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::span<const double> conductivity() const noexcept { return conductivity_; }
    [[nodiscard]] std::span<const double> diagonal() const noexcept { return diag_; }
    /// Sub- and super-diagonal (the matrix is symmetric), length n-1.
    [[nodiscard]] std::span<const double> off_diagonal() const noexcept { return off_; }

    /// y = A u
    [[nodiscard]] GridFunction apply(std::span<const double> u) const;

    /// Solves A u = rhs by tridiagonal elimination.
    [[nodiscard]] GridFunction solve(std::span<const double> rhs) const;

private:
    Grid grid_;
    std::vector<double> conductivity_;
    std::vector<double> diag_;
    std::vector<double> off_;
    // Thomas factorization: modified super-diagonal and pivots.
    std::vector<double> c_star_;
    std::vector<double> pivot_;
};

EllipticOperator assemble(const Grid& grid, std::span<const double> conductivity);

/// State solve A u = rhs.
GridFunction solve_state(const EllipticOperator& op, std::span<const double> rhs);

/// Solve with the transposed operator. A is symmetric, so this is the state solve.
GridFunction apply_adjoint_solve(const EllipticOperator& op, std::span<const double> rhs);

} // namespace riskpen
