#include "riskpen/grid.hpp"

#include "riskpen/error.hpp"

#include <cmath>
#include <string>

namespace riskpen {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::ShapeMismatch: return "shape-mismatch";
    case ErrorKind::EllipticityViolation: return "ellipticity-violation";
    case ErrorKind::NumericalDegeneracy: return "numerical-degeneracy";
    case ErrorKind::Diverged: return "diverged";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Grid::Grid(std::size_t n_interior) : n_(n_interior), h_(0.0) {
    require(n_interior > 0, ErrorKind::InvalidArgument, "grid needs at least one interior node");
    h_ = 1.0 / static_cast<double>(n_interior + 1);
}

std::vector<double> Grid::nodes() const {
    std::vector<double> s(n_);
    for (std::size_t j = 0; j < n_; ++j) {
        s[j] = node(j);
    }
    return s;
}

double inner_h(const Grid& grid, std::span<const double> u, std::span<const double> v) {
    require(u.size() == grid.size() && v.size() == grid.size(), ErrorKind::ShapeMismatch,
            "inner_h: expected length " + std::to_string(grid.size()) + ", got " +
                std::to_string(u.size()) + " and " + std::to_string(v.size()));
    double sum = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        sum += u[j] * v[j];
    }
    return grid.h() * sum;
}

double norm_h(const Grid& grid, std::span<const double> u) {
    return std::sqrt(inner_h(grid, u, u));
}

EllipticOperator::EllipticOperator(const Grid& grid, std::span<const double> conductivity)
    : grid_(grid), conductivity_(conductivity.begin(), conductivity.end()) {
    const std::size_t n = grid.size();
    require(conductivity.size() == n + 1, ErrorKind::ShapeMismatch,
            "conductivity must have n_interior+1 = " + std::to_string(n + 1) + " cell values, got " +
                std::to_string(conductivity.size()));
    for (std::size_t c = 0; c < conductivity.size(); ++c) {
        if (!(conductivity[c] > 0.0) || !std::isfinite(conductivity[c])) {
            throw Error(ErrorKind::EllipticityViolation,
                        "conductivity must be strictly positive; cell " + std::to_string(c) +
                            " has " + std::to_string(conductivity[c]));
        }
    }

    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    diag_.resize(n);
    off_.resize(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
        diag_[j] = (conductivity_[j] + conductivity_[j + 1]) * inv_h2;
    }
    for (std::size_t j = 0; j + 1 < n; ++j) {
        off_[j] = -conductivity_[j + 1] * inv_h2;
    }

    c_star_.resize(n);
    pivot_.resize(n);
    pivot_[0] = diag_[0];
    for (std::size_t j = 0; j < n; ++j) {
        if (j > 0) {
            pivot_[j] = diag_[j] - off_[j - 1] * c_star_[j - 1];
        }
        if (!(std::abs(pivot_[j]) > 0.0)) {
            throw Error(ErrorKind::NumericalDegeneracy,
                        "zero pivot in tridiagonal elimination at row " + std::to_string(j));
        }
        c_star_[j] = (j + 1 < n) ? off_[j] / pivot_[j] : 0.0;
    }
}

GridFunction EllipticOperator::apply(std::span<const double> u) const {
    const std::size_t n = grid_.size();
    require(u.size() == n, ErrorKind::ShapeMismatch, "operator apply: length mismatch");
    GridFunction y(n);
    for (std::size_t j = 0; j < n; ++j) {
        double acc = diag_[j] * u[j];
        if (j > 0) acc += off_[j - 1] * u[j - 1];
        if (j + 1 < n) acc += off_[j] * u[j + 1];
        y[j] = acc;
    }
    return y;
}

GridFunction EllipticOperator::solve(std::span<const double> rhs) const {
    const std::size_t n = grid_.size();
    require(rhs.size() == n, ErrorKind::ShapeMismatch,
            "state solve: rhs length " + std::to_string(rhs.size()) + " != " + std::to_string(n));
    GridFunction u(n);
    u[0] = rhs[0] / pivot_[0];
    for (std::size_t j = 1; j < n; ++j) {
        u[j] = (rhs[j] - off_[j - 1] * u[j - 1]) / pivot_[j];
    }
    for (std::size_t j = n - 1; j-- > 0;) {
        u[j] -= c_star_[j] * u[j + 1];
    }
    return u;
}

EllipticOperator assemble(const Grid& grid, std::span<const double> conductivity) {
    return EllipticOperator(grid, conductivity);
}

GridFunction solve_state(const EllipticOperator& op, std::span<const double> rhs) {
    return op.solve(rhs);
}

GridFunction apply_adjoint_solve(const EllipticOperator& op, std::span<const double> rhs) {
    return op.solve(rhs);
}

} // namespace riskpen
