#pragma once

#include "riskpen/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace riskpen {

/// Name of the pseudo-random generator used by `sample`. Part of the scenario
/// file contract: draws are the raw 64-bit outputs of std::mt19937_64 mapped
/// to [-1, 1] through their upper 53 bits.
inline constexpr const char* kScenarioGenerator = "mt19937_64/u53";

struct BoundSpec {
    enum class Kind { Constant, Affine, File };
    Kind kind = Kind::Constant;
    double value = 0.0;      // constant
    double intercept = 0.0;  // affine: psi(s) = intercept + slope * s
    double slope = 0.0;
    /// Per-scenario uniform shift in [-bound_sigma, bound_sigma] (constant/affine only).
    double bound_sigma = 0.0;
    std::string path;        // file: scenario table to import
};

struct ScenarioConfig {
    std::size_t n_scenarios = 16;
    std::uint64_t seed = 42;
    double a0 = 1.0;
    std::vector<double> sigma;
    double a_min = 0.1;
    BoundSpec bound_spec;
};

/// Finite probability space: weights plus the per-scenario random fields.
///
/// Bounds are stored in the three shapes the constraint maps consume: nodal
/// (mixed), cellwise (gradient) and one scalar (volume). For generated sets the
/// scalar bound is the mean of psi over the unit interval.
struct ScenarioSet {
    std::size_t n_interior = 0;
    std::uint64_t seed = 0;
    double a_min = 0.0;
    std::string generator = kScenarioGenerator;
    std::vector<double> weights;
    std::vector<std::vector<double>> conductivities; // N x (n+1)
    std::vector<std::vector<double>> node_bounds;    // N x n
    std::vector<std::vector<double>> cell_bounds;    // N x (n+1)
    std::vector<double> scalar_bounds;               // N

    [[nodiscard]] std::size_t size() const noexcept { return weights.size(); }

    /// Throws if weights or conductivities break the set invariants.
    void validate() const;

    friend bool operator==(const ScenarioSet&, const ScenarioSet&) = default;
};

ScenarioSet sample(const Grid& grid, const ScenarioConfig& config);

/// sum_k p_k v_k
double empirical_expectation(const ScenarioSet& set, std::span<const double> values);

/// Flat text table, one row per scenario:
///   weight, n+1 conductivities, n nodal bounds, n+1 cell bounds, scalar bound.
void write_scenario_table(std::ostream& out, const ScenarioSet& set);
ScenarioSet read_scenario_table(std::istream& in);
ScenarioSet load_scenario_table(const std::string& path);

} // namespace riskpen
