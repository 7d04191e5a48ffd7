#pragma once

#include "riskpen/objective.hpp"
#include "riskpen/path.hpp"
#include "riskpen/scenario.hpp"
#include "riskpen/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace riskpen {

/// Closed-form profile on (0,1) used for the tracking target.
struct ProfileSpec {
    enum class Kind { Constant, Affine, Sine };
    Kind kind = Kind::Sine;
    double value = 0.0;
    double intercept = 0.0;
    double slope = 0.0;
    double amplitude = 0.1;

    [[nodiscard]] GridFunction sample(const Grid& grid) const;
};

struct ProblemConfig {
    std::size_t n_interior = 127;
    double mu_tik = 1e-3;
    ProfileSpec target;
    double control_lo = -100.0;
    double control_hi = 100.0;
    std::string constraint_kind = "mixed";
    double epsilon = 0.01;
    double delta = 1e-8;
    double tol_feas = 1e-9;
    double initial_control = 0.0;
};

struct RiskConfig {
    std::string risk = "expectation";
    double alpha = 0.5;
    /// "subgradient" (exact AVaR, diminishing steps) or "smooth" (softplus).
    std::string avar_mode = "subgradient";
    double avar_tau = 1e-3;
};

struct ReferenceConfig {
    /// "scale_first_solution" or "none".
    std::string mode = "scale_first_solution";
    std::size_t bisection_steps = 60;
};

struct PathConfig {
    bool warm_start = true;
    double bound_factor = 10.0;
    double concentration_q = 0.125;
};

/// Fully resolved run configuration. Every key has a default; `from_json`
/// rejects unknown keys and reports all invalid fields at once.
struct RunConfig {
    ProblemConfig problem;
    ScenarioConfig scenarios;
    RiskConfig risk;
    SolveOptions solver;
    std::vector<double> gamma_schedule;
    PathConfig path;
    ReferenceConfig feasible_reference;
    std::string output_dir = "out";

    RunConfig();

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);
    [[nodiscard]] nlohmann::json to_json() const;

    /// Hex FNV-1a 64 hash of the canonical resolved JSON.
    [[nodiscard]] std::string content_hash() const;

    /// Throws Error(Config) listing every offending field.
    void validate() const;
};

RiskMeasure build_risk(const RiskConfig& cfg);
ProblemData build_problem(const RunConfig& cfg);
PathOptions build_path_options(const RunConfig& cfg);

/// FNV-1a 64-bit hash, rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view text);

} // namespace riskpen
