#pragma once

#include "riskpen/kkt.hpp"
#include "riskpen/objective.hpp"
#include "riskpen/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace riskpen {

/// Strictly increasing positive penalty parameters.
class GammaSchedule {
public:
    explicit GammaSchedule(std::vector<double> values);

    /// 10^first_exponent ... 10^last_exponent with `per_decade` points per decade.
    static GammaSchedule decades(int first_exponent, int last_exponent, int per_decade = 1);

    [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

private:
    std::vector<double> values_;
};

struct PathRecord {
    double gamma = 0.0;
    double j = 0.0;
    double j_gamma = 0.0;
    double penalty_term = 0.0;
    double max_violation = 0.0;
    double sq_violation = 0.0;
    double complementarity = 0.0;
    double multiplier_l1 = 0.0;
    double adjoint_l1 = 0.0;
    double concentration_index = 0.0;
    double control_change = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Iterations of a cold-started solve; set only when the comparison runs.
    std::optional<std::size_t> cold_iterations;
    KktReport kkt;
};

struct PathOptions {
    SolveOptions solve;
    bool warm_start = true;
    /// Additionally solve each point from `initial` to compare iteration counts.
    bool compare_cold = false;
    /// Start point of the first solve (and of cold solves). Zero when empty.
    Control initial;
    /// A control known to satisfy the constraints, for the sandwich bound.
    std::optional<Control> feasible_reference;
    /// Build the reference by scaling the first path solution toward zero.
    bool reference_from_first_solution = false;
    std::size_t reference_bisection_steps = 60;
    LimitTolerances limit;
};

struct PathResult {
    std::vector<PathRecord> records;
    std::vector<Control> controls;
    std::optional<Control> feasible_reference;
    std::optional<double> reference_objective;
    bool aborted = false;
    std::string abort_reason;
};

/// Solves the penalized problem along the schedule, warm-starting each solve
/// from the previous solution. A diverging solve stops the path and returns
/// the records gathered so far.
PathResult run_path(const ProblemData& data, const GammaSchedule& schedule, const PathOptions& opts);

struct SlopeFit {
    double slope = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;
};

/// Least-squares slope of log(field) against log(gamma) over records with a
/// positive field value. Fields: any numeric PathRecord column name.
SlopeFit fit_decay_slope(const std::vector<PathRecord>& records, const std::string& field);

/// Numeric PathRecord column by name.
double record_field(const PathRecord& record, const std::string& field);

/// Scales `base` toward the origin by bisection until the constraint holds;
/// empty when even the zero control is infeasible or 0 lies outside C.
std::optional<Control> feasible_by_scaling(const ProblemData& data, const Control& base, std::size_t steps);

struct PathCheck {
    std::string name;
    bool passed = true;
    bool hard = true;
    std::string detail;
};

struct PathCheckOptions {
    double sandwich_slack = 1e-10;
    /// Relative slack for j_gamma monotonicity, covering the solver tolerance.
    double monotone_rel_slack = 1e-9;
    double bound_factor = 10.0;
    double identity_tol = 1e-12;
    /// Trend target for the last control change (10 x the stationarity tolerance).
    double control_change_tol = 1e-7;
};

/// Hard assertions (sandwich, sq_violation decrease after the first decade,
/// path completed) and trend checks (j_gamma monotone, penalty identity,
/// multiplier boundedness, control change, convergence) on a finished path.
std::vector<PathCheck> check_path(const PathResult& path, const PathCheckOptions& opts = {});

} // namespace riskpen
