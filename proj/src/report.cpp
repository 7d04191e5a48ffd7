#include "riskpen/report.hpp"

#include "riskpen/numfmt.hpp"

#include <chrono>
#include <ctime>
#include <ostream>

namespace riskpen {

using nlohmann::json;

json to_json(const KktReport& r) {
    return json{
        {"gamma", r.gamma},
        {"stationarity_x1", r.stationarity_x1},
        {"normal_cone_violation", r.normal_cone_violation},
        {"adjoint_residual", r.adjoint_residual},
        {"adjoint_residual_max", r.adjoint_residual_max},
        {"rho_consistency", r.rho_consistency},
        {"state_residual", r.state_residual},
        {"multiplier_formula_residual", r.multiplier_formula_residual},
        {"primal_feasibility", r.primal_feasibility},
        {"dual_cone_violation", r.dual_cone_violation},
        {"complementarity", r.complementarity},
        {"complementarity_signed", r.complementarity_signed},
        {"sq_violation", r.sq_violation},
        {"multiplier_l1", r.multiplier_l1},
        {"adjoint_l1", r.adjoint_l1},
        {"multiplier_max", r.multiplier_max},
        {"concentration_index", r.concentration_index},
    };
}

json to_json(const PathRecord& r) {
    json j{
        {"gamma", r.gamma},
        {"j", r.j},
        {"j_gamma", r.j_gamma},
        {"penalty_term", r.penalty_term},
        {"max_violation", r.max_violation},
        {"sq_violation", r.sq_violation},
        {"complementarity", r.complementarity},
        {"multiplier_l1", r.multiplier_l1},
        {"adjoint_l1", r.adjoint_l1},
        {"concentration_index", r.concentration_index},
        {"control_change", r.control_change},
        {"iterations", r.iterations},
        {"converged", r.converged},
        {"kkt", to_json(r.kkt)},
    };
    if (r.cold_iterations) j["cold_iterations"] = *r.cold_iterations;
    return j;
}

json to_json(const std::vector<PathCheck>& checks) {
    json arr = json::array();
    for (const auto& c : checks) {
        arr.push_back({{"name", c.name}, {"passed", c.passed}, {"hard", c.hard}, {"detail", c.detail}});
    }
    return arr;
}

json to_json(const SlopeFit& fit) { return json{{"slope", fit.slope}, {"r2", fit.r2}, {"points", fit.points}}; }

json solve_summary(const ProblemData& data, const SolveResult& result) {
    const auto unpen = unpenalized_objective(data, result.x1_opt);
    const auto& b = result.bundle;
    return json{
        {"gamma", b.gamma},
        {"method", result.method},
        {"risk", data.risk.name()},
        {"converged", result.converged},
        {"iterations", result.iterations},
        {"stationarity", result.stationarity_norm},
        {"lipschitz_estimate", result.lipschitz_estimate},
        {"j_gamma", b.j_gamma},
        {"j1", b.j1},
        {"risk_value", b.risk_value},
        {"penalty_term", b.penalty_term},
        {"j", unpen.j},
        {"feasible", unpen.feasible},
        {"max_violation", unpen.max_violation},
        {"theta", b.theta},
        {"x1", result.x1_opt},
        {"xi", result.xi},
        {"expected_rho", b.expected_rho},
        {"gradient_tie_breaks", b.tie_breaks},
    };
}

std::vector<std::string> path_csv_columns() {
    return {"schema_version", "gamma", "j", "j_gamma", "penalty_term", "max_violation", "sq_violation",
            "complementarity", "multiplier_l1", "adjoint_l1", "concentration_index", "control_change",
            "iterations", "converged", "stationarity_x1", "adjoint_residual_max", "rho_consistency",
            "state_residual", "multiplier_formula_residual", "dual_cone_violation", "multiplier_max",
            "cold_iterations"};
}

void write_path_csv(std::ostream& out, const std::vector<PathRecord>& records) {
    const auto cols = path_csv_columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        out << (c ? "," : "") << cols[c];
    }
    out << '\n';
    for (const auto& r : records) {
        const auto& k = r.kkt;
        out << kPathCsvSchema << ',' << format_real(r.gamma) << ',' << format_real(r.j) << ','
            << format_real(r.j_gamma) << ',' << format_real(r.penalty_term) << ',' << format_real(r.max_violation)
            << ',' << format_real(r.sq_violation) << ',' << format_real(r.complementarity) << ','
            << format_real(r.multiplier_l1) << ',' << format_real(r.adjoint_l1) << ','
            << format_real(r.concentration_index) << ',' << format_real(r.control_change) << ',' << r.iterations
            << ',' << (r.converged ? 1 : 0) << ',' << format_real(k.stationarity_x1) << ','
            << format_real(k.adjoint_residual_max) << ',' << format_real(k.rho_consistency) << ','
            << format_real(k.state_residual) << ',' << format_real(k.multiplier_formula_residual) << ','
            << format_real(k.dual_cone_violation) << ',' << format_real(k.multiplier_max) << ',';
        if (r.cold_iterations) out << *r.cold_iterations;
        out << '\n';
    }
}

void write_iteration_log(std::ostream& out, const std::vector<IterationRecord>& log) {
    out << "# iter j_gamma stationarity step\n";
    for (const auto& rec : log) {
        out << rec.iter << ' ' << format_real(rec.j_gamma) << ' ' << format_real(rec.stationarity) << ' '
            << format_real(rec.step) << '\n';
    }
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace riskpen
