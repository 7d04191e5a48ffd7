#pragma once

#include "riskpen/kkt.hpp"
#include "riskpen/path.hpp"
#include "riskpen/solver.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace riskpen {

/// Version tag carried in the first column of every path CSV row.
inline constexpr int kPathCsvSchema = 1;

nlohmann::json to_json(const KktReport& report);
nlohmann::json to_json(const PathRecord& record);
nlohmann::json to_json(const std::vector<PathCheck>& checks);
nlohmann::json to_json(const SlopeFit& fit);

/// Solve summary without config echo or timestamp.
nlohmann::json solve_summary(const ProblemData& data, const SolveResult& result);

/// Fixed column order; see README for the meaning of each column.
std::vector<std::string> path_csv_columns();
void write_path_csv(std::ostream& out, const std::vector<PathRecord>& records);

/// One line per iteration: iter j_gamma stationarity step.
void write_iteration_log(std::ostream& out, const std::vector<IterationRecord>& log);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

} // namespace riskpen
