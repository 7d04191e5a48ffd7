#pragma once

#include "riskpen/objective.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>

namespace riskpen {

/// Environment variable that overrides the configured output directory.
inline constexpr const char* kOutDirEnv = "RISKPEN_OUT_DIR";

enum ExitCode : int {
    kExitOk = 0,
    kExitError = 1,
    kExitNotConverged = 2,
    kExitCheckFailed = 3,
};

struct CliOptions {
    std::string config_path;
    std::optional<std::string> out_dir;
    std::optional<double> gamma;
    bool cold = false;
    std::size_t threads = 1;
    FaultInjection fault = FaultInjection::None;
};

/// Solves at one gamma; writes summary JSON, KKT JSON and the iteration log.
/// Exit: 0 converged, 2 iteration limit, 1 error.
int cmd_solve(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the gamma path; writes CSV, JSON and a summary with slope fits and
/// path checks. Exit: 0 all hard checks pass and every solve converged,
/// 2 some solve hit the iteration limit, 3 a hard path check failed, 1 error.
int cmd_path(const CliOptions& opts, std::ostream& out, std::ostream& err);

/// Runs the verification battery. Exit: 0 all pass, 3 any failure, 1 error.
int cmd_verify(const CliOptions& opts, std::ostream& out, std::ostream& err);

} // namespace riskpen
