#include "riskpen/cli.hpp"

#include "riskpen/config.hpp"
#include "riskpen/error.hpp"
#include "riskpen/kkt.hpp"
#include "riskpen/numfmt.hpp"
#include "riskpen/path.hpp"
#include "riskpen/report.hpp"
#include "riskpen/verify.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace riskpen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunContext {
    RunConfig config;
    ProblemData data;
    fs::path out_dir;
    std::string hash;
    std::string stem_suffix;
};

RunContext prepare(const CliOptions& opts) {
    require(!opts.config_path.empty(), ErrorKind::Config, "--config is required");
    require(opts.threads > 0, ErrorKind::Config, "--threads must be positive");
    RunContext ctx{RunConfig::load(opts.config_path), {}, {}, {}, {}};
    ctx.data = build_problem(ctx.config);
    ctx.data.threads = opts.threads;
    ctx.data.fault = opts.fault;
    if (opts.out_dir) {
        ctx.out_dir = *opts.out_dir;
    } else if (const char* env = std::getenv(kOutDirEnv); env && *env) {
        ctx.out_dir = env;
    } else {
        ctx.out_dir = ctx.config.output_dir;
    }
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    require(!ec, ErrorKind::Io, "cannot create output directory '" + ctx.out_dir.string() + "': " + ec.message());
    ctx.hash = ctx.config.content_hash();
    ctx.stem_suffix = ctx.hash + "_seed" + std::to_string(ctx.config.scenarios.seed);
    return ctx;
}

json envelope_json(const RunContext& ctx, const char* schema) {
    return json{{"schema", schema}, {"config_hash", ctx.hash}, {"timestamp", utc_timestamp()},
                {"config", ctx.config.to_json()}};
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), ErrorKind::Io, "cannot write '" + path.string() + "'");
    f << content;
    require(f.good(), ErrorKind::Io, "write failed for '" + path.string() + "'");
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitError;
}

} // namespace

int cmd_solve(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunContext ctx = prepare(opts);
        const double gamma = opts.gamma.value_or(ctx.config.gamma_schedule.back());
        require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::Config, "--gamma must be positive and finite");
        const Control start(ctx.data.grid.size(), ctx.config.problem.initial_control);
        const SolveResult res = minimize(ctx.data, gamma, ctx.config.solver, std::span<const double>(start));
        const KktReport kkt = full_report(ctx.data, res, {ctx.config.path.concentration_q});

        const std::string stem = ctx.stem_suffix + "_gamma" + format_real(gamma);
        json summary = envelope_json(ctx, "riskpen-solve/1");
        summary["result"] = solve_summary(ctx.data, res);
        json kkt_doc = envelope_json(ctx, "riskpen-kkt/1");
        kkt_doc["kkt"] = to_json(kkt);
        write_file(ctx.out_dir / ("solve_" + stem + ".json"), summary.dump(2) + "\n");
        write_file(ctx.out_dir / ("kkt_" + stem + ".json"), kkt_doc.dump(2) + "\n");
        std::ostringstream log;
        write_iteration_log(log, res.log);
        write_file(ctx.out_dir / ("log_" + stem + ".txt"), log.str());

        out << "gamma " << format_real(gamma) << ": " << (res.converged ? "converged" : "NOT converged") << " after "
            << res.iterations << " iterations (" << res.method << "), stationarity "
            << format_real(res.stationarity_norm) << ", j_gamma " << format_real(res.bundle.j_gamma) << '\n';
        out << "wrote " << (ctx.out_dir / ("solve_" + stem + ".json")).string() << '\n';
        return res.converged ? kExitOk : kExitNotConverged;
    });
}

int cmd_path(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunContext ctx = prepare(opts);
        const GammaSchedule schedule(ctx.config.gamma_schedule);
        PathOptions popts = build_path_options(ctx.config);
        popts.compare_cold = opts.cold;
        popts.solve.record_log = false;
        const PathResult path = run_path(ctx.data, schedule, popts);

        PathCheckOptions copts;
        copts.bound_factor = ctx.config.path.bound_factor;
        copts.control_change_tol = 10.0 * ctx.config.solver.tol_stationarity;
        const auto checks = check_path(path, copts);

        std::ostringstream csv;
        write_path_csv(csv, path.records);
        const std::string stem = ctx.stem_suffix;
        write_file(ctx.out_dir / ("path_" + stem + ".csv"), csv.str());

        json doc = envelope_json(ctx, "riskpen-path/1");
        doc["records"] = json::array();
        for (const auto& r : path.records) doc["records"].push_back(to_json(r));
        doc["aborted"] = path.aborted;
        doc["abort_reason"] = path.abort_reason;
        doc["reference_objective"] = path.reference_objective ? json(*path.reference_objective) : json(nullptr);
        write_file(ctx.out_dir / ("path_" + stem + ".json"), doc.dump(2) + "\n");

        json summary = envelope_json(ctx, "riskpen-path-summary/1");
        json slopes = json::object();
        for (const char* field : {"sq_violation", "max_violation", "complementarity"}) {
            try {
                slopes[field] = to_json(fit_decay_slope(path.records, field));
            } catch (const Error& e) {
                slopes[field] = {{"error", e.what()}};
            }
        }
        summary["slopes"] = slopes;
        summary["checks"] = to_json(checks);
        if (opts.cold) {
            std::size_t dominated = 0, compared = 0;
            for (const auto& r : path.records) {
                if (!r.cold_iterations) continue;
                ++compared;
                if (r.iterations <= *r.cold_iterations) ++dominated;
            }
            summary["warm_start_dominance"] =
                compared ? json(static_cast<double>(dominated) / static_cast<double>(compared)) : json(nullptr);
        }
        write_file(ctx.out_dir / ("summary_" + stem + ".json"), summary.dump(2) + "\n");

        for (const auto& r : path.records) {
            out << "gamma " << format_real(r.gamma) << "  j_gamma " << format_real(r.j_gamma) << "  max_violation "
                << format_real(r.max_violation) << "  iterations " << r.iterations
                << (r.converged ? "" : "  (not converged)") << '\n';
        }
        bool hard_ok = true;
        bool converged = true;
        for (const auto& c : checks) {
            out << (c.passed ? "PASS " : "FAIL ") << (c.hard ? "" : "[trend] ") << c.name
                << (c.detail.empty() ? "" : "  " + c.detail) << '\n';
            if (c.hard && !c.passed) hard_ok = false;
        }
        for (const auto& r : path.records) converged = converged && r.converged;
        out << "wrote " << (ctx.out_dir / ("path_" + stem + ".csv")).string() << '\n';
        if (path.aborted) {
            err << "path aborted: " << path.abort_reason << '\n';
            return static_cast<int>(kExitError);
        }
        if (!hard_ok) return static_cast<int>(kExitCheckFailed);
        return converged ? static_cast<int>(kExitOk) : static_cast<int>(kExitNotConverged);
    });
}

int cmd_verify(const CliOptions& opts, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        RunContext ctx = prepare(opts);
        VerifyOptions vopts;
        vopts.gamma = opts.gamma.value_or(ctx.config.gamma_schedule.front());
        vopts.seed = ctx.config.scenarios.seed;
        const auto checks = run_verification(ctx.data, vopts);

        json doc = envelope_json(ctx, "riskpen-verify/1");
        doc["checks"] = json::array();
        bool ok = true;
        for (const auto& c : checks) {
            doc["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
            out << (c.passed ? "PASS " : "FAIL ") << c.name << "  " << c.detail << '\n';
            ok = ok && c.passed;
        }
        doc["passed"] = ok;
        write_file(ctx.out_dir / ("verify_" + ctx.stem_suffix + ".json"), doc.dump(2) + "\n");
        if (!ok) {
            for (const auto& c : checks) {
                if (!c.passed) err << "check failed: " << c.name << '\n';
            }
        }
        return ok ? kExitOk : kExitCheckFailed;
    });
}

} // namespace riskpen
