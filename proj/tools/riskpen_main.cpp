#include "riskpen/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Risk-averse PDE-constrained optimization with Moreau-Yosida penalty continuation"};
    app.require_subcommand(1);

    riskpen::CliOptions opts;
    std::string out_dir;
    double gamma = 0.0;
    std::string fault;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_dir, "output directory (overrides $RISKPEN_OUT_DIR and the config)");
        sub->add_option("--threads", opts.threads, "worker threads for per-scenario loops")->check(CLI::PositiveNumber);
        // Mutation hook for exercising the verification battery.
        sub->add_option("--inject-fault", fault)->group("")->check(CLI::IsMember({"adjoint-sign"}));
    };

    auto* solve = app.add_subcommand("solve", "solve the penalized problem at one gamma");
    add_common(solve);
    solve->add_option("--gamma", gamma, "penalty parameter (default: last schedule entry)");

    auto* path = app.add_subcommand("path", "run the gamma continuation and write the path table");
    add_common(path);
    path->add_flag("--cold", opts.cold, "also solve every point from the initial control");

    auto* verify = app.add_subcommand("verify", "run the identity and gradient check battery");
    add_common(verify);
    verify->add_option("--gamma", gamma, "penalty parameter for the gradient checks");

    CLI11_PARSE(app, argc, argv);

    if (!out_dir.empty()) opts.out_dir = out_dir;
    if (fault == "adjoint-sign") opts.fault = riskpen::FaultInjection::FlipAdjointSign;
    auto* chosen = app.get_subcommands().front();
    if (auto* g = chosen->get_option_no_throw("--gamma"); g != nullptr && g->count() > 0) opts.gamma = gamma;

    if (chosen == solve) return riskpen::cmd_solve(opts, std::cout, std::cerr);
    if (chosen == path) return riskpen::cmd_path(opts, std::cout, std::cerr);
    return riskpen::cmd_verify(opts, std::cout, std::cerr);
}
