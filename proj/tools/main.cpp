// Batch front-end for the CBFeD solver: mesh-info, constants, solve, homotopy,
// sweep, verify.  Exit codes: 0 success, 1 verification failure, 2 infeasible
// regime, 3 solver failure, 4 bad config.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cbfed/errors.hpp"
#include "cbfed/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"cbfed: 2D convective Brinkman-Forchheimer extended Darcy "
                 "hemivariational-inequality solver and verification harness"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::uint64_t seed = 1;
    int samples = 1000;

    auto add_config = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config_path, "configuration file")->required();
        if (needs_out) sub->add_option("--out", out_dir, "output directory");
    };
    CLI::App* mesh_info = app.add_subcommand("mesh-info", "print mesh statistics");
    add_config(mesh_info, false);
    CLI::App* constants =
        app.add_subcommand("constants", "evaluate all theory constants");
    add_config(constants, true);
    CLI::App* solve = app.add_subcommand("solve", "run the Picard outer iteration");
    add_config(solve, true);
    CLI::App* homotopy =
        app.add_subcommand("homotopy", "run the load-continuation solver");
    add_config(homotopy, true);
    CLI::App* sweep = app.add_subcommand("sweep", "parameter sweep / regime map");
    add_config(sweep, true);
    CLI::App* verify = app.add_subcommand("verify", "run the inequality suite");
    verify->add_option("--seed", seed, "random seed");
    verify->add_option("--samples", samples, "sample count");
    verify->add_option("--out", out_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (mesh_info->parsed()) return cbfed::cmd_mesh_info(config_path);
        if (constants->parsed()) return cbfed::cmd_constants(config_path, out_dir);
        if (solve->parsed()) return cbfed::cmd_solve(config_path, out_dir);
        if (homotopy->parsed()) return cbfed::cmd_homotopy(config_path, out_dir);
        if (sweep->parsed()) return cbfed::cmd_sweep(config_path, out_dir);
        if (verify->parsed()) return cbfed::cmd_verify(seed, samples, out_dir);
    } catch (const cbfed::BadConfig& e) {
        std::cerr << "bad config: " << e.what() << "\n";
        return 4;
    } catch (const cbfed::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
