#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "cbfed/config.hpp"
#include "cbfed/outer_solver.hpp"

namespace cbfed {

/// Everything a subcommand needs, materialized from a parsed config.
struct Problem {
    ReducedSpace space;
    AssembledForms forms;
    ModelParams params;
    Superpotential sp;
    Eigen::VectorXd f_vec;
    SolveOptions opts;
    int homotopy_steps = 16;
};

/// Build mesh/space/forms/forcing from config keys (mesh.*, model.*,
/// superpotential.*, forcing.*, solver.*, homotopy.*, constants.C).
/// Unknown keys raise BadConfig with their line number.
Problem build_problem(const Config& cfg);

/// Quadrature projection of an analytic forcing field into the reduced basis.
/// kind: constant (fx, fy), vortex, shear, boundary_layer; all scaled by
/// `scale`.
Eigen::VectorXd assemble_forcing(const ReducedSpace& space, const std::string& kind,
                                 double fx, double fy, double scale);

// Subcommand implementations; each prints a one-line summary and returns the
// process exit code (0 success, 1 verification failure, 2 infeasible regime,
// 3 solver failure).  BadConfig propagates to the caller (exit 4).
int cmd_mesh_info(const std::string& config_path);
int cmd_constants(const std::string& config_path, const std::string& out_dir);
int cmd_solve(const std::string& config_path, const std::string& out_dir);
int cmd_homotopy(const std::string& config_path, const std::string& out_dir);
int cmd_sweep(const std::string& config_path, const std::string& out_dir);
int cmd_verify(std::uint64_t seed, int n_samples, const std::string& out_dir);

/// Worker-thread cap: CBFED_THREADS if set (positive integer), else hardware
/// concurrency, at least 1.
int worker_thread_cap();

} // namespace cbfed
