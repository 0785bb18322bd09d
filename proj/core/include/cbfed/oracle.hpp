#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfed/energy.hpp"

namespace cbfed {

/// Brute-force global minimization of a tiny discrete energy: 21-point grid
/// search per axis over [-grid_half_width, grid_half_width], then n_restarts
/// coordinate-descent polishing runs with bracketed 1D refinement (kink-safe).
/// Throws DimensionTooLarge above reduced_dim 6.
Eigen::VectorXd dense_minimize_oracle(const DiscreteEnergy& energy, int n_restarts,
                                      double grid_half_width);

struct InequalityEntry {
    std::string name;
    double worst_violation = 0;
    double tol = 1e-9;
    bool pass = false;
};

/// Seeded sweep of every pointwise/module inequality of the theory:
/// monotonicity (2.23), strong monotonicity 2^{1-r}, power split 2^{r-2},
/// pumping estimate, b(u,v,v)=0, b antisymmetry, j0 subadditivity, relaxed
/// monotonicity for the built-in superpotentials; r in {1,2,3,5}, q in {1,2}.
std::vector<InequalityEntry> inequality_suite(std::uint64_t seed, int n_samples);

/// Worst relaxed-monotonicity defect of sp beyond its declared m over sampled
/// pairs (the jump_down negative control makes this blow up).
double relaxed_monotonicity_violation(const Superpotential& sp, std::uint64_t seed,
                                      int n_samples);

struct EquivalenceResult {
    bool checked = false;   ///< false: certification precondition failed, skipped
    bool pass = false;
    std::string status;     ///< "pass", "fail: ...", or "uncertified"
    double distance_V = 0;
    double residual_solver = 0, residual_oracle = 0;
};

/// Theorem-3.5/3.6 equivalence on a tiny space: dense-oracle minimizer vs the
/// inner solver, both checked against hvi_residual <= 1e-8 and mutual V-norm
/// distance <= 1e-6.  Gated on the damping certificate (alpha > varrho_r and
/// mu lambda0 > m); when the gate fails the status is "uncertified".
EquivalenceResult equivalence_check(const ReducedSpace& space,
                                    const AssembledForms& forms,
                                    const ModelParams& params,
                                    const Superpotential& sp,
                                    const Eigen::VectorXd& f,
                                    const Eigen::VectorXd& w,
                                    int n_restarts = 10,
                                    double grid_half_width = 2.0);

void write_inequality_report_csv(const std::string& path,
                                 const std::vector<InequalityEntry>& report);

} // namespace cbfed
