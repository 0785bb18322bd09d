#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "cbfed/energy.hpp"

namespace cbfed {

struct MinimizeResult {
    Eigen::VectorXd v;           ///< minimizer (best iterate on failure)
    int iterations = 0;
    double final_decrement = 0;  ///< V-norm of the last prox-gradient mapping
    bool converged = false;
};

/// Proximal-gradient minimization of E: gradient step on the smooth part,
/// exact nodewise prox of the boundary-lumped J, backtracking line search
/// (factor 1/2).  `tol` measures the prox-gradient mapping in the V-norm.
/// Throws MaxIterExceeded (best iterate attached) when the budget runs out.
MinimizeResult minimize_energy(const DiscreteEnergy& energy, const Eigen::VectorXd& v0,
                               double tol, int max_iter);

/// HVI residual of v: maximal violation of
///   mu a(v,d) + alpha a0(v,d) + beta c(v,d) + kappa c0(v,d)
///     + sum_i w_i j0(v_n; d_n) >= Psi'd
/// over random unit directions plus the +-coordinate directions, V-normalized;
/// clipped below at 0.
double hvi_residual(const DiscreteEnergy& energy, const Eigen::VectorXd& v,
                    int n_directions, std::uint64_t seed);

} // namespace cbfed
