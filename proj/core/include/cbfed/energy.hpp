#pragma once

#include <Eigen/Dense>

#include "cbfed/constants.hpp"
#include "cbfed/forms.hpp"
#include "cbfed/space.hpp"
#include "cbfed/superpotential.hpp"

namespace cbfed {

/// The discrete auxiliary energy
///   E(v) = (mu/2) v'Kv + (alpha/2) v'Mv + (beta/(r+1)) ‖v‖_{r+1}^{r+1}
///        + (kappa/(q+1)) ‖v‖_{q+1}^{q+1} + J(v) - Psi'v,
/// with Psi = f - B(w,w) for the lagged convection field w.
struct DiscreteEnergy {
    const ReducedSpace* space = nullptr;
    const AssembledForms* forms = nullptr;
    ModelParams params;
    Superpotential sp;
    Eigen::VectorXd load;       ///< Psi
    Eigen::VectorXd frozen_w;   ///< the lagged field that shaped `load`

    double value(const Eigen::VectorXd& v) const;
    /// Gradient of the smooth part (everything except J).
    Eigen::VectorXd smooth_grad(const Eigen::VectorXd& v) const;
};

DiscreteEnergy build_energy(const ReducedSpace& space, const AssembledForms& forms,
                            const Superpotential& sp, const ModelParams& params,
                            const Eigen::VectorXd& f_vec, const Eigen::VectorXd& w);

} // namespace cbfed
