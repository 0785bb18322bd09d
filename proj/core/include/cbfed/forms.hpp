#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "cbfed/space.hpp"

namespace cbfed {

/// Curl-curl stiffness K, mass M, and interior quadrature evaluation tables in
/// the reduced basis.  The tables map reduced coefficients to field values and
/// scalar curls at every interior quadrature point and make all nonlinear form
/// evaluations dense linear algebra.
struct AssembledForms {
    Eigen::MatrixXd K;   ///< a(u,v) = (curl u, curl v)
    Eigen::MatrixXd M;   ///< a0(u,v) = (u, v)_{L2}

    Eigen::MatrixXd qvx, qvy, qcurl;  ///< nq x reduced_dim value tables
    Eigen::VectorXd qw;               ///< quadrature weights (sum = |O|)

    Eigen::LLT<Eigen::MatrixXd> K_llt;  ///< for dual norms ‖f‖_{V*}
    Eigen::LLT<Eigen::MatrixXd> M_llt;  ///< for L2 projections

    bool has_tables() const { return qw.size() > 0; }
};

/// Assemble K, M (always) and the quadrature tables (unless with_tables is
/// false; the tables dominate memory on fine meshes).
AssembledForms assemble_forms(const ReducedSpace& space, bool with_tables = true);

/// Trilinear form b(u,v,w) = ∫ curl(u) · (v x w) dx (scalar 2D curl/cross).
double eval_b(const AssembledForms& forms, const Eigen::VectorXd& u,
              const Eigen::VectorXd& v, const Eigen::VectorXd& w);

/// Representer g of v -> b(w,w,v): g' v = eval_b(w,w,v).
Eigen::VectorXd convection_load(const AssembledForms& forms, const Eigen::VectorXd& w);

/// ∫ |u|^{p-1} u · v dx.
double eval_power(const AssembledForms& forms, const Eigen::VectorXd& u,
                  const Eigen::VectorXd& v, double p);

/// Load vector l with l' v = eval_power(u, v, p).
Eigen::VectorXd power_load(const AssembledForms& forms, const Eigen::VectorXd& u,
                           double p);

/// Gateaux derivative C'(u)v of C(u) = |u|^{p-1}u, projected back to the
/// reduced basis through M.
Eigen::VectorXd power_gateaux(const AssembledForms& forms, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& v, double p);

/// ‖v‖_V = sqrt(v' K v).
double v_norm(const AssembledForms& forms, const Eigen::VectorXd& v);

/// Discrete dual norm ‖f‖_{V*} = sqrt(f' K^{-1} f).
double dual_norm(const AssembledForms& forms, const Eigen::VectorXd& f);

/// ‖v‖_{L^p(O)} by quadrature.
double lp_norm(const AssembledForms& forms, const Eigen::VectorXd& v, double p);

} // namespace cbfed
