#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfed/energy.hpp"
#include "cbfed/inner_solver.hpp"

namespace cbfed {

struct IterationRecord {
    int k = 0;
    double step_V = 0;     ///< ‖u_k - u_{k-1}‖_V
    double norm_V = 0;     ///< ‖u_k‖_V
    double norm_Lr1 = 0;   ///< ‖u_k‖_{L^{r+1}}
    double energy = 0;     ///< E(u_k) of the k-th auxiliary problem
    int inner_iters = 0;
    double apost = 0;      ///< sigma/(1-sigma) * step_V
    double apriori = 0;    ///< sigma^k/(1-sigma) * step_1
};

struct IterationReport {
    std::vector<IterationRecord> iterates;
    ConstantsReport constants;
    double sigma_f = 0;
    bool converged = false;
};

struct SolveResult {
    IterationReport report;
    Eigen::VectorXd u;
};

struct SolveOptions {
    double tol = 1e-8;          ///< target accuracy ‖u_k - u*‖_V
    int kmax = 200;             ///< outer iteration budget
    double inner_tol = -1.0;    ///< inner prox-gradient tolerance (<0: tol/100)
    int inner_max_iter = 200000;
    bool force = false;         ///< proceed even without a contraction certificate
    Eigen::VectorXd u0;         ///< initial guess (empty: 0)
    double C_gn = 1.0;          ///< Gagliardo-Nirenberg constant for regime_check
    int cb_samples = 50;
    std::uint64_t seed = 1;
};

/// Picard iteration of the lagged-convection auxiliary problems with the
/// certified a-posteriori/a-priori error estimators.  Throws NotContractive
/// when sigma_f >= 1 and force is false; MaxIterExceeded past kmax.
SolveResult picard_solve(const ReducedSpace& space, const AssembledForms& forms,
                         const ModelParams& params, const Superpotential& sp,
                         const Eigen::VectorXd& f_vec, const SolveOptions& opts = {});

/// Homotopy continuation over the load family t*f, t on a uniform grid ending
/// at 1, warm-started, with adaptive halving on inner failure (minimum step
/// 1/1024) and the uniform energy bound verified at every accepted t.  The
/// report carries one record per accepted t.
SolveResult homotopy_solve(const ReducedSpace& space, const AssembledForms& forms,
                           const ModelParams& params, const Superpotential& sp,
                           const Eigen::VectorXd& f_vec, int t_steps,
                           const SolveOptions& opts = {});

struct DataDependence {
    double distance = 0;  ///< ‖u1 - u2‖_V
    double bound = 0;     ///< sqrt(2) ‖f1 - f2‖_{V*} / (mu - m/lambda0)
    double lhs = 0, rhs = 0;  ///< the two sides of the squared inequality
    bool holds = false;
};

/// Lipschitz data-dependence check:
///   (mu_eff/2) ‖u1-u2‖_V^2 <= ‖f1-f2‖_{V*}^2 / mu_eff + solver slack.
DataDependence data_dependence_check(const ReducedSpace& space,
                                     const AssembledForms& forms,
                                     const ModelParams& params,
                                     const Superpotential& sp,
                                     const Eigen::VectorXd& f1,
                                     const Eigen::VectorXd& f2,
                                     const SolveOptions& opts = {});

/// Two sides of the uniform energy bound
///   mu_eff ‖u‖_V^2 + beta ‖u‖_{r+1}^{r+1}
///     <= 2|kappa|^{(r+1)/(r-q)} |O| + (c0 |Gamma|^{1/2} lambda0^{-1/2} +
///        ‖f‖_{V*})^2 / mu_eff.
std::pair<double, double> uniform_bound_sides(const AssembledForms& forms,
                                              const ModelParams& params,
                                              const ConstantsReport& constants,
                                              const Eigen::VectorXd& u,
                                              double f_norm);

void write_iterates_csv(const std::string& path, const IterationReport& report);
void write_field_csv(const std::string& path, const Eigen::VectorXd& u);

} // namespace cbfed
