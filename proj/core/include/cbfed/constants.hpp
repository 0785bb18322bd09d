#pragma once

#include <cstdint>
#include <string>

#include "cbfed/forms.hpp"
#include "cbfed/space.hpp"

namespace cbfed {

/// Model parameters of the stationary CBFeD problem
///   -mu Lap u + (u.grad)u + alpha u + beta|u|^{r-1}u + kappa|u|^{q-1}u + grad p = f.
struct ModelParams {
    double mu = 1.0;      ///< viscosity > 0
    double alpha = 1.0;   ///< Darcy coefficient > 0
    double beta = 1.0;    ///< Forchheimer coefficient > 0
    double kappa = 0.0;   ///< pumping coefficient <= 0 (0 switches pumping off)
    double r = 2.0;       ///< absorption exponent >= 1
    double q = 1.0;       ///< pumping exponent, 1 <= q < r (ignored if kappa = 0)

    void validate() const;
};

enum class Regime { contraction_small_data, global_supercritical, infeasible };

std::string regime_name(Regime regime);

/// Every closed-form/spectral constant of the well-posedness theory, plus the
/// regime classification.  All certificates are with respect to the discrete
/// lambda0 and the sampled discrete C_b.
struct ConstantsReport {
    double lambda0 = 0.0;       ///< principal trace eigenvalue
    double Cb = 0.0;            ///< trilinear bound estimate (empirical)
    double m = 0.0;             ///< superpotential relaxed-monotonicity constant
    double c0 = 0.0;            ///< superpotential growth constant
    double mu_eff = 0.0;        ///< mu - m / lambda0
    double varrho_r = 0.0;      ///< damping threshold (theta = 1)
    double varrho_2r = 0.0;     ///< theta = 2 variant
    double varrho_half = 0.0;   ///< theta = 1/2 variant
    double varrho_hat_half = 0.0;  ///< r > 3 only, else 0
    double rho_f = 0.0;         ///< invariant-ball radius
    double sigma_f = 0.0;       ///< contraction factor
    double upsilon_f = 0.0;     ///< global-regime bound
    double rho = 0.0;           ///< strong-monotonicity constant min{mu_eff, beta/2^r}
    double f_norm = 0.0;        ///< ‖f‖_{V*} used in the report
    double area = 0.0, gamma_len = 0.0;
    bool base_condition = false;     ///< m < mu lambda0 and alpha > varrho_r
    bool smallness = false;          ///< contraction smallness condition
    bool global_condition = false;   ///< Theorem-3.13-style global condition
    Regime regime = Regime::infeasible;
    std::string condition;      ///< human-readable reason that fired
};

/// Principal eigenvalue lambda0 of a(u,v) = lambda * (u_n, v_n)_Gamma on the
/// reduced space (boundary-lumped trace form).
double principal_eigenvalue(const ReducedSpace& space, const AssembledForms& forms);

/// Sampled lower estimate of the discrete C_b in |b(u,v,w)| <= C_b
/// ‖u‖_V ‖v‖_V ‖w‖_V, amplified by alternating maximization.
double estimate_Cb(const ReducedSpace& space, const AssembledForms& forms,
                   int n_samples, std::uint64_t seed);

/// Closed-form damping threshold varrho_{theta,r}; theta = 1 gives varrho_r.
double varrho(const ModelParams& params, double theta);

/// Closed-form varrho_hat_{theta,r} (r > 3 only).
double varrho_hat(const ModelParams& params, double lambda0, double m, double theta);

struct BallContraction {
    double rho_f = 0.0, sigma_f = 0.0, upsilon_f = 0.0;
};

/// rho_f, sigma_f, upsilon_f from the discrete constants; `supercritical`
/// selects the r > (d+2)/(d-2) branch of rho_f (never taken for d = 2).
BallContraction ball_and_contraction(const ModelParams& params, double lambda0,
                                     double m, double c0, double gamma_len,
                                     double area, double Cb, double f_norm,
                                     bool supercritical = false);

/// Full regime classification: base condition, smallness condition, global
/// conditions; C_gn is the uncomputable Gagliardo-Nirenberg constant of the
/// r in [1,3] global branch (config input, default 1).
ConstantsReport regime_check(const ModelParams& params, double lambda0, double m,
                             double c0, double gamma_len, double area, double Cb,
                             double f_norm, double C_gn = 1.0);

} // namespace cbfed
