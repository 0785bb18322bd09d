#include "cbfed/constants.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "cbfed/errors.hpp"

namespace cbfed {

void ModelParams::validate() const {
    if (!(mu > 0.0)) throw InvalidParams("ModelParams: mu must be > 0");
    if (!(alpha > 0.0)) throw InvalidParams("ModelParams: alpha must be > 0");
    if (!(beta > 0.0)) throw InvalidParams("ModelParams: beta must be > 0");
    if (kappa > 0.0) throw InvalidParams("ModelParams: kappa must be <= 0");
    if (r < 1.0) throw InvalidParams("ModelParams: r must be >= 1");
    if (kappa < 0.0 && !(q >= 1.0 && q < r))
        throw InvalidParams("ModelParams: need 1 <= q < r when kappa < 0");
}

std::string regime_name(Regime regime) {
    switch (regime) {
        case Regime::contraction_small_data: return "contraction_small_data";
        case Regime::global_supercritical: return "global_supercritical";
        case Regime::infeasible: return "infeasible";
    }
    return "infeasible";
}

double principal_eigenvalue(const ReducedSpace& space, const AssembledForms& forms) {
    const Eigen::VectorXd w = space.boundary_weights();
    const Eigen::MatrixXd T =
        space.trace_map.transpose() * w.asDiagonal() * space.trace_map;
    const double tmax = T.cwiseAbs().maxCoeff();
    if (!(tmax > 1e-14 * (1.0 + forms.K.cwiseAbs().maxCoeff())))
        throw NoBoundaryDofs("principal_eigenvalue: trace form vanishes on the space");
    // lambda0 = 1 / max eigenvalue of K^{-1/2} T K^{-1/2}; K is PD here.
    const Eigen::MatrixXd L = forms.K_llt.matrixL();
    const Eigen::MatrixXd S = L.triangularView<Eigen::Lower>().solve(
        L.triangularView<Eigen::Lower>()
            .solve(T)
            .transpose()
            .eval());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
    const double nu_max = es.eigenvalues().maxCoeff();
    if (!(nu_max > 0.0))
        throw NoBoundaryDofs("principal_eigenvalue: trace form not positive");
    return 1.0 / nu_max;
}

double estimate_Cb(const ReducedSpace& space, const AssembledForms& forms,
                   int n_samples, std::uint64_t seed) {
    if (n_samples < 1) throw InvalidParams("estimate_Cb: n_samples must be >= 1");
    const Eigen::Index n = forms.K.rows();
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_field = [&] {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = gauss(rng);
        return v;
    };
    auto ratio = [&](const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                     const Eigen::VectorXd& w) {
        const double d = v_norm(forms, u) * v_norm(forms, v) * v_norm(forms, w);
        return d > 0.0 ? std::abs(eval_b(forms, u, v, w)) / d : 0.0;
    };

    double best = 0.0;
    Eigen::VectorXd bu, bv, bw;
    for (int s = 0; s < n_samples; ++s) {
        Eigen::VectorXd u = random_field(), v = random_field(), w = random_field();
        const double rr = ratio(u, v, w);
        if (rr >= best) {
            best = rr;
            bu = u;
            bv = v;
            bw = w;
        }
    }
    if (bu.size() == 0) return 0.0;

    // Alternating maximization: with two arguments frozen, the optimal third
    // argument of the V-normalized ratio is K^{-1} times the linear
    // representer of b in that slot.
    for (int it = 0; it < 50; ++it) {
        const Eigen::ArrayXd qwv = forms.qw.array();
        {
            const Eigen::ArrayXd vx = (forms.qvx * bv).array(),
                                 vy = (forms.qvy * bv).array();
            const Eigen::ArrayXd wx = (forms.qvx * bw).array(),
                                 wy = (forms.qvy * bw).array();
            const Eigen::VectorXd g =
                forms.qcurl.transpose() * (qwv * (vx * wy - vy * wx)).matrix();
            const Eigen::VectorXd cand = forms.K_llt.solve(g);
            if (v_norm(forms, cand) > 0.0) bu = cand;
        }
        {
            const Eigen::ArrayXd cu = (forms.qcurl * bu).array();
            const Eigen::ArrayXd wx = (forms.qvx * bw).array(),
                                 wy = (forms.qvy * bw).array();
            const Eigen::VectorXd g =
                forms.qvx.transpose() * (qwv * cu * wy).matrix() -
                forms.qvy.transpose() * (qwv * cu * wx).matrix();
            const Eigen::VectorXd cand = forms.K_llt.solve(g);
            if (v_norm(forms, cand) > 0.0) bv = cand;
        }
        {
            const Eigen::ArrayXd cu = (forms.qcurl * bu).array();
            const Eigen::ArrayXd vx = (forms.qvx * bv).array(),
                                 vy = (forms.qvy * bv).array();
            const Eigen::VectorXd g =
                forms.qvy.transpose() * (qwv * cu * vx).matrix() -
                forms.qvx.transpose() * (qwv * cu * vy).matrix();
            const Eigen::VectorXd cand = forms.K_llt.solve(g);
            if (v_norm(forms, cand) > 0.0) bw = cand;
        }
        best = std::max(best, ratio(bu, bv, bw));
    }
    return best;
}

double varrho(const ModelParams& params, double theta) {
    if (!(theta > 0.0 && theta <= 2.0))
        throw InvalidParams("varrho: theta must be in (0,2]");
    if (params.kappa == 0.0) return 0.0;
    const double r = params.r, q = params.q;
    if (!(r > 1.0) || !(r > q) || !(q >= 1.0))
        throw InvalidParams("varrho: need r > 1 and 1 <= q < r");
    const double ak = std::abs(params.kappa);
    if (q == 1.0) return 2.0 * ak;  // 0^0 := 1 convention
    const double mid =
        std::pow(4.0 * (q - 1.0) / (theta * params.beta * (r - 1.0)),
                 (q - 1.0) / (r - q));
    const double last = std::pow(ak * q * std::pow(2.0, q - 1.0), (r - 1.0) / (r - q));
    return 2.0 * ((r - q) / (r - 1.0)) * mid * last;
}

double varrho_hat(const ModelParams& params, double lambda0, double m, double theta) {
    const double r = params.r;
    if (!(r > 3.0)) throw InvalidParams("varrho_hat: requires r > 3");
    if (!(theta > 0.0 && theta <= 1.0))
        throw InvalidParams("varrho_hat: theta must be in (0,1]");
    const double mu_eff = params.mu - m / lambda0;
    if (!(mu_eff > 0.0)) throw InvalidParams("varrho_hat: requires m < mu*lambda0");
    return std::pow(1.0 / mu_eff, (r - 1.0) / (r - 3.0)) * ((r - 3.0) / (r - 1.0)) *
           std::pow(8.0 / (theta * params.beta * (r - 1.0)), 2.0 / (r - 3.0));
}

BallContraction ball_and_contraction(const ModelParams& params, double lambda0,
                                     double m, double c0, double gamma_len,
                                     double area, double Cb, double f_norm,
                                     bool supercritical) {
    const double mu_eff = params.mu - m / lambda0;
    if (!(mu_eff > 0.0))
        throw InvalidParams("ball_and_contraction: requires m < mu*lambda0");
    const double ak = std::abs(params.kappa);
    const double kappa_term =
        (ak == 0.0) ? 0.0
                    : std::pow(ak, (params.r + 1.0) / (params.r - params.q)) * area;
    const double A = c0 * c0 * gamma_len / lambda0 + f_norm;
    BallContraction out;
    out.rho_f = 2.0 * (std::sqrt(2.0 * kappa_term / mu_eff) +
                       std::sqrt(2.0) * A / mu_eff);
    if (supercritical) {
        const double kpart =
            (ak == 0.0) ? 0.0
                        : std::pow(ak, 1.0 / (params.r - params.q)) *
                              std::pow(area, 1.0 / (params.r + 1.0));
        out.rho_f += 2.0 * std::sqrt(2.0 / params.beta) *
                     (kpart + std::pow(A, 2.0 / (params.r + 1.0)) /
                                  std::pow(mu_eff, 1.0 / (params.r + 1.0)));
    }
    out.sigma_f = std::sqrt(2.0) * Cb * out.rho_f / mu_eff;
    out.upsilon_f = std::sqrt(2.0 * kappa_term / mu_eff) +
                    (c0 * std::sqrt(gamma_len / lambda0) + f_norm) / mu_eff;
    return out;
}

ConstantsReport regime_check(const ModelParams& params, double lambda0, double m,
                             double c0, double gamma_len, double area, double Cb,
                             double f_norm, double C_gn) {
    params.validate();
    ConstantsReport rep;
    rep.lambda0 = lambda0;
    rep.Cb = Cb;
    rep.m = m;
    rep.c0 = c0;
    rep.f_norm = f_norm;
    rep.area = area;
    rep.gamma_len = gamma_len;
    rep.mu_eff = params.mu - m / lambda0;
    rep.varrho_r = (params.kappa == 0.0) ? 0.0 : varrho(params, 1.0);
    rep.varrho_2r = (params.kappa == 0.0) ? 0.0 : varrho(params, 2.0);
    rep.varrho_half = (params.kappa == 0.0) ? 0.0 : varrho(params, 0.5);
    rep.varrho_hat_half =
        (params.r > 3.0) ? varrho_hat(params, lambda0, m, 0.5) : 0.0;

    rep.base_condition = (m < params.mu * lambda0) && (params.alpha > rep.varrho_r);
    if (!rep.base_condition) {
        rep.regime = Regime::infeasible;
        rep.condition = "base condition m < mu*lambda0 and alpha > varrho_r fails";
        return rep;
    }
    rep.rho = std::min(rep.mu_eff, params.beta / std::pow(2.0, params.r));

    const auto bc = ball_and_contraction(params, lambda0, m, c0, gamma_len, area,
                                         Cb, f_norm, /*supercritical=*/false);
    rep.rho_f = bc.rho_f;
    rep.sigma_f = bc.sigma_f;
    rep.upsilon_f = bc.upsilon_f;

    // Smallness branch 1 (the only branch that binds for d = 2); rho_f = 0 is
    // the trivially contractive limit (sigma_f = 0).
    const bool branch1 = 2.0 * std::sqrt(2.0) * Cb * rep.rho_f <= rep.mu_eff;
    bool branch2 = false;
    if (params.r > 3.0) {
        const double lhs =
            std::sqrt(2.0) * Cb * rep.rho_f / rep.mu_eff +
            std::sqrt(2.0 / params.beta) *
                std::pow(Cb, 2.0 / (params.r + 1.0)) *
                std::pow(rep.rho_f, (3.0 - params.r) / (params.r + 1.0)) /
                std::pow(rep.mu_eff, 1.0 / (params.r + 1.0));
        branch2 = rep.rho_f > 0.0 && lhs <= 0.5;
    }
    rep.smallness = branch1 || branch2;

    if (params.r <= 3.0) {
        const double thr = rep.varrho_2r +
                           C_gn * std::pow(rep.upsilon_f, 4.0) /
                               std::pow(rep.mu_eff, 3.0);
        rep.global_condition = params.alpha > thr;
    } else {
        const bool primary =
            params.alpha > rep.varrho_half + rep.varrho_hat_half;
        const bool alternative = params.alpha > rep.varrho_2r + 1.0 / rep.mu_eff &&
                                 params.beta >= 2.0 / rep.mu_eff;
        rep.global_condition = primary || alternative;
    }

    if (rep.smallness) {
        rep.regime = Regime::contraction_small_data;
        rep.condition = "smallness condition: 2*sqrt(2)*Cb*rho_f <= mu - m/lambda0";
    } else if (rep.global_condition) {
        rep.regime = Regime::global_supercritical;
        rep.condition = (params.r <= 3.0)
                            ? "global condition: alpha > varrho_{2,r} + C*upsilon_f^4/mu_eff^3"
                            : "global condition: alpha > varrho_{1/2,r} + varrho_hat_{1/2,r}";
    } else {
        rep.regime = Regime::infeasible;
        rep.condition = "neither smallness nor global condition holds";
    }
    return rep;
}

} // namespace cbfed
