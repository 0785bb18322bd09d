#include "cbfed/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <Eigen/SVD>

#include "cbfed/errors.hpp"

namespace cbfed {

namespace {

// Coordinate system in which the nonsmooth boundary term is separable:
//   c = Pinv * y_b + Z * y_i,
// where y_b are the normal-trace values at the active (non-clamped) boundary
// nodes, constrained to range(P) (columns of Nc span its orthogonal
// complement), and y_i are free interior coordinates.
struct ProxCoords {
    Eigen::MatrixXd P;      // active trace rows (na x m)
    Eigen::MatrixXd Pinv;   // pseudo-inverse (m x na)
    Eigen::MatrixXd Z;      // orthonormal basis of null(P) (m x (m - rank))
    Eigen::MatrixXd Nc;     // orthonormal basis of range(P)^perp in R^na
    Eigen::VectorXd w;      // lumped weights at active nodes
    int na = 0, rank = 0;

    explicit ProxCoords(const ReducedSpace& space) {
        const int m = space.reduced_dim;
        std::vector<int> active;
        for (std::size_t i = 0; i < space.boundary_nodes.size(); ++i)
            if (!space.boundary_nodes[i].clamped) active.push_back(static_cast<int>(i));
        na = static_cast<int>(active.size());
        P.resize(na, m);
        w.resize(na);
        for (int i = 0; i < na; ++i) {
            P.row(i) = space.trace_map.row(active[static_cast<std::size_t>(i)]);
            w[i] = space.boundary_nodes[static_cast<std::size_t>(active[static_cast<std::size_t>(i)])].weight;
        }
        if (na == 0) {
            rank = 0;
            Z = Eigen::MatrixXd::Identity(m, m);
            Pinv.resize(m, 0);
            Nc.resize(0, 0);
            return;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const auto& S = svd.singularValues();
        const double thr = 1e-12 * std::max(1.0, S.size() > 0 ? S[0] : 0.0);
        rank = 0;
        for (Eigen::Index i = 0; i < S.size(); ++i)
            if (S[i] > thr) ++rank;
        const Eigen::MatrixXd Ur = svd.matrixU().leftCols(rank);
        const Eigen::MatrixXd Vr = svd.matrixV().leftCols(rank);
        Pinv = Vr * S.head(rank).cwiseInverse().asDiagonal() * Ur.transpose();
        Z = svd.matrixV().rightCols(m - rank);
        Nc = svd.matrixU().rightCols(na - rank);
    }

    Eigen::VectorXd to_field(const Eigen::VectorXd& yb, const Eigen::VectorXd& yi) const {
        if (na == 0) return Z * yi;
        return Pinv * yb + Z * yi;
    }
};

// Constrained separable prox: minimize over x with Nc'x = 0 of
//   sum_i (1/(2 tau))(x_i - z_i)^2 + w_i j(x_i).
Eigen::VectorXd constrained_prox(const ProxCoords& pc, const Superpotential& sp,
                                 const Eigen::VectorXd& z, double tau) {
    const int na = pc.na;
    auto nodewise = [&](const Eigen::VectorXd& target) {
        Eigen::VectorXd x(na);
        for (int i = 0; i < na; ++i) x[i] = prox_1d(sp, pc.w[i], target[i], tau);
        return x;
    };
    const Eigen::Index codim = pc.Nc.cols();
    if (codim == 0) return nodewise(z);
    if (codim == 1) {
        const Eigen::VectorXd n = pc.Nc.col(0);
        auto g = [&](double lam) { return n.dot(nodewise(z - tau * lam * n)); };
        // g is nonincreasing in lam (prox_1d is monotone in its target).
        double lo = -1.0, hi = 1.0;
        for (int it = 0; it < 80 && g(lo) < 0.0; ++it) lo *= 2.0;
        for (int it = 0; it < 80 && g(hi) > 0.0; ++it) hi *= 2.0;
        for (int it = 0; it < 200 && hi - lo > 1e-16 * (1.0 + std::abs(lo)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (g(mid) > 0.0 ? lo : hi) = mid;
        }
        return nodewise(z - tau * 0.5 * (lo + hi) * n);
    }
    // General codimension (truncated bases, multiple boundary loops): solve the
    // dual root problem phi(lambda) = Nc' nodewise(z - tau Nc lambda) = 0.
    // phi is the gradient of the concave dual, hence monotone; a damped
    // finite-difference Newton iteration converges globally.
    Eigen::VectorXd lam = Eigen::VectorXd::Zero(codim);
    Eigen::VectorXd x = nodewise(z);
    Eigen::VectorXd phi = pc.Nc.transpose() * x;
    const double scale = 1.0 + z.norm();
    double merit = phi.norm();
    for (int it = 0; it < 200 && merit > 1e-15 * scale; ++it) {
        Eigen::MatrixXd J(codim, codim);
        const double h = 1e-7 * (1.0 + lam.norm());
        for (Eigen::Index j = 0; j < codim; ++j) {
            Eigen::VectorXd lp = lam;
            lp[j] += h;
            J.col(j) = (pc.Nc.transpose() * nodewise(z - tau * pc.Nc * lp) - phi) / h;
        }
        const Eigen::VectorXd dlam =
            (J - 1e-12 * tau * Eigen::MatrixXd::Identity(codim, codim))
                .fullPivLu()
                .solve(-phi);
        double t = 1.0;
        bool moved = false;
        for (int ls = 0; ls < 60; ++ls) {
            const Eigen::VectorXd lt = lam + t * dlam;
            const Eigen::VectorXd xt = nodewise(z - tau * pc.Nc * lt);
            const double mt = (pc.Nc.transpose() * xt).norm();
            if (mt < merit * (1.0 - 1e-4 * t) + 1e-18 * scale) {
                lam = lt;
                x = xt;
                merit = mt;
                moved = true;
                break;
            }
            t *= 0.5;
        }
        if (!moved) break;
        phi = pc.Nc.transpose() * x;
    }
    return x - pc.Nc * (pc.Nc.transpose() * x);
}

double spectral_norm_estimate(const Eigen::MatrixXd& A) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows()).normalized();
    double lam = 0.0;
    for (int it = 0; it < 30; ++it) {
        v = A * v;
        lam = v.norm();
        if (lam == 0.0) return 0.0;
        v /= lam;
    }
    return lam;
}

} // namespace

MinimizeResult minimize_energy(const DiscreteEnergy& energy, const Eigen::VectorXd& v0,
                               double tol, int max_iter) {
    const ReducedSpace& space = *energy.space;
    const AssembledForms& forms = *energy.forms;
    if (v0.size() != space.reduced_dim)
        throw DimensionMismatch("minimize_energy: start vector length mismatch");
    const ProxCoords pc(space);

    // Smooth-part Lipschitz estimate over the quadratic terms; the power-term
    // curvature is handled by backtracking.  The coordinate map has spectral
    // norm max(1, 1/sigma_min(P)).
    const double amp = (pc.na > 0 && pc.rank > 0)
                           ? std::max(1.0, spectral_norm_estimate(
                                               pc.Pinv.transpose() * pc.Pinv))
                           : 1.0;
    double L0 = (energy.params.mu * spectral_norm_estimate(forms.K) +
                 energy.params.alpha * spectral_norm_estimate(forms.M)) * amp;
    if (!(L0 > 0.0)) L0 = 1.0;
    double tau0 = 1.0 / L0;
    // Respect the weak-convexity prox bound tau * w_i * m < 1.
    if (energy.sp.m > 0.0 && pc.na > 0)
        tau0 = std::min(tau0, 0.5 / (energy.sp.m * pc.w.maxCoeff()));

    Eigen::VectorXd yb = pc.na > 0 ? (pc.P * v0).eval() : Eigen::VectorXd();
    Eigen::VectorXd yi = pc.Z.transpose() * v0;
    Eigen::VectorXd c = pc.to_field(yb, yi);
    double E = energy.value(c);
    double tau = tau0;

    MinimizeResult res;
    res.v = c;
    for (int k = 0; k < max_iter; ++k) {
        const Eigen::VectorXd gc = energy.smooth_grad(c);
        const Eigen::VectorXd gyb = pc.na > 0 ? (pc.Pinv.transpose() * gc).eval()
                                              : Eigen::VectorXd();
        const Eigen::VectorXd gyi = pc.Z.transpose() * gc;

        bool accepted = false;
        Eigen::VectorXd yb_new, yi_new, c_new;
        double E_new = E;
        for (int bt = 0; bt < 60; ++bt) {
            yi_new = yi - tau * gyi;
            yb_new = pc.na > 0 ? constrained_prox(pc, energy.sp, yb - tau * gyb, tau)
                               : yb;
            c_new = pc.to_field(yb_new, yi_new);
            E_new = energy.value(c_new);
            double step2 = (yi_new - yi).squaredNorm();
            if (pc.na > 0) step2 += (yb_new - yb).squaredNorm();
            // Monotone decrease with a standard sufficient-decrease margin.
            if (E_new <= E - 0.25 / tau * step2 + 1e-14 * (1.0 + std::abs(E))) {
                accepted = true;
                break;
            }
            tau *= 0.5;
        }
        if (!accepted) {
            // Step underflow: no further progress representable.
            res.v = c;
            res.iterations = k;
            res.converged = true;
            return res;
        }
        const double map_V = v_norm(forms, c_new - c) / tau;
        res.final_decrement = map_V;
        c = c_new;
        yb = yb_new;
        yi = yi_new;
        E = E_new;
        res.v = c;
        res.iterations = k + 1;
        if (map_V <= tol) {
            res.converged = true;
            return res;
        }
        tau = std::min(tau * 1.25, tau0);  // gentle step recovery
    }
    throw MaxIterExceeded("minimize_energy: iteration budget exhausted",
                          std::vector<double>(res.v.data(), res.v.data() + res.v.size()));
}

double hvi_residual(const DiscreteEnergy& energy, const Eigen::VectorXd& v,
                    int n_directions, std::uint64_t seed) {
    const AssembledForms& forms = *energy.forms;
    const ReducedSpace& space = *energy.space;
    const Eigen::Index m = forms.K.rows();
    if (v.size() != m) throw DimensionMismatch("hvi_residual: field length mismatch");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Eigen::VectorXd Kv = forms.K * v, Mv = forms.M * v;
    const Eigen::VectorXd trace_v = space.trace_map * v;

    // j0 with the subdifferential inflated over [x-eps, x+eps]: a trace that
    // sits a roundoff away from a kink must still see the full interval there.
    auto j0_inflated = [&](double x, double dir) {
        const double eps = 1e-9 * (1.0 + std::abs(x));
        const auto a = energy.sp.subdifferential(x - eps);
        const auto b = energy.sp.subdifferential(x);
        const auto c = energy.sp.subdifferential(x + eps);
        const double lo = std::min({a.first, b.first, c.first});
        const double hi = std::max({a.second, b.second, c.second});
        return std::max(lo * dir, hi * dir);
    };

    auto violation = [&](Eigen::VectorXd d) {
        const double nv = v_norm(forms, d);
        if (nv == 0.0) return 0.0;
        d /= nv;
        double lhs = energy.params.mu * d.dot(Kv) + energy.params.alpha * d.dot(Mv) +
                     energy.params.beta * eval_power(forms, v, d, energy.params.r);
        if (energy.params.kappa != 0.0)
            lhs += energy.params.kappa * eval_power(forms, v, d, energy.params.q);
        const Eigen::VectorXd trace_d = space.trace_map * d;
        for (std::size_t i = 0; i < space.boundary_nodes.size(); ++i)
            lhs += space.boundary_nodes[i].weight *
                   j0_inflated(trace_v[static_cast<Eigen::Index>(i)],
                               trace_d[static_cast<Eigen::Index>(i)]);
        return energy.load.dot(d) - lhs;
    };

    double worst = 0.0;
    for (int s = 0; s < n_directions; ++s) {
        Eigen::VectorXd d(m);
        for (Eigen::Index i = 0; i < m; ++i) d[i] = gauss(rng);
        worst = std::max(worst, violation(d));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
        Eigen::VectorXd d = Eigen::VectorXd::Zero(m);
        d[i] = 1.0;
        worst = std::max(worst, violation(d));
        d[i] = -1.0;
        worst = std::max(worst, violation(d));
    }
    return std::max(0.0, worst);
}

} // namespace cbfed
