#include "cbfed/forms.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Sparse>

#include "cbfed/errors.hpp"
#include "fem_util.hpp"

namespace cbfed {

namespace {

void check_dim(const AssembledForms& forms, const Eigen::VectorXd& v,
               const char* where) {
    if (v.size() != forms.K.rows())
        throw DimensionMismatch(std::string(where) + ": coefficient length mismatch");
}

} // namespace

AssembledForms assemble_forms(const ReducedSpace& space, bool with_tables) {
    const auto& quad = fem::TriQuad::get();
    const int npe = fem::nodes_per_elem(space.order);
    const int ntri = static_cast<int>(space.mesh.triangles.size());
    const int nq = ntri * fem::TriQuad::n;

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> tK, tM, tvx, tvy, tcurl;
    Eigen::VectorXd qw(nq);

    for (int t = 0; t < ntri; ++t) {
        const auto& tri = space.mesh.triangles[static_cast<std::size_t>(t)];
        const auto& en = space.elem_nodes[static_cast<std::size_t>(t)];
        const fem::ElemGeom geom(
            space.mesh.vertices[static_cast<std::size_t>(tri[0])],
            space.mesh.vertices[static_cast<std::size_t>(tri[1])],
            space.mesh.vertices[static_cast<std::size_t>(tri[2])]);
        Eigen::MatrixXd locK = Eigen::MatrixXd::Zero(2 * npe, 2 * npe);
        Eigen::MatrixXd locM = Eigen::MatrixXd::Zero(2 * npe, 2 * npe);
        for (int qp = 0; qp < fem::TriQuad::n; ++qp) {
            const double x = quad.pts[static_cast<std::size_t>(qp)].x();
            const double y = quad.pts[static_cast<std::size_t>(qp)].y();
            const double w = quad.w[static_cast<std::size_t>(qp)] * geom.area;
            double N[6], dN[6][2];
            fem::shape_values(space.order, x, y, N);
            fem::shape_grads(space.order, x, y, dN);
            // curl of (phi_k e_x) is -d(phi_k)/dy; of (phi_k e_y) is +d/dx.
            Eigen::VectorXd curl_row(2 * npe);
            for (int k = 0; k < npe; ++k) {
                const Eigen::Vector2d g =
                    geom.invJT * Eigen::Vector2d(dN[k][0], dN[k][1]);
                curl_row[2 * k] = -g.y();
                curl_row[2 * k + 1] = g.x();
            }
            locK += w * curl_row * curl_row.transpose();
            for (int k = 0; k < npe; ++k)
                for (int l = 0; l < npe; ++l) {
                    locM(2 * k, 2 * l) += w * N[k] * N[l];
                    locM(2 * k + 1, 2 * l + 1) += w * N[k] * N[l];
                }
            if (with_tables) {
                const int row = t * fem::TriQuad::n + qp;
                qw[row] = w;
                for (int k = 0; k < npe; ++k) {
                    const int nk = en[static_cast<std::size_t>(k)];
                    tvx.emplace_back(row, 2 * nk, N[k]);
                    tvy.emplace_back(row, 2 * nk + 1, N[k]);
                    tcurl.emplace_back(row, 2 * nk, curl_row[2 * k]);
                    tcurl.emplace_back(row, 2 * nk + 1, curl_row[2 * k + 1]);
                }
            }
        }
        for (int a = 0; a < 2 * npe; ++a)
            for (int b = 0; b < 2 * npe; ++b) {
                const int ga = 2 * en[static_cast<std::size_t>(a / 2)] + a % 2;
                const int gb = 2 * en[static_cast<std::size_t>(b / 2)] + b % 2;
                if (locK(a, b) != 0.0) tK.emplace_back(ga, gb, locK(a, b));
                if (locM(a, b) != 0.0) tM.emplace_back(ga, gb, locM(a, b));
            }
    }

    const int n = space.full_dim;
    Eigen::SparseMatrix<double> Kf(n, n), Mf(n, n);
    Kf.setFromTriplets(tK.begin(), tK.end());
    Mf.setFromTriplets(tM.begin(), tM.end());

    AssembledForms forms;
    forms.K = space.basis.transpose() * (Kf * space.basis);
    forms.M = space.basis.transpose() * (Mf * space.basis);
    // Exact symmetrization (assembly is symmetric up to roundoff).
    forms.K = 0.5 * (forms.K + forms.K.transpose()).eval();
    forms.M = 0.5 * (forms.M + forms.M.transpose()).eval();
    forms.K_llt.compute(forms.K);
    forms.M_llt.compute(forms.M);

    if (with_tables) {
        Eigen::SparseMatrix<double> Svx(nq, n), Svy(nq, n), Scurl(nq, n);
        Svx.setFromTriplets(tvx.begin(), tvx.end());
        Svy.setFromTriplets(tvy.begin(), tvy.end());
        Scurl.setFromTriplets(tcurl.begin(), tcurl.end());
        forms.qvx = Svx * space.basis;
        forms.qvy = Svy * space.basis;
        forms.qcurl = Scurl * space.basis;
        forms.qw = qw;
    }
    return forms;
}

double eval_b(const AssembledForms& forms, const Eigen::VectorXd& u,
              const Eigen::VectorXd& v, const Eigen::VectorXd& w) {
    check_dim(forms, u, "eval_b");
    check_dim(forms, v, "eval_b");
    check_dim(forms, w, "eval_b");
    const Eigen::VectorXd cu = forms.qcurl * u;
    const Eigen::VectorXd vx = forms.qvx * v, vy = forms.qvy * v;
    const Eigen::VectorXd wx = forms.qvx * w, wy = forms.qvy * w;
    return (forms.qw.array() * cu.array() *
            (vx.array() * wy.array() - vy.array() * wx.array())).sum();
}

Eigen::VectorXd convection_load(const AssembledForms& forms, const Eigen::VectorXd& w) {
    check_dim(forms, w, "convection_load");
    const Eigen::VectorXd cw = forms.qcurl * w;
    const Eigen::VectorXd wx = forms.qvx * w, wy = forms.qvy * w;
    const Eigen::ArrayXd s = forms.qw.array() * cw.array();
    return forms.qvy.transpose() * (s * wx.array()).matrix() -
           forms.qvx.transpose() * (s * wy.array()).matrix();
}

double eval_power(const AssembledForms& forms, const Eigen::VectorXd& u,
                  const Eigen::VectorXd& v, double p) {
    if (p < 1.0) throw InvalidExponent("eval_power: p must be >= 1");
    check_dim(forms, u, "eval_power");
    check_dim(forms, v, "eval_power");
    const Eigen::ArrayXd ux = (forms.qvx * u).array(), uy = (forms.qvy * u).array();
    const Eigen::ArrayXd vx = (forms.qvx * v).array(), vy = (forms.qvy * v).array();
    const Eigen::ArrayXd mag = (ux.square() + uy.square()).sqrt();
    return (forms.qw.array() * mag.pow(p - 1.0) * (ux * vx + uy * vy)).sum();
}

Eigen::VectorXd power_load(const AssembledForms& forms, const Eigen::VectorXd& u,
                           double p) {
    if (p < 1.0) throw InvalidExponent("power_load: p must be >= 1");
    check_dim(forms, u, "power_load");
    const Eigen::ArrayXd ux = (forms.qvx * u).array(), uy = (forms.qvy * u).array();
    const Eigen::ArrayXd mag = (ux.square() + uy.square()).sqrt();
    const Eigen::ArrayXd s = forms.qw.array() * mag.pow(p - 1.0);
    return forms.qvx.transpose() * (s * ux).matrix() +
           forms.qvy.transpose() * (s * uy).matrix();
}

Eigen::VectorXd power_gateaux(const AssembledForms& forms, const Eigen::VectorXd& u,
                              const Eigen::VectorXd& v, double p) {
    if (p < 1.0) throw InvalidExponent("power_gateaux: p must be >= 1");
    check_dim(forms, u, "power_gateaux");
    check_dim(forms, v, "power_gateaux");
    if (p == 1.0) return v;  // C'(u)v = v exactly
    const Eigen::ArrayXd ux = (forms.qvx * u).array(), uy = (forms.qvy * u).array();
    const Eigen::ArrayXd vx = (forms.qvx * v).array(), vy = (forms.qvy * v).array();
    const Eigen::Index nq = forms.qw.size();
    Eigen::ArrayXd gx(nq), gy(nq);
    for (Eigen::Index i = 0; i < nq; ++i) {
        const double mag = std::hypot(ux[i], uy[i]);
        if (mag == 0.0) {
            // For 1 < p < 3 the derivative branch at u=0 is defined as 0; for
            // p >= 3 the formula itself vanishes there.
            gx[i] = gy[i] = 0.0;
            continue;
        }
        const double m1 = std::pow(mag, p - 1.0);
        const double m3 = std::pow(mag, p - 3.0);
        const double udotv = ux[i] * vx[i] + uy[i] * vy[i];
        gx[i] = m1 * vx[i] + (p - 1.0) * m3 * ux[i] * udotv;
        gy[i] = m1 * vy[i] + (p - 1.0) * m3 * uy[i] * udotv;
    }
    const Eigen::VectorXd load =
        forms.qvx.transpose() * (forms.qw.array() * gx).matrix() +
        forms.qvy.transpose() * (forms.qw.array() * gy).matrix();
    return forms.M_llt.solve(load);
}

double v_norm(const AssembledForms& forms, const Eigen::VectorXd& v) {
    check_dim(forms, v, "v_norm");
    return std::sqrt(std::max(0.0, v.dot(forms.K * v)));
}

double dual_norm(const AssembledForms& forms, const Eigen::VectorXd& f) {
    check_dim(forms, f, "dual_norm");
    return std::sqrt(std::max(0.0, f.dot(forms.K_llt.solve(f))));
}

double lp_norm(const AssembledForms& forms, const Eigen::VectorXd& v, double p) {
    if (p < 1.0) throw InvalidExponent("lp_norm: p must be >= 1");
    check_dim(forms, v, "lp_norm");
    const Eigen::ArrayXd vx = (forms.qvx * v).array(), vy = (forms.qvy * v).array();
    const Eigen::ArrayXd mag = (vx.square() + vy.square()).sqrt();
    return std::pow((forms.qw.array() * mag.pow(p)).sum(), 1.0 / p);
}

} // namespace cbfed
