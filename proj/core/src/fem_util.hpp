#pragma once

// Internal helpers shared by assembly code: reference-triangle quadrature and
// Lagrange shape functions of order 1 and 2.  Reference triangle has vertices
// (0,0), (1,0), (0,1); barycentric coordinates (l0, l1, l2) = (1-x-y, x, y).

#include <array>

#include <Eigen/Dense>

namespace cbfed::fem {

/// Degree-4 Gauss rule on the reference triangle (6 points).  Weights sum to
/// one; multiply by the physical triangle area.
struct TriQuad {
    static constexpr int n = 6;
    std::array<Eigen::Vector2d, 6> pts;
    std::array<double, 6> w;

    static const TriQuad& get() {
        static const TriQuad rule = [] {
            TriQuad r;
            const double a = 0.445948490915965;
            const double b = 0.091576213509771;
            const double wa = 0.223381589678011;
            const double wb = 0.109951743655322;
            r.pts = {Eigen::Vector2d(a, a), Eigen::Vector2d(1 - 2 * a, a),
                     Eigen::Vector2d(a, 1 - 2 * a), Eigen::Vector2d(b, b),
                     Eigen::Vector2d(1 - 2 * b, b), Eigen::Vector2d(b, 1 - 2 * b)};
            r.w = {wa, wa, wa, wb, wb, wb};
            return r;
        }();
        return rule;
    }
};

inline int nodes_per_elem(int order) { return order == 1 ? 3 : 6; }

/// Shape function values at reference point (x, y).
inline void shape_values(int order, double x, double y, double N[6]) {
    const double l0 = 1.0 - x - y, l1 = x, l2 = y;
    if (order == 1) {
        N[0] = l0; N[1] = l1; N[2] = l2;
        N[3] = N[4] = N[5] = 0.0;
    } else {
        N[0] = l0 * (2 * l0 - 1);
        N[1] = l1 * (2 * l1 - 1);
        N[2] = l2 * (2 * l2 - 1);
        N[3] = 4 * l0 * l1;   // edge (v0,v1)
        N[4] = 4 * l1 * l2;   // edge (v1,v2)
        N[5] = 4 * l2 * l0;   // edge (v2,v0)
    }
}

/// Reference gradients dN/d(x,y) at (x, y).
inline void shape_grads(int order, double x, double y, double dN[6][2]) {
    const double l0 = 1.0 - x - y, l1 = x, l2 = y;
    if (order == 1) {
        dN[0][0] = -1; dN[0][1] = -1;
        dN[1][0] = 1;  dN[1][1] = 0;
        dN[2][0] = 0;  dN[2][1] = 1;
        for (int k = 3; k < 6; ++k) dN[k][0] = dN[k][1] = 0.0;
    } else {
        // dl0 = (-1,-1), dl1 = (1,0), dl2 = (0,1)
        dN[0][0] = -(4 * l0 - 1); dN[0][1] = -(4 * l0 - 1);
        dN[1][0] = 4 * l1 - 1;    dN[1][1] = 0;
        dN[2][0] = 0;             dN[2][1] = 4 * l2 - 1;
        dN[3][0] = 4 * (l0 - l1); dN[3][1] = -4 * l1;
        dN[4][0] = 4 * l2;        dN[4][1] = 4 * l1;
        dN[5][0] = -4 * l2;       dN[5][1] = 4 * (l0 - l2);
    }
}

/// Affine element geometry: physical gradient = invJT * reference gradient.
struct ElemGeom {
    Eigen::Matrix2d invJT;
    double area;

    ElemGeom(const Eigen::Vector2d& p0, const Eigen::Vector2d& p1,
             const Eigen::Vector2d& p2) {
        Eigen::Matrix2d J;
        J.col(0) = p1 - p0;
        J.col(1) = p2 - p0;
        const double det = J.determinant();
        area = 0.5 * det;
        invJT = J.inverse().transpose();
    }
};

} // namespace cbfed::fem
