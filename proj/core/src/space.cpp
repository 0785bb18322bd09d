#include "cbfed/space.hpp"

#include <cmath>
#include <map>

#include <Eigen/SparseQR>

#include "cbfed/errors.hpp"
#include "fem_util.hpp"

namespace cbfed {

namespace {

// Angle between two unit vectors; cheap and accurate near zero.
double angle_between(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(std::abs(a.x() * b.y() - a.y() * b.x()), a.dot(b));
}

} // namespace

ReducedSpace build_reduced_space(const Mesh& mesh, int order) {
    if (order != 1 && order != 2)
        throw InvalidParams("build_reduced_space: order must be 1 or 2");
    mesh.validate();

    ReducedSpace sp;
    sp.mesh = mesh;
    sp.order = order;

    // ---- Node numbering: vertices, then (order 2) edge midpoints. ----------
    const int nv = static_cast<int>(mesh.vertices.size());
    sp.nodes.assign(mesh.vertices.begin(), mesh.vertices.end());
    std::map<std::pair<int, int>, int> edge_node;
    auto edge_key = [](int a, int b) {
        return std::make_pair(std::min(a, b), std::max(a, b));
    };
    sp.elem_nodes.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tri = mesh.triangles[t];
        auto& en = sp.elem_nodes[t];
        en = {tri[0], tri[1], tri[2], -1, -1, -1};
        if (order == 2) {
            const int pairs[3][2] = {{tri[0], tri[1]}, {tri[1], tri[2]}, {tri[2], tri[0]}};
            for (int e = 0; e < 3; ++e) {
                auto key = edge_key(pairs[e][0], pairs[e][1]);
                auto it = edge_node.find(key);
                int node;
                if (it == edge_node.end()) {
                    node = static_cast<int>(sp.nodes.size());
                    edge_node.emplace(key, node);
                    sp.nodes.push_back(0.5 *
                        (mesh.vertices[static_cast<std::size_t>(pairs[e][0])] +
                         mesh.vertices[static_cast<std::size_t>(pairs[e][1])]));
                } else {
                    node = it->second;
                }
                en[static_cast<std::size_t>(3 + e)] = node;
            }
        }
    }
    const int nnodes = static_cast<int>(sp.nodes.size());
    sp.full_dim = 2 * nnodes;

    // ---- Boundary nodes: normals, lumped weights, corner clamping. ---------
    std::map<int, std::vector<Eigen::Vector2d>> node_normals;
    std::map<int, double> node_weight;
    for (const auto& f : mesh.boundary_facets) {
        const double L = (mesh.vertices[static_cast<std::size_t>(f.b)] -
                          mesh.vertices[static_cast<std::size_t>(f.a)]).norm();
        node_normals[f.a].push_back(f.normal);
        node_normals[f.b].push_back(f.normal);
        if (order == 1) {
            node_weight[f.a] += L / 2;
            node_weight[f.b] += L / 2;
        } else {
            const int mid = edge_node.at(edge_key(f.a, f.b));
            node_normals[mid].push_back(f.normal);
            // Simpson weights: exact for P2 traces along the facet.
            node_weight[f.a] += L / 6;
            node_weight[f.b] += L / 6;
            node_weight[mid] += 2 * L / 3;
        }
    }
    for (const auto& [node, normals] : node_normals) {
        ReducedSpace::BoundaryNode bn;
        bn.node = node;
        bn.weight = node_weight[node];
        Eigen::Vector2d avg = Eigen::Vector2d::Zero();
        for (const auto& n : normals) avg += n;
        bn.normal = avg.normalized();
        bn.clamped = false;
        for (const auto& n : normals)
            if (angle_between(n, normals.front()) > 1e-8) bn.clamped = true;
        sp.boundary_nodes.push_back(bn);
    }

    // ---- Tangential constraint rows (full space). ---------------------------
    {
        std::vector<Eigen::Triplet<double>> trip;
        int row = 0;
        for (const auto& bn : sp.boundary_nodes) {
            if (bn.clamped) {
                trip.emplace_back(row, 2 * bn.node, 1.0);
                ++row;
                trip.emplace_back(row, 2 * bn.node + 1, 1.0);
                ++row;
            } else {
                const Eigen::Vector2d t(-bn.normal.y(), bn.normal.x());
                trip.emplace_back(row, 2 * bn.node, t.x());
                trip.emplace_back(row, 2 * bn.node + 1, t.y());
                ++row;
            }
        }
        sp.tangential_constraints.resize(row, sp.full_dim);
        sp.tangential_constraints.setFromTriplets(trip.begin(), trip.end());
    }

    // ---- Divergence matrix (full space): test against discontinuous --------
    // order-(order-1) pressure functions, one block of rows per triangle.
    {
        const auto& quad = fem::TriQuad::get();
        const int npe = fem::nodes_per_elem(order);
        const int rows_per_tri = (order == 1) ? 1 : 3;
        std::vector<Eigen::Triplet<double>> trip;
        for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
            const auto& tri = mesh.triangles[t];
            const fem::ElemGeom geom(
                mesh.vertices[static_cast<std::size_t>(tri[0])],
                mesh.vertices[static_cast<std::size_t>(tri[1])],
                mesh.vertices[static_cast<std::size_t>(tri[2])]);
            Eigen::MatrixXd local =
                Eigen::MatrixXd::Zero(rows_per_tri, 2 * npe);
            for (int qp = 0; qp < fem::TriQuad::n; ++qp) {
                const double x = quad.pts[static_cast<std::size_t>(qp)].x();
                const double y = quad.pts[static_cast<std::size_t>(qp)].y();
                double dN[6][2];
                fem::shape_grads(order, x, y, dN);
                const double wq = quad.w[static_cast<std::size_t>(qp)] * geom.area;
                // Pressure test values at this point.
                double pv[3] = {1.0, 0.0, 0.0};
                if (order == 2) {
                    pv[0] = 1.0 - x - y;
                    pv[1] = x;
                    pv[2] = y;
                }
                for (int k = 0; k < npe; ++k) {
                    const Eigen::Vector2d g =
                        geom.invJT * Eigen::Vector2d(dN[k][0], dN[k][1]);
                    for (int p = 0; p < rows_per_tri; ++p) {
                        local(p, 2 * k) += wq * pv[p] * g.x();
                        local(p, 2 * k + 1) += wq * pv[p] * g.y();
                    }
                }
            }
            const auto& en = sp.elem_nodes[t];
            for (int p = 0; p < rows_per_tri; ++p)
                for (int k = 0; k < npe; ++k)
                    for (int c = 0; c < 2; ++c)
                        trip.emplace_back(
                            static_cast<int>(t) * rows_per_tri + p,
                            2 * en[static_cast<std::size_t>(k)] + c,
                            local(p, 2 * k + c));
        }
        sp.div_matrix.resize(static_cast<int>(mesh.triangles.size()) * rows_per_tri,
                             sp.full_dim);
        sp.div_matrix.setFromTriplets(trip.begin(), trip.end());
        sp.div_matrix.prune(0.0);
    }

    // ---- Null-space basis. --------------------------------------------------
    // Step 1: eliminate the tangential constraints locally.  G maps rotated
    // coordinates (interior x/y components plus one normal component per free
    // boundary node) back to full DOFs; its columns are orthonormal.
    std::vector<char> is_boundary(static_cast<std::size_t>(nnodes), 0);
    std::vector<char> is_clamped(static_cast<std::size_t>(nnodes), 0);
    std::vector<Eigen::Vector2d> nnormal(static_cast<std::size_t>(nnodes),
                                         Eigen::Vector2d::Zero());
    for (const auto& bn : sp.boundary_nodes) {
        is_boundary[static_cast<std::size_t>(bn.node)] = 1;
        is_clamped[static_cast<std::size_t>(bn.node)] = bn.clamped ? 1 : 0;
        nnormal[static_cast<std::size_t>(bn.node)] = bn.normal;
    }
    Eigen::SparseMatrix<double> G;
    {
        std::vector<Eigen::Triplet<double>> trip;
        int col = 0;
        for (int node = 0; node < nnodes; ++node) {
            const auto ui = static_cast<std::size_t>(node);
            if (!is_boundary[ui]) {
                trip.emplace_back(2 * node, col++, 1.0);
                trip.emplace_back(2 * node + 1, col++, 1.0);
            } else if (!is_clamped[ui]) {
                trip.emplace_back(2 * node, col, nnormal[ui].x());
                trip.emplace_back(2 * node + 1, col, nnormal[ui].y());
                ++col;
            }
        }
        G.resize(sp.full_dim, col);
        G.setFromTriplets(trip.begin(), trip.end());
    }

    // Step 2: orthonormal null space of D*G via sparse rank-revealing QR of
    // its transpose; the trailing columns of Q span the kernel exactly.
    Eigen::SparseMatrix<double> Dt = (sp.div_matrix * G).transpose();
    // Normalize constraint rows (columns of Dt) so the rank threshold is
    // scale-free.
    for (int k = 0; k < Dt.outerSize(); ++k) {
        double norm2 = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(Dt, k); it; ++it)
            norm2 += it.value() * it.value();
        const double norm = std::sqrt(norm2);
        if (norm > 0.0)
            for (Eigen::SparseMatrix<double>::InnerIterator it(Dt, k); it; ++it)
                it.valueRef() /= norm;
    }
    Dt.makeCompressed();
    Eigen::SparseQR<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> qr;
    qr.setPivotThreshold(1e-9);
    qr.compute(Dt);
    if (qr.info() != Eigen::Success)
        throw Error("build_reduced_space: sparse QR failed");
    const int n1 = static_cast<int>(Dt.rows());
    const int rank = static_cast<int>(qr.rank());
    const int kdim = n1 - rank;
    if (kdim <= 0) throw EmptySpace("build_reduced_space: reduced_dim = 0");

    Eigen::MatrixXd tail = Eigen::MatrixXd::Zero(n1, kdim);
    for (int j = 0; j < kdim; ++j) tail(rank + j, j) = 1.0;
    Eigen::MatrixXd Z = qr.matrixQ() * tail;
    sp.basis = G * Z;
    sp.reduced_dim = static_cast<int>(sp.basis.cols());

    // Defensive residual check on the defining invariants.
    const double div_res = (sp.div_matrix * sp.basis).cwiseAbs().maxCoeff();
    const double tan_res =
        (sp.tangential_constraints * sp.basis).cwiseAbs().maxCoeff();
    if (div_res > 1e-10 || tan_res > 1e-10)
        throw Error("build_reduced_space: basis residual too large");

    // ---- Normal trace map. --------------------------------------------------
    sp.trace_map = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(sp.boundary_nodes.size()), sp.reduced_dim);
    for (std::size_t i = 0; i < sp.boundary_nodes.size(); ++i) {
        const auto& bn = sp.boundary_nodes[i];
        if (bn.clamped) continue;  // identically zero by construction
        sp.trace_map.row(static_cast<Eigen::Index>(i)) =
            bn.normal.x() * sp.basis.row(2 * bn.node) +
            bn.normal.y() * sp.basis.row(2 * bn.node + 1);
    }
    return sp;
}

Eigen::VectorXd normal_trace(const ReducedSpace& space, const Eigen::VectorXd& v) {
    if (v.size() != space.reduced_dim)
        throw DimensionMismatch("normal_trace: coefficient length mismatch");
    return space.trace_map * v;
}

ReducedSpace truncate_space(const ReducedSpace& space, int ncols) {
    if (ncols < 1 || ncols > space.reduced_dim)
        throw InvalidParams("truncate_space: bad column count");
    ReducedSpace out = space;
    out.basis = space.basis.leftCols(ncols).eval();
    out.trace_map = space.trace_map.leftCols(ncols).eval();
    out.reduced_dim = ncols;
    return out;
}

} // namespace cbfed
