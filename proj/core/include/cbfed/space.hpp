#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cbfed/mesh.hpp"

namespace cbfed {

/// Discrete velocity space with the tangential boundary condition v_t = 0 and
/// the discrete divergence constraint applied.  All fields are represented by
/// coefficient vectors of length `reduced_dim` in the orthonormal `basis`.
///
/// Full-space DOF layout: continuous Lagrange nodes (vertices first, then edge
/// midpoints for order 2), two velocity components per node, dof = 2*node+c.
struct ReducedSpace {
    Mesh mesh;
    int order = 1;            ///< velocity element order (1 or 2)
    int full_dim = 0;         ///< unconstrained velocity DOF count
    int reduced_dim = 0;      ///< number of free coefficients

    std::vector<Eigen::Vector2d> nodes;            ///< nodal coordinates
    std::vector<std::array<int, 6>> elem_nodes;    ///< per-triangle node indices

    /// Discrete divergence operator: rows test div v against discontinuous
    /// order-(order-1) pressure functions; columns are full-space DOFs.
    Eigen::SparseMatrix<double> div_matrix;
    /// Rows encoding v_t = 0 per boundary node (two rows at clamped corners).
    Eigen::SparseMatrix<double> tangential_constraints;
    /// Orthonormal basis of null(div) ∩ null(tangential), full_dim x reduced_dim.
    Eigen::MatrixXd basis;

    struct BoundaryNode {
        int node = -1;
        Eigen::Vector2d normal;   ///< outward node normal (averaged facets)
        double weight = 0.0;      ///< lumped boundary quadrature weight
        bool clamped = false;     ///< corner node with two independent normals
    };
    std::vector<BoundaryNode> boundary_nodes;
    /// Map reduced coefficients -> v_n at boundary nodes (rows follow
    /// boundary_nodes order; clamped rows are identically zero).
    Eigen::MatrixXd trace_map;

    Eigen::VectorXd boundary_weights() const {
        Eigen::VectorXd w(static_cast<Eigen::Index>(boundary_nodes.size()));
        for (Eigen::Index i = 0; i < w.size(); ++i)
            w[i] = boundary_nodes[static_cast<std::size_t>(i)].weight;
        return w;
    }
};

ReducedSpace build_reduced_space(const Mesh& mesh, int order);

/// Normal trace v_n at each boundary node (linear in v).
Eigen::VectorXd normal_trace(const ReducedSpace& space, const Eigen::VectorXd& v);

/// Shallow variant of `space` whose basis keeps only the first `ncols`
/// columns; used to build the tiny instances consumed by the dense oracle.
ReducedSpace truncate_space(const ReducedSpace& space, int ncols);

} // namespace cbfed
