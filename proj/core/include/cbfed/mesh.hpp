#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cbfed/errors.hpp"

namespace cbfed {

/// 2D triangulation of a rectangle with boundary facets and outward normals.
struct Mesh {
    struct BoundaryFacet {
        int a = -1, b = -1;        ///< endpoint vertex indices (0-based)
        int tri = -1;              ///< owning triangle index
        Eigen::Vector2d normal;    ///< outward unit normal
    };

    std::vector<Eigen::Vector2d> vertices;
    std::vector<std::array<int, 3>> triangles;   ///< CCW vertex triples
    std::vector<BoundaryFacet> boundary_facets;

    double triangle_area(int t) const;
    double area() const;             ///< |O|: sum of signed triangle areas
    double boundary_length() const;  ///< |Γ|: total boundary facet length

    /// Checks all structural invariants; throws Error on violation.
    void validate() const;
};

/// Structured crossed-triangle mesh of [0,width]x[0,height] with nx-by-ny
/// macro cells, each split into four triangles around its centroid.
Mesh generate_rectangle_mesh(double width, double height, int nx, int ny);

inline Mesh generate_unit_square_mesh(int nx, int ny) {
    return generate_rectangle_mesh(1.0, 1.0, nx, ny);
}
inline Mesh generate_channel_mesh(double len, double height, int nx, int ny) {
    return generate_rectangle_mesh(len, height, nx, ny);
}

/// Plain-text mesh I/O: "v x y" per vertex, "t i j k" per triangle,
/// "b i j" per boundary edge; 1-based indices, LF line endings.
void write_mesh(std::ostream& os, const Mesh& mesh);
Mesh read_mesh(std::istream& is);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

} // namespace cbfed
