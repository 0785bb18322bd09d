/// @file test_mesh.cpp
/// Structured crossed-triangle mesh generation, invariants, and text I/O.

#include <doctest.h>

#include <sstream>

#include "cbfed/errors.hpp"
#include "cbfed/mesh.hpp"

using namespace cbfed;

TEST_CASE("unit square mesh: counts, area, boundary length") {
    const Mesh mesh = generate_unit_square_mesh(4, 4);
    CHECK(mesh.vertices.size() == 25 + 16);  // grid nodes + cell centers
    CHECK(mesh.triangles.size() == 64);
    CHECK(mesh.boundary_facets.size() == 16);
    CHECK(mesh.area() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mesh.boundary_length() == doctest::Approx(4.0).epsilon(1e-12));
    mesh.validate();
}

TEST_CASE("channel(2,1) with 4x2 cells has area 2") {
    const Mesh mesh = generate_channel_mesh(2.0, 1.0, 4, 2);
    double sum = 0.0;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        CHECK(mesh.triangle_area(t) > 0.0);  // CCW orientation
        sum += mesh.triangle_area(t);
    }
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mesh.area() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(mesh.boundary_length() == doctest::Approx(6.0).epsilon(1e-12));
}

TEST_CASE("boundary facet normals are outward unit vectors") {
    const Mesh mesh = generate_rectangle_mesh(2.0, 1.0, 3, 2);
    for (const auto& facet : mesh.boundary_facets) {
        CHECK(facet.normal.norm() == doctest::Approx(1.0).epsilon(1e-12));
        // Outward: positive dot product with (midpoint - domain center).
        const Eigen::Vector2d mid =
            0.5 * (mesh.vertices[static_cast<std::size_t>(facet.a)] +
                   mesh.vertices[static_cast<std::size_t>(facet.b)]);
        const Eigen::Vector2d center(1.0, 0.5);
        CHECK(facet.normal.dot(mid - center) > 0.0);
    }
}

TEST_CASE("zero resolution is rejected") {
    CHECK_THROWS_AS(generate_rectangle_mesh(1.0, 1.0, 0, 4), ZeroResolution);
    CHECK_THROWS_AS(generate_rectangle_mesh(1.0, 1.0, 4, -1), ZeroResolution);
}

TEST_CASE("degenerate extents are rejected") {
    CHECK_THROWS(generate_rectangle_mesh(0.0, 1.0, 2, 2));
}

TEST_CASE("text round trip preserves the mesh") {
    const Mesh mesh = generate_rectangle_mesh(1.5, 1.0, 3, 2);
    std::stringstream buffer;
    write_mesh(buffer, mesh);
    const Mesh back = read_mesh(buffer);
    back.validate();
    REQUIRE(back.vertices.size() == mesh.vertices.size());
    REQUIRE(back.triangles.size() == mesh.triangles.size());
    REQUIRE(back.boundary_facets.size() == mesh.boundary_facets.size());
    for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
        CHECK((back.vertices[i] - mesh.vertices[i]).norm() == doctest::Approx(0.0));
    CHECK(back.area() == doctest::Approx(mesh.area()).epsilon(1e-14));
    CHECK(back.boundary_length() ==
          doctest::Approx(mesh.boundary_length()).epsilon(1e-14));
}

TEST_CASE("write is deterministic") {
    const Mesh mesh = generate_unit_square_mesh(3, 3);
    std::stringstream s1, s2;
    write_mesh(s1, mesh);
    write_mesh(s2, mesh);
    CHECK(s1.str() == s2.str());
}
