#include "cbfed/mesh.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cbfed {

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles.at(static_cast<std::size_t>(t));
    const Eigen::Vector2d& p0 = vertices[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector2d& p1 = vertices[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector2d& p2 = vertices[static_cast<std::size_t>(tri[2])];
    return 0.5 * ((p1.x() - p0.x()) * (p2.y() - p0.y()) -
                  (p2.x() - p0.x()) * (p1.y() - p0.y()));
}

double Mesh::area() const {
    double a = 0.0;
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) a += triangle_area(t);
    return a;
}

double Mesh::boundary_length() const {
    double len = 0.0;
    for (const auto& f : boundary_facets)
        len += (vertices[static_cast<std::size_t>(f.b)] -
                vertices[static_cast<std::size_t>(f.a)]).norm();
    return len;
}

void Mesh::validate() const {
    const int nv = static_cast<int>(vertices.size());
    for (int t = 0; t < static_cast<int>(triangles.size()); ++t) {
        for (int k : triangles[static_cast<std::size_t>(t)])
            if (k < 0 || k >= nv) throw Error("mesh: triangle vertex index out of range");
        if (triangle_area(t) <= 0.0) throw Error("mesh: non-positive triangle area");
    }
    // Each boundary facet must belong to exactly one triangle, and its normal
    // must be unit length.  Count how many triangles contain each facet edge.
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& tri : triangles)
        for (int e = 0; e < 3; ++e) {
            int a = tri[static_cast<std::size_t>(e)];
            int b = tri[static_cast<std::size_t>((e + 1) % 3)];
            edge_count[{std::min(a, b), std::max(a, b)}]++;
        }
    std::map<int, int> degree;  // boundary vertex -> number of incident facets
    for (const auto& f : boundary_facets) {
        if (f.a < 0 || f.a >= nv || f.b < 0 || f.b >= nv)
            throw Error("mesh: facet vertex index out of range");
        auto it = edge_count.find({std::min(f.a, f.b), std::max(f.a, f.b)});
        if (it == edge_count.end() || it->second != 1)
            throw Error("mesh: boundary facet not owned by exactly one triangle");
        if (std::abs(f.normal.norm() - 1.0) > 1e-12)
            throw Error("mesh: boundary normal not unit length");
        degree[f.a]++;
        degree[f.b]++;
    }
    // Closed loops: every boundary vertex has exactly two incident facets.
    for (const auto& [v, d] : degree)
        if (d != 2) throw Error("mesh: boundary is not a closed loop at vertex " +
                                std::to_string(v));
}

Mesh generate_rectangle_mesh(double width, double height, int nx, int ny) {
    if (nx < 1 || ny < 1) throw ZeroResolution("generate_mesh: nx and ny must be >= 1");
    if (!(width > 0.0) || !(height > 0.0))
        throw Error("generate_mesh: non-positive dimensions");

    Mesh mesh;
    const double hx = width / nx, hy = height / ny;
    auto grid = [nx](int i, int j) { return j * (nx + 1) + i; };
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            mesh.vertices.emplace_back(i * hx, j * hy);
    const int ncorner = static_cast<int>(mesh.vertices.size());
    auto center = [&](int i, int j) { return ncorner + j * nx + i; };
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i)
            mesh.vertices.emplace_back((i + 0.5) * hx, (j + 0.5) * hy);

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const int v00 = grid(i, j), v10 = grid(i + 1, j);
            const int v11 = grid(i + 1, j + 1), v01 = grid(i, j + 1);
            const int c = center(i, j);
            mesh.triangles.push_back({v00, v10, c});
            mesh.triangles.push_back({v10, v11, c});
            mesh.triangles.push_back({v11, v01, c});
            mesh.triangles.push_back({v01, v00, c});
            const int t0 = static_cast<int>(mesh.triangles.size()) - 4;
            if (j == 0)
                mesh.boundary_facets.push_back({v00, v10, t0, {0.0, -1.0}});
            if (i == nx - 1)
                mesh.boundary_facets.push_back({v10, v11, t0 + 1, {1.0, 0.0}});
            if (j == ny - 1)
                mesh.boundary_facets.push_back({v11, v01, t0 + 2, {0.0, 1.0}});
            if (i == 0)
                mesh.boundary_facets.push_back({v01, v00, t0 + 3, {-1.0, 0.0}});
        }
    mesh.validate();
    return mesh;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
    std::ostringstream buf;
    buf.precision(17);
    for (const auto& v : mesh.vertices) buf << "v " << v.x() << " " << v.y() << "\n";
    for (const auto& t : mesh.triangles)
        buf << "t " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
    for (const auto& f : mesh.boundary_facets)
        buf << "b " << f.a + 1 << " " << f.b + 1 << "\n";
    os << buf.str();
}

Mesh read_mesh(std::istream& is) {
    Mesh mesh;
    std::vector<std::pair<int, int>> facet_edges;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        char tag = 0;
        ls >> tag;
        if (tag == 'v') {
            double x = 0, y = 0;
            if (!(ls >> x >> y)) throw Error("mesh read: bad vertex at line " +
                                             std::to_string(lineno));
            mesh.vertices.emplace_back(x, y);
        } else if (tag == 't') {
            int i = 0, j = 0, k = 0;
            if (!(ls >> i >> j >> k)) throw Error("mesh read: bad triangle at line " +
                                                  std::to_string(lineno));
            mesh.triangles.push_back({i - 1, j - 1, k - 1});
        } else if (tag == 'b') {
            int i = 0, j = 0;
            if (!(ls >> i >> j)) throw Error("mesh read: bad facet at line " +
                                             std::to_string(lineno));
            facet_edges.emplace_back(i - 1, j - 1);
        } else {
            throw Error("mesh read: unknown tag at line " + std::to_string(lineno));
        }
    }
    // Reconstruct facet ownership and outward normals from the triangulation.
    std::map<std::pair<int, int>, int> edge_owner;
    for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
        const auto& tri = mesh.triangles[static_cast<std::size_t>(t)];
        for (int e = 0; e < 3; ++e) {
            int a = tri[static_cast<std::size_t>(e)];
            int b = tri[static_cast<std::size_t>((e + 1) % 3)];
            edge_owner[{std::min(a, b), std::max(a, b)}] = t;
        }
    }
    for (auto [a, b] : facet_edges) {
        auto it = edge_owner.find({std::min(a, b), std::max(a, b)});
        if (it == edge_owner.end())
            throw Error("mesh read: boundary facet not part of any triangle");
        Mesh::BoundaryFacet f;
        f.a = a;
        f.b = b;
        f.tri = it->second;
        const Eigen::Vector2d pa = mesh.vertices[static_cast<std::size_t>(a)];
        const Eigen::Vector2d pb = mesh.vertices[static_cast<std::size_t>(b)];
        Eigen::Vector2d tangent = (pb - pa).normalized();
        Eigen::Vector2d normal(tangent.y(), -tangent.x());
        // Point away from the owning triangle's interior (its centroid).
        const auto& tri = mesh.triangles[static_cast<std::size_t>(f.tri)];
        Eigen::Vector2d centroid = (mesh.vertices[static_cast<std::size_t>(tri[0])] +
                                    mesh.vertices[static_cast<std::size_t>(tri[1])] +
                                    mesh.vertices[static_cast<std::size_t>(tri[2])]) / 3.0;
        if (normal.dot(centroid - 0.5 * (pa + pb)) > 0.0) normal = -normal;
        f.normal = normal;
        mesh.boundary_facets.push_back(f);
    }
    mesh.validate();
    return mesh;
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open mesh file for writing: " + path);
    write_mesh(os, mesh);
}

Mesh read_mesh_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open mesh file: " + path);
    return read_mesh(is);
}

} // namespace cbfed
