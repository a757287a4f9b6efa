#include "randuq/mesh.hpp"

#include <stdexcept>

namespace randuq {

Mesh Mesh::structured(int n, BoundaryLayout layout) {
    if (n < 2) throw std::invalid_argument("structured mesh needs at least 2 vertices per side");

    Mesh mesh;
    mesh.vertices_per_side = n;
    const double h = 1.0 / (n - 1);

    mesh.vertices.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            mesh.vertices.push_back({i * h, j * h});

    const auto vid = [n](int i, int j) { return j * n + i; };

    mesh.triangles.reserve(2u * static_cast<std::size_t>(n - 1) * (n - 1));
    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i + 1 < n; ++i) {
            const int v00 = vid(i, j);
            const int v10 = vid(i + 1, j);
            const int v01 = vid(i, j + 1);
            const int v11 = vid(i + 1, j + 1);
            mesh.triangles.push_back({v00, v10, v11});
            mesh.triangles.push_back({v00, v11, v01});
        }
    }

    const BoundaryTag side = layout == BoundaryLayout::all_dirichlet ? BoundaryTag::dirichlet
                                                                     : BoundaryTag::neumann;
    for (int i = 0; i + 1 < n; ++i)
        mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), side, {0.0, -1.0}});
    for (int j = 0; j + 1 < n; ++j)
        mesh.boundary_edges.push_back({vid(n - 1, j), vid(n - 1, j + 1), side, {1.0, 0.0}});
    for (int i = 0; i + 1 < n; ++i)
        mesh.boundary_edges.push_back({vid(i, n - 1), vid(i + 1, n - 1), BoundaryTag::dirichlet, {0.0, 1.0}});
    for (int j = 0; j + 1 < n; ++j)
        mesh.boundary_edges.push_back({vid(0, j), vid(0, j + 1), side, {-1.0, 0.0}});

    return mesh;
}

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Vec2 a = vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 b = vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 c = vertices[static_cast<std::size_t>(tri[2])];
    return 0.5 * cross(b - a, c - a);
}

Vec2 Mesh::triangle_barycenter(int t) const {
    const auto& tri = triangles[static_cast<std::size_t>(t)];
    const Vec2 a = vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 b = vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 c = vertices[static_cast<std::size_t>(tri[2])];
    return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

std::vector<int> Mesh::dirichlet_vertices() const {
    std::vector<char> mark(vertices.size(), 0);
    for (const BoundaryEdge& e : boundary_edges) {
        if (e.tag != BoundaryTag::dirichlet) continue;
        mark[static_cast<std::size_t>(e.a)] = 1;
        mark[static_cast<std::size_t>(e.b)] = 1;
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < mark.size(); ++i)
        if (mark[i]) out.push_back(static_cast<int>(i));
    return out;
}

void Mesh::dump_vtk(std::ostream& out, std::span<const double> nodal, const char* field_name) const {
    out << "# vtk DataFile Version 3.0\nranduq field dump\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << vertices.size() << " double\n";
    for (const Vec2& v : vertices) out << v.x << ' ' << v.y << " 0\n";
    out << "CELLS " << triangles.size() << ' ' << 4 * triangles.size() << '\n';
    for (const auto& t : triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
    out << "CELL_TYPES " << triangles.size() << '\n';
    for (std::size_t i = 0; i < triangles.size(); ++i) out << "5\n";
    if (!nodal.empty()) {
        out << "POINT_DATA " << nodal.size() << "\nSCALARS " << field_name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : nodal) out << v << '\n';
    }
}

} // namespace randuq
