#pragma once

#include <array>
#include <ostream>
#include <span>
#include <vector>

#include "randuq/geometry.hpp"

namespace randuq {

enum class BoundaryTag { dirichlet, neumann };

struct BoundaryEdge {
    int a = 0;
    int b = 0;
    BoundaryTag tag = BoundaryTag::neumann;
    Vec2 outward_normal;
};

enum class BoundaryLayout {
    top_dirichlet, ///< top edge essential, the other three sides natural
    all_dirichlet
};

/// Structured P1 triangulation of the unit square. Each lattice cell is split
/// along the lower-left to upper-right diagonal; triangles are counter-clockwise.
struct Mesh {
    std::vector<Vec2> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<BoundaryEdge> boundary_edges;
    int vertices_per_side = 0;

    static Mesh structured(int n, BoundaryLayout layout = BoundaryLayout::top_dirichlet);

    double h() const { return 1.0 / (vertices_per_side - 1); }
    double triangle_area(int t) const;
    Vec2 triangle_barycenter(int t) const;
    std::vector<int> dirichlet_vertices() const;

    /// Legacy-VTK text dump of the mesh with one nodal scalar field.
    void dump_vtk(std::ostream& out, std::span<const double> nodal, const char* field_name = "u") const;
};

} // namespace randuq
