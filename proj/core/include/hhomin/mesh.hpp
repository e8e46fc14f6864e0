#pragma once

#include <Eigen/Dense>

#include <array>
#include <string>
#include <vector>

namespace hhomin {

using Vec2 = Eigen::Vector2d;

/// Affine map x = v0 + J * xhat from the reference triangle conv{(0,0),(1,0),(0,1)}.
struct TriGeometry {
    Vec2 v0;
    Eigen::Matrix2d J;
    Eigen::Matrix2d Jinv;
    double detJ = 0; // = 2 |T| > 0 for counterclockwise triangles
    double area = 0;
    double diam = 0;

    Vec2 map(double xhat, double yhat) const { return v0 + J * Vec2(xhat, yhat); }
    Vec2 unmap(const Vec2& x) const { return Jinv * (x - v0); }
};

/// Mesh side (edge). Interior sides have two adjacent triangles and a fixed
/// unit normal pointing from t_plus into t_minus; boundary sides have only
/// t_plus and the outward normal.
struct Side {
    std::array<int, 2> vertices{}; // global indices with vertices[0] < vertices[1]
    int t_plus = -1;
    int t_minus = -1;
    Vec2 normal = Vec2::Zero();
    double h = 0;

    bool is_boundary() const { return t_minus < 0; }
};

/// Triangle with counterclockwise vertices. By convention the refinement edge
/// for newest-vertex bisection is the edge opposite the first vertex, i.e.
/// conv{v[1], v[2]}; build_mesh() and the refinement routines maintain this.
struct Triangle {
    std::array<int, 3> v{};
    std::array<int, 3> sides{}; // sides[j] is opposite local vertex j
    int generation = 0;
};

/// Set of triangle indices selected for refinement.
using MarkSet = std::vector<int>;

/// Regular (conforming) 2D simplicial triangulation. Immutable after
/// construction; refinement returns a new mesh plus a parent map, so both
/// levels stay available for prolongation.
class Mesh {
public:
    Mesh() = default;

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    const std::vector<Side>& sides() const { return sides_; }

    int n_vertices() const { return static_cast<int>(vertices_.size()); }
    int n_triangles() const { return static_cast<int>(triangles_.size()); }
    int n_sides() const { return static_cast<int>(sides_.size()); }
    int n_interior_sides() const { return n_interior_sides_; }

    /// Compact index of an interior side (-1 for boundary sides).
    int interior_index(int side) const { return interior_index_[side]; }
    /// Inverse of interior_index.
    int interior_side(int iside) const { return interior_sides_[iside]; }
    /// Compact index of a boundary side (-1 for interior sides).
    int boundary_index(int side) const { return boundary_index_[side]; }
    int n_boundary_sides() const { return static_cast<int>(boundary_sides_.size()); }
    int boundary_side(int bside) const { return boundary_sides_[bside]; }

    bool vertex_on_boundary(int v) const { return boundary_vertex_[v]; }

    double area(int t) const { return areas_[t]; }
    double total_area() const { return total_area_; }
    double min_angle() const;

    TriGeometry geometry(int t) const;

    /// Local index (in Triangle::sides) of the refinement edge; always 0 by
    /// the storage convention.
    int refinement_edge(int /*t*/) const { return 0; }

    /// Outward unit normal of triangle t on its local side ls.
    Vec2 outward_normal(int t, int ls) const;
    /// +1 if the stored side normal equals the outward normal of t, else -1.
    double normal_sign(int t, int ls) const;

private:
    friend Mesh make_mesh_trusted(std::vector<Vec2>, std::vector<Triangle>);
    void build_topology();

    std::vector<Vec2> vertices_;
    std::vector<Triangle> triangles_;
    std::vector<Side> sides_;
    std::vector<int> interior_index_;
    std::vector<int> interior_sides_;
    std::vector<int> boundary_index_;
    std::vector<int> boundary_sides_;
    std::vector<bool> boundary_vertex_;
    std::vector<double> areas_;
    double total_area_ = 0;
    int n_interior_sides_ = 0;
};

/// Refinement result: the new mesh and, per fine triangle, the index of the
/// coarse triangle containing it.
struct RefinedMesh {
    Mesh mesh;
    std::vector<int> parent;
};

/// Builds a mesh from raw vertex coordinates and vertex index triples.
/// Triangles may be given in any rotation but must be counterclockwise.
/// The refinement edge of every input triangle is initialized as its longest
/// edge (ties broken by the smallest opposite-vertex index). Rejects
/// non-conforming input (hanging vertices), duplicate or degenerate
/// triangles, and clockwise orientation with a diagnostic.
Mesh build_mesh(const std::vector<Vec2>& vertices,
                const std::vector<std::array<int, 3>>& triangles);

/// Throws std::invalid_argument if the triangulation is not regular
/// (conforming) in the sense of Ciarlet.
void validate_mesh(const Mesh& mesh);

/// Newest-vertex bisection of the marked triangles plus conforming closure.
/// Every marked triangle is bisected at least once.
RefinedMesh refine_nvb(const Mesh& mesh, const MarkSet& marked);

/// Bisects every triangle twice (4 children each, generation +2).
RefinedMesh uniform_refine(const Mesh& mesh);

/// Initial triangulations used by the benchmarks.
Mesh criss_cross_square();                  ///< (0,1)^2, 4 triangles meeting at the center
Mesh l_shape_mesh();                        ///< (-1,1)^2 minus [0,1)x(-1,0], 12 triangles
Mesh two_triangle_square();                 ///< (0,1)^2 split along the diagonal
Mesh two_triangle_rectangle(double width, double height); ///< split along (width,0)-(0,height)

/// Plain-text mesh I/O; see docs/mesh_format.md for the column layout.
Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

} // namespace hhomin
