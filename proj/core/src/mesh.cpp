#include "hhomin/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace hhomin {

namespace {

double signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

} // namespace

void Mesh::build_topology() {
    const int nt = n_triangles();
    sides_.clear();
    std::map<std::array<int, 2>, int> side_of;
    for (int t = 0; t < nt; ++t) {
        Triangle& tri = triangles_[t];
        for (int j = 0; j < 3; ++j) {
            int a = tri.v[(j + 1) % 3];
            int b = tri.v[(j + 2) % 3];
            std::array<int, 2> key{std::min(a, b), std::max(a, b)};
            auto it = side_of.find(key);
            if (it == side_of.end()) {
                Side s;
                s.vertices = key;
                s.t_plus = t;
                const Vec2 d = vertices_[b] - vertices_[a];
                s.h = d.norm();
                // outward normal of t on the edge from a to b (t is CCW)
                s.normal = Vec2(d.y(), -d.x()) / s.h;
                int idx = static_cast<int>(sides_.size());
                sides_.push_back(s);
                side_of.emplace(key, idx);
                tri.sides[j] = idx;
            } else {
                Side& s = sides_[it->second];
                if (s.t_minus >= 0)
                    throw std::invalid_argument("mesh: side shared by more than two triangles");
                s.t_minus = t;
                tri.sides[j] = it->second;
            }
        }
    }

    interior_index_.assign(sides_.size(), -1);
    interior_sides_.clear();
    boundary_index_.assign(sides_.size(), -1);
    boundary_sides_.clear();
    boundary_vertex_.assign(vertices_.size(), false);
    n_interior_sides_ = 0;
    for (std::size_t s = 0; s < sides_.size(); ++s) {
        if (sides_[s].is_boundary()) {
            boundary_vertex_[sides_[s].vertices[0]] = true;
            boundary_vertex_[sides_[s].vertices[1]] = true;
            boundary_index_[s] = static_cast<int>(boundary_sides_.size());
            boundary_sides_.push_back(static_cast<int>(s));
        } else {
            interior_index_[s] = n_interior_sides_++;
            interior_sides_.push_back(static_cast<int>(s));
        }
    }

    areas_.resize(nt);
    total_area_ = 0;
    for (int t = 0; t < nt; ++t) {
        const auto& v = triangles_[t].v;
        areas_[t] = signed_area(vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]);
        if (areas_[t] <= 0)
            throw std::invalid_argument("mesh: triangle " + std::to_string(t) +
                                        " has non-positive area (zero area or clockwise orientation)");
        total_area_ += areas_[t];
    }
}

TriGeometry Mesh::geometry(int t) const {
    const auto& v = triangles_[t].v;
    TriGeometry g;
    g.v0 = vertices_[v[0]];
    g.J.col(0) = vertices_[v[1]] - g.v0;
    g.J.col(1) = vertices_[v[2]] - g.v0;
    g.detJ = g.J(0, 0) * g.J(1, 1) - g.J(0, 1) * g.J(1, 0);
    g.Jinv << g.J(1, 1), -g.J(0, 1), -g.J(1, 0), g.J(0, 0);
    g.Jinv /= g.detJ;
    g.area = 0.5 * g.detJ;
    g.diam = std::max({(vertices_[v[1]] - vertices_[v[0]]).norm(),
                       (vertices_[v[2]] - vertices_[v[1]]).norm(),
                       (vertices_[v[0]] - vertices_[v[2]]).norm()});
    return g;
}

Vec2 Mesh::outward_normal(int t, int ls) const {
    const auto& tri = triangles_[t];
    const Vec2& a = vertices_[tri.v[(ls + 1) % 3]];
    const Vec2& b = vertices_[tri.v[(ls + 2) % 3]];
    const Vec2 d = b - a;
    return Vec2(d.y(), -d.x()).normalized();
}

double Mesh::normal_sign(int t, int ls) const {
    const Side& s = sides_[triangles_[t].sides[ls]];
    return s.t_plus == t ? 1.0 : -1.0;
}

double Mesh::min_angle() const {
    double best = M_PI;
    for (const auto& tri : triangles_) {
        for (int j = 0; j < 3; ++j) {
            const Vec2& p = vertices_[tri.v[j]];
            const Vec2 e1 = (vertices_[tri.v[(j + 1) % 3]] - p).normalized();
            const Vec2 e2 = (vertices_[tri.v[(j + 2) % 3]] - p).normalized();
            best = std::min(best, std::acos(std::clamp(e1.dot(e2), -1.0, 1.0)));
        }
    }
    return best;
}

Mesh make_mesh_trusted(std::vector<Vec2> vertices, std::vector<Triangle> triangles) {
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);
    m.build_topology();
    return m;
}

Mesh build_mesh(const std::vector<Vec2>& vertices,
                const std::vector<std::array<int, 3>>& triangles) {
    if (vertices.size() < 3 || triangles.empty())
        throw std::invalid_argument("build_mesh: need at least 3 vertices and 1 triangle");
    const int nv = static_cast<int>(vertices.size());
    std::set<std::array<int, 3>> seen;
    std::vector<Triangle> tris;
    tris.reserve(triangles.size());
    for (std::size_t t = 0; t < triangles.size(); ++t) {
        auto idx = triangles[t];
        for (int i : idx)
            if (i < 0 || i >= nv)
                throw std::invalid_argument("build_mesh: vertex index out of range in triangle " +
                                            std::to_string(t));
        std::array<int, 3> key = idx;
        std::sort(key.begin(), key.end());
        if (key[0] == key[1] || key[1] == key[2])
            throw std::invalid_argument("build_mesh: repeated vertex in triangle " + std::to_string(t));
        if (!seen.insert(key).second)
            throw std::invalid_argument("build_mesh: duplicate triangle " + std::to_string(t));

        if (signed_area(vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]) <= 0)
            throw std::invalid_argument("build_mesh: triangle " + std::to_string(t) +
                                        " has non-positive area (zero area or clockwise orientation)");

        // Rotate so the refinement edge (longest edge, ties by smallest
        // opposite-vertex index) is opposite the first vertex.
        double best_len = -1;
        int best_j = 0;
        for (int j = 0; j < 3; ++j) {
            double len = (vertices[idx[(j + 2) % 3]] - vertices[idx[(j + 1) % 3]]).norm();
            if (len > best_len + 1e-14 * len ||
                (std::abs(len - best_len) <= 1e-14 * len && idx[j] < idx[best_j])) {
                best_len = len;
                best_j = j;
            }
        }
        Triangle tri;
        tri.v = {idx[best_j], idx[(best_j + 1) % 3], idx[(best_j + 2) % 3]};
        tris.push_back(tri);
    }

    Mesh m = make_mesh_trusted(vertices, std::move(tris));
    validate_mesh(m);
    return m;
}

void validate_mesh(const Mesh& mesh) {
    // Hanging vertex: a vertex lying strictly inside some side.
    for (const Side& s : mesh.sides()) {
        const Vec2& a = mesh.vertices()[s.vertices[0]];
        const Vec2& b = mesh.vertices()[s.vertices[1]];
        const Vec2 d = b - a;
        const double len2 = d.squaredNorm();
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (v == s.vertices[0] || v == s.vertices[1]) continue;
            const Vec2 r = mesh.vertices()[v] - a;
            const double t = r.dot(d) / len2;
            if (t <= 1e-12 || t >= 1.0 - 1e-12) continue;
            const double dist = std::abs(d.x() * r.y() - d.y() * r.x()) / std::sqrt(len2);
            if (dist < 1e-12 * s.h)
                throw std::invalid_argument("mesh: hanging vertex " + std::to_string(v) +
                                            " on side (" + std::to_string(s.vertices[0]) + "," +
                                            std::to_string(s.vertices[1]) + ")");
        }
    }
    // Duplicate vertex coordinates.
    for (int i = 0; i < mesh.n_vertices(); ++i)
        for (int j = i + 1; j < mesh.n_vertices(); ++j)
            if ((mesh.vertices()[i] - mesh.vertices()[j]).norm() == 0.0)
                throw std::invalid_argument("mesh: duplicate vertices " + std::to_string(i) + ", " +
                                            std::to_string(j));
}

namespace {

// Bisection bookkeeping for one refinement call. Sides of the coarse mesh are
// marked (the refinement edge of every marked triangle plus closure), then
// every triangle is split according to which of its sides are marked.
struct Refiner {
    const Mesh& coarse;
    std::vector<bool> edge_marked;
    std::vector<int> midpoint; // side -> new vertex index (or -1)
    std::vector<Vec2> vertices;
    std::vector<Triangle> out;
    std::vector<int> parent;

    explicit Refiner(const Mesh& m)
        : coarse(m),
          edge_marked(m.n_sides(), false),
          midpoint(m.n_sides(), -1),
          vertices(m.vertices()) {}

    void mark_triangles(const MarkSet& marked) {
        for (int t : marked) {
            if (t < 0 || t >= coarse.n_triangles())
                throw std::invalid_argument("refine_nvb: marked triangle out of range");
            edge_marked[coarse.triangles()[t].sides[0]] = true;
        }
        // Closure: a triangle with any marked side must have its refinement
        // edge marked; iterate to the (finite) fixpoint.
        bool changed = true;
        while (changed) {
            changed = false;
            for (const Triangle& tri : coarse.triangles()) {
                if (edge_marked[tri.sides[0]]) continue;
                if (edge_marked[tri.sides[1]] || edge_marked[tri.sides[2]]) {
                    edge_marked[tri.sides[0]] = true;
                    changed = true;
                }
            }
        }
    }

    void mark_all_edges() { edge_marked.assign(coarse.n_sides(), true); }

    int mid(int side) {
        if (midpoint[side] < 0) {
            const Side& s = coarse.sides()[side];
            vertices.push_back(0.5 * (coarse.vertices()[s.vertices[0]] + coarse.vertices()[s.vertices[1]]));
            midpoint[side] = static_cast<int>(vertices.size()) - 1;
        }
        return midpoint[side];
    }

    void emit(int v0, int v1, int v2, int gen, int par) {
        Triangle tri;
        tri.v = {v0, v1, v2};
        tri.generation = gen;
        out.push_back(tri);
        parent.push_back(par);
    }

    // Single newest-vertex bisection: children keep the parent's original
    // (non-refinement) edges as their refinement edges.
    void bisect_leaf(int v0, int v1, int v2, int ref_side, int gen, int par) {
        const int m = mid(ref_side);
        emit(m, v0, v1, gen + 1, par);
        emit(m, v2, v0, gen + 1, par);
    }

    void split(int t) {
        const Triangle& tri = coarse.triangles()[t];
        const bool m0 = edge_marked[tri.sides[0]];
        const bool m1 = edge_marked[tri.sides[1]];
        const bool m2 = edge_marked[tri.sides[2]];
        if (!m0) {
            // closure guarantees no other side is marked
            Triangle copy = tri;
            out.push_back(copy);
            parent.push_back(t);
            return;
        }
        const int a = tri.v[0], b = tri.v[1], c = tri.v[2];
        const int m = mid(tri.sides[0]);
        // children (m,a,b) with refinement edge (a,b) = parent side 2,
        // and (m,c,a) with refinement edge (c,a) = parent side 1
        if (m2)
            bisect_leaf(m, a, b, tri.sides[2], tri.generation + 1, t);
        else
            emit(m, a, b, tri.generation + 1, t);
        if (m1)
            bisect_leaf(m, c, a, tri.sides[1], tri.generation + 1, t);
        else
            emit(m, c, a, tri.generation + 1, t);
    }

    RefinedMesh finish() {
        for (int t = 0; t < coarse.n_triangles(); ++t) split(t);
        RefinedMesh r;
        r.mesh = make_mesh_trusted(std::move(vertices), std::move(out));
        r.parent = std::move(parent);
        return r;
    }
};

} // namespace

RefinedMesh refine_nvb(const Mesh& mesh, const MarkSet& marked) {
    Refiner ref(mesh);
    ref.mark_triangles(marked);
    return ref.finish();
}

RefinedMesh uniform_refine(const Mesh& mesh) {
    Refiner ref(mesh);
    ref.mark_all_edges();
    return ref.finish();
}

Mesh criss_cross_square() {
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    std::vector<std::array<int, 3>> t = {{0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}};
    return build_mesh(v, t);
}

Mesh l_shape_mesh() {
    // three criss-cross unit squares covering (-1,1)^2 \ [0,1)x(-1,0]
    std::vector<Vec2> v;
    std::vector<std::array<int, 3>> t;
    auto vertex = [&](double x, double y) {
        for (std::size_t i = 0; i < v.size(); ++i)
            if (v[i].x() == x && v[i].y() == y) return static_cast<int>(i);
        v.push_back({x, y});
        return static_cast<int>(v.size()) - 1;
    };
    auto square = [&](double x0, double y0) {
        int a = vertex(x0, y0), b = vertex(x0 + 1, y0);
        int c = vertex(x0 + 1, y0 + 1), d = vertex(x0, y0 + 1);
        int m = vertex(x0 + 0.5, y0 + 0.5);
        t.push_back({a, b, m});
        t.push_back({b, c, m});
        t.push_back({c, d, m});
        t.push_back({d, a, m});
    };
    square(-1, -1);
    square(-1, 0);
    square(0, 0);
    return build_mesh(v, t);
}

Mesh two_triangle_square() {
    std::vector<Vec2> v = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    std::vector<std::array<int, 3>> t = {{0, 1, 2}, {0, 2, 3}};
    return build_mesh(v, t);
}

Mesh two_triangle_rectangle(double width, double height) {
    std::vector<Vec2> v = {{0, 0}, {width, 0}, {width, height}, {0, height}};
    std::vector<std::array<int, 3>> t = {{0, 1, 3}, {1, 2, 3}};
    return build_mesh(v, t);
}

} // namespace hhomin
