#include "hhomin/lagrange.hpp"

#include <cmath>
#include <stdexcept>

namespace hhomin {

LagrangeSpace::LagrangeSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), degree_(degree) {
    if (degree < 1 || degree > 8) throw std::invalid_argument("LagrangeSpace: degree out of range");
    const Mesh& m = *mesh_;
    const int d = degree;

    // reference lattice and monomials
    for (int g = 0; g <= d; ++g)
        for (int a = g; a >= 0; --a) mono_.push_back({a, g - a});
    for (int i = 0; i <= d; ++i)
        for (int j = 0; j <= d - i; ++j) ref_nodes_.push_back(Vec2(i / double(d), j / double(d)));

    const int nloc = static_cast<int>(ref_nodes_.size());
    Eigen::MatrixXd vand(nloc, nloc);
    for (int n = 0; n < nloc; ++n)
        for (int mno = 0; mno < nloc; ++mno)
            vand(n, mno) =
                std::pow(ref_nodes_[n].x(), mono_[mno][0]) * std::pow(ref_nodes_[n].y(), mono_[mno][1]);
    coeff_ = vand.inverse().transpose(); // row i = monomial coefficients of shape i

    // global numbering: vertices, then (d-1) nodes per side along the
    // canonical (low index -> high index) direction, then cell interiors
    const int per_side = d - 1;
    const int n_vertex = m.n_vertices();
    const int n_side_nodes = m.n_sides() * per_side;
    int interior_counter = n_vertex + n_side_nodes;

    element_nodes_.resize(m.n_triangles());
    node_coords_.assign(n_vertex, Vec2::Zero());
    for (int v = 0; v < n_vertex; ++v) node_coords_[v] = m.vertices()[v];
    node_coords_.resize(n_vertex + n_side_nodes, Vec2::Zero());

    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry geo = m.geometry(t);
        const Triangle& tri = m.triangles()[t];
        element_nodes_[t].resize(nloc);
        for (int n = 0; n < nloc; ++n) {
            const double x = ref_nodes_[n].x(), y = ref_nodes_[n].y();
            const int i = static_cast<int>(std::lround(x * d));
            const int j = static_cast<int>(std::lround(y * d));
            int global;
            if (i == 0 && j == 0)
                global = tri.v[0];
            else if (i == d && j == 0)
                global = tri.v[1];
            else if (i == 0 && j == d)
                global = tri.v[2];
            else if (j == 0 || i == 0 || i + j == d) {
                const int ls = (j == 0) ? 2 : (i == 0 ? 1 : 0); // side opposite local vertex ls
                const int side = tri.sides[ls];
                const Side& s = m.sides()[side];
                const Vec2 xp = geo.map(x, y);
                const Vec2& a = m.vertices()[s.vertices[0]];
                const Vec2& b = m.vertices()[s.vertices[1]];
                const double sp = (xp - a).dot(b - a) / (b - a).squaredNorm();
                const int rank = static_cast<int>(std::lround(sp * d));
                global = n_vertex + side * per_side + (rank - 1);
                node_coords_[global] = xp;
            } else {
                global = interior_counter++;
                node_coords_.push_back(geo.map(x, y));
            }
            element_nodes_[t][n] = global;
        }
    }
    n_nodes_ = interior_counter;

    boundary_node_.assign(n_nodes_, false);
    for (int v = 0; v < n_vertex; ++v) boundary_node_[v] = m.vertex_on_boundary(v);
    for (int s = 0; s < m.n_sides(); ++s)
        if (m.sides()[s].is_boundary())
            for (int r = 0; r < per_side; ++r) boundary_node_[n_vertex + s * per_side + r] = true;
}

void LagrangeSpace::eval(double x, double y, double* values) const {
    const int nloc = nodes_per_cell();
    std::vector<double> mv(mono_.size());
    for (std::size_t mn = 0; mn < mono_.size(); ++mn)
        mv[mn] = std::pow(x, mono_[mn][0]) * std::pow(y, mono_[mn][1]);
    for (int i = 0; i < nloc; ++i) {
        double s = 0;
        for (std::size_t mn = 0; mn < mono_.size(); ++mn) s += coeff_(i, mn) * mv[mn];
        values[i] = s;
    }
}

void LagrangeSpace::eval_grad(double x, double y, double* gx, double* gy) const {
    const int nloc = nodes_per_cell();
    for (int i = 0; i < nloc; ++i) {
        double sx = 0, sy = 0;
        for (std::size_t mn = 0; mn < mono_.size(); ++mn) {
            const int a = mono_[mn][0], b = mono_[mn][1];
            if (a > 0) sx += coeff_(i, mn) * a * std::pow(x, a - 1) * std::pow(y, b);
            if (b > 0) sy += coeff_(i, mn) * b * std::pow(x, a) * std::pow(y, b - 1);
        }
        gx[i] = sx;
        gy[i] = sy;
    }
}

Vec2 lagrange_grad(const LagrangeSpace& ls, const Eigen::VectorXd& nodal, int t, double xhat,
                   double yhat) {
    const int nloc = ls.nodes_per_cell();
    std::vector<double> gx(nloc), gy(nloc);
    ls.eval_grad(xhat, yhat, gx.data(), gy.data());
    Vec2 ghat = Vec2::Zero();
    for (int i = 0; i < nloc; ++i) {
        const double c = nodal[ls.node(t, i)];
        ghat += c * Vec2(gx[i], gy[i]);
    }
    const TriGeometry geo = ls.mesh().geometry(t);
    return geo.Jinv.transpose() * ghat;
}

} // namespace hhomin
