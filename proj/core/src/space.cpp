#include "hhomin/space.hpp"

#include <cmath>
#include <stdexcept>

namespace hhomin {

HHOFunction::HHOFunction(const HHOSpace& space) {
    coeffs = Eigen::VectorXd::Zero(space.ndof());
    boundary = Eigen::MatrixXd::Zero(space.n_side_dofs(), space.mesh().n_boundary_sides());
}

HHOSpace::HHOSpace(std::shared_ptr<const Mesh> mesh, int k, int quad_degree)
    : mesh_(std::move(mesh)),
      k_(k),
      cell_basis_(k),
      edge_basis_(k),
      rt_basis_(k),
      cell_quad_(&triangle_quadrature(std::max(quad_degree, 2 * (k + 1)))),
      edge_quad_(&edge_quadrature(2 * k + 2)) {
    if (k < 0 || k > 8) throw std::invalid_argument("HHOSpace: polynomial degree out of range");
    const Mesh& m = *mesh_;
    const int nt = m.n_triangles();
    const int nc = n_cell_dofs();
    const int nf = n_side_dofs();
    const int nrt = n_rt();
    cells_total_ = static_cast<Eigen::Index>(nt) * nc;
    ndof_ = cells_total_ + static_cast<Eigen::Index>(m.n_interior_sides()) * nf;

    // reference tables at the cell quadrature points
    const auto& quad = *cell_quad_;
    const int nq = static_cast<int>(quad.size());
    cell_values_.resize(nc, nq);
    cell_grads_x_.resize(nc, nq);
    cell_grads_y_.resize(nc, nq);
    rt_values_x_.resize(nrt, nq);
    rt_values_y_.resize(nrt, nq);
    rt_divs_.resize(nrt, nq);
    std::vector<double> tmp_a(std::max(nc, nrt)), tmp_b(std::max(nc, nrt));
    for (int q = 0; q < nq; ++q) {
        const double x = quad.barycentric[q][1], y = quad.barycentric[q][2];
        cell_basis_.eval(x, y, tmp_a.data());
        for (int i = 0; i < nc; ++i) cell_values_(i, q) = tmp_a[i];
        cell_basis_.eval_grad(x, y, tmp_a.data(), tmp_b.data());
        for (int i = 0; i < nc; ++i) {
            cell_grads_x_(i, q) = tmp_a[i];
            cell_grads_y_(i, q) = tmp_b[i];
        }
        rt_basis_.eval(x, y, tmp_a.data(), tmp_b.data());
        for (int i = 0; i < nrt; ++i) {
            rt_values_x_(i, q) = tmp_a[i];
            rt_values_y_(i, q) = tmp_b[i];
        }
        rt_basis_.eval_div(x, y, tmp_a.data());
        for (int i = 0; i < nrt; ++i) rt_divs_(i, q) = tmp_a[i];
    }

    // weighted reference Gram blocks shared by all RT mass matrices
    const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(quad.weights.data(), nq);
    const Eigen::MatrixXd mxx = rt_values_x_ * w.asDiagonal() * rt_values_x_.transpose();
    const Eigen::MatrixXd mxy = rt_values_x_ * w.asDiagonal() * rt_values_y_.transpose();
    const Eigen::MatrixXd myy = rt_values_y_ * w.asDiagonal() * rt_values_y_.transpose();
    const Eigen::MatrixXd dhat = rt_divs_ * w.asDiagonal() * cell_values_.transpose(); // nrt x nc

    geometry_.resize(nt);
    recon_.resize(nt);
    rt_chol_.resize(nt);
    quad_points_.resize(nt);

    const auto& equad = *edge_quad_;
    const int neq = static_cast<int>(equad.size());
    Eigen::MatrixXd edge_vals(nf, neq);
    std::vector<double> ev(nf);
    for (int q = 0; q < neq; ++q) {
        edge_basis_.eval(equad.points[q], ev.data());
        for (int i = 0; i < nf; ++i) edge_vals(i, q) = ev[i];
    }

    std::vector<double> rtx(nrt), rty(nrt);
    for (int t = 0; t < nt; ++t) {
        geometry_[t] = m.geometry(t);
        const TriGeometry& geo = geometry_[t];

        quad_points_[t].resize(2, nq);
        for (int q = 0; q < nq; ++q)
            quad_points_[t].col(q) = geo.map(quad.barycentric[q][1], quad.barycentric[q][2]);

        const Eigen::Matrix2d s = geo.J.transpose() * geo.J / (2.0 * geo.detJ);
        Eigen::MatrixXd mass = s(0, 0) * mxx + s(0, 1) * (mxy + mxy.transpose()) + s(1, 1) * myy;
        rt_chol_[t].compute(mass);
        if (rt_chol_[t].info() != Eigen::Success)
            throw std::runtime_error("HHOSpace: RT mass matrix not SPD on triangle " +
                                     std::to_string(t));

        Eigen::MatrixXd b = Eigen::MatrixXd::Zero(nrt, n_local_dofs());
        // cell block: -(v_T, div tau)_T
        b.leftCols(nc) = -(CellBasis::physical_scale(geo.area) / 2.0) * dhat;
        // side blocks: (v_F, tau . nu_T)_F
        const Triangle& tri = m.triangles()[t];
        for (int ls = 0; ls < 3; ++ls) {
            const Side& side = m.sides()[tri.sides[ls]];
            const Vec2& a = m.vertices()[side.vertices[0]];
            const Vec2& bb = m.vertices()[side.vertices[1]];
            const Vec2 nu = m.normal_sign(t, ls) * side.normal;
            Eigen::MatrixXd eblk = Eigen::MatrixXd::Zero(nrt, nf);
            for (int q = 0; q < neq; ++q) {
                const Vec2 x = a + equad.points[q] * (bb - a);
                const Vec2 xhat = geo.unmap(x);
                rt_basis_.eval(xhat.x(), xhat.y(), rtx.data(), rty.data());
                for (int j = 0; j < nrt; ++j) {
                    const Vec2 tau = geo.J * Vec2(rtx[j], rty[j]) / geo.detJ;
                    const double tn = tau.dot(nu) * equad.weights[q];
                    for (int i = 0; i < nf; ++i) eblk(j, i) += tn * edge_vals(i, q);
                }
            }
            b.middleCols(nc + ls * nf, nf) = std::sqrt(side.h) * eblk;
        }
        recon_[t] = rt_chol_[t].solve(b);
    }
}

void HHOSpace::gather_local(const HHOFunction& v, int t, Eigen::VectorXd& local) const {
    const int nc = n_cell_dofs();
    const int nf = n_side_dofs();
    local.resize(n_local_dofs());
    local.head(nc) = v.coeffs.segment(cell_offset(t), nc);
    const Triangle& tri = mesh_->triangles()[t];
    for (int ls = 0; ls < 3; ++ls) {
        const int side = tri.sides[ls];
        const int ii = mesh_->interior_index(side);
        if (ii >= 0)
            local.segment(nc + ls * nf, nf) = v.coeffs.segment(side_offset(ii), nf);
        else
            local.segment(nc + ls * nf, nf) = v.boundary.col(mesh_->boundary_index(side));
    }
}

Eigen::Index HHOSpace::side_dof_offset(int t, int ls) const {
    const int side = mesh_->triangles()[t].sides[ls];
    const int ii = mesh_->interior_index(side);
    return ii >= 0 ? side_offset(ii) : -1;
}

HHOFunction interpolate(const HHOSpace& space, const std::function<double(const Vec2&)>& v,
                        int quad_degree) {
    const Mesh& m = space.mesh();
    HHOFunction out(space);
    const TriangleQuadrature& tq =
        quad_degree < 0 ? space.cell_quad() : triangle_quadrature(quad_degree);
    const EdgeQuadrature& eq =
        quad_degree < 0 ? space.edge_quad() : edge_quadrature(std::min(quad_degree, 60));
    for (int t = 0; t < m.n_triangles(); ++t) {
        out.coeffs.segment(space.cell_offset(t), space.n_cell_dofs()) =
            l2_project_cell(space.geometry(t), space.cell_basis(), tq, v);
    }
    for (int s = 0; s < m.n_sides(); ++s) {
        const Side& side = m.sides()[s];
        const Vec2& a = m.vertices()[side.vertices[0]];
        const Vec2& b = m.vertices()[side.vertices[1]];
        const Eigen::VectorXd coeffs = l2_project_edge(a, b, space.edge_basis(), eq, v);
        const int ii = m.interior_index(s);
        if (ii >= 0)
            out.coeffs.segment(space.side_offset(ii), space.n_side_dofs()) = coeffs;
        else
            out.boundary.col(m.boundary_index(s)) = coeffs;
    }
    return out;
}

void attach_dirichlet(const HHOSpace& space, const std::function<double(const Vec2&)>& u_d,
                      HHOFunction& v) {
    const Mesh& m = space.mesh();
    if (v.boundary.cols() != m.n_boundary_sides() || v.boundary.rows() != space.n_side_dofs())
        v.boundary = Eigen::MatrixXd::Zero(space.n_side_dofs(), m.n_boundary_sides());
    for (int bs = 0; bs < m.n_boundary_sides(); ++bs) {
        const Side& side = m.sides()[m.boundary_side(bs)];
        const Vec2& a = m.vertices()[side.vertices[0]];
        const Vec2& b = m.vertices()[side.vertices[1]];
        v.boundary.col(bs) = l2_project_edge(a, b, space.edge_basis(), space.edge_quad(), u_d);
    }
}

GradientField reconstruct_gradient(const HHOSpace& space, const HHOFunction& v) {
    const int nt = space.mesh().n_triangles();
    GradientField field;
    field.coeffs.resize(space.n_rt(), nt);
    Eigen::VectorXd local;
    for (int t = 0; t < nt; ++t) {
        space.gather_local(v, t, local);
        field.coeffs.col(t) = space.recon(t) * local;
    }
    return field;
}

RTField project_rt_field(const HHOSpace& space, const std::function<Vec2(const Vec2&)>& field,
                         int quad_degree) {
    const Mesh& m = space.mesh();
    const TriangleQuadrature& quad =
        quad_degree < 0 ? space.cell_quad() : triangle_quadrature(quad_degree);
    RTField out;
    out.coeffs.resize(space.n_rt(), m.n_triangles());
    for (int t = 0; t < m.n_triangles(); ++t)
        out.coeffs.col(t) = l2_project_rt(space.geometry(t), space.rt_basis(), quad, field);
    return out;
}

double discrete_norm(const HHOSpace& space, const HHOFunction& v, double p) {
    const Mesh& m = space.mesh();
    const int nc = space.n_cell_dofs();
    const int nf = space.n_side_dofs();
    const auto& quad = space.cell_quad();
    const auto& equad = space.edge_quad();
    double total = 0;
    Eigen::VectorXd local;
    std::vector<double> ev(nf);
    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        space.gather_local(v, t, local);
        // || grad v_T ||_{L^p(T)}^p
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const double x = quad.barycentric[q][1], y = quad.barycentric[q][2];
            const Vec2 grad = eval_cell_grad(geo, space.cell_basis(), local.head(nc), x, y);
            total += std::pow(grad.norm(), p) * quad.weights[q] * geo.area;
        }
        // sum over the three sides of h_F^{1-p} || v_F - v_T ||_{L^p(F)}^p
        const Triangle& tri = m.triangles()[t];
        for (int ls = 0; ls < 3; ++ls) {
            const Side& side = m.sides()[tri.sides[ls]];
            const Vec2& a = m.vertices()[side.vertices[0]];
            const Vec2& b = m.vertices()[side.vertices[1]];
            const double hf = side.h;
            double side_term = 0;
            for (std::size_t q = 0; q < equad.size(); ++q) {
                const double s = equad.points[q];
                const Vec2 x = a + s * (b - a);
                const Vec2 xhat = geo.unmap(x);
                const double vt = eval_cell(geo, space.cell_basis(), local.head(nc), xhat.x(), xhat.y());
                space.edge_basis().eval(s, ev.data());
                double vf = 0;
                for (int i = 0; i < nf; ++i) vf += local[nc + ls * nf + i] * ev[i];
                vf *= EdgeBasis::physical_scale(hf);
                side_term += std::pow(std::abs(vf - vt), p) * equad.weights[q] * hf;
            }
            total += std::pow(hf, 1.0 - p) * side_term;
        }
    }
    return std::pow(total, 1.0 / p);
}

double eval_cell_part(const HHOSpace& space, const HHOFunction& v, int t, double xhat,
                      double yhat) {
    const Eigen::VectorXd coeffs = v.coeffs.segment(space.cell_offset(t), space.n_cell_dofs());
    return eval_cell(space.geometry(t), space.cell_basis(), coeffs, xhat, yhat);
}

Vec2 eval_rt_field(const HHOSpace& space, const RTField& field, int t, double xhat, double yhat) {
    return eval_rt(space.geometry(t), space.rt_basis(), field.coeffs.col(t), xhat, yhat);
}

double eval_rt_field_div(const HHOSpace& space, const RTField& field, int t, double xhat,
                         double yhat) {
    return eval_rt_div(space.geometry(t), space.rt_basis(), field.coeffs.col(t), xhat, yhat);
}

double rt_field_lq_norm(const HHOSpace& space, const RTField& field, double q) {
    const auto& quad = space.cell_quad();
    double total = 0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const Eigen::VectorXd shat_x = space.rt_values_x().transpose() * field.coeffs.col(t);
        const Eigen::VectorXd shat_y = space.rt_values_y().transpose() * field.coeffs.col(t);
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const Vec2 val = geo.J * Vec2(shat_x[iq], shat_y[iq]) / geo.detJ;
            total += std::pow(val.norm(), q) * quad.weights[iq] * geo.area;
        }
    }
    return std::pow(total, 1.0 / q);
}

double rt_field_error_lq(const HHOSpace& space, const RTField& field,
                         const std::function<Vec2(const Vec2&)>& exact, double q,
                         int quad_degree) {
    const TriangleQuadrature& quad =
        quad_degree < 0 ? space.cell_quad() : triangle_quadrature(quad_degree);
    double total = 0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const double x = quad.barycentric[iq][1], y = quad.barycentric[iq][2];
            const Vec2 val = eval_rt(geo, space.rt_basis(), field.coeffs.col(t), x, y);
            const Vec2 diff = val - exact(geo.map(x, y));
            total += std::pow(diff.norm(), q) * quad.weights[iq] * geo.area;
        }
    }
    return std::pow(total, 1.0 / q);
}

} // namespace hhomin
