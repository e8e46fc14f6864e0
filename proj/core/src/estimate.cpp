#include "hhomin/estimate.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <stdexcept>

namespace hhomin {

StressField discrete_stress(const HHOSpace& space, const Density& density,
                            const GradientField& ru) {
    const Mesh& m = space.mesh();
    const auto& quad = space.cell_quad();
    const int nq = static_cast<int>(quad.size());
    StressField sigma;
    sigma.coeffs.resize(space.n_rt(), m.n_triangles());
    Eigen::VectorXd mhat(space.n_rt()), shx(nq), shy(nq);
    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        shx.noalias() = space.rt_values_x().transpose() * ru.coeffs.col(t);
        shy.noalias() = space.rt_values_y().transpose() * ru.coeffs.col(t);
        mhat.setZero();
        for (int q = 0; q < nq; ++q) {
            const Vec2 rv = geo.J * Vec2(shx[q], shy[q]) / geo.detJ;
            const Vec2 dw_ref =
                geo.J.transpose() * density.dw(rv) * (quad.weights[q] * geo.area / geo.detJ);
            mhat.noalias() += dw_ref.x() * space.rt_values_x().col(q) +
                              dw_ref.y() * space.rt_values_y().col(q);
        }
        sigma.coeffs.col(t) = space.rt_mass_chol(t).solve(mhat);
    }
    return sigma;
}

double dual_energy(const HHOSpace& space, const Density& density, const StressField& sigma) {
    const auto& quad = space.cell_quad();
    const int nq = static_cast<int>(quad.size());
    double total = 0;
    Eigen::VectorXd shx(nq), shy(nq);
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        shx.noalias() = space.rt_values_x().transpose() * sigma.coeffs.col(t);
        shy.noalias() = space.rt_values_y().transpose() * sigma.coeffs.col(t);
        for (int q = 0; q < nq; ++q) {
            const Vec2 val = geo.J * Vec2(shx[q], shy[q]) / geo.detJ;
            total += density.conjugate(val) * quad.weights[q] * geo.area;
        }
    }
    return -total;
}

double dual_energy_dirichlet(const HHOSpace& space, const Problem& problem,
                             const std::function<double(const Vec2&)>& u_d,
                             const StressField& sigma) {
    if (!(problem.quad_weight > 0) || !problem.quad_target || !u_d)
        throw std::invalid_argument("dual_energy_dirichlet: requires quad term and Dirichlet data");
    const Mesh& m = space.mesh();
    const Density& density = *problem.density;
    const auto& quad = space.cell_quad();
    const int nq = static_cast<int>(quad.size());

    double volume = 0;   // int (W*(sigma) + g (div sigma + Pi^k f))
    double div_sq = 0;   // || div sigma + Pi^k f ||_L2^2
    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const Eigen::VectorXd pf =
            l2_project_cell(geo, space.cell_basis(), quad, problem.load);
        for (int q = 0; q < nq; ++q) {
            const double x = quad.barycentric[q][1], y = quad.barycentric[q][2];
            const double wq = quad.weights[q] * geo.area;
            const Vec2 val = eval_rt(geo, space.rt_basis(), sigma.coeffs.col(t), x, y);
            const double div_res =
                eval_rt_div(geo, space.rt_basis(), sigma.coeffs.col(t), x, y) +
                eval_cell(geo, space.cell_basis(), pf, x, y);
            const Vec2 xp = space.quad_points(t).col(q);
            volume += wq * (density.conjugate(val) + problem.quad_target(xp) * div_res);
            div_sq += wq * div_res * div_res;
        }
    }

    double bnd = 0; // int_bnd u_D (sigma . nu)
    const auto& equad = space.edge_quad();
    for (int bs = 0; bs < m.n_boundary_sides(); ++bs) {
        const int s = m.boundary_side(bs);
        const Side& side = m.sides()[s];
        const int t = side.t_plus;
        const TriGeometry& geo = space.geometry(t);
        const Vec2& a = m.vertices()[side.vertices[0]];
        const Vec2& b = m.vertices()[side.vertices[1]];
        for (std::size_t q = 0; q < equad.size(); ++q) {
            const Vec2 x = a + equad.points[q] * (b - a);
            const Vec2 xhat = geo.unmap(x);
            const Vec2 val = eval_rt(geo, space.rt_basis(), sigma.coeffs.col(t), xhat.x(), xhat.y());
            bnd += u_d(x) * val.dot(side.normal) * equad.weights[q] * side.h;
        }
    }

    return -volume + bnd - div_sq / (4.0 * problem.quad_weight);
}

double oscillation(const HHOSpace& space, const std::function<double(const Vec2&)>& f, double q,
                   double weight_exponent) {
    const Mesh& m = space.mesh();
    const auto& quad = space.cell_quad();
    double total = 0;
    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const Eigen::VectorXd pf = l2_project_cell(geo, space.cell_basis(), quad, f);
        double cell = 0;
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const double x = quad.barycentric[iq][1], y = quad.barycentric[iq][2];
            const double res =
                f(space.quad_points(t).col(iq)) - eval_cell(geo, space.cell_basis(), pf, x, y);
            cell += std::pow(std::abs(res), q) * quad.weights[iq] * geo.area;
        }
        total += std::pow(geo.diam, weight_exponent * q) * cell;
    }
    return std::pow(total, 1.0 / q);
}

double lq_norm(const HHOSpace& space, const std::function<double(const Vec2&)>& f, double q,
               int quad_degree) {
    const TriangleQuadrature& quad =
        quad_degree < 0 ? space.cell_quad() : triangle_quadrature(quad_degree);
    double total = 0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const Vec2 x = geo.map(quad.barycentric[iq][1], quad.barycentric[iq][2]);
            total += std::pow(std::abs(f(x)), q) * quad.weights[iq] * geo.area;
        }
    }
    return std::pow(total, 1.0 / q);
}

double leb_constant_c10(const DensityParams& params, double load_norm_pconj, double domain_area,
                        double energy_at_zero, double poincare) {
    const double c1 = params.c1, c4 = params.c4, p = params.p;
    const double lin = poincare * load_norm_pconj;
    const double offset = c4 * domain_area + energy_at_zero;
    auto g = [&](double x) { return c1 * std::pow(x, p) - lin * x - offset; };
    if (g(0.0) > 0) return 0.0; // offset < 0 cannot occur for valid densities
    double hi = 1.0;
    while (g(hi) <= 0) {
        hi *= 2.0;
        if (hi > 1e100) throw std::runtime_error("leb_constant_c10: root bracket failed");
    }
    double lo = hi / 2.0 < 1.0 ? 0.0 : hi / 2.0;
    if (g(lo) > 0) lo = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) <= 0 ? lo : hi) = mid;
        if (hi - lo <= 1e-15 * hi) break;
    }
    return 0.5 * (lo + hi);
}

ConformingPost postprocess_conforming(const HHOSpace& space, const GradientField& ru, double p,
                                      const std::function<double(const Vec2&)>* dirichlet) {
    const Mesh& m = space.mesh();
    auto lspace = std::make_shared<LagrangeSpace>(space.mesh_ptr(), space.k() + 1);
    const int nloc = lspace->nodes_per_cell();
    const int n = lspace->n_nodes();
    const auto& quad = space.cell_quad();
    const int nq = static_cast<int>(quad.size());

    // reference gradient tables
    Eigen::MatrixXd gx(nloc, nq), gy(nloc, nq);
    {
        std::vector<double> tx(nloc), ty(nloc);
        for (int q = 0; q < nq; ++q) {
            lspace->eval_grad(quad.barycentric[q][1], quad.barycentric[q][2], tx.data(), ty.data());
            for (int i = 0; i < nloc; ++i) {
                gx(i, q) = tx[i];
                gy(i, q) = ty[i];
            }
        }
    }

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(m.n_triangles()) * nloc * nloc);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd local(nloc, nloc);
    Eigen::VectorXd local_rhs(nloc);

    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const double weight = std::pow(geo.area, (2.0 - p) / p);
        local.setZero();
        local_rhs.setZero();
        const Eigen::VectorXd shx = space.rt_values_x().transpose() * ru.coeffs.col(t);
        const Eigen::VectorXd shy = space.rt_values_y().transpose() * ru.coeffs.col(t);
        for (int q = 0; q < nq; ++q) {
            const double wq = quad.weights[q] * geo.area * weight;
            const Vec2 rv = geo.J * Vec2(shx[q], shy[q]) / geo.detJ;
            for (int i = 0; i < nloc; ++i) {
                const Vec2 gi = geo.Jinv.transpose() * Vec2(gx(i, q), gy(i, q));
                local_rhs[i] += wq * rv.dot(gi);
                for (int j = i; j < nloc; ++j) {
                    const Vec2 gj = geo.Jinv.transpose() * Vec2(gx(j, q), gy(j, q));
                    local(i, j) += wq * gi.dot(gj);
                }
            }
        }
        for (int i = 0; i < nloc; ++i) {
            rhs[lspace->node(t, i)] += local_rhs[i];
            for (int j = i; j < nloc; ++j) {
                triplets.emplace_back(lspace->node(t, i), lspace->node(t, j), local(i, j));
                if (j > i) triplets.emplace_back(lspace->node(t, j), lspace->node(t, i), local(i, j));
            }
        }
    }

    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(triplets.begin(), triplets.end());

    // boundary values: zero or the nodal interpolation of the Dirichlet data
    Eigen::VectorXd bc = Eigen::VectorXd::Zero(n);
    if (dirichlet && *dirichlet)
        for (int i = 0; i < n; ++i)
            if (lspace->node_on_boundary(i)) bc[i] = (*dirichlet)(lspace->node_coord(i));
    rhs -= a * bc;
    for (int i = 0; i < n; ++i)
        if (lspace->node_on_boundary(i)) rhs[i] = bc[i];
    // zero constrained rows/columns, unit diagonal
    for (int c = 0; c < a.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(a, c); it; ++it) {
            const bool bi = lspace->node_on_boundary(it.row());
            const bool bj = lspace->node_on_boundary(it.col());
            if (bi || bj) it.valueRef() = (it.row() == it.col()) ? 1.0 : 0.0;
        }

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    if (ldlt.info() != Eigen::Success)
        throw std::runtime_error("postprocess_conforming: factorization failed");
    ConformingPost post;
    post.space = lspace;
    post.values = ldlt.solve(rhs);
    return post;
}

double postprocess_distance_lp(const HHOSpace& space, const GradientField& ru,
                               const ConformingPost& post, double p) {
    const auto& quad = space.cell_quad();
    double total = 0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        for (std::size_t q = 0; q < quad.size(); ++q) {
            const double x = quad.barycentric[q][1], y = quad.barycentric[q][2];
            const Vec2 rv = eval_rt(geo, space.rt_basis(), ru.coeffs.col(t), x, y);
            const Vec2 gv = lagrange_grad(*post.space, post.values, t, x, y);
            total += std::pow((rv - gv).norm(), p) * quad.weights[q] * geo.area;
        }
    }
    return std::pow(total, 1.0 / p);
}

StressChecks stress_checks(const HHOSpace& space, const StressField& sigma,
                           const Problem& problem, const HHOFunction& u, double q) {
    const Mesh& m = space.mesh();
    const auto& quad = space.cell_quad();
    const bool quad_term = problem.quad_weight > 0 && problem.quad_target;
    StressChecks out;
    double eq_total = 0, norm_total = 0;
    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const Eigen::VectorXd pf = l2_project_cell(geo, space.cell_basis(), quad, problem.load);
        const Eigen::VectorXd pg =
            quad_term ? l2_project_cell(geo, space.cell_basis(), quad, problem.quad_target)
                      : Eigen::VectorXd();
        const Eigen::VectorXd uc = u.coeffs.segment(space.cell_offset(t), space.n_cell_dofs());
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const double x = quad.barycentric[iq][1], y = quad.barycentric[iq][2];
            const double wq = quad.weights[iq] * geo.area;
            double res = eval_rt_div(geo, space.rt_basis(), sigma.coeffs.col(t), x, y) +
                         eval_cell(geo, space.cell_basis(), pf, x, y);
            if (quad_term)
                res -= 2.0 * problem.quad_weight *
                       (eval_cell(geo, space.cell_basis(), uc, x, y) -
                        eval_cell(geo, space.cell_basis(), pg, x, y));
            eq_total += std::pow(std::abs(res), q) * wq;
            norm_total +=
                std::pow(eval_rt(geo, space.rt_basis(), sigma.coeffs.col(t), x, y).norm(), q) * wq;
        }
    }
    out.equilibrium_lq = std::pow(eq_total, 1.0 / q);
    out.sigma_norm = std::pow(norm_total, 1.0 / q);

    const auto& equad = space.edge_quad();
    for (int is = 0; is < m.n_interior_sides(); ++is) {
        const Side& side = m.sides()[m.interior_side(is)];
        const TriGeometry& gp = space.geometry(side.t_plus);
        const TriGeometry& gm = space.geometry(side.t_minus);
        const Vec2& a = m.vertices()[side.vertices[0]];
        const Vec2& b = m.vertices()[side.vertices[1]];
        double jump_sq = 0;
        for (std::size_t iq = 0; iq < equad.size(); ++iq) {
            const Vec2 x = a + equad.points[iq] * (b - a);
            const Vec2 xp = gp.unmap(x), xm = gm.unmap(x);
            const Vec2 sp = eval_rt(gp, space.rt_basis(), sigma.coeffs.col(side.t_plus), xp.x(), xp.y());
            const Vec2 sm = eval_rt(gm, space.rt_basis(), sigma.coeffs.col(side.t_minus), xm.x(), xm.y());
            const double jump = (sp - sm).dot(side.normal);
            jump_sq += jump * jump * equad.weights[iq] * side.h;
        }
        out.max_normal_jump = std::max(out.max_normal_jump, std::sqrt(jump_sq));
    }
    return out;
}

Eigen::VectorXd refinement_indicators(const HHOSpace& space, const Density& density,
                                      const GradientField& ru, const StressField& sigma,
                                      const std::function<double(const Vec2&)>& f,
                                      const ConformingPost& post) {
    const Mesh& m = space.mesh();
    const auto& quad = space.cell_quad();
    const double p = density.params().p;
    const double pc = density.params().p_conj;
    Eigen::VectorXd eta(m.n_triangles());
    for (int t = 0; t < m.n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const Eigen::VectorXd pf = l2_project_cell(geo, space.cell_basis(), quad, f);
        double noncon = 0, osc = 0, postd = 0;
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const double x = quad.barycentric[iq][1], y = quad.barycentric[iq][2];
            const double wq = quad.weights[iq] * geo.area;
            const Vec2 rv = eval_rt(geo, space.rt_basis(), ru.coeffs.col(t), x, y);
            const Vec2 sv = eval_rt(geo, space.rt_basis(), sigma.coeffs.col(t), x, y);
            noncon += std::pow((sv - density.dw(rv)).norm(), pc) * wq;
            const double res = f(geo.map(x, y)) - eval_cell(geo, space.cell_basis(), pf, x, y);
            osc += std::pow(std::abs(res), pc) * wq;
            const Vec2 gv = lagrange_grad(*post.space, post.values, t, x, y);
            postd += (rv - gv).squaredNorm() * wq;
        }
        eta[t] = noncon + std::pow(geo.area, pc / 2.0) * osc +
                 std::pow(geo.area, (2.0 - p) / p) * postd;
    }
    return eta;
}

BoundReport estimate_level(const HHOSpace& space, const Problem& problem,
                           const EstimateOptions& opt, const HHOFunction& u,
                           const GradientField& ru, const StressField& sigma) {
    const Density& density = *problem.density;
    const double p = density.params().p;
    const double pc = density.params().p_conj;

    BoundReport rep;
    rep.energy_h = discrete_energy(space, problem, u);
    rep.dual = opt.dirichlet ? dual_energy_dirichlet(space, problem, opt.dirichlet, sigma)
                             : dual_energy(space, density, sigma);
    rep.gap = rep.energy_h - rep.dual;

    rep.osc = oscillation(space, problem.load, pc, 1.0);
    rep.rhs_osc = opt.rhs_osc_exponent == 1.0
                      ? rep.osc
                      : oscillation(space, problem.load, pc, opt.rhs_osc_exponent);

    // E(0) of the continuous energy (the quadratic term contributes alpha ||g||^2)
    double e0 = 0;
    {
        const Vec2 zero = Vec2::Zero();
        e0 = density.w(zero) * space.mesh().total_area();
        if (problem.quad_weight > 0) {
            const double gn = lq_norm(space, problem.quad_target, 2.0);
            e0 += problem.quad_weight * gn * gn;
        }
    }
    const double fnorm = lq_norm(space, problem.load, pc);
    rep.c12 =
        opt.poincare * leb_constant_c10(density.params(), fnorm, space.mesh().total_area(), e0,
                                        opt.poincare);
    rep.leb = rep.dual - rep.c12 * rep.osc;

    const ConformingPost post =
        postprocess_conforming(space, ru, p, opt.dirichlet ? &opt.dirichlet : nullptr);
    rep.post_term = std::pow(postprocess_distance_lp(space, ru, post, p), 2.0);
    rep.rhs = rep.gap + rep.rhs_osc + rep.post_term;
    if (problem.quad_weight > 0 && problem.quad_target)
        rep.rhs += oscillation(space, problem.quad_target, 2.0, 1.0);

    const StressChecks checks = stress_checks(space, sigma, problem, u, pc);
    rep.equilibrium = checks.equilibrium_lq;
    rep.max_jump = checks.max_normal_jump;
    rep.sigma_norm = checks.sigma_norm;

    rep.eta = refinement_indicators(space, density, ru, sigma, problem.load, post);
    return rep;
}

double l2_error_cells(const HHOSpace& space, const HHOFunction& u,
                      const std::function<double(const Vec2&)>& exact, int quad_degree) {
    const TriangleQuadrature& quad =
        quad_degree < 0 ? space.cell_quad() : triangle_quadrature(quad_degree);
    double total = 0;
    for (int t = 0; t < space.mesh().n_triangles(); ++t) {
        const TriGeometry& geo = space.geometry(t);
        const Eigen::VectorXd uc = u.coeffs.segment(space.cell_offset(t), space.n_cell_dofs());
        for (std::size_t iq = 0; iq < quad.size(); ++iq) {
            const double x = quad.barycentric[iq][1], y = quad.barycentric[iq][2];
            const double diff =
                exact(geo.map(x, y)) - eval_cell(geo, space.cell_basis(), uc, x, y);
            total += diff * diff * quad.weights[iq] * geo.area;
        }
    }
    return std::sqrt(total);
}

} // namespace hhomin
