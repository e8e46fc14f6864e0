#include "hhomin/solver.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace hhomin {

namespace {
// set HHOMIN_SOLVER_TRACE=1 to log one line per Newton iteration to stderr
bool trace_enabled() {
    static const bool on = std::getenv("HHOMIN_SOLVER_TRACE") != nullptr;
    return on;
}
} // namespace

std::pair<HHOFunction, SolveReport> minimize(const HHOSpace& space, const Problem& problem,
                                             const HHOFunction& init, const SolverConfig& config) {
    HHOFunction v = init;
    if (v.coeffs.size() != space.ndof())
        throw std::invalid_argument("minimize: initial value does not conform to the space");

    EnergyEval cur = energy_and_gradient(space, problem, v);
    SolveReport report;
    report.energy = cur.energy;
    report.grad_norm = cur.gradient.lpNorm<Eigen::Infinity>();

    Eigen::SparseMatrix<double> identity(space.ndof(), space.ndof());
    identity.setIdentity();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    double lambda = 0.0;
    bool pattern_ready = false;
    double best_grad = report.grad_norm;
    int stagnant = 0;

    for (int iter = 0; iter < config.max_iterations; ++iter) {
        if (report.grad_norm <= config.grad_tol) {
            report.converged = true;
            break;
        }
        const Eigen::SparseMatrix<double> hess = energy_hessian(space, problem, v);
        const double scale = std::max(1e-8, hess.coeffs().cwiseAbs().maxCoeff());
        // roundoff slack: energy decreases below machine resolution of E_h
        // are accepted so Newton can drive the gradient to the tolerance
        const double slack = 16.0 * std::numeric_limits<double>::epsilon() *
                             (1.0 + std::abs(cur.energy));

        bool accepted = false;
        Eigen::VectorXd step;
        double step_len = 0, new_energy = 0;

        // Newton direction with increasing Levenberg shift, then steepest
        // descent as the last resort.
        for (int attempt = 0; attempt < 28 && !accepted; ++attempt) {
            Eigen::VectorXd dir;
            if (attempt < 24) {
                const Eigen::SparseMatrix<double> reg =
                    lambda > 0 ? Eigen::SparseMatrix<double>(hess + lambda * identity) : hess;
                if (!pattern_ready) {
                    ldlt.analyzePattern(reg);
                    pattern_ready = true;
                }
                ldlt.factorize(reg);
                if (ldlt.info() != Eigen::Success) {
                    lambda = std::max(1e-8 * scale, 10.0 * lambda);
                    continue;
                }
                dir = ldlt.solve(-cur.gradient);
                if (!dir.allFinite() || cur.gradient.dot(dir) >= 0) {
                    lambda = std::max(1e-8 * scale, 10.0 * lambda);
                    continue;
                }
            } else {
                dir = -cur.gradient / scale;
            }

            const double slope = cur.gradient.dot(dir);
            double t = 1.0;
            for (int bt = 0; bt < config.max_backtracks; ++bt) {
                HHOFunction trial = v;
                trial.coeffs += t * dir;
                const double et = discrete_energy(space, problem, trial);
                if (std::isfinite(et) && et <= cur.energy + config.armijo_c * t * slope + slack) {
                    step = t * dir;
                    step_len = step.norm();
                    new_energy = et;
                    v = std::move(trial);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if (!accepted) lambda = std::max(1e-8 * scale, 10.0 * lambda);
        }

        if (trace_enabled())
            std::fprintf(stderr, "  it %4d  E % .12e  |g| %.3e  lambda %.1e  step %.3e%s\n", iter,
                         cur.energy, report.grad_norm, lambda, step_len,
                         accepted ? "" : "  STALL");
        if (!accepted) break; // stagnation: report best iterate with flag false

        lambda *= 0.25;
        if (lambda < 1e-14 * scale) lambda = 0.0;

        const double decrease = cur.energy - new_energy;
        cur = energy_and_gradient(space, problem, v);
        report.iterations = iter + 1;
        report.energy = cur.energy;
        report.grad_norm = cur.gradient.lpNorm<Eigen::Infinity>();

        if (report.grad_norm <= config.grad_tol) {
            report.converged = true;
            break;
        }
        const bool tiny_step = step_len <= config.step_tol * (1.0 + v.coeffs.norm());
        const bool tiny_decrease = decrease <= config.energy_tol * (1.0 + std::abs(cur.energy));
        if (tiny_step && tiny_decrease) break;
        // numerical floor: the gradient no longer improves and the energy is
        // stationary to machine precision
        if (report.grad_norm <= 0.7 * best_grad) {
            best_grad = report.grad_norm;
            stagnant = 0;
        } else if (decrease <= slack) {
            if (++stagnant >= 10) break;
        } else {
            stagnant = 0;
        }
    }

    return {std::move(v), report};
}

HHOFunction initial_guess(const HHOSpace& space) {
    HHOFunction v(space);
    const Mesh& m = space.mesh();
    auto one = [](const Vec2&) { return 1.0; };
    for (int t = 0; t < m.n_triangles(); ++t)
        v.coeffs.segment(space.cell_offset(t), space.n_cell_dofs()) =
            l2_project_cell(space.geometry(t), space.cell_basis(), space.cell_quad(), one);
    for (int is = 0; is < m.n_interior_sides(); ++is) {
        const Side& side = m.sides()[m.interior_side(is)];
        v.coeffs.segment(space.side_offset(is), space.n_side_dofs()) =
            l2_project_edge(m.vertices()[side.vertices[0]], m.vertices()[side.vertices[1]],
                            space.edge_basis(), space.edge_quad(), one);
    }
    return v;
}

namespace {

// True if both endpoints of the fine side lie on the segment of the coarse side.
bool side_contained(const Mesh& fine, const Side& fs, const Mesh& coarse, const Side& cs) {
    const Vec2& a = coarse.vertices()[cs.vertices[0]];
    const Vec2& b = coarse.vertices()[cs.vertices[1]];
    const Vec2 d = b - a;
    const double len2 = d.squaredNorm();
    for (int e = 0; e < 2; ++e) {
        const Vec2 r = fine.vertices()[fs.vertices[e]] - a;
        const double cross = d.x() * r.y() - d.y() * r.x();
        if (std::abs(cross) > 1e-10 * len2) return false;
        const double s = r.dot(d) / len2;
        if (s < -1e-10 || s > 1.0 + 1e-10) return false;
    }
    return true;
}

} // namespace

HHOFunction prolongate(const HHOSpace& coarse, const HHOFunction& u, const HHOSpace& fine,
                       const std::vector<int>& parent) {
    const Mesh& cm = coarse.mesh();
    const Mesh& fm = fine.mesh();
    if (coarse.k() != fine.k())
        throw std::invalid_argument("prolongate: polynomial degrees differ");
    if (static_cast<int>(parent.size()) != fm.n_triangles())
        throw std::invalid_argument("prolongate: parent map size mismatch");

    HHOFunction out(fine);
    const int nc = fine.n_cell_dofs();
    const int nf = fine.n_side_dofs();

    // cell blocks: L2 projection of the parent polynomial onto each child
    for (int t = 0; t < fm.n_triangles(); ++t) {
        const int p = parent[t];
        if (p < 0 || p >= cm.n_triangles())
            throw std::invalid_argument("prolongate: parent index out of range");
        const TriGeometry& pgeo = coarse.geometry(p);
        const Eigen::VectorXd pc = u.coeffs.segment(coarse.cell_offset(p), nc);
        // sanity: the child must sit inside its parent
        {
            const Vec2 xhat = pgeo.unmap(fine.quad_points(t).col(0));
            if (xhat.x() < -1e-9 || xhat.y() < -1e-9 || xhat.x() + xhat.y() > 1.0 + 1e-9)
                throw std::invalid_argument("prolongate: fine mesh is not a refinement of the coarse mesh");
        }
        auto parent_poly = [&](const Vec2& x) {
            const Vec2 xhat = pgeo.unmap(x);
            return eval_cell(pgeo, coarse.cell_basis(), pc, xhat.x(), xhat.y());
        };
        out.coeffs.segment(fine.cell_offset(t), nc) =
            l2_project_cell(fine.geometry(t), fine.cell_basis(), fine.cell_quad(), parent_poly);
    }

    // side blocks
    for (int s = 0; s < fm.n_sides(); ++s) {
        const Side& fs = fm.sides()[s];
        const int t1 = fs.t_plus;
        const int t2 = fs.t_minus;
        const int p1 = parent[t1];
        const int p2 = t2 >= 0 ? parent[t2] : -1;

        const Vec2& fa = fm.vertices()[fs.vertices[0]];
        const Vec2& fb = fm.vertices()[fs.vertices[1]];

        Eigen::VectorXd coeffs(nf);
        if (t2 >= 0 && p1 == p2) {
            // new side cut through the old triangle: Pi_F^k of the parent cell polynomial
            const TriGeometry& pgeo = coarse.geometry(p1);
            const Eigen::VectorXd pc = u.coeffs.segment(coarse.cell_offset(p1), nc);
            auto trace = [&](const Vec2& x) {
                const Vec2 xhat = pgeo.unmap(x);
                return eval_cell(pgeo, coarse.cell_basis(), pc, xhat.x(), xhat.y());
            };
            coeffs = l2_project_edge(fa, fb, fine.edge_basis(), fine.edge_quad(), trace);
        } else {
            // sub-side of an old side: locate it on the parent triangle
            int old_side = -1;
            if (t2 >= 0) {
                for (int i : cm.triangles()[p1].sides)
                    for (int j : cm.triangles()[p2].sides)
                        if (i == j) old_side = i;
            } else {
                for (int i : cm.triangles()[p1].sides)
                    if (cm.sides()[i].is_boundary() && side_contained(fm, fs, cm, cm.sides()[i]))
                        old_side = i;
            }
            if (old_side < 0)
                throw std::invalid_argument("prolongate: cannot locate parent side");
            const Side& cs = cm.sides()[old_side];
            const Vec2& ca = cm.vertices()[cs.vertices[0]];
            const Vec2& cb = cm.vertices()[cs.vertices[1]];
            const double len2 = (cb - ca).squaredNorm();
            Eigen::VectorXd source(nf);
            const int cii = cm.interior_index(old_side);
            if (cii >= 0)
                source = u.coeffs.segment(coarse.side_offset(cii), nf);
            else
                source = u.boundary.col(cm.boundary_index(old_side));
            auto parent_side_poly = [&](const Vec2& x) {
                const double sp = (x - ca).dot(cb - ca) / len2;
                return eval_edge(cs.h, coarse.edge_basis(), source, sp);
            };
            coeffs = l2_project_edge(fa, fb, fine.edge_basis(), fine.edge_quad(), parent_side_poly);
        }

        const int ii = fm.interior_index(s);
        if (ii >= 0)
            out.coeffs.segment(fine.side_offset(ii), nf) = coeffs;
        else
            out.boundary.col(fm.boundary_index(s)) = coeffs;
    }
    return out;
}

} // namespace hhomin
