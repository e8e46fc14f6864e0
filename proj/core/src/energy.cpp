#include "hhomin/energy.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hhomin {

namespace {

// One sweep over the mesh computing any combination of energy, gradient, and
// Hessian triplets. Element contributions are accumulated in triangle order,
// so results are bit-reproducible for identical inputs.
struct Assembler {
    const HHOSpace& space;
    const Problem& problem;
    const HHOFunction& v;
    bool want_gradient = false;
    bool want_hessian = false;

    double energy = 0;
    Eigen::VectorXd gradient;
    std::vector<Eigen::Triplet<double>> triplets;

    void run() {
        const Mesh& m = space.mesh();
        const Density& density = *problem.density;
        const auto& quad = space.cell_quad();
        const int nq = static_cast<int>(quad.size());
        const int nc = space.n_cell_dofs();
        const int nf = space.n_side_dofs();
        const int nrt = space.n_rt();
        const int nloc = space.n_local_dofs();
        const bool quad_term = problem.quad_weight > 0;
        if (quad_term && !problem.quad_target)
            throw std::invalid_argument("energy: quad_weight > 0 requires quad_target");

        if (want_gradient) gradient = Eigen::VectorXd::Zero(space.ndof());
        if (want_hessian) triplets.reserve(static_cast<std::size_t>(m.n_triangles()) * nloc * nloc);

        Eigen::VectorXd local(nloc), mhat(nrt), local_grad(nloc), shx(nq), shy(nq);
        Eigen::MatrixXd khat(nrt, nrt), ht(nloc, nloc);

        for (int t = 0; t < m.n_triangles(); ++t) {
            const TriGeometry& geo = space.geometry(t);
            space.gather_local(v, t, local);
            const Eigen::VectorXd c_r = space.recon(t) * local;
            shx.noalias() = space.rt_values_x().transpose() * c_r;
            shy.noalias() = space.rt_values_y().transpose() * c_r;

            mhat.setZero();
            if (want_hessian) khat.setZero();
            const double cell_scale = CellBasis::physical_scale(geo.area);

            for (int q = 0; q < nq; ++q) {
                const double wq = quad.weights[q] * geo.area;
                const Vec2 rv = geo.J * Vec2(shx[q], shy[q]) / geo.detJ;
                const Vec2 x = space.quad_points(t).col(q);

                energy += wq * density.w(rv);
                double vt = 0;
                if (problem.load || quad_term)
                    vt = cell_scale * space.cell_values().col(q).dot(local.head(nc));
                if (problem.load) {
                    const double fx = problem.load(x);
                    energy -= wq * fx * vt;
                    if (want_gradient)
                        gradient.segment(space.cell_offset(t), nc) -=
                            (wq * fx * cell_scale) * space.cell_values().col(q);
                }
                if (quad_term) {
                    const double diff = problem.quad_target(x) - vt;
                    energy += problem.quad_weight * wq * diff * diff;
                    if (want_gradient)
                        gradient.segment(space.cell_offset(t), nc) -=
                            (2.0 * problem.quad_weight * wq * diff * cell_scale) *
                            space.cell_values().col(q);
                }

                if (want_gradient || want_hessian) {
                    const Vec2 dw = density.dw(rv);
                    const Vec2 dw_ref = geo.J.transpose() * dw * (wq / geo.detJ);
                    mhat.noalias() += dw_ref.x() * space.rt_values_x().col(q) +
                                      dw_ref.y() * space.rt_values_y().col(q);
                    if (want_hessian) {
                        const Mat2 s =
                            geo.J.transpose() * density.d2w(rv) * geo.J * (wq / (geo.detJ * geo.detJ));
                        // khat += P S P^T with P = [rtx_q, rty_q]
                        const auto px = space.rt_values_x().col(q);
                        const auto py = space.rt_values_y().col(q);
                        const Eigen::VectorXd ax = s(0, 0) * px + s(0, 1) * py;
                        const Eigen::VectorXd ay = s(1, 0) * px + s(1, 1) * py;
                        khat.noalias() += px * ax.transpose() + py * ay.transpose();
                    }
                }
            }

            if (want_gradient || want_hessian) {
                if (want_gradient) {
                    local_grad.noalias() = space.recon(t).transpose() * mhat;
                    scatter_gradient(t, local_grad);
                }
                if (want_hessian) {
                    ht.noalias() = space.recon(t).transpose() * khat * space.recon(t);
                    if (quad_term)
                        for (int i = 0; i < nc; ++i)
                            ht(i, i) += 2.0 * problem.quad_weight; // orthonormal cell mass
                    scatter_hessian(t, ht);
                }
            }
            (void)nf;
        }
    }

    void scatter_gradient(int t, const Eigen::VectorXd& local_grad) {
        const int nc = space.n_cell_dofs();
        const int nf = space.n_side_dofs();
        gradient.segment(space.cell_offset(t), nc) += local_grad.head(nc);
        for (int ls = 0; ls < 3; ++ls) {
            const Eigen::Index off = space.side_dof_offset(t, ls);
            if (off >= 0) gradient.segment(off, nf) += local_grad.segment(nc + ls * nf, nf);
        }
    }

    void scatter_hessian(int t, const Eigen::MatrixXd& ht) {
        const int nc = space.n_cell_dofs();
        const int nf = space.n_side_dofs();
        std::array<Eigen::Index, 4> offs{space.cell_offset(t), -1, -1, -1};
        for (int ls = 0; ls < 3; ++ls) offs[1 + ls] = space.side_dof_offset(t, ls);
        auto block_size = [&](int b) { return b == 0 ? nc : nf; };
        auto block_start = [&](int b) { return b == 0 ? 0 : nc + (b - 1) * nf; };
        for (int bi = 0; bi < 4; ++bi) {
            if (offs[bi] < 0) continue;
            for (int bj = 0; bj < 4; ++bj) {
                if (offs[bj] < 0) continue;
                for (int i = 0; i < block_size(bi); ++i)
                    for (int j = 0; j < block_size(bj); ++j)
                        triplets.emplace_back(static_cast<int>(offs[bi]) + i,
                                              static_cast<int>(offs[bj]) + j,
                                              ht(block_start(bi) + i, block_start(bj) + j));
            }
        }
    }
};

} // namespace

double discrete_energy(const HHOSpace& space, const Problem& problem, const HHOFunction& v) {
    Assembler a{space, problem, v};
    a.run();
    return a.energy;
}

Eigen::VectorXd energy_gradient(const HHOSpace& space, const Problem& problem,
                                const HHOFunction& v) {
    Assembler a{space, problem, v};
    a.want_gradient = true;
    a.run();
    return std::move(a.gradient);
}

EnergyEval energy_and_gradient(const HHOSpace& space, const Problem& problem,
                               const HHOFunction& v) {
    Assembler a{space, problem, v};
    a.want_gradient = true;
    a.run();
    return {a.energy, std::move(a.gradient)};
}

Eigen::SparseMatrix<double> energy_hessian(const HHOSpace& space, const Problem& problem,
                                           const HHOFunction& v) {
    Assembler a{space, problem, v};
    a.want_hessian = true;
    a.run();
    Eigen::SparseMatrix<double> h(space.ndof(), space.ndof());
    h.setFromTriplets(a.triplets.begin(), a.triplets.end());
    return h;
}

} // namespace hhomin
