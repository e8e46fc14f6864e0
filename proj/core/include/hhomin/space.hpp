#pragma once

#include "hhomin/basis.hpp"
#include "hhomin/mesh.hpp"
#include "hhomin/quadrature.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>

namespace hhomin {

class HHOSpace;

/// HHO unknown: cell polynomials of degree k and interior-side polynomials of
/// degree k, stored as one coefficient vector (cells first, then interior
/// sides). Boundary sides carry no unknowns; their coefficients live in the
/// `boundary` block (zero for homogeneous Dirichlet, projections of the data
/// otherwise) and are treated as constants by all operators.
struct HHOFunction {
    Eigen::VectorXd coeffs;
    Eigen::MatrixXd boundary; // n_side_dofs x n_boundary_sides

    HHOFunction() = default;
    explicit HHOFunction(const HHOSpace& space);
};

/// Piecewise Raviart-Thomas field: one coefficient column per triangle in the
/// Piola-mapped orthonormal reference basis.
struct RTField {
    Eigen::MatrixXd coeffs; // n_rt x n_triangles
};
using GradientField = RTField;
using StressField = RTField;

/// HHO ansatz space V_h = P_k(T) x P_k(F(Omega)) with the piecewise
/// Raviart-Thomas gradient space Sigma = RT_k^pw. Construction precomputes,
/// per triangle, the factored RT mass matrix and the local gradient
/// reconstruction operator; both are reused by every energy/gradient/stress
/// evaluation on this mesh. Immutable and safe to share across threads.
class HHOSpace {
public:
    /// quad_degree: exactness degree of the cell rule used for all nonlinear
    /// integrands (the paper's setting is p(k+1)); clamped to at least
    /// 2(k+1) so that RT mass matrices and polynomial identities are exact.
    HHOSpace(std::shared_ptr<const Mesh> mesh, int k, int quad_degree);

    const Mesh& mesh() const { return *mesh_; }
    std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
    int k() const { return k_; }

    int n_cell_dofs() const { return cell_basis_.dim(); }
    int n_side_dofs() const { return edge_basis_.dim(); }
    int n_rt() const { return rt_basis_.dim(); }
    int n_local_dofs() const { return n_cell_dofs() + 3 * n_side_dofs(); }
    Eigen::Index ndof() const { return ndof_; }

    Eigen::Index cell_offset(int t) const { return static_cast<Eigen::Index>(t) * n_cell_dofs(); }
    Eigen::Index side_offset(int interior_side) const {
        return cells_total_ + static_cast<Eigen::Index>(interior_side) * n_side_dofs();
    }

    const CellBasis& cell_basis() const { return cell_basis_; }
    const EdgeBasis& edge_basis() const { return edge_basis_; }
    const RTBasis& rt_basis() const { return rt_basis_; }
    const TriangleQuadrature& cell_quad() const { return *cell_quad_; }
    const EdgeQuadrature& edge_quad() const { return *edge_quad_; }

    const TriGeometry& geometry(int t) const { return geometry_[t]; }

    /// Local gradient reconstruction: RT coefficients = recon(t) * local dofs,
    /// local layout [cell | side0 | side1 | side2] (sides in Triangle::sides
    /// order, boundary sides included as data columns).
    const Eigen::MatrixXd& recon(int t) const { return recon_[t]; }
    const Eigen::LLT<Eigen::MatrixXd>& rt_mass_chol(int t) const { return rt_chol_[t]; }

    /// Reference-basis tables at the cell quadrature points.
    const Eigen::MatrixXd& cell_values() const { return cell_values_; }   // nc x nq
    const Eigen::MatrixXd& rt_values_x() const { return rt_values_x_; }   // nrt x nq
    const Eigen::MatrixXd& rt_values_y() const { return rt_values_y_; }
    const Eigen::MatrixXd& rt_divs() const { return rt_divs_; }           // nrt x nq

    /// Gathers the local coefficient vector of v on triangle t.
    void gather_local(const HHOFunction& v, int t, Eigen::VectorXd& local) const;

    /// Global dof offset of local side block ls on triangle t, or -1 if the
    /// side is on the boundary.
    Eigen::Index side_dof_offset(int t, int ls) const;

    /// Physical quadrature points of triangle t (2 x nq, cached).
    const Eigen::Matrix2Xd& quad_points(int t) const { return quad_points_[t]; }

private:
    std::shared_ptr<const Mesh> mesh_;
    int k_;
    CellBasis cell_basis_;
    EdgeBasis edge_basis_;
    RTBasis rt_basis_;
    const TriangleQuadrature* cell_quad_;
    const EdgeQuadrature* edge_quad_;
    Eigen::Index cells_total_ = 0;
    Eigen::Index ndof_ = 0;

    std::vector<TriGeometry> geometry_;
    std::vector<Eigen::MatrixXd> recon_;
    std::vector<Eigen::LLT<Eigen::MatrixXd>> rt_chol_;
    std::vector<Eigen::Matrix2Xd> quad_points_;

    Eigen::MatrixXd cell_values_, cell_grads_x_, cell_grads_y_;
    Eigen::MatrixXd rt_values_x_, rt_values_y_, rt_divs_;
};

/// Interpolation I v = (Pi_T^k v, Pi_F^k v); boundary sides are projected into
/// the boundary-data block, so R(I v) = Pi_Sigma(grad v) holds for any smooth
/// v, not only for functions with zero trace.
HHOFunction interpolate(const HHOSpace& space, const std::function<double(const Vec2&)>& v,
                        int quad_degree = -1);

/// Projects Dirichlet data onto the boundary blocks of v (frees untouched).
void attach_dirichlet(const HHOSpace& space, const std::function<double(const Vec2&)>& u_d,
                      HHOFunction& v);

/// Gradient reconstruction R v_h, cellwise in RT_k(T; R^2).
GradientField reconstruct_gradient(const HHOSpace& space, const HHOFunction& v);

/// Cellwise L2 projection of a vector field onto RT_k (the operator
/// Pi_Sigma), with the space's cell quadrature unless quad_degree is given.
RTField project_rt_field(const HHOSpace& space, const std::function<Vec2(const Vec2&)>& field,
                         int quad_degree = -1);

/// Discrete norm || v ||_h (sum over T of ||grad v_T||^p + sum_F h_F^{1-p}
/// ||v_F - v_T||^p,, all to the power 1/p).
double discrete_norm(const HHOSpace& space, const HHOFunction& v, double p);

/// Evaluates the cell part v_T at a reference point of triangle t.
double eval_cell_part(const HHOSpace& space, const HHOFunction& v, int t, double xhat, double yhat);

/// Evaluates an RT field at a reference point of triangle t.
Vec2 eval_rt_field(const HHOSpace& space, const RTField& field, int t, double xhat, double yhat);

/// Divergence of an RT field at a reference point of triangle t.
double eval_rt_field_div(const HHOSpace& space, const RTField& field, int t, double xhat,
                         double yhat);

/// L^q(Omega) norm of an RT field computed with the space's cell rule.
double rt_field_lq_norm(const HHOSpace& space, const RTField& field, double q);

/// L^q norm of the difference between an RT field and an exact vector field.
double rt_field_error_lq(const HHOSpace& space, const RTField& field,
                         const std::function<Vec2(const Vec2&)>& exact, double q,
                         int quad_degree = -1);

} // namespace hhomin
