#pragma once

#include "hhomin/mesh.hpp"

#include <Eigen/Dense>

#include <memory>
#include <vector>

namespace hhomin {

/// Continuous Lagrange finite element space S^d(T) = P_d(T) cap C(Omega) on a
/// triangulation, with the uniform lattice nodes (vertices, d-1 nodes per
/// side, interior nodes). Used for the conforming postprocessing v_C.
class LagrangeSpace {
public:
    LagrangeSpace(std::shared_ptr<const Mesh> mesh, int degree);

    const Mesh& mesh() const { return *mesh_; }
    int degree() const { return degree_; }
    int n_nodes() const { return n_nodes_; }
    int nodes_per_cell() const { return static_cast<int>(ref_nodes_.size()); }

    int node(int t, int local) const { return element_nodes_[t][local]; }
    const Vec2& node_coord(int n) const { return node_coords_[n]; }
    bool node_on_boundary(int n) const { return boundary_node_[n]; }

    /// Reference shape function values at (x,y) (nodes_per_cell of them).
    void eval(double x, double y, double* values) const;
    /// Reference gradients; physical gradient = Jinv^T * ghat.
    void eval_grad(double x, double y, double* gx, double* gy) const;

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_;
    int n_nodes_ = 0;
    std::vector<Vec2> ref_nodes_;
    Eigen::MatrixXd coeff_; // shape functions over monomials
    std::vector<std::array<int, 2>> mono_;
    std::vector<std::vector<int>> element_nodes_;
    std::vector<Vec2> node_coords_;
    std::vector<bool> boundary_node_;
};

/// Gradient of a nodal Lagrange function at a reference point of triangle t.
Vec2 lagrange_grad(const LagrangeSpace& ls, const Eigen::VectorXd& nodal, int t, double xhat,
                   double yhat);

} // namespace hhomin
