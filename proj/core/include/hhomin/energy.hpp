#pragma once

#include "hhomin/density.hpp"
#include "hhomin/space.hpp"

#include <Eigen/Sparse>

#include <functional>

namespace hhomin {

/// Data of one minimization problem E_h(v) = int W(R v) - int f v_T
/// [+ alpha || g - v_T ||_L2^2 when quad_weight > 0, two-well benchmark].
struct Problem {
    DensityPtr density;
    std::function<double(const Vec2&)> load; // f
    double quad_weight = 0.0;                // alpha
    std::function<double(const Vec2&)> quad_target; // g (required if alpha > 0)
};

/// Discrete energy E_h(v), evaluated with the space's cell quadrature.
double discrete_energy(const HHOSpace& space, const Problem& problem, const HHOFunction& v);

/// Gateaux derivative of E_h at v with respect to the free coefficients.
/// A zero return vector characterizes a discrete minimizer.
Eigen::VectorXd energy_gradient(const HHOSpace& space, const Problem& problem,
                                const HHOFunction& v);

/// Piecewise second derivative of E_h at v (quasi-Newton model); positive
/// semidefinite since W is convex.
Eigen::SparseMatrix<double> energy_hessian(const HHOSpace& space, const Problem& problem,
                                           const HHOFunction& v);

/// Evaluates E_h, the gradient, or both in one sweep over the mesh.
struct EnergyEval {
    double energy = 0;
    Eigen::VectorXd gradient;
};
EnergyEval energy_and_gradient(const HHOSpace& space, const Problem& problem,
                               const HHOFunction& v);

} // namespace hhomin
