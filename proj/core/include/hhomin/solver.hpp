#pragma once

#include "hhomin/energy.hpp"

#include <utility>

namespace hhomin {

struct SolverConfig {
    double grad_tol = 1e-12;   // infinity norm of the energy gradient
    double step_tol = 1e-14;   // relative step size
    double energy_tol = 1e-14; // relative energy decrease
    int max_iterations = 10000;
    double armijo_c = 1e-4;
    int max_backtracks = 40;
};

struct SolveReport {
    int iterations = 0;
    double grad_norm = 0;
    double energy = 0;
    bool converged = false; // implies grad_norm <= grad_tol
};

/// Minimizes the convex discrete energy by a regularized (trust-region style)
/// Newton method: the piecewise second derivative serves as the model, a
/// Levenberg shift lambda*I handles the degenerate (semidefinite) regions,
/// and Armijo backtracking guarantees monotone energy decrease. Deterministic:
/// identical inputs produce bit-identical iterates.
std::pair<HHOFunction, SolveReport> minimize(const HHOSpace& space, const Problem& problem,
                                             const HHOFunction& init, const SolverConfig& config);

/// The all-ones start value: v_T = 1 on every cell and v_F = 1 on every
/// interior side; boundary blocks stay zero.
HHOFunction initial_guess(const HHOSpace& space);

/// Prolongation from a coarse HHO function to the refinement: cellwise L2
/// projection of the parent cell polynomial, edgewise L2 projection of the
/// parent side polynomial on sub-sides of old sides, and the trace
/// Pi_F^k(v_T) of the parent cell polynomial on sides cut through old cells.
HHOFunction prolongate(const HHOSpace& coarse, const HHOFunction& u, const HHOSpace& fine,
                       const std::vector<int>& parent);

} // namespace hhomin
