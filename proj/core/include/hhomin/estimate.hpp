#pragma once

#include "hhomin/energy.hpp"
#include "hhomin/lagrange.hpp"

#include <functional>
#include <memory>

namespace hhomin {

/// Discrete stress sigma_h = Pi_Sigma DW(R u_h) (cellwise RT L2 projection,
/// evaluated with the shared cell quadrature). The projection of any converged
/// minimizer is H(div)-conforming and in equilibrium with the projected load.
StressField discrete_stress(const HHOSpace& space, const Density& density,
                            const GradientField& ru);

/// Dual energy E*(sigma) = -int W*(sigma) dx.
double dual_energy(const HHOSpace& space, const Density& density, const StressField& sigma);

/// Discrete dual energy of the Dirichlet/two-well setting:
/// -int (W*(tau) + g (div tau + Pi^k f)) + int_bnd u_D (tau.nu)
/// - 1/(4 alpha) || div tau + Pi^k f ||_L2^2.
double dual_energy_dirichlet(const HHOSpace& space, const Problem& problem,
                             const std::function<double(const Vec2&)>& u_d,
                             const StressField& sigma);

/// Data oscillation || h_T^w (1 - Pi_T^k) f ||_{L^q(Omega)} (w = 1 is the
/// standard oscillation; the smooth-benchmark variant uses w = k).
double oscillation(const HHOSpace& space, const std::function<double(const Vec2&)>& f, double q,
                   double weight_exponent = 1.0);

/// L^q(Omega) norm of a scalar field by cellwise quadrature.
double lq_norm(const HHOSpace& space, const std::function<double(const Vec2&)>& f, double q,
               int quad_degree = -1);

/// Positive root c10 of  c1 x^p - CP ||f||_{p'} x - c4 |Omega| - E(0)  in x > 0,
/// by safeguarded Newton/bisection. The bound constant is c12 = CP * c10.
double leb_constant_c10(const DensityParams& params, double load_norm_pconj, double domain_area,
                        double energy_at_zero, double poincare);

/// Conforming postprocess v_C in S^{k+1}(T): minimizer of
/// sum_T |T|^{(2-p)/p} || R u_h - grad w_C ||_L2(T)^2 with zero (or Dirichlet)
/// boundary values; the weights mimic the L^p norm.
struct ConformingPost {
    std::shared_ptr<LagrangeSpace> space;
    Eigen::VectorXd values;
};
ConformingPost postprocess_conforming(const HHOSpace& space, const GradientField& ru, double p,
                                      const std::function<double(const Vec2&)>* dirichlet = nullptr);

/// || R u_h - grad v_C ||_{L^p(Omega)}.
double postprocess_distance_lp(const HHOSpace& space, const GradientField& ru,
                               const ConformingPost& post, double p);

/// Equilibrium and normal-continuity diagnostics of the discrete stress. The
/// equilibrium residual is div sigma_h + Pi^k f for the plain energy; the
/// quadratic term shifts the cell Euler-Lagrange equations, so with
/// quad_weight alpha > 0 the residual becomes
/// div sigma_h + Pi^k f - 2 alpha (u_T - Pi^k g).
struct StressChecks {
    double equilibrium_lq = 0;  // L^{p'} norm of the equilibrium residual
    double max_normal_jump = 0; // max over interior sides of || [sigma_h.nu] ||_{L2(F)}
    double sigma_norm = 0;      // || sigma_h ||_{L^{p'}}
};
StressChecks stress_checks(const HHOSpace& space, const StressField& sigma,
                           const Problem& problem, const HHOFunction& u, double q);

/// Per-triangle refinement indicators:
/// eta(T) = ||sigma_h - DW(R u_h)||^{p'}_{p',T} + |T|^{p'/2} ||(1-Pi^k) f||^{p'}_{p',T}
///        + |T|^{(2-p)/p} || R u_h - grad v_C ||^2_{2,T}.
Eigen::VectorXd refinement_indicators(const HHOSpace& space, const Density& density,
                                      const GradientField& ru, const StressField& sigma,
                                      const std::function<double(const Vec2&)>& f,
                                      const ConformingPost& post);

struct EstimateOptions {
    double poincare = 1.0;        // Poincare constant C_P used in c12
    double rhs_osc_exponent = 1.0; // h^w weight of the oscillation inside RHS
    std::function<double(const Vec2&)> dirichlet; // u_D; switches to E_d* when set
};

/// Everything the adaptive loop records on one level.
struct BoundReport {
    double energy_h = 0; // E_h(u_h)
    double dual = 0;     // E*(sigma_h), or E_d* in the Dirichlet case
    double gap = 0;      // energy_h - dual (discrete duality gap)
    double osc = 0;      // standard osc_k(f)
    double c12 = 0;
    double leb = 0;      // dual - c12 * osc
    double rhs_osc = 0;  // oscillation variant used inside RHS
    double post_term = 0; // || R u_h - grad v_C ||^2_{L^p}
    double rhs = 0;      // gap + rhs_osc + post_term (+ g-oscillation if configured)
    double equilibrium = 0;
    double max_jump = 0;
    double sigma_norm = 0;
    Eigen::VectorXd eta;
};

BoundReport estimate_level(const HHOSpace& space, const Problem& problem,
                           const EstimateOptions& opt, const HHOFunction& u,
                           const GradientField& ru, const StressField& sigma);

/// || u_exact - u_T ||_{L2(Omega)} over the cell polynomials.
double l2_error_cells(const HHOSpace& space, const HHOFunction& u,
                      const std::function<double(const Vec2&)>& exact, int quad_degree = -1);

} // namespace hhomin
