#pragma once

#include <Eigen/Dense>

#include <limits>
#include <memory>

namespace hhomin {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Growth and convexity-control parameters of an energy density:
///   c1 |A|^p - c4  <=  W(A)  <=  c2 |A|^p + c5,
///   |DW(A) - DW(B)|^r <= c3 (1 + |A|^s + |B|^s) (W(B) - W(A) - DW(A).(B-A)).
struct DensityParams {
    double p = 2;
    double p_conj = 2; // p' = p/(p-1)
    double r = 2;
    double s = 0;
    double t = 1; // 1 + s/p
    double c1 = 0.5, c2 = 0.5, c3 = 2.0, c4 = 0.0, c5 = 0.0;
};

/// Convex energy density W in C^1(R^2) with derivative, piecewise second
/// derivative, and convex conjugate. All evaluations are pure and reentrant.
class Density {
public:
    virtual ~Density() = default;

    const DensityParams& params() const { return params_; }

    virtual double w(const Vec2& a) const = 0;
    virtual Vec2 dw(const Vec2& a) const = 0;
    /// Piecewise second derivative; at points where W is C^1 but not C^2 the
    /// one-sided limit is returned. Used only as a quasi-Newton model.
    virtual Mat2 d2w(const Vec2& a) const = 0;
    /// Convex conjugate W*(g) = sup_A (g.A - W(A)).
    virtual double conjugate(const Vec2& g) const = 0;

    /// Distance from a to the nearest point where W fails to be C^2
    /// (infinity for globally smooth densities); lets tests keep finite
    /// differences away from second-derivative jumps.
    virtual double c2_interface_distance(const Vec2&) const {
        return std::numeric_limits<double>::infinity();
    }

protected:
    DensityParams params_;
};

using DensityPtr = std::shared_ptr<const Density>;

/// W(a) = |a|^p / p with DW(a) = |a|^(p-2) a, DW(0) = 0, W*(g) = |g|^p' / p'.
DensityPtr plaplace(double p);

/// Optimal-design density W(a) = psi(|a|) with the three-branch psi; requires
/// 0 < xi1 < xi2, 0 < mu1 < mu2, and xi1 mu2 = xi2 mu1 (checked to 1e-12).
DensityPtr optimal_design(double mu1, double mu2, double xi1, double xi2);

class OptimalDesignDensity;

/// Convex envelope of |F-F1|^2 |F-F2|^2 for distinct wells F1, F2:
///   W(F) = max{0, |F-B|^2 - |A|^2}^2 + 4 (|A|^2 |F-B|^2 - (A.(F-B))^2),
/// A = (F2-F1)/2, B = (F1+F2)/2. The conjugate is evaluated numerically.
DensityPtr two_well(const Vec2& f1, const Vec2& f2);

/// Result of the numeric evaluation of W*(g).
struct ConjugateResult {
    double value = 0;
    bool converged = false;
    int iterations = 0;
};

/// Computes W*(g) = sup_A (g.A - W(A)) by damped Newton with multi-start and
/// Armijo backtracking (gradient-norm stop 1e-12, cap 200 iterations).
ConjugateResult conjugate_numeric(const Density& density, const Vec2& g, double tol,
                                  const std::vector<Vec2>& starts);

/// Volume fraction of the stiff material in the optimal design problem:
/// 0 below xi1, linear ramp on [xi1, xi2], 1 above xi2.
double volume_fraction(double xi1, double xi2, double xi);

/// Concrete optimal-design density, exposed for the volume-fraction map.
class OptimalDesignDensity : public Density {
public:
    OptimalDesignDensity(double mu1, double mu2, double xi1, double xi2);

    double w(const Vec2& a) const override;
    Vec2 dw(const Vec2& a) const override;
    Mat2 d2w(const Vec2& a) const override;
    double conjugate(const Vec2& g) const override;
    double c2_interface_distance(const Vec2& a) const override;

    double volume_fraction(double xi) const { return hhomin::volume_fraction(xi1_, xi2_, xi); }
    double xi1() const { return xi1_; }
    double xi2() const { return xi2_; }

private:
    double mu1_, mu2_, xi1_, xi2_;
};

} // namespace hhomin
