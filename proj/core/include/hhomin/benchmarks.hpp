#pragma once

#include "hhomin/density.hpp"
#include "hhomin/mesh.hpp"
#include "hhomin/solver.hpp"

#include <cmath>
#include <functional>
#include <string>
#include <vector>

namespace hhomin {

/// Complete specification of one benchmark run.
struct BenchmarkConfig {
    std::string id;
    DensityPtr density;
    std::function<double(const Vec2&)> load;      // f
    double quad_weight = 0;                       // alpha of the quadratic term
    std::function<double(const Vec2&)> quad_target; // g
    std::function<double(const Vec2&)> dirichlet; // u_D (empty = homogeneous)
    Mesh initial_mesh;

    int k = 0;
    double theta = 1.0; // bulk parameter; 1 = uniform refinement
    long max_ndof = 30000;
    double poincare = 1.0;
    /// true: the oscillation inside RHS uses the weight h^k instead of h
    /// (smooth-solution variant of the square p-Laplace benchmark).
    bool rhs_osc_uses_k = false;

    std::function<double(const Vec2&)> exact_u;
    std::function<Vec2(const Vec2&)> exact_grad;
    std::function<Vec2(const Vec2&)> exact_stress;
    double reference_energy = std::numeric_limits<double>::quiet_NaN();

    SolverConfig solver;

    /// Quadrature exactness degree p(k+1) used for all nonlinear integrands.
    int quad_degree() const {
        return static_cast<int>(std::lround(std::ceil(density->params().p * (k + 1))));
    }
};

/// The five built-in benchmarks:
///   plaplace-square  4-Laplace, manufactured polynomial solution on (0,1)^2
///   plaplace-lshape  4-Laplace, f = 1 on the L-shaped domain
///   odp-square       optimal design problem on (0,1)^2
///   odp-lshape       optimal design problem on the L-shaped domain
///   twowell          relaxed two-well problem with Dirichlet data on (0,1)x(0,3/2)
BenchmarkConfig make_benchmark(const std::string& id);
std::vector<std::string> benchmark_ids();

/// Counts of triangles with volume fraction 0, strictly between 0 and 1, and 1
/// (material distribution of the optimal design problem).
struct FractionCounts {
    int zero = 0;
    int transition = 0;
    int one = 0;
};

class HHOSpace;
struct RTField;
FractionCounts volume_fraction_counts(const HHOSpace& space, const RTField& ru,
                                      const OptimalDesignDensity& density);

} // namespace hhomin
