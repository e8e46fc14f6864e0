#pragma once

#include <array>
#include <vector>

namespace hhomin {

/// Quadrature rule on the reference triangle conv{(0,0),(1,0),(0,1)}.
///
/// Points are stored in barycentric coordinates and the weights are
/// normalized to sum to one, so an integral over a physical triangle T reads
///   \int_T f dx  ~=~ |T| * sum_q w_q f(x_q).
/// All weights are positive and all points lie strictly inside the triangle,
/// which keeps pointwise inequalities (Fenchel-Young, W >= 0, ...) intact
/// under numerical integration.
struct TriangleQuadrature {
    std::vector<std::array<double, 3>> barycentric;
    std::vector<double> weights; // sum = 1
    int degree = 0;              // exact for total polynomial degree <= degree

    std::size_t size() const { return weights.size(); }
};

/// Gauss rule on the reference edge [0,1]; \int_F f ds ~= h_F * sum_q w_q f(s_q).
struct EdgeQuadrature {
    std::vector<double> points;  // in (0,1)
    std::vector<double> weights; // sum = 1
    int degree = 0;

    std::size_t size() const { return weights.size(); }
};

constexpr int kMaxTriangleQuadDegree = 20;

/// Conical-product rule (Gauss-Jacobi x Gauss-Legendre) exact for
/// polynomials of total degree <= degree. Throws for degree outside [0, 20].
const TriangleQuadrature& triangle_quadrature(int degree);

/// Gauss-Legendre rule on [0,1] exact for degree <= degree (degree <= 60).
const EdgeQuadrature& edge_quadrature(int degree);

/// Gauss-Legendre nodes/weights on [0,1] with sum(w) = 1.
void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights);

/// Exact integral of x^a y^b over the reference triangle: a! b! / (a+b+2)!.
double reference_monomial_integral(int a, int b);

} // namespace hhomin
