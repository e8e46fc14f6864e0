#pragma once

#include "hhomin/mesh.hpp"
#include "hhomin/quadrature.hpp"

#include <Eigen/Dense>

#include <vector>

namespace hhomin {

/// Scalar polynomial basis of P_l on the reference triangle, L2-orthonormal
/// there. The physical basis on a triangle T is phi_i(x) = phihat_i(xhat) /
/// sqrt(2|T|), which is L2(T)-orthonormal for any affine T, so local mass
/// matrices are exactly the identity and L2 projections reduce to moments.
class CellBasis {
public:
    explicit CellBasis(int degree);

    int degree() const { return degree_; }
    int dim() const { return static_cast<int>(coeff_.rows()); }

    /// Values of all reference basis functions at (x,y).
    void eval(double x, double y, double* values) const;
    /// Reference gradients; physical gradients are Jinv^T * ghat / sqrt(2|T|).
    void eval_grad(double x, double y, double* gx, double* gy) const;

    static double physical_scale(double area) { return 1.0 / std::sqrt(2.0 * area); }

private:
    int degree_;
    std::vector<std::array<int, 2>> mono_; // Legendre-product dictionary exponents
    Eigen::MatrixXd coeff_;                // rows are orthonormal combinations
};

/// Orthonormal basis of P_k on the reference interval [0,1] (shifted
/// Legendre). The physical basis on a side F with the canonical arc-length
/// parametrization is psi_i(s) = psihat_i(s) / sqrt(h_F), orthonormal in L2(F).
class EdgeBasis {
public:
    explicit EdgeBasis(int degree) : degree_(degree) {}

    int degree() const { return degree_; }
    int dim() const { return degree_ + 1; }

    void eval(double s, double* values) const;

    static double physical_scale(double h) { return 1.0 / std::sqrt(h); }

private:
    int degree_;
};

/// Vector-valued Raviart-Thomas basis RT_k = P_k(T;R^2) + x Ptilde_k(T) on the
/// reference triangle, L2-orthonormalized there. Physical functions are
/// obtained by the Piola transform tau(x) = J tauhat(xhat) / det J, which
/// preserves the RT structure, maps divergences as div tau = divhat tauhat /
/// det J, and keeps normal traces in P_k of each edge.
class RTBasis {
public:
    explicit RTBasis(int degree);

    int degree() const { return degree_; }
    int dim() const { return (degree_ + 1) * (degree_ + 3); }

    /// Reference values (two components per basis function).
    void eval(double x, double y, double* vx, double* vy) const;
    /// Reference divergences.
    void eval_div(double x, double y, double* dv) const;

private:
    void eval_span(double x, double y, double* vx, double* vy, double* dv) const;

    int degree_;
    std::vector<std::array<int, 2>> mono_; // Legendre-product dictionary of P_k
    Eigen::MatrixXd coeff_;
};

/// Coefficients of the L2(T) projection of f onto P_l(T) in the orthonormal
/// physical cell basis, using the given quadrature.
template <class F>
Eigen::VectorXd l2_project_cell(const TriGeometry& geo, const CellBasis& basis,
                                const TriangleQuadrature& quad, F&& f) {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.dim());
    std::vector<double> values(basis.dim());
    const double scale = CellBasis::physical_scale(geo.area);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const auto& b = quad.barycentric[q];
        const Vec2 x = geo.map(b[1], b[2]);
        basis.eval(b[1], b[2], values.data());
        const double fw = f(x) * quad.weights[q] * geo.area * scale;
        for (int i = 0; i < basis.dim(); ++i) coeffs[i] += fw * values[i];
    }
    return coeffs;
}

/// Value of a cell polynomial (orthonormal coefficients) at barycentric (x,y).
double eval_cell(const TriGeometry& geo, const CellBasis& basis,
                 const Eigen::VectorXd& coeffs, double xhat, double yhat);

/// Physical gradient of a cell polynomial at reference point (xhat,yhat).
Vec2 eval_cell_grad(const TriGeometry& geo, const CellBasis& basis,
                    const Eigen::VectorXd& coeffs, double xhat, double yhat);

/// Projection onto P_k(F) for a side parametrized canonically from the lower
/// to the higher global vertex index.
template <class F>
Eigen::VectorXd l2_project_edge(const Vec2& a, const Vec2& b, const EdgeBasis& basis,
                                const EdgeQuadrature& quad, F&& f) {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(basis.dim());
    std::vector<double> values(basis.dim());
    const double h = (b - a).norm();
    const double scale = EdgeBasis::physical_scale(h);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double s = quad.points[q];
        const Vec2 x = a + s * (b - a);
        basis.eval(s, values.data());
        const double fw = f(x) * quad.weights[q] * h * scale;
        for (int i = 0; i < basis.dim(); ++i) coeffs[i] += fw * values[i];
    }
    return coeffs;
}

double eval_edge(double h, const EdgeBasis& basis, const Eigen::VectorXd& coeffs, double s);

/// Cellwise L2(T) projection onto RT_k(T;R^2): returns coefficients in the
/// Piola-mapped reference basis. The local RT mass matrix (SPD) is assembled
/// with an exact rule and factored internally; for repeated use prefer the
/// cached operators in HHOSpace.
template <class F>
Eigen::VectorXd l2_project_rt(const TriGeometry& geo, const RTBasis& basis,
                              const TriangleQuadrature& quad, F&& f) {
    const int n = basis.dim();
    Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    std::vector<double> vx(n), vy(n);
    const TriangleQuadrature& mq = triangle_quadrature(2 * (basis.degree() + 1));
    // mass with the exact rule
    for (std::size_t q = 0; q < mq.size(); ++q) {
        const auto& b = mq.barycentric[q];
        basis.eval(b[1], b[2], vx.data(), vy.data());
        const double w = mq.weights[q] * geo.area / (geo.detJ * geo.detJ);
        for (int i = 0; i < n; ++i) {
            const Vec2 ti = geo.J * Vec2(vx[i], vy[i]);
            for (int j = i; j < n; ++j) {
                const Vec2 tj = geo.J * Vec2(vx[j], vy[j]);
                mass(i, j) += w * ti.dot(tj);
            }
        }
    }
    mass = mass.selfadjointView<Eigen::Upper>();
    // moments of f with the requested rule
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const auto& b = quad.barycentric[q];
        const Vec2 x = geo.map(b[1], b[2]);
        basis.eval(b[1], b[2], vx.data(), vy.data());
        const Vec2 fx = f(x);
        const double w = quad.weights[q] * geo.area / geo.detJ;
        for (int i = 0; i < n; ++i) rhs[i] += w * fx.dot(geo.J * Vec2(vx[i], vy[i]));
    }
    return Eigen::LLT<Eigen::MatrixXd>(mass).solve(rhs);
}

/// Value of an RT function (coefficients in the Piola-mapped basis) at a
/// reference point.
Vec2 eval_rt(const TriGeometry& geo, const RTBasis& basis, const Eigen::VectorXd& coeffs,
             double xhat, double yhat);

/// Divergence of an RT function at a reference point.
double eval_rt_div(const TriGeometry& geo, const RTBasis& basis, const Eigen::VectorXd& coeffs,
                   double xhat, double yhat);

} // namespace hhomin
