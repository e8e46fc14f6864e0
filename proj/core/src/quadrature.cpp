#include "hhomin/quadrature.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace hhomin {

namespace {

// Golub-Welsch: nodes/weights of the Gauss rule for the weight with Jacobi
// matrix diag(a) + offdiag(b); mu0 is the total mass of the weight.
void golub_welsch(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double mu0,
                  std::vector<double>& x, std::vector<double>& w) {
    const int n = static_cast<int>(a.size());
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        J(i, i) = a[i];
        if (i + 1 < n) J(i, i + 1) = J(i + 1, i) = b[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    x.resize(n);
    w.resize(n);
    for (int i = 0; i < n; ++i) {
        x[i] = es.eigenvalues()[i];
        const double v0 = es.eigenvectors()(0, i);
        w[i] = mu0 * v0 * v0;
    }
}

// Gauss-Legendre on [-1,1], mapped by the caller.
void gauss_legendre_sym(int n, std::vector<double>& x, std::vector<double>& w) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd b(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) b[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
    golub_welsch(a, b, 2.0, x, w);
}

// Gauss-Jacobi for weight (1-x)^alpha (1+x)^beta on [-1,1].
void gauss_jacobi_sym(int n, double alpha, double beta,
                      std::vector<double>& x, std::vector<double>& w) {
    Eigen::VectorXd a(n), b(std::max(n - 1, 0));
    const double ab = alpha + beta;
    for (int k = 0; k < n; ++k) {
        const double den = (2.0 * k + ab) * (2.0 * k + ab + 2.0);
        a[k] = (den == 0.0) ? (beta - alpha) / (ab + 2.0)
                            : (beta * beta - alpha * alpha) / den;
    }
    for (int k = 1; k < n; ++k) {
        const double num = 4.0 * k * (k + alpha) * (k + beta) * (k + ab);
        const double d = (2.0 * k + ab);
        b[k - 1] = std::sqrt(num / (d * d * (d * d - 1.0)));
    }
    const double mu0 = std::pow(2.0, ab + 1.0) * std::tgamma(alpha + 1.0) *
                       std::tgamma(beta + 1.0) / std::tgamma(ab + 2.0);
    golub_welsch(a, b, mu0, x, w);
}

TriangleQuadrature build_triangle_rule(int degree) {
    const int n = degree / 2 + 1; // 2n-1 >= degree
    // Duffy map (u,v) -> (x,y) = (u, v(1-u)) with Jacobian (1-u):
    // the u-direction uses Gauss-Jacobi with weight (1-u), the v-direction
    // plain Gauss-Legendre; the product is exact for total degree <= 2n-1.
    std::vector<double> xu, wu, xv, wv;
    gauss_jacobi_sym(n, 1.0, 0.0, xu, wu);
    gauss_legendre_sym(n, xv, wv);

    TriangleQuadrature rule;
    rule.degree = degree;
    rule.barycentric.reserve(n * n);
    rule.weights.reserve(n * n);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = 0.5 * (xu[i] + 1.0);
        for (int j = 0; j < n; ++j) {
            const double v = 0.5 * (xv[j] + 1.0);
            const double x = u;
            const double y = v * (1.0 - u);
            rule.barycentric.push_back({1.0 - x - y, x, y});
            const double weight = wu[i] * wv[j];
            rule.weights.push_back(weight);
            total += weight;
        }
    }
    for (double& w : rule.weights) w /= total;
    return rule;
}

EdgeQuadrature build_edge_rule(int degree) {
    const int n = degree / 2 + 1;
    EdgeQuadrature rule;
    rule.degree = degree;
    gauss_legendre_01(n, rule.points, rule.weights);
    return rule;
}

} // namespace

void gauss_legendre_01(int n, std::vector<double>& points, std::vector<double>& weights) {
    std::vector<double> x, w;
    gauss_legendre_sym(n, x, w);
    points.resize(n);
    weights.resize(n);
    for (int i = 0; i < n; ++i) {
        points[i] = 0.5 * (x[i] + 1.0);
        weights[i] = 0.5 * w[i];
    }
}

const TriangleQuadrature& triangle_quadrature(int degree) {
    if (degree < 0 || degree > kMaxTriangleQuadDegree)
        throw std::invalid_argument("triangle_quadrature: degree must be in [0, 20], got " +
                                    std::to_string(degree));
    static std::map<int, TriangleQuadrature> cache;
    static std::mutex mtx;
    std::scoped_lock lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, build_triangle_rule(degree)).first;
    return it->second;
}

const EdgeQuadrature& edge_quadrature(int degree) {
    if (degree < 0 || degree > 60)
        throw std::invalid_argument("edge_quadrature: degree must be in [0, 60], got " +
                                    std::to_string(degree));
    static std::map<int, EdgeQuadrature> cache;
    static std::mutex mtx;
    std::scoped_lock lock(mtx);
    auto it = cache.find(degree);
    if (it == cache.end()) it = cache.emplace(degree, build_edge_rule(degree)).first;
    return it->second;
}

double reference_monomial_integral(int a, int b) {
    // a! b! / (a+b+2)! evaluated without overflow.
    double value = 1.0;
    // 1/(a+b+2)! * a! = 1 / prod_{i=a+1..a+b+2} i
    for (int i = a + 1; i <= a + b + 2; ++i) value /= i;
    for (int i = 2; i <= b; ++i) value *= i;
    return value;
}

} // namespace hhomin
