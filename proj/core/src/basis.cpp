#include "hhomin/basis.hpp"

#include <cmath>
#include <stdexcept>

namespace hhomin {

namespace {

// Shifted Legendre polynomials P_n(2x - 1) on [0,1] and their x-derivatives,
// by the three-term recurrence. A well-conditioned dictionary: Gram matrices
// of their products on the reference triangle stay benign up to degree 5+,
// unlike raw monomials.
void legendre_values(int degree, double x, double* v, double* dv) {
    const double t = 2.0 * x - 1.0;
    v[0] = 1.0;
    if (dv) dv[0] = 0.0;
    if (degree == 0) return;
    v[1] = t;
    if (dv) dv[1] = 2.0;
    double dp0 = 0.0, dp1 = 1.0; // derivatives w.r.t. t
    for (int n = 1; n < degree; ++n) {
        v[n + 1] = ((2.0 * n + 1.0) * t * v[n] - n * v[n - 1]) / (n + 1.0);
        if (dv) {
            const double dpn = dp0 + (2.0 * n + 1.0) * v[n]; // P'_{n+1} = P'_{n-1} + (2n+1) P_n
            dv[n + 1] = 2.0 * dpn;
            dp0 = dp1;
            dp1 = dpn;
        }
    }
}

std::vector<std::array<int, 2>> products_up_to(int degree) {
    std::vector<std::array<int, 2>> terms;
    for (int g = 0; g <= degree; ++g)
        for (int a = g; a >= 0; --a) terms.push_back({a, g - a});
    return terms;
}

// Re-orthonormalization against the Gram matrix; repeated passes reach
// orthonormality near machine precision.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& gram) {
    const int n = static_cast<int>(gram.rows());
    Eigen::MatrixXd c = Eigen::MatrixXd::Identity(n, n);
    for (int pass = 0; pass < 6; ++pass) {
        Eigen::MatrixXd g = c * gram * c.transpose();
        g = 0.5 * (g + g.transpose()).eval();
        const double err = (g - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
        if (err < 1e-15) break;
        Eigen::LLT<Eigen::MatrixXd> llt(g);
        if (llt.info() != Eigen::Success)
            throw std::runtime_error("orthonormalize: Gram matrix not SPD");
        c = llt.matrixL().solve(c);
    }
    return c;
}

} // namespace

// ---------------------------------------------------------------------------
// CellBasis

CellBasis::CellBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("CellBasis: negative degree");
    mono_ = products_up_to(degree);
    const int n = static_cast<int>(mono_.size());

    const TriangleQuadrature& quad = triangle_quadrature(2 * degree);
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> lx(degree + 1), ly(degree + 1), dict(n);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double x = quad.barycentric[q][1], y = quad.barycentric[q][2];
        legendre_values(degree, x, lx.data(), nullptr);
        legendre_values(degree, y, ly.data(), nullptr);
        for (int m = 0; m < n; ++m) dict[m] = lx[mono_[m][0]] * ly[mono_[m][1]];
        const double w = 0.5 * quad.weights[q];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) gram(i, j) += w * dict[i] * dict[j];
    }
    gram = gram.selfadjointView<Eigen::Upper>();
    coeff_ = orthonormalize(gram);
}

void CellBasis::eval(double x, double y, double* values) const {
    const int n = dim();
    static thread_local std::vector<double> lx, ly, dict;
    lx.resize(degree_ + 1);
    ly.resize(degree_ + 1);
    dict.resize(n);
    legendre_values(degree_, x, lx.data(), nullptr);
    legendre_values(degree_, y, ly.data(), nullptr);
    for (int m = 0; m < n; ++m) dict[m] = lx[mono_[m][0]] * ly[mono_[m][1]];
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int m = 0; m < n; ++m) s += coeff_(i, m) * dict[m];
        values[i] = s;
    }
}

void CellBasis::eval_grad(double x, double y, double* gx, double* gy) const {
    const int n = dim();
    static thread_local std::vector<double> lx, ly, dlx, dly, dx, dy;
    lx.resize(degree_ + 1);
    ly.resize(degree_ + 1);
    dlx.resize(degree_ + 1);
    dly.resize(degree_ + 1);
    dx.resize(n);
    dy.resize(n);
    legendre_values(degree_, x, lx.data(), dlx.data());
    legendre_values(degree_, y, ly.data(), dly.data());
    for (int m = 0; m < n; ++m) {
        dx[m] = dlx[mono_[m][0]] * ly[mono_[m][1]];
        dy[m] = lx[mono_[m][0]] * dly[mono_[m][1]];
    }
    for (int i = 0; i < n; ++i) {
        double sx = 0, sy = 0;
        for (int m = 0; m < n; ++m) {
            sx += coeff_(i, m) * dx[m];
            sy += coeff_(i, m) * dy[m];
        }
        gx[i] = sx;
        gy[i] = sy;
    }
}

// ---------------------------------------------------------------------------
// EdgeBasis

void EdgeBasis::eval(double s, double* values) const {
    std::vector<double> v(degree_ + 1);
    legendre_values(degree_, s, v.data(), nullptr);
    for (int n = 0; n <= degree_; ++n) values[n] = std::sqrt(2.0 * n + 1.0) * v[n];
}

// ---------------------------------------------------------------------------
// RTBasis: spanning set { (phi_m, 0), (0, phi_m) : phi_m in P_k } together
// with { (x phi_c, y phi_c) : phi_c a degree-k product }, orthonormalized.
// The span equals P_k(T;R^2) + x Ptilde_k(T) since x * P_{k-1} c P_k(T;R^2).

RTBasis::RTBasis(int degree) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("RTBasis: negative degree");
    const int k = degree;
    mono_ = products_up_to(k);
    const int npk = static_cast<int>(mono_.size());
    const int n = dim(); // 2 npk + (k+1)

    const TriangleQuadrature& quad = triangle_quadrature(2 * (k + 1));
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    std::vector<double> vx(n), vy(n);
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const double x = quad.barycentric[q][1], y = quad.barycentric[q][2];
        eval_span(x, y, vx.data(), vy.data(), nullptr);
        const double w = 0.5 * quad.weights[q];
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) gram(i, j) += w * (vx[i] * vx[j] + vy[i] * vy[j]);
    }
    gram = gram.selfadjointView<Eigen::Upper>();
    coeff_ = orthonormalize(gram);
}

void RTBasis::eval_span(double x, double y, double* vx, double* vy, double* dv) const {
    const int k = degree_;
    const int npk = static_cast<int>(mono_.size());
    static thread_local std::vector<double> lx, ly, dlx, dly;
    lx.resize(k + 1);
    ly.resize(k + 1);
    dlx.resize(k + 1);
    dly.resize(k + 1);
    legendre_values(k, x, lx.data(), dv ? dlx.data() : nullptr);
    legendre_values(k, y, ly.data(), dv ? dly.data() : nullptr);
    for (int m = 0; m < npk; ++m) {
        const int a = mono_[m][0], b = mono_[m][1];
        const double phi = lx[a] * ly[b];
        vx[m] = phi;
        vy[m] = 0.0;
        vx[npk + m] = 0.0;
        vy[npk + m] = phi;
        if (dv) {
            dv[m] = dlx[a] * ly[b];
            dv[npk + m] = lx[a] * dly[b];
        }
    }
    // the k+1 products of exact total degree k multiply the position vector
    int row = 2 * npk;
    for (int m = 0; m < npk; ++m) {
        const int a = mono_[m][0], b = mono_[m][1];
        if (a + b != k) continue;
        const double phi = lx[a] * ly[b];
        vx[row] = x * phi;
        vy[row] = y * phi;
        if (dv) dv[row] = 2.0 * phi + x * dlx[a] * ly[b] + y * lx[a] * dly[b];
        ++row;
    }
}

void RTBasis::eval(double x, double y, double* vx, double* vy) const {
    const int n = dim();
    static thread_local std::vector<double> sx, sy;
    sx.resize(n);
    sy.resize(n);
    eval_span(x, y, sx.data(), sy.data(), nullptr);
    for (int i = 0; i < n; ++i) {
        double ax = 0, ay = 0;
        for (int m = 0; m < n; ++m) {
            ax += coeff_(i, m) * sx[m];
            ay += coeff_(i, m) * sy[m];
        }
        vx[i] = ax;
        vy[i] = ay;
    }
}

void RTBasis::eval_div(double x, double y, double* dv) const {
    const int n = dim();
    static thread_local std::vector<double> sx, sy, sd;
    sx.resize(n);
    sy.resize(n);
    sd.resize(n);
    eval_span(x, y, sx.data(), sy.data(), sd.data());
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int m = 0; m < n; ++m) s += coeff_(i, m) * sd[m];
        dv[i] = s;
    }
}

// ---------------------------------------------------------------------------
// evaluation helpers

double eval_cell(const TriGeometry& geo, const CellBasis& basis, const Eigen::VectorXd& coeffs,
                 double xhat, double yhat) {
    std::vector<double> values(basis.dim());
    basis.eval(xhat, yhat, values.data());
    double s = 0;
    for (int i = 0; i < basis.dim(); ++i) s += coeffs[i] * values[i];
    return s * CellBasis::physical_scale(geo.area);
}

Vec2 eval_cell_grad(const TriGeometry& geo, const CellBasis& basis, const Eigen::VectorXd& coeffs,
                    double xhat, double yhat) {
    std::vector<double> gx(basis.dim()), gy(basis.dim());
    basis.eval_grad(xhat, yhat, gx.data(), gy.data());
    Vec2 ghat = Vec2::Zero();
    for (int i = 0; i < basis.dim(); ++i) ghat += coeffs[i] * Vec2(gx[i], gy[i]);
    return CellBasis::physical_scale(geo.area) * geo.Jinv.transpose() * ghat;
}

double eval_edge(double h, const EdgeBasis& basis, const Eigen::VectorXd& coeffs, double s) {
    std::vector<double> values(basis.dim());
    basis.eval(s, values.data());
    double v = 0;
    for (int i = 0; i < basis.dim(); ++i) v += coeffs[i] * values[i];
    return v * EdgeBasis::physical_scale(h);
}

Vec2 eval_rt(const TriGeometry& geo, const RTBasis& basis, const Eigen::VectorXd& coeffs,
             double xhat, double yhat) {
    std::vector<double> vx(basis.dim()), vy(basis.dim());
    basis.eval(xhat, yhat, vx.data(), vy.data());
    Vec2 ref = Vec2::Zero();
    for (int i = 0; i < basis.dim(); ++i) ref += coeffs[i] * Vec2(vx[i], vy[i]);
    return geo.J * ref / geo.detJ;
}

double eval_rt_div(const TriGeometry& geo, const RTBasis& basis, const Eigen::VectorXd& coeffs,
                   double xhat, double yhat) {
    std::vector<double> dv(basis.dim());
    basis.eval_div(xhat, yhat, dv.data());
    double s = 0;
    for (int i = 0; i < basis.dim(); ++i) s += coeffs[i] * dv[i];
    return s / geo.detJ;
}

} // namespace hhomin
