#include "hhomin/density.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hhomin {

namespace {

class PLaplaceDensity final : public Density {
public:
    explicit PLaplaceDensity(double p) : p_(p) {
        params_.p = p;
        params_.p_conj = p / (p - 1.0);
        if (p >= 2.0) {
            params_.r = 2.0;
            params_.s = p - 2.0;
        } else {
            params_.r = params_.p_conj;
            params_.s = 0.0;
        }
        params_.t = 1.0 + params_.s / p;
        params_.c1 = params_.c2 = 1.0 / p;
        // c3 = p is verified for integer p = 2..6; outside that range fall
        // back to the bound 1 + max{1, p-2}^2 known for the monotonicity form.
        const bool small_integer = (p == std::round(p) && p >= 2.0 && p <= 6.0);
        params_.c3 =
            small_integer ? p : std::max(p, 1.0 + std::pow(std::max(1.0, p - 2.0), 2));
        params_.c4 = params_.c5 = 0.0;
    }

    double w(const Vec2& a) const override { return std::pow(a.norm(), p_) / p_; }

    Vec2 dw(const Vec2& a) const override {
        const double n = a.norm();
        if (n == 0.0) return Vec2::Zero();
        return std::pow(n, p_ - 2.0) * a;
    }

    Mat2 d2w(const Vec2& a) const override {
        const double n = a.norm();
        if (n == 0.0) return p_ > 2.0 ? Mat2(Mat2::Zero()) : Mat2(Mat2::Identity());
        return std::pow(n, p_ - 2.0) * Mat2::Identity() +
               (p_ - 2.0) * std::pow(n, p_ - 4.0) * (a * a.transpose());
    }

    double conjugate(const Vec2& g) const override {
        const double q = params_.p_conj;
        return std::pow(g.norm(), q) / q;
    }

    double c2_interface_distance(const Vec2& a) const override {
        // smooth away from the origin (and everywhere for even integer p)
        if (p_ == std::round(p_) && std::fmod(p_, 2.0) == 0.0)
            return std::numeric_limits<double>::infinity();
        return a.norm();
    }

private:
    double p_;
};

class TwoWellDensity final : public Density {
public:
    TwoWellDensity(const Vec2& f1, const Vec2& f2)
        : a_((f2 - f1) / 2.0), b_((f1 + f2) / 2.0), starts_{f1, f2, (f1 + f2) / 2.0} {
        const double a2 = a_.squaredNorm();
        params_.p = 4.0;
        params_.p_conj = 4.0 / 3.0;
        params_.r = 2.0;
        params_.s = 2.0;
        params_.t = 1.5;
        params_.c1 = 1.0 / 8.0;
        params_.c2 = 8.0;
        params_.c3 = 32.0 * std::max({1.0, a2, a2 / 2.0 + 2.0 * b_.squaredNorm()});
        params_.c4 = params_.c5 =
            8.0 * std::max(std::pow(f1.norm(), 4), std::pow(f2.norm(), 4));
    }

    double w(const Vec2& f) const override {
        const Vec2 g = f - b_;
        const double m = g.squaredNorm() - a_.squaredNorm();
        const double ag = a_.dot(g);
        const double t1 = std::max(0.0, m);
        return t1 * t1 + 4.0 * (a_.squaredNorm() * g.squaredNorm() - ag * ag);
    }

    Vec2 dw(const Vec2& f) const override {
        const Vec2 g = f - b_;
        const double m = g.squaredNorm() - a_.squaredNorm();
        return 4.0 * std::max(0.0, m) * g + 8.0 * (a_.squaredNorm() * g - a_.dot(g) * a_);
    }

    Mat2 d2w(const Vec2& f) const override {
        const Vec2 g = f - b_;
        const double m = g.squaredNorm() - a_.squaredNorm();
        Mat2 h = 8.0 * (a_.squaredNorm() * Mat2::Identity() - a_ * a_.transpose());
        if (m > 0.0) h += 4.0 * (m * Mat2::Identity() + 2.0 * g * g.transpose());
        return h;
    }

    double conjugate(const Vec2& g) const override {
        const ConjugateResult res = conjugate_numeric(*this, g, 1e-12, starts_);
        if (!res.converged)
            throw std::runtime_error("two_well conjugate: Newton did not converge, best value " +
                                     std::to_string(res.value));
        return res.value;
    }

    double c2_interface_distance(const Vec2& f) const override {
        return std::abs((f - b_).norm() - a_.norm());
    }

    const std::vector<Vec2>& starts() const { return starts_; }

private:
    Vec2 a_, b_;
    std::vector<Vec2> starts_;
};

} // namespace

OptimalDesignDensity::OptimalDesignDensity(double mu1, double mu2, double xi1, double xi2)
    : mu1_(mu1), mu2_(mu2), xi1_(xi1), xi2_(xi2) {
    if (!(0 < xi1 && xi1 < xi2) || !(0 < mu1 && mu1 < mu2))
        throw std::invalid_argument("optimal_design: need 0 < xi1 < xi2 and 0 < mu1 < mu2");
    if (std::abs(xi1 * mu2 - xi2 * mu1) > 1e-12 * std::abs(xi1 * mu2))
        throw std::invalid_argument("optimal_design: constraint xi1*mu2 = xi2*mu1 violated");
    params_.p = params_.p_conj = 2.0;
    params_.r = 2.0;
    params_.s = 0.0;
    params_.t = 1.0;
    params_.c1 = mu1 / 2.0;
    params_.c2 = mu2 / 2.0;
    params_.c3 = 2.0 * mu2;
    params_.c4 = params_.c5 = 0.0;
}

double OptimalDesignDensity::w(const Vec2& a) const {
    const double xi = a.norm();
    if (xi <= xi1_) return mu2_ * xi * xi / 2.0;
    if (xi <= xi2_) return xi1_ * mu2_ * (xi - xi1_ / 2.0);
    return mu1_ * xi * xi / 2.0 - xi1_ * mu2_ * (xi1_ / 2.0 - xi2_ / 2.0);
}

Vec2 OptimalDesignDensity::dw(const Vec2& a) const {
    const double xi = a.norm();
    if (xi == 0.0) return Vec2::Zero();
    double dpsi;
    if (xi <= xi1_)
        dpsi = mu2_ * xi;
    else if (xi <= xi2_)
        dpsi = xi1_ * mu2_;
    else
        dpsi = mu1_ * xi;
    return (dpsi / xi) * a;
}

Mat2 OptimalDesignDensity::d2w(const Vec2& a) const {
    const double xi = a.norm();
    if (xi == 0.0) return mu2_ * Mat2::Identity();
    double dpsi, ddpsi;
    if (xi <= xi1_) {
        dpsi = mu2_ * xi;
        ddpsi = mu2_;
    } else if (xi <= xi2_) {
        dpsi = xi1_ * mu2_;
        ddpsi = 0.0;
    } else {
        dpsi = mu1_ * xi;
        ddpsi = mu1_;
    }
    const Mat2 rad = a * a.transpose() / (xi * xi);
    return ddpsi * rad + (dpsi / xi) * (Mat2::Identity() - rad);
}

double OptimalDesignDensity::conjugate(const Vec2& g) const {
    const double tau = g.norm();
    if (tau <= mu2_ * xi1_) return tau * tau / (2.0 * mu2_);
    return tau * tau / (2.0 * mu1_) + xi1_ * mu2_ * (xi1_ - xi2_) / 2.0;
}

double OptimalDesignDensity::c2_interface_distance(const Vec2& a) const {
    const double xi = a.norm();
    return std::min(std::abs(xi - xi1_), std::abs(xi - xi2_));
}

DensityPtr plaplace(double p) {
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("plaplace: need 1 < p < infinity");
    return std::make_shared<PLaplaceDensity>(p);
}

DensityPtr optimal_design(double mu1, double mu2, double xi1, double xi2) {
    return std::make_shared<OptimalDesignDensity>(mu1, mu2, xi1, xi2);
}

DensityPtr two_well(const Vec2& f1, const Vec2& f2) {
    if ((f1 - f2).norm() == 0.0) throw std::invalid_argument("two_well: wells must be distinct");
    return std::make_shared<TwoWellDensity>(f1, f2);
}

ConjugateResult conjugate_numeric(const Density& density, const Vec2& g, double tol,
                                  const std::vector<Vec2>& starts) {
    // Maximize the concave objective h(A) = g.A - W(A) by damped Newton with
    // Levenberg regularization of the piecewise Hessian.
    ConjugateResult best;
    best.value = -std::numeric_limits<double>::infinity();
    // gradient-norm stop at 1e-12 (scaled), never looser than the requested tol
    const double grad_tol = std::min(1e-12 * std::max(1.0, g.norm()), tol);

    for (const Vec2& start : starts) {
        Vec2 a = start;
        double h = g.dot(a) - density.w(a);
        double lambda = 0.0;
        bool converged = false;
        int it = 0;
        for (; it < 200; ++it) {
            const Vec2 grad = g - density.dw(a);
            if (grad.norm() <= grad_tol) {
                converged = true;
                break;
            }
            Mat2 hess = density.d2w(a);
            Vec2 dir;
            bool have_dir = false;
            for (int reg = 0; reg < 8 && !have_dir; ++reg) {
                const Mat2 m = hess + lambda * Mat2::Identity();
                const double det = m.determinant();
                if (det > 1e-14 * (1.0 + m.trace() * m.trace())) {
                    dir = m.inverse() * grad;
                    if (dir.dot(grad) > 0) have_dir = true;
                }
                if (!have_dir) lambda = std::max(1e-8, 10.0 * lambda);
            }
            if (!have_dir) dir = grad;
            // Armijo backtracking on the concave objective, with slack for
            // increases below the floating-point resolution of h
            const double slack = 16.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(h));
            double step = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 60; ++ls) {
                const Vec2 trial = a + step * dir;
                const double ht = g.dot(trial) - density.w(trial);
                if (ht >= h + 1e-4 * step * grad.dot(dir) - slack) {
                    a = trial;
                    h = ht;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if (!accepted) {
                lambda = std::max(1e-8, 10.0 * lambda);
                continue;
            }
            lambda *= 0.25;
        }
        if (h > best.value || (converged && !best.converged && h >= best.value - 1e-14)) {
            best.value = h;
            best.converged = converged;
            best.iterations = it;
        }
    }
    return best;
}

double volume_fraction(double xi1, double xi2, double xi) {
    if (xi <= xi1) return 0.0;
    if (xi >= xi2) return 1.0;
    return (xi - xi1) / (xi2 - xi1);
}

} // namespace hhomin
