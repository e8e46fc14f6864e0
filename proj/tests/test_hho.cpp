#include "hhomin/energy.hpp"
#include "hhomin/solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace hhomin;

namespace {

struct SmoothField {
    std::function<double(const Vec2&)> v;
    std::function<Vec2(const Vec2&)> grad;
};

std::vector<SmoothField> smooth_fields() {
    std::vector<SmoothField> fields;
    fields.push_back({[](const Vec2& x) { return x.x() * (1 - x.x()) * x.y() * (1 - x.y()); },
                      [](const Vec2& x) {
                          return Vec2((1 - 2 * x.x()) * x.y() * (1 - x.y()),
                                      x.x() * (1 - x.x()) * (1 - 2 * x.y()));
                      }});
    fields.push_back({[](const Vec2& x) { return std::sin(x.x()) * std::exp(0.5 * x.y()); },
                      [](const Vec2& x) {
                          return Vec2(std::cos(x.x()) * std::exp(0.5 * x.y()),
                                      0.5 * std::sin(x.x()) * std::exp(0.5 * x.y()));
                      }});
    return fields;
}

} // namespace

TEST_SUITE_BEGIN("hho");

TEST_CASE("reconstruction of the zero function vanishes") {
    auto mesh = std::make_shared<Mesh>(criss_cross_square());
    HHOSpace space(mesh, 1, 8);
    HHOFunction zero(space);
    const GradientField r = reconstruct_gradient(space, zero);
    CHECK(r.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("commutativity R(I v) = Pi_Sigma(grad v) on both domains, k = 0..3") {
    for (const Mesh& base : {criss_cross_square(), l_shape_mesh()}) {
        auto mesh = std::make_shared<Mesh>(uniform_refine(base).mesh);
        for (int k = 0; k <= 3; ++k) {
            HHOSpace space(mesh, k, 4 * (k + 1));
            for (const auto& field : smooth_fields()) {
                const HHOFunction iv = interpolate(space, field.v, 20);
                const GradientField r = reconstruct_gradient(space, iv);
                const RTField pi = project_rt_field(space, field.grad, 20);
                const double scale = pi.coeffs.cwiseAbs().maxCoeff();
                CHECK((r.coeffs - pi.coeffs).cwiseAbs().maxCoeff() < 1e-11 * (1.0 + scale));
            }
        }
    }
}

TEST_CASE("R(I v) equals the constant gradient for globally affine v") {
    auto mesh = std::make_shared<Mesh>(l_shape_mesh());
    for (int k = 0; k <= 2; ++k) {
        HHOSpace space(mesh, k, 4 * (k + 1));
        const HHOFunction iv =
            interpolate(space, [](const Vec2& x) { return x.x() + 2.0 * x.y(); }, 12);
        const GradientField r = reconstruct_gradient(space, iv);
        for (int t = 0; t < mesh->n_triangles(); ++t)
            for (double xy : {0.25, 0.6}) {
                const Vec2 val = eval_rt_field(space, r, t, xy, 0.3 * xy);
                CHECK((val - Vec2(1.0, 2.0)).norm() < 1e-12);
            }
    }
}

TEST_CASE("k = 0 reconstruction on the reference triangle matches a dense oracle") {
    // single reference triangle, v_T = 0, v_F = 1 on the side opposite vertex 0
    // (a boundary side here, entered through the boundary data block)
    auto mesh = std::make_shared<Mesh>(build_mesh({{0, 0}, {1, 0}, {0, 1}}, {{{0, 1, 2}}}));
    HHOSpace space(mesh, 0, 4);
    HHOFunction v(space);
    const Triangle& tri = mesh->triangles()[0];
    const int target_side = tri.sides[0];
    const Side& side = mesh->sides()[target_side];
    v.boundary(0, mesh->boundary_index(target_side)) =
        std::sqrt(side.h); // constant 1 in the orthonormal edge basis
    const GradientField r = reconstruct_gradient(space, v);

    // oracle: nodal RT0 basis phi_i(x) = c_i (x - p_i) with unit normal flux
    // through side i and zero through the others; solve the 3x3 mass system
    const TriGeometry geo = mesh->geometry(0);
    std::array<Vec2, 3> opposite;
    for (int i = 0; i < 3; ++i) opposite[i] = mesh->vertices()[tri.v[i]];
    auto nodal = [&](int i, const Vec2& x) {
        const Side& si = mesh->sides()[tri.sides[i]];
        return (si.h / (2.0 * geo.area)) * (x - opposite[i]);
    };
    const auto& quad = triangle_quadrature(4);
    Eigen::Matrix3d mass = Eigen::Matrix3d::Zero();
    for (std::size_t q = 0; q < quad.size(); ++q) {
        const Vec2 x = geo.map(quad.barycentric[q][1], quad.barycentric[q][2]);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                mass(i, j) += quad.weights[q] * geo.area * nodal(i, x).dot(nodal(j, x));
    }
    // load: (R v, tau) = int_F v_F (tau . nu_T) over the target side only
    Eigen::Vector3d load = Eigen::Vector3d::Zero();
    const auto& equad = edge_quadrature(6);
    const Vec2& a = mesh->vertices()[side.vertices[0]];
    const Vec2& b = mesh->vertices()[side.vertices[1]];
    for (std::size_t q = 0; q < equad.size(); ++q) {
        const Vec2 x = a + equad.points[q] * (b - a);
        for (int i = 0; i < 3; ++i)
            load[i] += equad.weights[q] * side.h * nodal(i, x).dot(side.normal);
    }
    const Eigen::Vector3d oracle_coeffs = mass.ldlt().solve(load);

    for (double px : {0.2, 0.5}) {
        const Vec2 mine = eval_rt_field(space, r, 0, px, 0.25);
        Vec2 oracle = Vec2::Zero();
        const Vec2 x = geo.map(px, 0.25);
        for (int i = 0; i < 3; ++i) oracle += oracle_coeffs[i] * nodal(i, x);
        CHECK((mine - oracle).norm() < 1e-12);
    }
}

TEST_CASE("interpolation: zero function, polynomial reproduction") {
    auto mesh = std::make_shared<Mesh>(criss_cross_square());
    HHOSpace space(mesh, 2, 12);
    const HHOFunction zero = interpolate(space, [](const Vec2&) { return 0.0; }, 12);
    CHECK(zero.coeffs.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-300));
    CHECK(zero.boundary.cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-300));

    auto poly = [](const Vec2& x) { return 1.0 + x.x() * x.x() - 0.5 * x.y(); };
    const HHOFunction ip = interpolate(space, poly, 12);
    for (int t = 0; t < mesh->n_triangles(); ++t) {
        const Vec2 x = space.geometry(t).map(0.31, 0.41);
        CHECK(eval_cell_part(space, ip, t, 0.31, 0.41) == doctest::Approx(poly(x)).epsilon(1e-12));
    }
}

TEST_CASE("discrete norm: definiteness and the zero function") {
    auto mesh = std::make_shared<Mesh>(criss_cross_square());
    HHOSpace space(mesh, 1, 8);
    HHOFunction zero(space);
    CHECK(discrete_norm(space, zero, 4.0) == 0.0);
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        HHOFunction v(space);
        for (int i = 0; i < v.coeffs.size(); ++i) v.coeffs[i] = dist(rng);
        CHECK(discrete_norm(space, v, 4.0) > 0.0);
    }
}

TEST_CASE("interpolants of a smooth function have bounded discrete norm under refinement") {
    auto field = smooth_fields()[0]; // vanishes on the boundary of the unit square
    Mesh mesh = criss_cross_square();
    std::vector<double> norms;
    for (int level = 0; level < 4; ++level) {
        auto m = std::make_shared<Mesh>(mesh);
        HHOSpace space(m, 1, 8);
        const HHOFunction iv = interpolate(space, field.v, 12);
        norms.push_back(discrete_norm(space, iv, 4.0));
        mesh = uniform_refine(mesh).mesh;
    }
    // || grad v ||_{L^4}^4 = 1/1470 for the bubble (beta-function integrals)
    const double grad_lp = std::pow(1.0 / 1470.0, 0.25);
    for (double n : norms) CHECK(n < 10.0 * grad_lp);
    // the sequence stabilizes rather than blowing up
    CHECK(norms.back() < 2.0 * norms.front() + 1.0);
}

TEST_CASE("discrete energy: zero function and the quadratic identity") {
    auto mesh = std::make_shared<Mesh>(two_triangle_square());
    // E_h(0) = 0 for the p-Laplacian with any load
    {
        HHOSpace space(mesh, 1, 8);
        Problem problem{plaplace(4.0), [](const Vec2& x) { return std::cos(x.x()); }, 0, {}};
        HHOFunction zero(space);
        CHECK(discrete_energy(space, problem, zero) == doctest::Approx(0.0).epsilon(1e-300));
    }
    // W(a) = |a|^2/2, v = x, f = 0: E_h(I v) = 0.5 ||grad v||^2 = 0.5
    {
        HHOSpace space(mesh, 1, 4);
        Problem problem{plaplace(2.0), {}, 0, {}};
        const HHOFunction iv = interpolate(space, [](const Vec2& x) { return x.x(); }, 8);
        CHECK(discrete_energy(space, problem, iv) == doctest::Approx(0.5).epsilon(1e-13));
    }
}

TEST_CASE("energy gradient matches central differences of the energy") {
    auto mesh = std::make_shared<Mesh>(criss_cross_square());
    for (const DensityPtr& density :
         {plaplace(4.0), optimal_design(1.0, 2.0, 0.1, 0.2)}) {
        HHOSpace space(mesh, 1, 8);
        Problem problem{density, [](const Vec2& x) { return 1.0 + x.y(); }, 0, {}};
        HHOFunction v = initial_guess(space);
        std::mt19937 rng(21);
        std::uniform_real_distribution<double> dist(-0.4, 0.4);
        for (int i = 0; i < v.coeffs.size(); ++i) v.coeffs[i] += dist(rng);
        const Eigen::VectorXd g = energy_gradient(space, problem, v);
        Eigen::VectorXd w(v.coeffs.size());
        for (int i = 0; i < w.size(); ++i) w[i] = dist(rng);
        const double eps = 1e-6;
        HHOFunction vp = v, vm = v;
        vp.coeffs += eps * w;
        vm.coeffs -= eps * w;
        const double fd =
            (discrete_energy(space, problem, vp) - discrete_energy(space, problem, vm)) / (2 * eps);
        CHECK(g.dot(w) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("quadratic energy gradient equals the dense linear-system residual") {
    auto mesh = std::make_shared<Mesh>(two_triangle_square());
    HHOSpace space(mesh, 1, 4);
    Problem problem{plaplace(2.0), [](const Vec2& x) { return x.x() - 0.3; }, 0, {}};

    // dense oracle: with W quadratic, grad E_h(v) = A v - b for the matrix A
    // assembled at any state and b = -grad E_h(0)
    HHOFunction zero(space);
    const Eigen::VectorXd b = -energy_gradient(space, problem, zero);
    const Eigen::MatrixXd a = Eigen::MatrixXd(energy_hessian(space, problem, zero));

    std::mt19937 rng(31);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    HHOFunction v(space);
    for (int i = 0; i < v.coeffs.size(); ++i) v.coeffs[i] = dist(rng);
    const Eigen::VectorXd g = energy_gradient(space, problem, v);
    CHECK((g - (a * v.coeffs - b)).cwiseAbs().maxCoeff() < 1e-12 * (1 + b.cwiseAbs().maxCoeff()));
}

TEST_CASE("stability and discrete Friedrichs ratios stay mesh-independent (logged)") {
    Mesh mesh = criss_cross_square();
    auto field = smooth_fields()[0];
    const double p = 4.0;
    std::vector<double> upper, lower, friedrichs;
    for (int level = 0; level < 5; ++level) {
        auto m = std::make_shared<Mesh>(mesh);
        HHOSpace space(m, 0, 4);
        const HHOFunction iv = interpolate(space, field.v, 12);
        const GradientField r = reconstruct_gradient(space, iv);
        const double norm_h = discrete_norm(space, iv, p);
        const double norm_r = rt_field_lq_norm(space, r, p);
        double norm_vt = 0; // || v_T ||_{L^p}
        {
            const auto& quad = space.cell_quad();
            for (int t = 0; t < m->n_triangles(); ++t)
                for (std::size_t q = 0; q < quad.size(); ++q) {
                    const double val = eval_cell_part(space, iv, t, quad.barycentric[q][1],
                                                      quad.barycentric[q][2]);
                    norm_vt += std::pow(std::abs(val), p) * quad.weights[q] * space.geometry(t).area;
                }
            norm_vt = std::pow(norm_vt, 1.0 / p);
        }
        upper.push_back(norm_r / norm_h);
        lower.push_back(norm_h / norm_r);
        friedrichs.push_back(norm_vt / norm_r);
        mesh = uniform_refine(mesh).mesh;
    }
    for (std::size_t i = 0; i < upper.size(); ++i)
        MESSAGE("level ", i, ": |Rv|/|v|_h = ", upper[i], "  |v|_h/|Rv| = ", lower[i],
                "  |v_T|/|Rv| = ", friedrichs[i]);
    auto bounded = [](const std::vector<double>& v) {
        const double lo = *std::min_element(v.begin(), v.end());
        const double hi = *std::max_element(v.begin(), v.end());
        return lo > 0 && hi / lo < 10.0;
    };
    CHECK(bounded(upper));
    CHECK(bounded(lower));
    CHECK(bounded(friedrichs));
}

TEST_SUITE_END();
