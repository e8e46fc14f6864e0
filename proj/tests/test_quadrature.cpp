#include "hhomin/quadrature.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace hhomin;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("reference monomial integrals match the closed form") {
    CHECK(reference_monomial_integral(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(reference_monomial_integral(1, 0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(reference_monomial_integral(2, 0) == doctest::Approx(1.0 / 12.0).epsilon(1e-15));
    CHECK(reference_monomial_integral(1, 1) == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
    CHECK(reference_monomial_integral(3, 4) == doctest::Approx(6.0 * 24.0 / 362880.0).epsilon(1e-14));
}

TEST_CASE("triangle rules integrate all monomials up to their degree") {
    for (int d = 0; d <= 20; ++d) {
        const auto& rule = triangle_quadrature(d);
        for (int a = 0; a <= d; ++a) {
            for (int b = 0; a + b <= d; ++b) {
                double s = 0;
                for (std::size_t q = 0; q < rule.size(); ++q)
                    s += rule.weights[q] * std::pow(rule.barycentric[q][1], a) *
                         std::pow(rule.barycentric[q][2], b);
                // integral over the reference triangle = |That| * weighted sum
                CHECK(0.5 * s == doctest::Approx(reference_monomial_integral(a, b)).epsilon(1e-13));
            }
        }
    }
}

TEST_CASE("weights are positive, sum to one, and points are interior") {
    for (int d : {0, 1, 4, 9, 14, 20}) {
        const auto& rule = triangle_quadrature(d);
        double sum = 0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            CHECK(rule.weights[q] > 0);
            sum += rule.weights[q];
            for (int c = 0; c < 3; ++c) {
                CHECK(rule.barycentric[q][c] > 0);
                CHECK(rule.barycentric[q][c] < 1);
            }
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("the degree 20 rule required by p = 4, k = 4 exists") {
    CHECK_NOTHROW(triangle_quadrature(4 * (4 + 1)));
    CHECK_THROWS_AS(triangle_quadrature(21), std::invalid_argument);
    CHECK_THROWS_AS(triangle_quadrature(-1), std::invalid_argument);
}

TEST_CASE("edge rules: constants, monomial exactness, node symmetry") {
    for (int d = 0; d <= 15; ++d) {
        const auto& rule = edge_quadrature(d);
        for (int a = 0; a <= d; ++a) {
            double s = 0;
            for (std::size_t q = 0; q < rule.size(); ++q)
                s += rule.weights[q] * std::pow(rule.points[q], a);
            CHECK(s == doctest::Approx(1.0 / (a + 1)).epsilon(1e-13)); // int_0^1 s^a ds
        }
    }
    // Legendre nodes are symmetric about 1/2
    const auto& rule = edge_quadrature(9);
    for (std::size_t q = 0; q < rule.size(); ++q) {
        const double mirrored = 1.0 - rule.points[rule.size() - 1 - q];
        CHECK(rule.points[q] == doctest::Approx(mirrored).epsilon(1e-13));
    }
}

TEST_SUITE_END();
