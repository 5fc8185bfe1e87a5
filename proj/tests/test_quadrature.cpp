#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "pidelab/quadrature.hpp"

using namespace pidelab;

TEST_CASE("nodes and weights have the textbook structure") {
    for (int n = 1; n <= 8; ++n) {
        const QuadratureRule rule = gauss_legendre(n);
        REQUIRE(rule.size() == n);
        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            CHECK(rule.nodes[i] > -1.0);
            CHECK(rule.nodes[i] < 1.0);
            CHECK(rule.weights[i] > 0.0);
            wsum += rule.weights[i];
            // symmetric about the origin
            CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-14));
        }
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("n-point rule is exact through degree 2n-1") {
    for (int n = 1; n <= 6; ++n) {
        const QuadratureRule rule = gauss_legendre(n);
        for (int d = 0; d <= 2 * n - 1; ++d) {
            const double got =
                integrate(rule, 0.0, 1.0, [d](double x) { return std::pow(x, d); });
            CHECK(got == doctest::Approx(1.0 / (d + 1)).epsilon(1e-13));
        }
    }
}

TEST_CASE("smooth non-polynomial integrand converges") {
    const QuadratureRule rule = gauss_legendre(10);
    const double got = integrate(rule, 0.0, M_PI, [](double x) { return std::sin(x); });
    CHECK(got == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("invalid point counts are rejected") {
    CHECK_THROWS_AS(gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(gauss_legendre(-3), std::invalid_argument);
}
