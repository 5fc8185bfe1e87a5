#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>
#include <vector>

#include "pidelab/bspline.hpp"

using namespace pidelab;

TEST_CASE("basis size is n*p + 1") {
    CHECK(SplineBasis(0.0, 1.0, 2, 1).full_dim() == 3);
    CHECK(SplineBasis(0.0, 1.0, 4, 2).full_dim() == 9);
    CHECK(SplineBasis(-1.0, 3.0, 8, 3).full_dim() == 25);
}

TEST_CASE("partition of unity and zero extension") {
    std::mt19937 gen(7);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int p = 1; p <= 3; ++p) {
        SplineBasis basis(0.0, 1.0, 5, p);
        std::vector<double> vals(p + 1), ders(p + 1);
        for (int k = 0; k < 40; ++k) {
            const double x = unif(gen);
            int first = 0;
            basis.eval(x, vals, ders, first);
            double vsum = 0.0, dsum = 0.0;
            for (int l = 0; l <= p; ++l) {
                CHECK(vals[l] >= -1e-14);
                vsum += vals[l];
                dsum += ders[l];
            }
            CHECK(vsum == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(dsum == doctest::Approx(0.0).epsilon(1e-10));
        }
        CHECK(basis.value(1, -0.5) == 0.0);
        CHECK(basis.value(1, 1.5) == 0.0);
        CHECK(basis.derivative(1, 2.0) == 0.0);
    }
}

TEST_CASE("degree one reproduces hat functions") {
    SplineBasis basis(0.0, 1.0, 4, 1);  // h = 1/4, nodes at k/4
    // Interior basis j peaks at x = j/4 and is linear on both sides.
    CHECK(basis.value(2, 0.5) == doctest::Approx(1.0));
    CHECK(basis.value(2, 0.375) == doctest::Approx(0.5));
    CHECK(basis.value(2, 0.625) == doctest::Approx(0.5));
    CHECK(basis.value(2, 0.75) == doctest::Approx(0.0));
    CHECK(basis.derivative(2, 0.3) == doctest::Approx(4.0));
    CHECK(basis.derivative(2, 0.6) == doctest::Approx(-4.0));
}

TEST_CASE("derivatives match finite differences") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (int p = 1; p <= 3; ++p) {
        SplineBasis basis(0.0, 1.0, 6, p);
        for (int j = 0; j < basis.full_dim(); ++j) {
            for (int k = 0; k < 5; ++k) {
                const double x = unif(gen);
                const double fd =
                    (basis.value(j, x + 1e-6) - basis.value(j, x - 1e-6)) / 2e-6;
                CHECK(basis.derivative(j, x) == doctest::Approx(fd).epsilon(1e-5));
            }
        }
    }
}

TEST_CASE("values are continuous across element boundaries") {
    for (int p = 1; p <= 3; ++p) {
        SplineBasis basis(0.0, 1.0, 4, p);
        for (int e = 1; e < 4; ++e) {
            const double xb = e * 0.25;
            for (int j = 0; j < basis.full_dim(); ++j) {
                const double left = basis.value(j, xb - 1e-10);
                const double right = basis.value(j, xb + 1e-10);
                CHECK(left == doctest::Approx(right).epsilon(1e-6));
            }
        }
    }
}

TEST_CASE("only the boundary functions are nonzero at the endpoints") {
    for (int p = 1; p <= 3; ++p) {
        SplineBasis basis(0.0, 1.0, 3, p);
        CHECK(basis.value(0, 0.0) == doctest::Approx(1.0));
        CHECK(basis.value(basis.full_dim() - 1, 1.0) == doctest::Approx(1.0));
        for (int j = 1; j < basis.full_dim() - 1; ++j) {
            CHECK(std::abs(basis.value(j, 0.0)) < 1e-13);
            CHECK(std::abs(basis.value(j, 1.0)) < 1e-13);
        }
    }
}

TEST_CASE("constructor rejects bad input") {
    CHECK_THROWS_AS(SplineBasis(1.0, 0.0, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(SplineBasis(0.0, 1.0, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(SplineBasis(0.0, 1.0, 4, 0), std::invalid_argument);
}
