#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

#include "pidelab/galerkin_space.hpp"

using namespace pidelab;

namespace {

// Dense composite-Simpson integral, independent of the library
// quadrature.
template <typename Fn>
double simpson(double a, double b, int n, Fn&& fn) {
    double acc = fn(a) + fn(b);
    const double h = (b - a) / n;
    for (int k = 1; k < n; ++k) acc += (k % 2 ? 4.0 : 2.0) * fn(a + k * h);
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("dimension is n*p - 1") {
    CHECK(GalerkinSpace({0.0, 1.0}, 2, 1).dim() == 1);
    CHECK(GalerkinSpace({0.0, 1.0}, 4, 2).dim() == 7);
    CHECK(GalerkinSpace({-1.0, 2.0}, 8, 3).dim() == 23);
}

TEST_CASE("single interior hat: Gram entries and Lambda") {
    // One hat on (0,1) with h = 1/2: (phi,phi) = 1/3, (phi',phi') = 4.
    GalerkinSpace space({0.0, 1.0}, 2, 1);
    REQUIRE(space.dim() == 1);
    CHECK(space.mass()(0, 0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
    CHECK(space.v_gram()(0, 0) == doctest::Approx(13.0 / 3.0).epsilon(1e-13));
    CHECK(space.compute_lambda() == doctest::Approx(13.0).epsilon(1e-12));
    CHECK(space.inverse_ratio() == doctest::Approx(std::sqrt(13.0)).epsilon(1e-12));
}

TEST_CASE("Gram matrices are symmetric positive definite") {
    for (int p = 1; p <= 3; ++p) {
        GalerkinSpace space({0.0, 1.0}, 6, p, 0.3);
        const Matrix& M = space.mass();
        const Matrix& S = space.v_gram();
        CHECK((M - M.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((S - S.transpose()).cwiseAbs().maxCoeff() < 1e-14);
        Eigen::LLT<Matrix> lltM(M), lltS(S);
        CHECK(lltM.info() == Eigen::Success);
        CHECK(lltS.info() == Eigen::Success);
    }
}

TEST_CASE("weighted mass entry matches an independent integral") {
    const double eta = 0.7;
    GalerkinSpace space({0.0, 1.0}, 2, 1, eta);
    // Single hat with peak at 1/2.
    auto hat = [](double x) { return x < 0.5 ? 2.0 * x : 2.0 * (1.0 - x); };
    const double oracle = simpson(0.0, 1.0, 4000, [&](double x) {
        return hat(x) * hat(x) * std::exp(2.0 * eta * x);
    });
    // The assembly rule is Gauss with 2(p+1) points per element, which
    // is not exact against the exponential weight; allow its residual.
    CHECK(space.mass()(0, 0) == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("projection reproduces members of the space") {
    GalerkinSpace space({0.0, 1.0}, 5, 2);
    std::mt19937 gen(3);
    std::normal_distribution<double> gauss;
    Vector c(space.dim());
    for (int j = 0; j < space.dim(); ++j) c[j] = gauss(gen);
    const Vector back =
        space.l2_project([&](double x) { return space.evaluate(c, x); });
    CHECK((back - c).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("norm identities on coefficient vectors") {
    GalerkinSpace space({0.0, 1.0}, 4, 2, 0.2);
    std::mt19937 gen(5);
    std::normal_distribution<double> gauss;
    Vector c(space.dim());
    for (int j = 0; j < space.dim(); ++j) c[j] = gauss(gen);
    CHECK(space.norm_H(c) ==
          doctest::Approx(std::sqrt(c.dot(space.mass() * c))).epsilon(1e-13));
    CHECK(space.norm_V(c) ==
          doctest::Approx(std::sqrt(c.dot(space.v_gram() * c))).epsilon(1e-13));
    // The dual norm of S c is the V-norm of c.
    CHECK(space.dual_norm(space.v_gram() * c) ==
          doctest::Approx(space.norm_V(c)).epsilon(1e-12));
    // H-norm bounds the dual norm: ||v||_{Vh*} <= ||v||_H via M c.
    CHECK(space.dual_norm(space.mass() * c) <= space.norm_H(c) + 1e-12);
}

TEST_CASE("Lambda equals the largest eigenvalue of the (S, M) pencil") {
    GalerkinSpace space({0.0, 1.0}, 6, 2);
    const double ratio = space.inverse_ratio();
    CHECK(space.compute_lambda() == doctest::Approx(ratio * ratio).epsilon(1e-10));
}

TEST_CASE("projection error rates for sin(pi x)") {
    auto g = [](double x) { return std::sin(M_PI * x); };
    auto dg = [](double x) { return M_PI * std::cos(M_PI * x); };
    for (int p = 1; p <= 2; ++p) {
        std::vector<double> hs, l2, h1;
        for (int n : {8, 16, 32, 64}) {
            GalerkinSpace space({0.0, 1.0}, n, p);
            const Vector c = space.l2_project(g);
            auto e = [&](double x) { return g(x) - space.evaluate(c, x); };
            auto de = [&](double x) {
                return dg(x) - space.evaluate_derivative(c, x);
            };
            hs.push_back(space.h());
            l2.push_back(std::sqrt(space.h_inner_exact(e, e)));
            h1.push_back(std::sqrt(space.h_inner_exact(de, de)));
        }
        auto slope = [](const std::vector<double>& x, const std::vector<double>& y) {
            const double num = std::log(y.front() / y.back());
            const double den = std::log(x.front() / x.back());
            return num / den;
        };
        CHECK(slope(hs, l2) == doctest::Approx(p + 1.0).epsilon(0.08));
        CHECK(slope(hs, h1) == doctest::Approx(static_cast<double>(p)).epsilon(0.08));
    }
}

TEST_CASE("fractional smoothness index gives an SPD, ordered Gram") {
    GalerkinSpace lo({0.0, 1.0}, 8, 1, 0.0, 0.6);
    GalerkinSpace hi({0.0, 1.0}, 8, 1, 0.0, 1.4);
    std::mt19937 gen(9);
    std::normal_distribution<double> gauss;
    for (int k = 0; k < 10; ++k) {
        Vector c(lo.dim());
        for (int j = 0; j < lo.dim(); ++j) c[j] = gauss(gen);
        const double qlo = c.dot(lo.v_gram() * c);
        const double qhi = c.dot(hi.v_gram() * c);
        CHECK(qlo > 0.0);
        // (1+|xi|)^{2 rho} grows with rho pointwise.
        CHECK(qhi >= qlo * (1.0 - 1e-10));
    }
}

TEST_CASE("inverse-constant fit needs at least three spaces") {
    GalerkinSpace a({0.0, 1.0}, 4, 1), b({0.0, 1.0}, 8, 1), c({0.0, 1.0}, 16, 1);
    const GalerkinSpace* two[] = {&a, &b};
    CHECK_THROWS_AS(estimate_inverse_constant(two), std::invalid_argument);
    const GalerkinSpace* three[] = {&a, &b, &c};
    const double c_ip = estimate_inverse_constant(three);
    CHECK(c_ip > 0.0);
    // h-independence up to a modest factor.
    CHECK(c_ip <= 1.5 * a.inverse_ratio() * a.h());
}

TEST_CASE("constructor rejects bad input") {
    CHECK_THROWS_AS(GalerkinSpace({1.0, 0.0}, 4, 1), std::invalid_argument);
    CHECK_THROWS_AS(GalerkinSpace({0.0, 1.0}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(GalerkinSpace({0.0, 1.0}, 4, 1, 0.0, 2.5), std::invalid_argument);
    CHECK_THROWS_AS(GalerkinSpace({0.0, 1.0}, 4, 1, 0.0, -1.0), std::invalid_argument);
}
