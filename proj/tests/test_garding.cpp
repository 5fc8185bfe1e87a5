#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "pidelab/garding.hpp"
#include "pidelab/stability_lab.hpp"

using namespace pidelab;

namespace {

LevyModel sunken_model(double c) {
    LevyModel model = LevyModel::diffusion(std::sqrt(2.0));
    model.kappa = [c](double, double) { return -c; };
    return model;
}

}  // namespace

TEST_CASE("zero shift is the identity transformation") {
    GalerkinSpace space({0.0, 1.0}, 8, 1);
    LevyModel model = LevyModel::diffusion(1.0);
    auto [shifted, desc] = coercify(space, model, 0.0);
    CHECK(desc.lambda == 0.0);
    CHECK(desc.cond_factor == doctest::Approx(1.0));
    const Matrix A0 = assemble_stiffness(space, model, 0.3).A;
    const Matrix A1 = assemble_stiffness(space, shifted, 0.3).A;
    CHECK((A1 - A0).cwiseAbs().maxCoeff() == 0.0);

    std::vector<Vector> traj{Vector::Ones(space.dim()), Vector::Ones(space.dim())};
    const auto back = map_back(traj, {1.0, 1}, 0.0);
    CHECK((back[1] - traj[1]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("shift acts on the operator as + lambda M") {
    GalerkinSpace space({0.0, 1.0}, 8, 2, 0.3);
    LevyModel model = sunken_model(7.0);
    const double lambda = 9.0;
    auto [shifted, desc] = coercify(space, model, lambda);
    for (double t : {0.0, 0.5, 1.0}) {
        const Matrix A = assemble_stiffness(space, model, t).A;
        const Matrix As = assemble_stiffness(space, shifted, t).A;
        CHECK((As - A - lambda * space.mass()).cwiseAbs().maxCoeff() <
              1e-14 * As.cwiseAbs().maxCoeff());
    }
    CHECK(desc.cond_factor == doctest::Approx(std::exp(lambda)));
}

TEST_CASE("exact cancellation restores the diffusion-only constants") {
    GalerkinSpace space({0.0, 1.0}, 8, 1);
    const double c = 15.0;
    LevyModel sick = sunken_model(c);
    const FormBounds before = estimate_continuity_coercivity(space, sick, 5);
    CHECK_FALSE(before.coercive);

    auto [healed, desc] = coercify(space, sick, c);
    const FormBounds after = estimate_continuity_coercivity(space, healed, 5);
    const FormBounds plain =
        estimate_continuity_coercivity(space, LevyModel::diffusion(std::sqrt(2.0)), 5);
    CHECK(after.coercive);
    CHECK(after.beta_hat == doctest::Approx(plain.beta_hat).epsilon(1e-8));
    CHECK(after.alpha_hat == doctest::Approx(plain.alpha_hat).epsilon(1e-8));
}

TEST_CASE("continuity constant grows at most by the shift") {
    GalerkinSpace space({0.0, 1.0}, 10, 1);
    LevyModel model = sunken_model(12.0);
    const double lambda = 14.0;
    const FormBounds before = estimate_continuity_coercivity(space, model, 5);
    auto [shifted, desc] = coercify(space, model, lambda);
    const FormBounds after = estimate_continuity_coercivity(space, shifted, 5);
    CHECK(after.alpha_hat <= before.alpha_hat + lambda + 1e-10);
}

TEST_CASE("suggested shift renders the form coercive") {
    GalerkinSpace space({0.0, 1.0}, 8, 1);
    LevyModel model = sunken_model(25.0);
    const double lambda = suggest_lambda(space, model);
    CHECK(lambda > 0.0);
    auto [shifted, desc] = coercify(space, model, lambda);
    CHECK(estimate_continuity_coercivity(space, shifted, 5).coercive);
    // A clearly insufficient shift is rejected.
    CHECK_THROWS_AS(coercify(space, model, 0.5), std::runtime_error);
    CHECK_THROWS_AS(coercify(space, model, -1.0), std::invalid_argument);
}

TEST_CASE("map-back applies the exponential node factors") {
    const int dim = 3;
    std::vector<Vector> traj{Vector::Ones(dim), Vector::Ones(dim),
                             Vector::Ones(dim)};
    const auto back = map_back(traj, {1.0, 2}, 1.0);
    CHECK(back[0][0] == doctest::Approx(1.0));
    CHECK(back[1][0] == doctest::Approx(std::exp(0.5)));
    CHECK(back[2][0] == doctest::Approx(std::exp(1.0)));
}

TEST_CASE("source shift carries the exponential damping") {
    auto f = shift_source([](double t, double x) { return t + x; }, 2.0);
    CHECK(f(0.0, 0.3) == doctest::Approx(0.3));
    CHECK(f(1.0, 0.5) == doctest::Approx(std::exp(-2.0) * 1.5));
}

TEST_CASE("shifted pipeline tracks the direct non-coercive run") {
    // kappa = -c leaves the theta = 1 scheme solvable directly; the two
    // discrete solutions differ by the temporal order.
    GalerkinSpace space({0.0, 1.0}, 16, 1);
    const double c = 15.0;
    LevyModel sick = sunken_model(c);
    auto [healed, desc] = coercify(space, sick, c + 0.1);
    auto g = [](double x) { return std::sin(M_PI * x); };

    std::vector<double> dts, diffs;
    for (int M : {8, 16, 32, 64}) {
        const TimeGrid grid{0.5, M};
        auto zero = [](double, double) { return 0.0; };
        const ThetaRun direct =
            run_theta_scheme(space, sick, zero, g, grid, {1.0});
        const ThetaRun lifted = run_theta_scheme(
            space, healed, shift_source(zero, desc.lambda), g, grid, {1.0});
        const auto mapped = map_back(lifted.trajectory, grid, desc.lambda);
        dts.push_back(grid.dt());
        diffs.push_back(space.norm_H(mapped.back() - direct.trajectory.back()));
    }
    const RateFit fit = fit_loglog(dts, diffs);
    CHECK(fit.slope == doctest::Approx(1.0).epsilon(0.2));
}
