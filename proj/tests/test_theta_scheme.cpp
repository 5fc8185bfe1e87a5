#include <doctest.h>

#include <stdexcept>

#include <Eigen/LU>
#include <cmath>
#include <limits>

#include "pidelab/theta_scheme.hpp"

using namespace pidelab;

TEST_CASE("time-step condition formula") {
    CHECK(check_timestep_condition(0.5, 1.0, 1.0, 1.0, 10.0) ==
          std::numeric_limits<double>::infinity());
    CHECK(check_timestep_condition(1.0, 5.0, 2.0, 0.3, 100.0) ==
          std::numeric_limits<double>::infinity());
    // theta = 0, beta = alpha = Lambda = 1: bound 2, dt = 1 -> margin 1.
    CHECK(check_timestep_condition(0.0, 1.0, 1.0, 1.0, 1.0) ==
          doctest::Approx(1.0));
    // theta = 1/4, Lambda = 4, alpha = 2, beta = 1: bound 1/4.
    CHECK(check_timestep_condition(0.25, 4.0, 2.0, 1.0, 0.1) ==
          doctest::Approx(0.25 - 0.1));
    CHECK_THROWS_AS(check_timestep_condition(0.0, -1.0, 1.0, 1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_timestep_condition(0.0, 1.0, 0.0, 1.0, 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(check_timestep_condition(0.0, 1.0, 1.0, 1.0, 0.0),
                    std::invalid_argument);
}

TEST_CASE("admissible constants, implicit branch") {
    const StabilityConstants c = admissible_constants(1.0, 1.0, 1.0, 1.0, 0.1, 1.0);
    CHECK(c.mu == 0.0);
    CHECK(c.C1 == 1.0);
    CHECK(c.C2 == doctest::Approx(1.0));
    CHECK(c.admissible);
    CHECK_THROWS_AS(admissible_constants(0.75, 1.0, 1.0, 1.0, 0.1, 2.5),
                    std::invalid_argument);
}

TEST_CASE("admissible constants, explicit branch") {
    // theta = 0, Lambda = 1, dt = 0.1, alpha = beta = 1, C1 = 1:
    // mu = 0.1, C2 = max(0.1, 1.21/0.9 + 0.1).
    const StabilityConstants c = admissible_constants(0.0, 1.0, 1.0, 1.0, 0.1, 1.0);
    CHECK(c.mu == doctest::Approx(0.1));
    CHECK(c.C2 == doctest::Approx(1.21 / 0.9 + 0.1).epsilon(1e-12));

    // dt -> 0 recovers the unconditional constants.
    const StabilityConstants tiny =
        admissible_constants(0.0, 1.0, 1.0, 1.0, 1e-9, 1.0);
    CHECK(tiny.mu == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(tiny.C2 == doctest::Approx(1.0).epsilon(1e-6));

    // Condition violated: bound is 2, dt = 3.
    CHECK_THROWS_AS(admissible_constants(0.0, 1.0, 1.0, 1.0, 3.0),
                    std::invalid_argument);
    // C1 outside the shrunken interval (0, 2 - mu alpha^2/beta).
    CHECK_THROWS_AS(admissible_constants(0.0, 1.0, 1.0, 1.0, 1.5, 0.7),
                    std::invalid_argument);
}

TEST_CASE("homogeneous problem stays at zero") {
    GalerkinSpace space({0.0, 1.0}, 8, 1);
    LevyModel model = LevyModel::diffusion(1.0);
    const ThetaRun run = run_theta_scheme(
        space, model, [](double, double) { return 0.0; },
        [](double) { return 0.0; }, {1.0, 5}, {0.5});
    REQUIRE(run.trajectory.size() == 6);
    for (const Vector& u : run.trajectory) CHECK(u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("initial data is the H-projection of g") {
    GalerkinSpace space({0.0, 1.0}, 8, 2);
    LevyModel model = LevyModel::diffusion(1.0);
    auto g = [](double x) { return std::sin(M_PI * x); };
    const ThetaRun run = run_theta_scheme(
        space, model, [](double, double) { return 0.0; }, g, {0.5, 3}, {1.0});
    CHECK((run.trajectory[0] - space.l2_project(g)).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("single implicit step against a dense oracle") {
    // sigma = sqrt(2), r = 1 makes A the V Gram matrix; one theta = 1
    // step solves (M + dt S) u1 = M u0.
    GalerkinSpace space({0.0, 1.0}, 6, 1);
    LevyModel model = LevyModel::diffusion(std::sqrt(2.0));
    model.rate = [](double) { return 1.0; };
    auto g = [](double x) { return x * (1.0 - x); };
    const double dt = 0.25;
    const ThetaRun run = run_theta_scheme(
        space, model, [](double, double) { return 0.0; }, g, {dt, 1}, {1.0});
    const Vector u0 = space.l2_project(g);
    const Matrix lhs = space.mass() + dt * space.v_gram();
    const Vector oracle = Eigen::PartialPivLU<Matrix>(lhs).solve(space.mass() * u0);
    CHECK((run.trajectory[1] - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("every step satisfies the scheme identity") {
    GalerkinSpace space({0.0, 1.0}, 6, 2, 0.2);
    LevyModel model = LevyModel::diffusion(0.9);
    model.drift = [](double t) { return 0.3 * (1.0 + t); };
    model.rate = [](double) { return 0.1; };
    model.sigma = [](double t) { return 0.7 + 0.2 * t; };
    OperatorAssembler assembler(space, model);

    for (double theta : {0.0, 0.3, 0.5, 1.0}) {
        const TimeGrid grid{0.5, 20};
        auto f = [](double t, double x) { return std::cos(3.0 * x) * (1.0 + t); };
        auto g = [](double x) { return std::sin(M_PI * x); };
        // The identity must hold step by step whether or not the run is
        // stable, so skip the admissibility gate on the explicit branch.
        const ThetaRun run =
            run_theta_scheme(space, model, f, g, grid, {theta, theta >= 0.5, 0.9});
        const double dt = grid.dt();
        for (int m = 0; m < grid.M; ++m) {
            const Vector quot =
                space.mass() * (run.trajectory[m + 1] - run.trajectory[m]) / dt;
            const Vector form = assembler.at(run.mid_times[m]).A * run.blend(m);
            const Vector defect = quot + form - run.mid_loads[m];
            // Normalize by the individual terms: for unstable explicit
            // runs quot + form cancels catastrophically by design.
            const double scale = quot.cwiseAbs().maxCoeff() +
                                 form.cwiseAbs().maxCoeff() +
                                 run.mid_loads[m].cwiseAbs().maxCoeff() + 1e-30;
            CHECK(defect.cwiseAbs().maxCoeff() / scale < 1e-10);
        }
    }
}

TEST_CASE("explicit runs enforce the admissibility bound") {
    GalerkinSpace space({0.0, 1.0}, 16, 1);
    LevyModel model = LevyModel::diffusion(std::sqrt(2.0));
    auto zero = [](double, double) { return 0.0; };
    auto g = [](double x) { return std::sin(M_PI * x); };
    // dt = 0.1 is far above the explicit bound at h = 1/16.
    CHECK_THROWS_AS(
        run_theta_scheme(space, model, zero, g, {1.0, 10}, {0.0, true, 0.9}),
        std::runtime_error);
    // Disabling enforcement lets the run proceed (and blow up or not).
    CHECK_NOTHROW(
        run_theta_scheme(space, model, zero, g, {0.01, 10}, {0.0, false, 0.9}));
}

TEST_CASE("implicit Euler with a large step remains finite") {
    GalerkinSpace space({0.0, 1.0}, 16, 1);
    LevyModel model = LevyModel::diffusion(std::sqrt(2.0), 100.0);
    const ThetaRun run = run_theta_scheme(
        space, model, [](double, double) { return 0.0; },
        [](double x) { return std::sin(M_PI * x); }, {100.0, 4}, {1.0});
    for (const Vector& u : run.trajectory) CHECK(u.allFinite());
}

TEST_CASE("input validation") {
    GalerkinSpace space({0.0, 1.0}, 4, 1);
    LevyModel model = LevyModel::diffusion(1.0);
    auto zero = [](double, double) { return 0.0; };
    auto g = [](double) { return 0.0; };
    CHECK_THROWS_AS(run_theta_scheme(space, model, zero, g, {0.0, 5}, {0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_theta_scheme(space, model, zero, g, {1.0, 0}, {0.5}),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_theta_scheme(space, model, zero, g, {1.0, 5}, {1.5}),
                    std::invalid_argument);
}
