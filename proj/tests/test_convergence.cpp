#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "pidelab/convergence.hpp"

using namespace pidelab;

namespace {

const Domain1D kUnit{0.0, 1.0};

ExactSolution decaying_sine() {
    return ExactSolution::checked(
        [](double t, double x) { return std::exp(-t) * std::sin(M_PI * x); },
        [](double t, double x) { return -std::exp(-t) * std::sin(M_PI * x); },
        [](double t, double x) { return std::exp(-t) * std::sin(M_PI * x); },
        [](double t, double x) { return M_PI * std::exp(-t) * std::cos(M_PI * x); },
        kUnit, 1.0,
        [](double t, double x) { return -std::exp(-t) * std::sin(M_PI * x); });
}

}  // namespace

TEST_CASE("log-log fitting recovers planted slopes") {
    std::vector<double> x{1.0, 0.5, 0.25, 0.125};
    std::vector<double> y;
    for (double xi : x) y.push_back(3.0 * xi * xi);
    const RateFit f = fit_loglog(x, y);
    CHECK(f.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.fit_residual < 1e-12);
    CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0},
                               std::vector<double>{1.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog(std::vector<double>{1.0, -1.0},
                               std::vector<double>{1.0, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("manufactured load reduces to the known weak form") {
    // u = sin(pi x) constant in time, sigma = sqrt(2), everything else
    // zero: F_i = pi^2 (sin(pi .), phi_i).
    GalerkinSpace space({0.0, 1.0}, 8, 2);
    LevyModel model = LevyModel::diffusion(std::sqrt(2.0));
    const ExactSolution exact = ExactSolution::checked(
        [](double, double x) { return std::sin(M_PI * x); },
        [](double, double) { return 0.0; }, [](double, double) { return 0.0; },
        [](double, double x) { return M_PI * std::cos(M_PI * x); }, kUnit, 1.0,
        [](double, double) { return 0.0; });
    auto load = manufacture_node_load(space, model, exact);
    const Vector got = load(0.4);
    const Vector want =
        M_PI * M_PI *
        space.h_load([](double x) { return std::sin(M_PI * x); });
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("zero solution manufactures a zero load") {
    GalerkinSpace space({0.0, 1.0}, 6, 1);
    LevyModel model = LevyModel::diffusion(1.0);
    ExactSolution zero;
    zero.u = [](double, double) { return 0.0; };
    zero.du_dt = [](double, double) { return 0.0; };
    zero.du_dx = [](double, double) { return 0.0; };
    auto load = manufacture_node_load(space, model, zero);
    CHECK(load(0.5).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("joint refinement reproduces the first-order energy rate") {
    StudyConfig cfg{.domain = kUnit,
                    .degree = 1,
                    .model = LevyModel::diffusion(std::sqrt(2.0)),
                    .exact = decaying_sine(),
                    .theta = 1.0,
                    .n_levels = {8, 16, 32},
                    .m_levels = {8, 16, 32},
                    .coupling = Coupling::joint};
    const ConvergenceReport report = run_study(cfg);
    REQUIRE(report.rows.size() == 3);
    CHECK(report.axis == "h");
    CHECK(report.err_energy_rate.slope == doctest::Approx(1.0).epsilon(0.15));
    for (std::size_t l = 1; l < report.rows.size(); ++l) {
        CHECK(report.rows[l].err_H_final < report.rows[l - 1].err_H_final);
        CHECK(report.rows[l].err_energy_sum < report.rows[l - 1].err_energy_sum);
    }
}

TEST_CASE("time-axis refinement separates the theta orders") {
    StudyConfig cfg{.domain = kUnit,
                    .degree = 1,
                    .model = LevyModel::diffusion(std::sqrt(2.0)),
                    .exact = decaying_sine(),
                    .theta = 1.0,
                    .n_levels = {192},
                    .m_levels = {4, 8, 16, 32},
                    .coupling = Coupling::refine_dt_only};
    ConvergenceReport euler = run_study(cfg);
    CHECK(euler.axis == "dt");
    CHECK(euler.err_H_rate.slope == doctest::Approx(1.0).epsilon(0.15));

    cfg.theta = 0.5;
    cfg.m_levels = {2, 4, 8, 16};
    ConvergenceReport midpoint = run_study(cfg);
    CHECK(midpoint.err_H_rate.slope == doctest::Approx(2.0).epsilon(0.12));
}

TEST_CASE("space-resident time-linear data makes the scheme exact") {
    // u(t,x) = (1+t) x (1-x) lies in every degree-2 space.
    StudyConfig cfg{.domain = kUnit,
                    .degree = 2,
                    .model = LevyModel::diffusion(1.0),
                    .exact = ExactSolution::checked(
                        [](double t, double x) { return (1.0 + t) * x * (1.0 - x); },
                        [](double, double x) { return x * (1.0 - x); },
                        [](double, double) { return 0.0; },
                        [](double t, double x) { return (1.0 + t) * (1.0 - 2.0 * x); },
                        kUnit, 1.0, [](double, double) { return 0.0; }),
                    .theta = 0.5,
                    .n_levels = {4, 6, 8},
                    .m_levels = {4, 6, 8},
                    .coupling = Coupling::joint,
                    .projection_gate = true};
    const ConvergenceReport report = run_study(cfg);
    for (const ConvergenceRow& row : report.rows) {
        CHECK(row.err_H_final < 1e-9);
        CHECK(row.err_energy_sum < 1e-7);
    }
}

TEST_CASE("configuration validation") {
    StudyConfig cfg{.domain = kUnit,
                    .degree = 1,
                    .model = LevyModel::diffusion(1.0),
                    .exact = decaying_sine(),
                    .theta = 1.0,
                    .n_levels = {8, 16},
                    .m_levels = {8, 16},
                    .coupling = Coupling::joint};
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
    cfg.n_levels = {8, 16, 16};
    cfg.m_levels = {8, 16, 32};
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
    cfg.n_levels = {8, 16, 32};
    cfg.m_levels = {8, 16};
    CHECK_THROWS_AS(run_study(cfg), std::invalid_argument);
}
