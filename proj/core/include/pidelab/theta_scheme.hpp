#pragma once

#include <optional>
#include <vector>

#include "pidelab/assembly.hpp"

namespace pidelab {

/// Equidistant time grid on [0, T] with M steps.
struct TimeGrid {
    double T;
    int M;

    double dt() const { return T / M; }
    double node(int m) const { return T * m / M; }
};

struct ThetaConfig {
    double theta;
    bool enforce_condition = true;
    /// Applied to the explicit-branch dt bound: dt must be <=
    /// safety_factor * bound when enforcement is on.
    double safety_factor = 0.9;
};

/// Admissible constants of the discrete stability estimate
///   ||u^M||_H^2 + dt C1 sum ||u^{m+theta}||_a^2
///     <= ||u^0||_H^2 + dt C2 sum ||f^{m+theta}||_{Vh*}^2.
struct StabilityConstants {
    double mu;
    double C1;
    double C2;
    bool admissible;
};

/// For theta >= 1/2 returns +inf (unconditional); otherwise the slack
/// 2*beta / ((1-2*theta) * Lambda * alpha^2) - dt. Positive iff the
/// step size is admissible.
double check_timestep_condition(double theta, double Lambda, double alpha,
                                double beta, double dt);

/// C1 defaults to the midpoint of its admissible open interval; C2 is
/// its exact lower bound; mu = (1-2*theta)*Lambda*dt for theta < 1/2
/// and 0 otherwise.
StabilityConstants admissible_constants(double theta, double Lambda, double alpha,
                                        double beta, double dt,
                                        std::optional<double> c1_choice = {});

/// Completed theta-scheme run: trajectory u^0..u^M, the per-step
/// bilinear-form evaluation times t* = theta t^{m+1} + (1-theta) t^m,
/// and the blended loads dt-multiplying the right-hand side.
struct ThetaRun {
    const GalerkinSpace* space = nullptr;
    LevyModel model;
    TimeGrid grid;
    ThetaConfig config;
    std::vector<Vector> trajectory;  // size M+1
    std::vector<double> mid_times;   // size M
    std::vector<Vector> mid_loads;   // size M, F^{m+theta}

    /// Coefficients of u^{m+theta} = theta u^{m+1} + (1-theta) u^m.
    Vector blend(int m) const {
        return config.theta * trajectory[m + 1] +
               (1.0 - config.theta) * trajectory[m];
    }
};

/// Runs the scheme with the load at node t^k given by a callable
/// (already paired against the basis); blends F^{m+theta} =
/// theta F^{m+1} + (1-theta) F^m. u0 are the initial coefficients.
ThetaRun run_theta_scheme_loads(const GalerkinSpace& space, const LevyModel& model,
                                const std::function<Vector(double)>& node_load,
                                const Vector& u0, const TimeGrid& grid,
                                const ThetaConfig& config);

/// Full-problem entry point: u^0 = P_h g, loads from f(t, x) by
/// quadrature.
ThetaRun run_theta_scheme(const GalerkinSpace& space, const LevyModel& model,
                          const SpaceTimeFn& f,
                          const std::function<double(double)>& g,
                          const TimeGrid& grid, const ThetaConfig& config);

}  // namespace pidelab
