#pragma once

#include <span>
#include <vector>

#include "pidelab/theta_scheme.hpp"

namespace pidelab {

/// Least-squares slope of log(y) against log(x); fit_residual is the
/// RMS deviation of log(y) from the fitted line.
struct RateFit {
    double slope;
    double fit_residual;
};

RateFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Smooth space-time function with analytically supplied derivatives.
/// d3u_dt3 may be null when the solution is only C^2 in time. The
/// factory probes the time derivatives against central differences at
/// seeded random points (tolerance 1e-5 relative).
struct ExactSolution {
    SpaceTimeFn u;
    SpaceTimeFn du_dt;
    SpaceTimeFn d2u_dt2;
    SpaceTimeFn du_dx;
    SpaceTimeFn d3u_dt3;  // optional

    static ExactSolution checked(SpaceTimeFn u, SpaceTimeFn du_dt,
                                 SpaceTimeFn d2u_dt2, SpaceTimeFn du_dx,
                                 Domain1D domain, double horizon,
                                 SpaceTimeFn d3u_dt3 = nullptr);
};

/// Per-step dual norms of the three residual functionals of the
/// error-equation decomposition, plus their dt-weighted square sums.
struct ResidualReport {
    std::vector<double> r1;  // ||r1^m||_{Vh*}
    std::vector<double> r2;
    std::vector<double> r3;
    double r1_sum_sq;  // dt * sum_m ||r1^m||^2, etc.
    double r2_sum_sq;
    double r3_sum_sq;
};

/// Verifies that xi^m = P_h u(t^m) - u_h^m satisfies the theta-scheme
/// with right-hand side r1 + r2 + r3; returns the max over steps and
/// basis directions of the normalized defect. Exact (up to roundoff)
/// when the bilinear form is constant in time and the run's loads were
/// manufactured from the exact solution.
double xi_scheme_check(const ThetaRun& run, const ExactSolution& exact);

ResidualReport residual_norms(const ThetaRun& run, const ExactSolution& exact);

/// Fitted residual rates: r1_vs_dt from >= 3 runs refined in dt at
/// fixed h (slope of dt*sum||r1||^2 against dt; expected 2 for
/// theta != 1/2 and 4 for theta = 1/2); r3_vs_h from >= 3 runs refined
/// in h at fixed dt. Either span may be empty; its fit is then NaN.
struct ResidualRateReport {
    std::vector<ResidualReport> temporal;
    std::vector<ResidualReport> spatial;
    RateFit r1_vs_dt;
    RateFit r3_vs_h;
};

ResidualRateReport residual_bound_check(std::span<const ThetaRun> temporal_runs,
                                        std::span<const ThetaRun> spatial_runs,
                                        const ExactSolution& exact);

/// Both sides of the discrete stability inequality with the given
/// constants. The energy norm uses the symmetric part of the assembled
/// form.
struct StabilitySides {
    double lhs;
    double rhs;
};

StabilitySides stability_sides(const ThetaRun& run,
                               const StabilityConstants& constants);

/// rhs - lhs; >= 0 for admissible runs.
double stability_margin(const ThetaRun& run, const StabilityConstants& constants);

/// Composite-Simpson approximation of int_0^T ||w(t,.)||_H^2 dt for a
/// space-time callable; used on exact time derivatives when reporting
/// the residual upper bounds.
double integrated_sq_h_norm(const GalerkinSpace& space, const SpaceTimeFn& w,
                            double T, int n_intervals = 64);

}  // namespace pidelab
