#pragma once

#include "pidelab/theta_scheme.hpp"

namespace pidelab {

/// Exponential-shift transform data: the run on the shifted model uses
/// source e^{-lambda t} f and unchanged initial data; solutions map
/// back by e^{+lambda t}. cond_factor = e^{lambda T} reports the
/// conditioning cost of the weighting (surfaced, not mitigated).
struct GardingDescriptor {
    double lambda;
    double cond_factor;
};

/// Smallest recommended shift: the most negative eigenvalue of the
/// symmetrized form against the H Gram matrix over sampled times, plus
/// a 0.1 margin (the shift enters through the H norm, so the defect is
/// measured there rather than in V-geometry).
double suggest_lambda(const GalerkinSpace& space, const LevyModel& model,
                      int n_samples = 9);

/// Returns the model with killing rate kappa + lambda and the transform
/// descriptor. Throws if the shifted form is still not coercive on the
/// given space.
std::pair<LevyModel, GardingDescriptor> coercify(const GalerkinSpace& space,
                                                 const LevyModel& model,
                                                 double lambda);

/// Source of the shifted problem: f_lambda(t, x) = e^{-lambda t} f(t, x).
SpaceTimeFn shift_source(SpaceTimeFn f, double lambda);

/// u^m = e^{lambda t^m} u_lambda^m componentwise over the trajectory.
std::vector<Vector> map_back(const std::vector<Vector>& trajectory_lambda,
                             const TimeGrid& grid, double lambda);

}  // namespace pidelab
