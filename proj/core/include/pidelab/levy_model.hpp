#pragma once

#include <cmath>
#include <functional>

namespace pidelab {

using TimeFn = std::function<double(double)>;          // t -> value
using SpaceTimeFn = std::function<double(double, double)>;  // (t, x) -> value

/// Jump part of the model. Only finite-activity compound Poisson jumps
/// with lognormal amplitude (Merton) are supported; the Levy measure is
/// F_t(dy) = intensity(t) * Normal(mean, stdev^2)(dy).
struct JumpSpec {
    enum class Kind { none, merton };

    Kind kind = Kind::none;
    TimeFn intensity;  // lambda_J(t) >= 0
    double mean = 0.0;
    double stdev = 0.0;

    /// Truncation function h(y); default y * 1_{|y| <= 1}.
    std::function<double(double)> truncation = [](double y) {
        return (std::abs(y) <= 1.0) ? y : 0.0;
    };

    static JumpSpec none_spec() { return JumpSpec{}; }
    static JumpSpec merton(TimeFn intensity, double mean, double stdev) {
        JumpSpec j;
        j.kind = Kind::merton;
        j.intensity = std::move(intensity);
        j.mean = mean;
        j.stdev = stdev;
        return j;
    }
};

/// Time-inhomogeneous Levy characteristics plus interest and killing
/// rates. All callables must be evaluable for every t in [0, horizon]
/// and reentrant.
struct LevyModel {
    TimeFn sigma;       // volatility, per sqrt(year)
    TimeFn drift;       // b_t, per year
    TimeFn rate;        // r_t, per year
    SpaceTimeFn kappa;  // killing rate kappa_t(x), per year
    JumpSpec jumps;
    double horizon = 1.0;

    static LevyModel diffusion(double sigma_const, double horizon = 1.0) {
        LevyModel m;
        m.sigma = [sigma_const](double) { return sigma_const; };
        m.drift = [](double) { return 0.0; };
        m.rate = [](double) { return 0.0; };
        m.kappa = [](double, double) { return 0.0; };
        m.horizon = horizon;
        return m;
    }
};

}  // namespace pidelab
