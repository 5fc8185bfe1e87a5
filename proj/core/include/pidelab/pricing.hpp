#pragma once

#include <optional>

#include "pidelab/theta_scheme.hpp"

namespace pidelab {

double norm_cdf(double z);

/// Discounted Black formula on a forward F with total log variance v2.
double black_formula(bool call, double forward, double strike, double v2,
                     double discount);

/// Plain Black-Scholes value for deterministic time-dependent sigma and
/// r, using the integrated variance int sigma^2 dt and integrated rate.
double black_scholes_reference(bool call, double S0, double K,
                               double total_variance, double integrated_rate);

/// Jump-diffusion series price: Poisson mixture over jump counts with
/// time-integrated intensity and variance; tail truncated below 1e-12.
double merton_reference(double S0, double K, double T, const TimeFn& rate,
                        const TimeFn& sigma, const TimeFn& intensity,
                        double jump_mean, double jump_stdev, bool call = true);

/// Down-and-out call by the reflection principle; valid for constant
/// sigma and zero rate.
double down_and_out_call_reference(double S0, double K, double barrier,
                                   double sigma, double T);

/// Market-side model description (calendar time, 0 = today).
struct MarketModel {
    TimeFn sigma;
    TimeFn rate;
    JumpSpec jumps;  // intensity in calendar time
    double T;
};

enum class PayoffKind { call, put };

struct PricingSetup {
    MarketModel market;
    double S0;
    double K;
    PayoffKind payoff = PayoffKind::call;
    /// Knock-out corridor in spot units; unset side defaults to the
    /// truncation boundary.
    std::optional<double> barrier_lo;
    std::optional<double> barrier_hi;
    /// Weight exponent; defaults to -1.5 for calls and 0 for puts.
    std::optional<double> eta;
    int n_elements = 400;
    int time_steps = 200;
    int degree = 1;
    double theta = 0.5;
    double margin_stdevs = 4.0;
};

struct PriceResult {
    std::vector<double> x;          // log-price grid
    std::vector<double> spot;       // e^x
    std::vector<double> price;      // u(T, x)
    std::vector<double> reference;  // oracle curve; empty if unavailable
    double price_at_spot;
    double reference_at_spot;  // NaN if unavailable
    double rel_error;          // NaN if unavailable
    Domain1D domain;
    double eta;
};

/// Solves the pricing problem in the time-to-maturity variable (initial
/// data = payoff) on a 4-stdev truncated log-price domain with the
/// risk-neutral drift implied by sigma, r, and the jump compensator.
PriceResult price_european(const PricingSetup& setup);

/// Same pipeline on the corridor (log barrier_lo, log barrier_hi) with
/// zero Dirichlet data realizing the knock-out.
PriceResult price_barrier(const PricingSetup& setup);

std::vector<PriceResult> sweep_strikes(const PricingSetup& setup,
                                       std::span<const double> strikes);

/// Composite Gauss quadrature of a time callable over [0, T].
double integrate_time(const TimeFn& fn, double T, int pieces = 64);

}  // namespace pidelab
