#include "pidelab/pricing.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pidelab {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double integrate_time(const TimeFn& fn, double T, int pieces) {
    const QuadratureRule rule = gauss_legendre(6);
    double acc = 0.0;
    for (int k = 0; k < pieces; ++k)
        acc += integrate(rule, T * k / pieces, T * (k + 1) / pieces, fn);
    return acc;
}

double black_formula(bool call, double forward, double strike, double v2,
                     double discount) {
    if (strike <= 0.0 || forward <= 0.0)
        throw std::invalid_argument("black_formula: forward and strike must be > 0");
    double value;
    if (v2 <= 0.0) {
        value = std::max(forward - strike, 0.0);
    } else {
        const double v = std::sqrt(v2);
        const double d1 = (std::log(forward / strike) + 0.5 * v2) / v;
        const double d2 = d1 - v;
        value = forward * norm_cdf(d1) - strike * norm_cdf(d2);
    }
    if (!call) value -= forward - strike;  // parity on the forward
    return discount * value;
}

double black_scholes_reference(bool call, double S0, double K,
                               double total_variance, double integrated_rate) {
    const double discount = std::exp(-integrated_rate);
    const double forward = S0 / discount;
    return black_formula(call, forward, K, total_variance, discount);
}

double merton_reference(double S0, double K, double T, const TimeFn& rate,
                        const TimeFn& sigma, const TimeFn& intensity,
                        double jump_mean, double jump_stdev, bool call) {
    const double R = integrate_time(rate, T);
    const double var_bar =
        integrate_time([&sigma](double t) { return sigma(t) * sigma(t); }, T);
    const double lam_T = integrate_time(intensity, T);
    const double zeta = std::exp(jump_mean + 0.5 * jump_stdev * jump_stdev) - 1.0;
    const double discount = std::exp(-R);
    const double x0 = std::log(S0);

    double price = 0.0;
    double pmf = std::exp(-lam_T);
    double cum = 0.0;
    const int k_max = 170;
    for (int k = 0; k <= k_max; ++k) {
        // Conditional forward given k jumps keeps the mixture a
        // martingale at e^{x0 + R}.
        const double forward = std::exp(x0 + R - lam_T * zeta + k * jump_mean +
                                        0.5 * k * jump_stdev * jump_stdev);
        const double v2 = var_bar + k * jump_stdev * jump_stdev;
        price += pmf * black_formula(call, forward, K, v2, discount);
        cum += pmf;
        if (1.0 - cum < 1e-12 && k > lam_T) return price;
        pmf *= lam_T / (k + 1);
    }
    throw std::runtime_error(
        "merton_reference: Poisson series not converged within 170 terms");
}

double down_and_out_call_reference(double S0, double K, double barrier,
                                   double sigma, double T) {
    if (S0 <= barrier) return 0.0;
    const double v2 = sigma * sigma * T;
    const double plain = black_scholes_reference(true, S0, K, v2, 0.0);
    const double mirror =
        black_scholes_reference(true, barrier * barrier / S0, K, v2, 0.0);
    // Zero-rate reflection: the image weight (S/B)^{1 - 2r/sigma^2}
    // reduces to S0/barrier... inverted on the image term.
    return plain - (S0 / barrier) * mirror;
}

namespace {

struct JumpUnitMoments {
    double m_exp;  // int (e^y - 1) n(y) dy
    double m_h;    // int h(y) n(y) dy
};

JumpUnitMoments unit_moments(const JumpSpec& jumps) {
    if (jumps.kind == JumpSpec::Kind::none) return {0.0, 0.0};
    const QuadratureRule rule = gauss_legendre(12);
    const double lo = jumps.mean - 8.0 * jumps.stdev;
    const double hi = jumps.mean + 8.0 * jumps.stdev;
    auto density = [&](double y) {
        const double z = (y - jumps.mean) / jumps.stdev;
        return std::exp(-0.5 * z * z) / (jumps.stdev * std::sqrt(2.0 * M_PI));
    };
    std::vector<double> cuts{lo, hi};
    for (double c : {-1.0, 0.0, 1.0})
        if (c > lo && c < hi) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    JumpUnitMoments m{0.0, 0.0};
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const int pieces = std::max(
            1, static_cast<int>(std::ceil((cuts[s + 1] - cuts[s]) / jumps.stdev)));
        const double step = (cuts[s + 1] - cuts[s]) / pieces;
        for (int k = 0; k < pieces; ++k) {
            const double a = cuts[s] + k * step;
            m.m_exp += integrate(rule, a, a + step, [&](double y) {
                return (std::exp(y) - 1.0) * density(y);
            });
            m.m_h += integrate(rule, a, a + step, [&](double y) {
                return jumps.truncation(y) * density(y);
            });
        }
    }
    return m;
}

struct SolveOutput {
    GalerkinSpace space;
    Vector final_coeffs;
};

// Runs the theta-scheme for the discounted expectation in the
// time-to-maturity variable s (model coefficients evaluated at T - s).
Vector solve_pricing_pde(const GalerkinSpace& space, const PricingSetup& setup) {
    const MarketModel& mkt = setup.market;
    const double T = mkt.T;
    const JumpUnitMoments jm = unit_moments(mkt.jumps);

    LevyModel model;
    model.horizon = T;
    model.sigma = [&mkt, T](double s) { return mkt.sigma(T - s); };
    model.rate = [&mkt, T](double s) { return mkt.rate(T - s); };
    model.kappa = [](double, double) { return 0.0; };
    model.jumps = mkt.jumps;
    if (mkt.jumps.kind == JumpSpec::Kind::merton) {
        TimeFn lam = mkt.jumps.intensity;
        model.jumps.intensity = [lam, T](double s) { return lam(T - s); };
    }
    model.drift = [&mkt, T, jm](double s) {
        const double t = T - s;
        const double sig = mkt.sigma(t);
        const double lam =
            mkt.jumps.kind == JumpSpec::Kind::merton ? mkt.jumps.intensity(t) : 0.0;
        return mkt.rate(t) - 0.5 * sig * sig - lam * (jm.m_exp - jm.m_h);
    };

    const double K = setup.K;
    auto payoff = [K, kind = setup.payoff](double x) {
        const double s = std::exp(x);
        return kind == PayoffKind::call ? std::max(s - K, 0.0)
                                        : std::max(K - s, 0.0);
    };

    const TimeGrid grid{T, setup.time_steps};
    const ThetaConfig cfg{setup.theta, true, 0.9};
    auto zero_load = [dim = space.dim()](double) { return Vector::Zero(dim).eval(); };
    const ThetaRun run = run_theta_scheme_loads(space, model, zero_load,
                                                space.l2_project(payoff), grid, cfg);
    return run.trajectory.back();
}

double default_eta(const PricingSetup& setup) {
    if (setup.eta) return *setup.eta;
    return setup.payoff == PayoffKind::call ? -1.5 : 0.0;
}

double terminal_stdev(const MarketModel& mkt) {
    const double var_bar = integrate_time(
        [&mkt](double t) { return mkt.sigma(t) * mkt.sigma(t); }, mkt.T);
    double jump_var = 0.0;
    if (mkt.jumps.kind == JumpSpec::Kind::merton) {
        const double lam_T = integrate_time(mkt.jumps.intensity, mkt.T);
        jump_var = lam_T * (mkt.jumps.mean * mkt.jumps.mean +
                            mkt.jumps.stdev * mkt.jumps.stdev);
    }
    return std::sqrt(var_bar + jump_var);
}

PriceResult finalize(const GalerkinSpace& space, const Vector& coeffs,
                     const PricingSetup& setup,
                     const std::function<double(double)>& reference_at) {
    PriceResult out;
    out.domain = space.domain();
    out.eta = space.eta();
    const int n = space.n_elements();
    for (int k = 0; k <= n; ++k) {
        const double x = space.domain().x_min + k * space.h();
        out.x.push_back(x);
        out.spot.push_back(std::exp(x));
        out.price.push_back(space.evaluate(coeffs, x));
        if (reference_at) out.reference.push_back(reference_at(std::exp(x)));
    }
    const double x0 = std::log(setup.S0);
    if (x0 <= space.domain().x_min || x0 >= space.domain().x_max)
        throw std::invalid_argument("pricing: spot outside the computational domain");
    out.price_at_spot = space.evaluate(coeffs, x0);
    if (reference_at) {
        out.reference_at_spot = reference_at(setup.S0);
        out.rel_error = std::abs(out.price_at_spot - out.reference_at_spot) /
                        std::max(std::abs(out.reference_at_spot), 1e-12);
    } else {
        out.reference_at_spot = std::numeric_limits<double>::quiet_NaN();
        out.rel_error = std::numeric_limits<double>::quiet_NaN();
    }
    return out;
}

bool is_time_constant(const TimeFn& fn, double T, double* value = nullptr) {
    const double v0 = fn(0.0);
    for (int k = 1; k <= 8; ++k)
        if (std::abs(fn(T * k / 8.0) - v0) > 1e-12 * (std::abs(v0) + 1.0))
            return false;
    if (value) *value = v0;
    return true;
}

void validate_setup(const PricingSetup& setup) {
    if (!(setup.S0 > 0.0) || !(setup.K > 0.0))
        throw std::invalid_argument("pricing: S0 and K must be positive");
    if (!(setup.market.T > 0.0))
        throw std::invalid_argument("pricing: maturity must be positive");
    if (setup.n_elements < 2 || setup.time_steps < 1)
        throw std::invalid_argument("pricing: invalid resolution");
}

}  // namespace

PriceResult price_european(const PricingSetup& setup) {
    validate_setup(setup);
    const double eta = default_eta(setup);
    if (setup.payoff == PayoffKind::call && eta >= -1.0)
        throw std::invalid_argument(
            "price_european: call payoff needs eta < -1 for square-integrability");

    const double x0 = std::log(setup.S0);
    const double half = std::max(
        setup.margin_stdevs * terminal_stdev(setup.market) +
            std::abs(std::log(setup.K / setup.S0)),
        0.5);
    GalerkinSpace space({x0 - half, x0 + half}, setup.n_elements, setup.degree, eta);
    const Vector coeffs = solve_pricing_pde(space, setup);

    const MarketModel& mkt = setup.market;
    const double R = integrate_time(mkt.rate, mkt.T);
    const double var_bar = integrate_time(
        [&mkt](double t) { return mkt.sigma(t) * mkt.sigma(t); }, mkt.T);
    std::function<double(double)> reference;
    const bool call = setup.payoff == PayoffKind::call;
    if (mkt.jumps.kind == JumpSpec::Kind::none) {
        reference = [call, K = setup.K, var_bar, R](double spot) {
            return black_scholes_reference(call, spot, K, var_bar, R);
        };
    } else {
        reference = [&mkt, call, K = setup.K](double spot) {
            return merton_reference(spot, K, mkt.T, mkt.rate, mkt.sigma,
                                    mkt.jumps.intensity, mkt.jumps.mean,
                                    mkt.jumps.stdev, call);
        };
    }
    return finalize(space, coeffs, setup, reference);
}

PriceResult price_barrier(const PricingSetup& setup) {
    validate_setup(setup);
    if (!setup.barrier_lo && !setup.barrier_hi)
        throw std::invalid_argument("price_barrier: no barrier level given");
    const double eta = default_eta(setup);
    const double x0 = std::log(setup.S0);
    const double half = std::max(
        setup.margin_stdevs * terminal_stdev(setup.market) +
            std::abs(std::log(setup.K / setup.S0)),
        0.5);

    double x_lo = x0 - half, x_hi = x0 + half;
    if (setup.barrier_lo) {
        const double b = std::log(*setup.barrier_lo);
        if (b >= x_hi)
            throw std::invalid_argument("price_barrier: lower barrier above domain");
        x_lo = b;
    }
    if (setup.barrier_hi) {
        const double b = std::log(*setup.barrier_hi);
        if (b <= x_lo)
            throw std::invalid_argument("price_barrier: upper barrier below domain");
        x_hi = b;
    }
    if (x0 < x_lo || x0 > x_hi)
        throw std::invalid_argument("price_barrier: spot outside the corridor");

    GalerkinSpace space({x_lo, x_hi}, setup.n_elements, setup.degree, eta);
    const Vector coeffs = solve_pricing_pde(space, setup);

    // Reflection oracle only for the zero-rate constant-volatility
    // down-and-out call.
    std::function<double(double)> reference;
    double sigma0 = 0.0;
    const MarketModel& mkt = setup.market;
    if (setup.payoff == PayoffKind::call && setup.barrier_lo && !setup.barrier_hi &&
        mkt.jumps.kind == JumpSpec::Kind::none &&
        is_time_constant(mkt.sigma, mkt.T, &sigma0) &&
        std::abs(integrate_time(mkt.rate, mkt.T)) < 1e-12) {
        reference = [K = setup.K, B = *setup.barrier_lo, sigma0,
                     T = mkt.T](double spot) {
            return down_and_out_call_reference(spot, K, B, sigma0, T);
        };
    }
    return finalize(space, coeffs, setup, reference);
}

std::vector<PriceResult> sweep_strikes(const PricingSetup& setup,
                                       std::span<const double> strikes) {
    std::vector<PriceResult> out;
    out.reserve(strikes.size());
    PricingSetup s = setup;
    for (double K : strikes) {
        s.K = K;
        out.push_back(price_european(s));
    }
    return out;
}

}  // namespace pidelab
