// Command-line front end: solve / converge / stability / price over a
// flat key-value config. Exit codes: 0 success, 1 config error, 2
// numerical failure, 3 acceptance-check failure.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

#include "pidelab/convergence.hpp"
#include "pidelab/garding.hpp"
#include "pidelab/pricing.hpp"
#include "pidelab/run_config.hpp"

namespace fs = std::filesystem;
using namespace pidelab;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitAcceptance = 3;

struct AcceptanceFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    out << std::setprecision(12);
    return out;
}

SpaceTimeFn fn_of(const Expr& e) {
    return [e](double t, double x) { return e(t, x); };
}

// Shared diagnostics block of run_manifest.txt.
void write_manifest(const fs::path& dir, const KeyValueConfig& cfg,
                    const ResolvedProblem& prob, bool with_diagnostics) {
    std::ofstream out = open_out(dir, "run_manifest.txt");
    out << "# resolved configuration\n";
    for (const auto& [k, v] : cfg.entries()) out << k << " = " << v << "\n";

    if (!with_diagnostics) return;
    out << "\n# discrete diagnostics\n";
    GalerkinSpace space(prob.domain, prob.n_elements, prob.degree, prob.eta,
                        prob.rho);
    const double lambda = space.compute_lambda();
    const FormBounds fb = estimate_continuity_coercivity(space, prob.model, 9);
    out << "Lambda = " << lambda << "\n";
    out << "alpha_hat = " << fb.alpha_hat << "\n";
    out << "beta_hat = " << fb.beta_hat << "\n";
    const double dt = prob.T / prob.time_steps;
    if (fb.coercive) {
        const double margin = check_timestep_condition(prob.theta, lambda,
                                                       fb.alpha_hat, fb.beta_hat, dt);
        out << "dt = " << dt << "\n";
        out << "dt_bound_margin = " << margin << "\n";
        if (prob.theta >= 0.5 || margin > 0.0) {
            const StabilityConstants c = admissible_constants(
                prob.theta, lambda, fb.alpha_hat, fb.beta_hat, dt);
            out << "mu = " << c.mu << "\n";
            out << "C1 = " << c.C1 << "\n";
            out << "C2 = " << c.C2 << "\n";
        }
    } else {
        out << "coercive = false\n";
        out << "suggested_garding_lambda = " << std::max(0.0, -fb.beta_hat) + 0.1
            << "\n";
    }
    const double garding_lambda = cfg.get_number("garding.lambda", 0.0);
    if (garding_lambda > 0.0)
        out << "garding.cond_factor = " << std::exp(garding_lambda * prob.T) << "\n";
}

ExactSolution exact_from_config(const KeyValueConfig& cfg, const Domain1D& domain,
                                double T) {
    const Expr u = cfg.get_expr("exact.u", cfg.require_string("exact.u"));
    const Expr ut = Expr::parse(cfg.require_string("exact.du_dt"));
    const Expr utt = Expr::parse(cfg.require_string("exact.d2u_dt2"));
    const Expr ux = Expr::parse(cfg.require_string("exact.du_dx"));
    SpaceTimeFn uttt;
    if (cfg.has("exact.d3u_dt3"))
        uttt = fn_of(Expr::parse(cfg.require_string("exact.d3u_dt3")));
    return ExactSolution::checked(fn_of(u), fn_of(ut), fn_of(utt), fn_of(ux),
                                  domain, T, uttt);
}

int run_solve(const KeyValueConfig& cfg, const fs::path& out_dir) {
    ResolvedProblem prob = resolve_problem(cfg);
    const double garding_lambda = cfg.get_number("garding.lambda", 0.0);

    GalerkinSpace space(prob.domain, prob.n_elements, prob.degree, prob.eta,
                        prob.rho);
    const Expr f = cfg.get_expr("solve.f", "0");
    const Expr g = cfg.get_expr("solve.g", "0");

    SpaceTimeFn source = fn_of(f);
    LevyModel model = prob.model;
    if (garding_lambda > 0.0) {
        auto [shifted, desc] = coercify(space, prob.model, garding_lambda);
        model = shifted;
        source = shift_source(source, desc.lambda);
    }

    const TimeGrid grid{prob.T, prob.time_steps};
    const ThetaConfig tc{prob.theta, prob.enforce_condition, prob.safety_factor};
    ThetaRun run = run_theta_scheme(
        space, model, source, [&g](double x) { return g(0.0, x); }, grid, tc);
    if (garding_lambda > 0.0)
        run.trajectory = map_back(run.trajectory, grid, garding_lambda);

    std::ofstream out = open_out(out_dir, "trajectory.csv");
    out << "m,t";
    for (int j = 0; j < space.dim(); ++j) out << ",c" << j;
    out << "\n";
    for (int m = 0; m <= grid.M; ++m) {
        out << m << "," << grid.node(m);
        for (int j = 0; j < space.dim(); ++j) out << "," << run.trajectory[m][j];
        out << "\n";
    }
    write_manifest(out_dir, cfg, prob, true);
    return 0;
}

int run_converge(const KeyValueConfig& cfg, const fs::path& out_dir) {
    ResolvedProblem prob = resolve_problem(cfg);

    StudyConfig study{.domain = prob.domain,
                      .degree = prob.degree,
                      .eta = prob.eta,
                      .rho = prob.rho,
                      .model = prob.model,
                      .exact = exact_from_config(cfg, prob.domain, prob.T),
                      .theta = prob.theta,
                      .n_levels = cfg.get_int_list("study.n_levels"),
                      .m_levels = cfg.get_int_list("study.m_levels"),
                      .enforce_condition = prob.enforce_condition};
    const std::string axis = cfg.get_string("study.axis", "joint");
    if (axis == "h")
        study.coupling = Coupling::refine_h_only;
    else if (axis == "dt")
        study.coupling = Coupling::refine_dt_only;
    else if (axis == "joint")
        study.coupling = Coupling::joint;
    else
        throw std::invalid_argument("study.axis must be h, dt, or joint");

    ConvergenceReport report = run_study(study);

    // Test hook: a constant error floor destroys the fitted rates and
    // must trip the acceptance gate.
    const double perturb = cfg.get_number("debug.perturb_solution", 0.0);
    if (perturb != 0.0) {
        std::vector<double> xs, eh, ee, ev;
        for (ConvergenceRow& row : report.rows) {
            row.err_H_final += perturb;
            row.err_energy_sum += perturb;
            row.err_V_sum += perturb;
            xs.push_back(report.axis == "h" ? row.h : row.dt);
            eh.push_back(row.err_H_final);
            ee.push_back(row.err_energy_sum);
            ev.push_back(row.err_V_sum);
        }
        report.err_H_rate = fit_loglog(xs, eh);
        report.err_energy_rate = fit_loglog(xs, ee);
        report.err_V_rate = fit_loglog(xs, ev);
    }

    std::ofstream conv = open_out(out_dir, "convergence.csv");
    conv << "h,dt,err_H_final,err_energy_sum,err_V_sum\n";
    for (const ConvergenceRow& row : report.rows)
        conv << row.h << "," << row.dt << "," << row.err_H_final << ","
             << row.err_energy_sum << "," << row.err_V_sum << "\n";

    std::ofstream rates = open_out(out_dir, "rates.csv");
    rates << "axis,quantity,slope,fit_residual\n";
    rates << report.axis << ",err_H_final," << report.err_H_rate.slope << ","
          << report.err_H_rate.fit_residual << "\n";
    rates << report.axis << ",err_energy_sum," << report.err_energy_rate.slope
          << "," << report.err_energy_rate.fit_residual << "\n";
    rates << report.axis << ",err_V_sum," << report.err_V_rate.slope << ","
          << report.err_V_rate.fit_residual << "\n";

    write_manifest(out_dir, cfg, prob, true);

    const double tol = cfg.get_number("study.rate_tol", 0.25);
    if (cfg.has("study.expect_H_rate")) {
        const double want = cfg.require_number("study.expect_H_rate");
        if (std::abs(report.err_H_rate.slope - want) > tol)
            throw AcceptanceFailure("H-error rate " +
                                    std::to_string(report.err_H_rate.slope) +
                                    " outside " + std::to_string(want) + " +- " +
                                    std::to_string(tol));
    }
    if (cfg.has("study.expect_energy_rate")) {
        const double want = cfg.require_number("study.expect_energy_rate");
        if (std::abs(report.err_energy_rate.slope - want) > tol)
            throw AcceptanceFailure("energy-error rate " +
                                    std::to_string(report.err_energy_rate.slope) +
                                    " outside " + std::to_string(want) + " +- " +
                                    std::to_string(tol));
    }
    return 0;
}

int run_stability(const KeyValueConfig& cfg, const fs::path& out_dir) {
    ResolvedProblem prob = resolve_problem(cfg);
    GalerkinSpace space(prob.domain, prob.n_elements, prob.degree, prob.eta,
                        prob.rho);

    const double lambda = space.compute_lambda();
    std::vector<double> thetas = cfg.get_number_list("stability.thetas");
    if (thetas.empty()) thetas = {0.0, 0.25, 0.5, 1.0};
    const int runs_per_theta = cfg.get_int("stability.runs", 5);
    std::mt19937 gen(cfg.get_int("stability.seed", 42));
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::ofstream out = open_out(out_dir, "stability.csv");
    out << "run,theta,steps,lhs,rhs,margin\n";

    double min_margin = std::numeric_limits<double>::infinity();
    int run_idx = 0;
    for (double theta : thetas) {
        // Per-step evaluation times depend on M, which for explicit
        // schemes depends on the bounds; sample on a uniform grid.
        const FormBounds fb = estimate_continuity_coercivity(space, prob.model, 17);
        if (!fb.coercive)
            throw std::runtime_error("stability: form not coercive; use a shift");

        int M = prob.time_steps;
        if (theta < 0.5) {
            const double bound =
                2.0 * fb.beta_hat /
                ((1.0 - 2.0 * theta) * lambda * fb.alpha_hat * fb.alpha_hat);
            M = std::max(M, static_cast<int>(std::ceil(
                                prob.T / (prob.safety_factor * bound))));
        }
        const TimeGrid grid{prob.T, M};
        const StabilityConstants constants = admissible_constants(
            theta, lambda, fb.alpha_hat, fb.beta_hat, grid.dt());

        for (int k = 0; k < runs_per_theta; ++k, ++run_idx) {
            Vector u0(space.dim()), fvec(space.dim());
            for (int j = 0; j < space.dim(); ++j) {
                u0[j] = gauss(gen);
                fvec[j] = gauss(gen);
            }
            const double omega = 1.0 + 3.0 * std::abs(gauss(gen));
            auto node_load = [&](double t) {
                return Vector(std::sin(omega * t + 0.3) * fvec);
            };
            const ThetaConfig tc{theta, prob.enforce_condition,
                                 prob.safety_factor};
            const ThetaRun run = run_theta_scheme_loads(space, prob.model,
                                                        node_load, u0, grid, tc);
            const StabilitySides sides = stability_sides(run, constants);
            const double margin = sides.rhs - sides.lhs;
            min_margin = std::min(min_margin, margin);
            out << run_idx << "," << theta << "," << M << "," << sides.lhs << ","
                << sides.rhs << "," << margin << "\n";
        }
    }

    write_manifest(out_dir, cfg, prob, true);
    if (min_margin < 0.0)
        throw AcceptanceFailure("stability margin negative: " +
                                std::to_string(min_margin));
    return 0;
}

int run_price(const KeyValueConfig& cfg, const fs::path& out_dir) {
    ResolvedProblem prob = resolve_problem(cfg);

    PricingSetup setup;
    const Expr sigma = cfg.get_expr("model.sigma", "0.2");
    const Expr rate = cfg.get_expr("model.rate", "0");
    setup.market.sigma = [sigma](double t) { return sigma(t); };
    setup.market.rate = [rate](double t) { return rate(t); };
    setup.market.jumps = prob.model.jumps;
    setup.market.T = prob.T;
    setup.S0 = cfg.require_number("payoff.S0");
    setup.K = cfg.require_number("payoff.strike");
    if (!(setup.K > 0.0))
        throw std::invalid_argument("payoff.strike must be positive");
    const std::string kind = cfg.get_string("payoff.kind", "call");
    if (kind == "call")
        setup.payoff = PayoffKind::call;
    else if (kind == "put")
        setup.payoff = PayoffKind::put;
    else
        throw std::invalid_argument("payoff.kind must be call or put");
    if (cfg.has("payoff.barrier_lo"))
        setup.barrier_lo = cfg.require_number("payoff.barrier_lo");
    if (cfg.has("payoff.barrier_hi"))
        setup.barrier_hi = cfg.require_number("payoff.barrier_hi");
    if (cfg.has("space.eta")) setup.eta = cfg.require_number("space.eta");
    setup.n_elements = cfg.get_int("space.n", 400);
    setup.degree = cfg.get_int("space.degree", 1);
    setup.time_steps = cfg.get_int("grid.steps", 200);
    setup.theta = cfg.get_number("grid.theta", 0.5);
    setup.margin_stdevs = cfg.get_number("space.margin_stdevs", 4.0);

    const bool barrier = setup.barrier_lo || setup.barrier_hi;
    const PriceResult result = barrier ? price_barrier(setup) : price_european(setup);

    std::ofstream out = open_out(out_dir, "price_curve.csv");
    out << "x,S,price,reference,rel_error\n";
    for (std::size_t k = 0; k < result.x.size(); ++k) {
        out << result.x[k] << "," << result.spot[k] << "," << result.price[k]
            << ",";
        if (!result.reference.empty()) {
            const double ref = result.reference[k];
            out << ref << ","
                << std::abs(result.price[k] - ref) / std::max(std::abs(ref), 1e-12);
        } else {
            out << "nan,nan";
        }
        out << "\n";
    }

    std::ofstream summary = open_out(out_dir, "price_summary.txt");
    summary << "price_at_spot = " << result.price_at_spot << "\n";
    summary << "reference_at_spot = " << result.reference_at_spot << "\n";
    summary << "rel_error = " << result.rel_error << "\n";

    write_manifest(out_dir, cfg, prob, false);

    if (cfg.has("price.max_rel_error") && std::isfinite(result.rel_error)) {
        const double tol = cfg.require_number("price.max_rel_error");
        if (result.rel_error > tol)
            throw AcceptanceFailure("price error " +
                                    std::to_string(result.rel_error) +
                                    " above tolerance " + std::to_string(tol));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Galerkin solver and verification lab for parabolic "
                 "integro-differential pricing problems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    std::vector<std::string> overrides;
    for (const char* name : {"solve", "converge", "stability", "price"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--override", overrides, "extra section.key=value pairs");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        KeyValueConfig cfg = KeyValueConfig::load(config_path);
        for (const std::string& o : overrides) cfg.apply_override(o);

        const std::string command = app.get_subcommands().front()->get_name();
        if (command == "solve") return run_solve(cfg, out_dir);
        if (command == "converge") return run_converge(cfg, out_dir);
        if (command == "stability") return run_stability(cfg, out_dir);
        return run_price(cfg, out_dir);
    } catch (const AcceptanceFailure& e) {
        std::cerr << "acceptance check failed: " << e.what() << "\n";
        return kExitAcceptance;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
}
