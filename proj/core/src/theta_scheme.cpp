#include "pidelab/theta_scheme.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace pidelab {

double check_timestep_condition(double theta, double Lambda, double alpha,
                                double beta, double dt) {
    if (!(alpha > 0.0) || !(beta > 0.0) || !(Lambda > 0.0) || !(dt > 0.0))
        throw std::invalid_argument(
            "check_timestep_condition: alpha, beta, Lambda, dt must be positive");
    if (theta >= 0.5) return std::numeric_limits<double>::infinity();
    return 2.0 * beta / ((1.0 - 2.0 * theta) * Lambda * alpha * alpha) - dt;
}

StabilityConstants admissible_constants(double theta, double Lambda, double alpha,
                                        double beta, double dt,
                                        std::optional<double> c1_choice) {
    StabilityConstants c{};
    if (theta >= 0.5) {
        c.mu = 0.0;
        c.C1 = c1_choice.value_or(1.0);
        if (!(c.C1 > 0.0 && c.C1 < 2.0))
            throw std::invalid_argument("admissible_constants: C1 must lie in (0, 2)");
        c.C2 = 1.0 / (beta * (2.0 - c.C1));
        c.admissible = true;
        return c;
    }
    if (!(check_timestep_condition(theta, Lambda, alpha, beta, dt) > 0.0))
        throw std::invalid_argument(
            "admissible_constants: time-step condition violated for theta < 1/2");
    c.mu = (1.0 - 2.0 * theta) * Lambda * dt;
    const double c1_max = 2.0 - c.mu * alpha * alpha / beta;
    c.C1 = c1_choice.value_or(0.5 * c1_max);
    if (!(c.C1 > 0.0 && c.C1 < c1_max))
        throw std::invalid_argument(
            "admissible_constants: C1 outside its admissible interval");
    const double denom = (2.0 - c.C1) * beta - c.mu * alpha * alpha;
    const double one_plus = 1.0 + c.mu * alpha;
    c.C2 = std::max(c.mu, one_plus * one_plus / denom + c.mu);
    c.admissible = true;
    return c;
}

ThetaRun run_theta_scheme_loads(const GalerkinSpace& space, const LevyModel& model,
                                const std::function<Vector(double)>& node_load,
                                const Vector& u0, const TimeGrid& grid,
                                const ThetaConfig& config) {
    if (grid.M < 1 || !(grid.T > 0.0))
        throw std::invalid_argument("run_theta_scheme: invalid time grid");
    if (!(config.theta >= 0.0 && config.theta <= 1.0))
        throw std::invalid_argument("run_theta_scheme: theta must lie in [0, 1]");
    if (u0.size() != space.dim())
        throw std::invalid_argument("run_theta_scheme: initial data dimension mismatch");

    const double theta = config.theta;
    const double dt = grid.dt();

    OperatorAssembler assembler(space, model);

    if (config.enforce_condition && theta < 0.5) {
        const double Lambda = space.compute_lambda();
        std::vector<double> mids(grid.M);
        for (int m = 0; m < grid.M; ++m)
            mids[m] = theta * grid.node(m + 1) + (1.0 - theta) * grid.node(m);
        const FormBounds fb = estimate_continuity_coercivity_at(space, model, mids);
        if (!fb.coercive)
            throw std::runtime_error(
                "run_theta_scheme: form not coercive; apply the coercification "
                "shift first");
        const double bound =
            2.0 * fb.beta_hat /
            ((1.0 - 2.0 * theta) * Lambda * fb.alpha_hat * fb.alpha_hat);
        if (dt > config.safety_factor * bound) {
            std::ostringstream msg;
            msg << "run_theta_scheme: dt = " << dt
                << " exceeds the admissible bound " << config.safety_factor
                << " * " << bound;
            throw std::runtime_error(msg.str());
        }
    }

    ThetaRun run;
    run.space = &space;
    run.model = model;
    run.grid = grid;
    run.config = config;
    run.trajectory.reserve(grid.M + 1);
    run.trajectory.push_back(u0);
    run.mid_times.reserve(grid.M);
    run.mid_loads.reserve(grid.M);

    const Matrix& M = space.mass();
    Matrix prev_A;
    Eigen::PartialPivLU<Matrix> lu;
    Matrix explicit_mat;

    Vector load_prev = node_load(grid.node(0));
    for (int m = 0; m < grid.M; ++m) {
        const double t_star = theta * grid.node(m + 1) + (1.0 - theta) * grid.node(m);
        const AssembledOperator op = assembler.at(t_star);

        const bool reuse = (prev_A.size() != 0) && (op.A == prev_A);
        if (!reuse) {
            lu.compute(M + (theta * dt) * op.A);
            explicit_mat = M - ((1.0 - theta) * dt) * op.A;
            prev_A = op.A;
        }

        Vector load_next = node_load(grid.node(m + 1));
        Vector f_mid = theta * load_next + (1.0 - theta) * load_prev;
        Vector rhs = explicit_mat * run.trajectory.back() + dt * f_mid;
        Vector u_next = lu.solve(rhs);
        if (!u_next.allFinite()) {
            std::ostringstream msg;
            msg << "run_theta_scheme: linear solve produced non-finite values at "
                   "step "
                << m;
            throw std::runtime_error(msg.str());
        }

        run.mid_times.push_back(t_star);
        run.mid_loads.push_back(std::move(f_mid));
        run.trajectory.push_back(std::move(u_next));
        load_prev = std::move(load_next);
    }
    return run;
}

ThetaRun run_theta_scheme(const GalerkinSpace& space, const LevyModel& model,
                          const SpaceTimeFn& f,
                          const std::function<double(double)>& g,
                          const TimeGrid& grid, const ThetaConfig& config) {
    auto node_load = [&space, &f](double t) {
        return space.h_load([&f, t](double x) { return f(t, x); });
    };
    return run_theta_scheme_loads(space, model, node_load, space.l2_project(g), grid,
                                  config);
}

}  // namespace pidelab
