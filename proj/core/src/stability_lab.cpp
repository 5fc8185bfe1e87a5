#include "pidelab/stability_lab.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace pidelab {

ExactSolution ExactSolution::checked(SpaceTimeFn u, SpaceTimeFn du_dt,
                                     SpaceTimeFn d2u_dt2, SpaceTimeFn du_dx,
                                     Domain1D domain, double horizon,
                                     SpaceTimeFn d3u_dt3) {
    if (!u || !du_dt || !d2u_dt2 || !du_dx)
        throw std::invalid_argument("ExactSolution: missing derivative callable");

    std::mt19937 gen(20240817u);
    std::uniform_real_distribution<double> tx(0.05, 0.95);
    const double fd = 1e-4;
    auto probe = [&](const SpaceTimeFn& fn, const SpaceTimeFn& dfn_dt, double t,
                     double x, const char* what) {
        const double num = (fn(t + fd, x) - fn(t - fd, x)) / (2.0 * fd);
        const double ana = dfn_dt(t, x);
        const double scale = std::abs(fn(t, x)) + std::abs(ana) + 1.0;
        if (std::abs(num - ana) > 1e-5 * scale) {
            std::ostringstream msg;
            msg << "ExactSolution: " << what
                << " inconsistent with finite differences at (t, x) = (" << t
                << ", " << x << "): " << ana << " vs " << num;
            throw std::invalid_argument(msg.str());
        }
    };
    auto probe_x = [&](double t, double x) {
        const double num = (u(t, x + fd) - u(t, x - fd)) / (2.0 * fd);
        const double ana = du_dx(t, x);
        const double scale = std::abs(u(t, x)) + std::abs(ana) + 1.0;
        if (std::abs(num - ana) > 1e-5 * scale)
            throw std::invalid_argument(
                "ExactSolution: du_dx inconsistent with finite differences");
    };

    for (int k = 0; k < 8; ++k) {
        const double t = horizon * tx(gen);
        const double x = domain.x_min + domain.length() * tx(gen);
        probe(u, du_dt, t, x, "du_dt");
        probe(du_dt, d2u_dt2, t, x, "d2u_dt2");
        if (d3u_dt3) probe(d2u_dt2, d3u_dt3, t, x, "d3u_dt3");
        probe_x(t, x);
    }

    ExactSolution e;
    e.u = std::move(u);
    e.du_dt = std::move(du_dt);
    e.d2u_dt2 = std::move(d2u_dt2);
    e.du_dx = std::move(du_dx);
    e.d3u_dt3 = std::move(d3u_dt3);
    return e;
}

namespace {

// Fixes t in a space-time callable.
std::function<double(double)> at_time(const SpaceTimeFn& fn, double t) {
    return [&fn, t](double x) { return fn(t, x); };
}

struct ResidualVectors {
    Vector r1, r2, r3;
};

// Residual load vectors of the error equation at step m.
ResidualVectors residual_loads(const ThetaRun& run, const ExactSolution& exact,
                               int m, const OperatorAssembler& assembler,
                               const std::vector<Vector>& node_proj,
                               const std::vector<Vector>& node_u_load) {
    const GalerkinSpace& space = *run.space;
    const double theta = run.config.theta;
    const double dt = run.grid.dt();
    const double t0 = run.grid.node(m);
    const double t1 = run.grid.node(m + 1);
    const double ts = run.mid_times[m];

    ResidualVectors r;

    // r1: difference quotient of u against the blended time derivative.
    const Vector dot_load = theta * space.h_load(at_time(exact.du_dt, t1)) +
                            (1.0 - theta) * space.h_load(at_time(exact.du_dt, t0));
    r.r1 = (node_u_load[m + 1] - node_u_load[m]) / dt - dot_load;

    // r2: (P_h - I) applied to the difference quotient, paired in H.
    r.r2 = (space.mass() * (node_proj[m + 1] - node_proj[m]) -
            (node_u_load[m + 1] - node_u_load[m])) /
           dt;

    // r3: the bilinear form applied to the projection defect of
    // u^{m+theta}.
    auto u_blend = [&exact, theta, t0, t1](double x) {
        return theta * exact.u(t1, x) + (1.0 - theta) * exact.u(t0, x);
    };
    auto du_blend = [&exact, theta, t0, t1](double x) {
        return theta * exact.du_dx(t1, x) + (1.0 - theta) * exact.du_dx(t0, x);
    };
    const Vector proj_blend =
        theta * node_proj[m + 1] + (1.0 - theta) * node_proj[m];
    r.r3 = assembler.at(ts).A * proj_blend -
           apply_bilinear_exact(space, run.model, ts, u_blend, du_blend);
    return r;
}

void node_caches(const ThetaRun& run, const ExactSolution& exact,
                 std::vector<Vector>& node_proj, std::vector<Vector>& node_u_load) {
    const GalerkinSpace& space = *run.space;
    const int M = run.grid.M;
    node_proj.resize(M + 1);
    node_u_load.resize(M + 1);
    for (int m = 0; m <= M; ++m) {
        node_u_load[m] = space.h_load(at_time(exact.u, run.grid.node(m)));
        node_proj[m] = space.l2_project(at_time(exact.u, run.grid.node(m)));
    }
}

}  // namespace

double xi_scheme_check(const ThetaRun& run, const ExactSolution& exact) {
    const GalerkinSpace& space = *run.space;
    const double theta = run.config.theta;
    const double dt = run.grid.dt();
    OperatorAssembler assembler(space, run.model);

    std::vector<Vector> node_proj, node_u_load;
    node_caches(run, exact, node_proj, node_u_load);

    double worst = 0.0;
    for (int m = 0; m < run.grid.M; ++m) {
        const Vector xi0 = node_proj[m] - run.trajectory[m];
        const Vector xi1 = node_proj[m + 1] - run.trajectory[m + 1];
        const Vector xi_blend = theta * xi1 + (1.0 - theta) * xi0;

        const Matrix A = assembler.at(run.mid_times[m]).A;
        const Vector lhs_mass = space.mass() * (xi1 - xi0) / dt;
        const Vector lhs_form = A * xi_blend;

        const ResidualVectors r =
            residual_loads(run, exact, m, assembler, node_proj, node_u_load);
        const Vector defect = lhs_mass + lhs_form - r.r1 - r.r2 - r.r3;

        // Normalize against the scheme's own step magnitude as well as
        // the error-equation terms; when the discrete solution tracks
        // the projection exactly the latter are pure roundoff.
        const Vector step_mass =
            space.mass() * (run.trajectory[m + 1] - run.trajectory[m]) / dt;
        const Vector step_form = A * run.blend(m);
        const double scale =
            lhs_mass.cwiseAbs().maxCoeff() + lhs_form.cwiseAbs().maxCoeff() +
            r.r1.cwiseAbs().maxCoeff() + r.r2.cwiseAbs().maxCoeff() +
            r.r3.cwiseAbs().maxCoeff() + step_mass.cwiseAbs().maxCoeff() +
            step_form.cwiseAbs().maxCoeff() + 1e-300;
        worst = std::max(worst, defect.cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

ResidualReport residual_norms(const ThetaRun& run, const ExactSolution& exact) {
    const GalerkinSpace& space = *run.space;
    OperatorAssembler assembler(space, run.model);
    std::vector<Vector> node_proj, node_u_load;
    node_caches(run, exact, node_proj, node_u_load);

    ResidualReport rep;
    rep.r1_sum_sq = rep.r2_sum_sq = rep.r3_sum_sq = 0.0;
    const double dt = run.grid.dt();
    for (int m = 0; m < run.grid.M; ++m) {
        const ResidualVectors r =
            residual_loads(run, exact, m, assembler, node_proj, node_u_load);
        const double n1 = space.dual_norm(r.r1);
        const double n2 = space.dual_norm(r.r2);
        const double n3 = space.dual_norm(r.r3);
        rep.r1.push_back(n1);
        rep.r2.push_back(n2);
        rep.r3.push_back(n3);
        rep.r1_sum_sq += dt * n1 * n1;
        rep.r2_sum_sq += dt * n2 * n2;
        rep.r3_sum_sq += dt * n3 * n3;
    }
    return rep;
}

ResidualRateReport residual_bound_check(std::span<const ThetaRun> temporal_runs,
                                        std::span<const ThetaRun> spatial_runs,
                                        const ExactSolution& exact) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    ResidualRateReport out;
    out.r1_vs_dt = {nan, nan};
    out.r3_vs_h = {nan, nan};

    if (!temporal_runs.empty()) {
        if (temporal_runs.size() < 3)
            throw std::invalid_argument(
                "residual_bound_check: need >= 3 temporal refinements");
        std::vector<double> dts, sums;
        for (const ThetaRun& r : temporal_runs) {
            out.temporal.push_back(residual_norms(r, exact));
            dts.push_back(r.grid.dt());
            sums.push_back(out.temporal.back().r1_sum_sq);
        }
        out.r1_vs_dt = fit_loglog(dts, sums);
    }
    if (!spatial_runs.empty()) {
        if (spatial_runs.size() < 3)
            throw std::invalid_argument(
                "residual_bound_check: need >= 3 spatial refinements");
        std::vector<double> hs, sums;
        for (const ThetaRun& r : spatial_runs) {
            out.spatial.push_back(residual_norms(r, exact));
            hs.push_back(r.space->h());
            sums.push_back(out.spatial.back().r3_sum_sq);
        }
        out.r3_vs_h = fit_loglog(hs, sums);
    }
    return out;
}

StabilitySides stability_sides(const ThetaRun& run,
                               const StabilityConstants& constants) {
    const GalerkinSpace& space = *run.space;
    OperatorAssembler assembler(space, run.model);
    const double dt = run.grid.dt();

    double energy_sum = 0.0;
    double load_sum = 0.0;
    for (int m = 0; m < run.grid.M; ++m) {
        const Vector ub = run.blend(m);
        const Matrix sym = assembler.at(run.mid_times[m]).symmetric_part();
        energy_sum += ub.dot(sym * ub);
        const double dn = space.dual_norm(run.mid_loads[m]);
        load_sum += dn * dn;
    }

    const double u0 = space.norm_H(run.trajectory.front());
    const double uM = space.norm_H(run.trajectory.back());
    return StabilitySides{uM * uM + dt * constants.C1 * energy_sum,
                          u0 * u0 + dt * constants.C2 * load_sum};
}

double stability_margin(const ThetaRun& run, const StabilityConstants& constants) {
    const StabilitySides s = stability_sides(run, constants);
    return s.rhs - s.lhs;
}

double integrated_sq_h_norm(const GalerkinSpace& space, const SpaceTimeFn& w,
                            double T, int n_intervals) {
    if (n_intervals < 2 || n_intervals % 2 != 0)
        throw std::invalid_argument(
            "integrated_sq_h_norm: n_intervals must be even and >= 2");
    const double ht = T / n_intervals;
    double acc = 0.0;
    for (int k = 0; k <= n_intervals; ++k) {
        const double t = k * ht;
        auto wt = at_time(w, t);
        const double val = space.h_inner_exact(wt, wt);
        const double coeff = (k == 0 || k == n_intervals) ? 1.0
                             : (k % 2 == 1)               ? 4.0
                                                          : 2.0;
        acc += coeff * val;
    }
    return acc * ht / 3.0;
}

}  // namespace pidelab
