#include "pidelab/garding.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pidelab {

double suggest_lambda(const GalerkinSpace& space, const LevyModel& model,
                      int n_samples) {
    // The shift acts through +lambda ||u||_H^2, so the relevant defect is
    // measured against the H norm: the most negative eigenvalue of the
    // symmetrized form in M-geometry over sampled times.
    if (n_samples < 1)
        throw std::invalid_argument("suggest_lambda: need >= 1 sample");
    double worst = 0.0;
    for (int k = 0; k < n_samples; ++k) {
        const double t =
            n_samples == 1 ? 0.0 : model.horizon * k / (n_samples - 1);
        const Matrix sym = assemble_stiffness(space, model, t).symmetric_part();
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> eig(sym, space.mass());
        worst = std::min(worst, eig.eigenvalues().minCoeff());
    }
    return std::max(0.0, -worst) + 0.1;
}

std::pair<LevyModel, GardingDescriptor> coercify(const GalerkinSpace& space,
                                                 const LevyModel& model,
                                                 double lambda) {
    if (lambda < 0.0)
        throw std::invalid_argument("coercify: lambda must be >= 0");

    LevyModel shifted = model;
    if (lambda > 0.0) {
        SpaceTimeFn kappa = model.kappa;
        shifted.kappa = [kappa, lambda](double t, double x) {
            return kappa(t, x) + lambda;
        };
    }

    const FormBounds fb = estimate_continuity_coercivity(space, shifted, 9);
    if (!fb.coercive) {
        std::ostringstream msg;
        msg << "coercify: shifted form still not coercive (beta_hat = "
            << fb.beta_hat << "); increase lambda";
        throw std::runtime_error(msg.str());
    }

    GardingDescriptor d;
    d.lambda = lambda;
    d.cond_factor = std::exp(lambda * model.horizon);
    return {std::move(shifted), d};
}

SpaceTimeFn shift_source(SpaceTimeFn f, double lambda) {
    return [f = std::move(f), lambda](double t, double x) {
        return std::exp(-lambda * t) * f(t, x);
    };
}

std::vector<Vector> map_back(const std::vector<Vector>& trajectory_lambda,
                             const TimeGrid& grid, double lambda) {
    std::vector<Vector> out;
    out.reserve(trajectory_lambda.size());
    for (std::size_t m = 0; m < trajectory_lambda.size(); ++m)
        out.push_back(std::exp(lambda * grid.node(static_cast<int>(m))) *
                      trajectory_lambda[m]);
    return out;
}

}  // namespace pidelab
