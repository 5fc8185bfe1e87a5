#pragma once

#include <optional>

#include "pidelab/galerkin_space.hpp"
#include "pidelab/levy_model.hpp"

namespace pidelab {

/// Stiffness matrix of the bilinear form a_t on V_h at a fixed time.
struct AssembledOperator {
    double t;
    Matrix A;

    Matrix symmetric_part() const { return 0.5 * (A + A.transpose()); }
};

/// Discrete continuity/coercivity surrogates of the bilinear form on
/// V_h over sampled times. If coercive is false the form failed
/// coercivity at some sample (Garding path).
struct FormBounds {
    double alpha_hat;
    double beta_hat;
    bool coercive;
};

/// Assembles A_ij = a_t(phi_j, phi_i) with
///   a_t(u, v) = (sigma_t^2/2) (u', v')_H + (c_eta(t) u', v)_H
///             + ((r_t + kappa_t) u, v)_H + jump part,
/// where c_eta = sigma_t^2 * eta - b_t collects the first-order
/// coefficient left by integration by parts of the diffusion against
/// the exponentially weighted test function.
AssembledOperator assemble_stiffness(const GalerkinSpace& space,
                                     const LevyModel& model, double t);

/// Jump matrix J_ij = -int int [phi_j(x+y) - phi_j(x) - phi_j'(x) h(y)]
/// F_t(dy) phi_i(x) e^{2 eta x} dx with zero extension of phi_j outside
/// the domain and the Gaussian truncated at mean +- 8 stdev.
Matrix jump_matrix(const GalerkinSpace& space, const JumpSpec& jumps, double t);

/// Samples t uniformly on [0, T]: alpha_hat is the max over samples of
/// the largest singular value of S^{-1/2} A S^{-1/2}; beta_hat the min
/// of the smallest eigenvalue of the symmetrized pencil.
FormBounds estimate_continuity_coercivity(const GalerkinSpace& space,
                                          const LevyModel& model, int n_samples);

/// Same surrogates evaluated at an explicit list of times.
FormBounds estimate_continuity_coercivity_at(const GalerkinSpace& space,
                                             const LevyModel& model,
                                             std::span<const double> times);

/// Load vector b_i = a_t(u, phi_i) for a callable u (with spatial
/// derivative du_dx), by quadrature against the test functions. Used by
/// manufactured-solution sources and the r3 residual.
Vector apply_bilinear_exact(const GalerkinSpace& space, const LevyModel& model,
                            double t, const std::function<double(double)>& u,
                            const std::function<double(double)>& du_dx);

/// Quadratic form a_t(e, e) for a callable error function, by fine
/// quadrature; equals the symmetric-part energy of e.
double bilinear_energy_exact(const GalerkinSpace& space, const LevyModel& model,
                             double t, const std::function<double(double)>& e,
                             const std::function<double(double)>& de_dx);

/// Caches the time-independent pieces of the stiffness (weighted mass,
/// first-order and second-order element matrices, unit-intensity jump
/// matrix) and assembles A(t) cheaply per time step.
class OperatorAssembler {
public:
    OperatorAssembler(const GalerkinSpace& space, const LevyModel& model);

    AssembledOperator at(double t) const;

    const GalerkinSpace& space() const { return space_; }
    const LevyModel& model() const { return model_; }
    const Matrix& weighted_mass() const { return mass_; }

private:
    const GalerkinSpace& space_;
    const LevyModel& model_;
    Matrix stiffness_;   // (phi_j', phi_i')_H
    Matrix convection_;  // (phi_j', phi_i)_H
    Matrix mass_;        // (phi_j, phi_i)_H
    Matrix unit_jump_;   // jump matrix at unit intensity
    bool kappa_is_zero_;

    Matrix kappa_matrix(double t) const;
};

}  // namespace pidelab
