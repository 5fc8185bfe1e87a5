#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <functional>
#include <span>

#include "pidelab/bspline.hpp"
#include "pidelab/quadrature.hpp"

namespace pidelab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Truncated 1D domain in log-price units with homogeneous Dirichlet
/// data (membership in the zero-extension space).
struct Domain1D {
    double x_min;
    double x_max;

    double length() const { return x_max - x_min; }
};

/// Mass/stiffness Gram pair: M for the weighted L2 inner product,
/// S for the V^rho inner product.
struct GramPair {
    Matrix M;
    Matrix S;
};

/// Finite-dimensional Galerkin space V_h on a truncated 1D domain:
/// spline basis of degree p with zero boundary values, exponential
/// weight exp(2*eta*x) on all inner products, smoothness index rho.
///
/// Immutable after construction; safe to share read-only across threads.
class GalerkinSpace {
public:
    GalerkinSpace(Domain1D domain, int n_elements, int degree,
                  double eta = 0.0, double rho = 1.0);

    const Domain1D& domain() const { return domain_; }
    int n_elements() const { return basis_.n_elements(); }
    int degree() const { return basis_.degree(); }
    double h() const { return basis_.h(); }
    double eta() const { return eta_; }
    double rho() const { return rho_; }
    const SplineBasis& basis() const { return basis_; }

    /// Dimension of V_h: n_elements * p - 1 interior basis functions.
    int dim() const { return dim_; }

    const Matrix& mass() const { return gram_.M; }
    const Matrix& v_gram() const { return gram_.S; }
    const GramPair& gram_pair() const { return gram_; }

    /// Interior-basis value of the function with coefficients c at x.
    double evaluate(const Vector& c, double x) const;
    double evaluate_derivative(const Vector& c, double x) const;

    /// Load vector b_i = (g, phi_i)_H with the module quadrature rule.
    Vector h_load(const std::function<double(double)>& g) const;

    /// H-orthogonal projection: solves M c = h_load(g).
    Vector l2_project(const std::function<double(double)>& g) const;

    double norm_H(const Vector& c) const;
    double norm_V(const Vector& c) const;

    /// Discrete dual norm: sqrt(b^T S^{-1} b) for a load-vector
    /// representation b_i = (f, phi_i) of the functional.
    double dual_norm(const Vector& b) const;

    /// Lambda = sup ||v_h||_H^2 / ||v_h||_{V_h*}^2, the largest
    /// generalized eigenvalue of the pencil (M, M S^{-1} M).
    double compute_lambda() const;

    /// sup ||v_h||_V / ||v_h||_H over V_h (sqrt of the largest
    /// generalized eigenvalue of (S, M)).
    double inverse_ratio() const;

    /// Quadrature points per element used for data-bearing integrands.
    int data_quadrature_order() const { return 2 * (degree() + 1); }

    /// H inner product of two callables by fine quadrature (4x the
    /// assembly order), used for exact-side error norms.
    double h_inner_exact(const std::function<double(double)>& f,
                         const std::function<double(double)>& g) const;

private:
    Domain1D domain_;
    double eta_, rho_;
    SplineBasis basis_;
    int dim_;
    GramPair gram_;
    Eigen::LLT<Matrix> llt_M_;
    Eigen::LLT<Matrix> llt_S_;

    void assemble_gram();
    Matrix assemble_fractional_gram() const;
    friend class OperatorAssembler;
};

/// Fits C_IP with ||u_h||_V <= C_IP h^{-rho} ||u_h||_H over a family of
/// spaces with identical (domain, p, eta, rho) and decreasing h.
/// Returns max over spaces of inverse_ratio() * h^rho.
double estimate_inverse_constant(std::span<const GalerkinSpace* const> spaces);

}  // namespace pidelab
