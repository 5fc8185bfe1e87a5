#include "pidelab/assembly.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace pidelab {

namespace {

inline int interior_index(int j_full, int full_dim) {
    if (j_full <= 0 || j_full >= full_dim - 1) return -1;
    return j_full - 1;
}

inline double gaussian_density(double y, double mean, double stdev) {
    const double z = (y - mean) / stdev;
    return std::exp(-0.5 * z * z) / (stdev * std::sqrt(2.0 * M_PI));
}

// Breakpoint-aware composite integration of fn over [a, b]: splits at
// the supplied breakpoints and further into pieces of length <= max_len.
template <typename Fn>
double composite_integrate(double a, double b, std::span<const double> breakpoints,
                           double max_len, const QuadratureRule& rule, Fn&& fn) {
    if (!(b > a)) return 0.0;
    std::vector<double> cuts{a, b};
    for (double c : breakpoints)
        if (c > a && c < b) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s], hi = cuts[s + 1];
        const int pieces = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_len)));
        const double step = (hi - lo) / pieces;
        for (int k = 0; k < pieces; ++k)
            acc += integrate(rule, lo + k * step, lo + (k + 1) * step, fn);
    }
    return acc;
}

// Element range of the support of the full-space basis function jf for
// the C0 spline basis (basis jf lives on elements with e*p <= jf <= e*p+p).
inline void support_elements(int jf, int p, int n_elements, int& e_lo, int& e_hi) {
    e_lo = std::max(0, (jf - p + p - 1 >= 0 ? (jf - p + p) / p : 0));
    e_lo = std::max(0, static_cast<int>(std::ceil(double(jf - p) / p)));
    e_hi = std::min(n_elements - 1, jf / p);
}

// Truncated Gaussian moments over [lo, hi]: m0 = int n(y) dy and
// m1 = int h(y) n(y) dy, with breakpoints at +-1 for the default
// truncation function.
struct JumpMoments {
    double m0;
    double m1;
};

JumpMoments truncated_moments(const JumpSpec& jumps, double lo, double hi) {
    const QuadratureRule rule = gauss_legendre(10);
    const double bks[] = {-1.0, 0.0, 1.0};
    const double max_len = std::max(jumps.stdev, 1e-12);
    JumpMoments m{};
    m.m0 = composite_integrate(lo, hi, bks, max_len, rule, [&](double y) {
        return gaussian_density(y, jumps.mean, jumps.stdev);
    });
    m.m1 = composite_integrate(lo, hi, bks, max_len, rule, [&](double y) {
        return jumps.truncation(y) * gaussian_density(y, jumps.mean, jumps.stdev);
    });
    return m;
}

}  // namespace

Matrix jump_matrix(const GalerkinSpace& space, const JumpSpec& jumps, double t) {
    if (jumps.kind == JumpSpec::Kind::none)
        throw std::invalid_argument("jump_matrix: jump kind is none");
    const double lambda_t = jumps.intensity(t);
    const int dim = space.dim();
    Matrix J = Matrix::Zero(dim, dim);
    if (lambda_t == 0.0) return J;

    const SplineBasis& basis = space.basis();
    const int p = space.degree();
    const int fdim = basis.full_dim();
    const double h = space.h();
    const double y_lo = jumps.mean - 8.0 * jumps.stdev;
    const double y_hi = jumps.mean + 8.0 * jumps.stdev;
    const JumpMoments mom = truncated_moments(jumps, y_lo, y_hi);

    const QuadratureRule outer = gauss_legendre(2 * (p + 1));
    const QuadratureRule inner = gauss_legendre(10);

    // The smoothed term varies on the scale of the jump width; refine
    // the outer rule when that is below the element size.
    const int outer_pieces =
        std::max(1, static_cast<int>(std::ceil(h / jumps.stdev)));

    std::vector<double> vals(p + 1), ders(p + 1);
    for (int e = 0; e < space.n_elements(); ++e) {
        for (int piece = 0; piece < outer_pieces; ++piece) {
        const double a = space.domain().x_min + e * h + piece * h / outer_pieces;
        const double b = a + h / outer_pieces;
        for (int q = 0; q < outer.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * outer.nodes[q];
            const double wq = 0.5 * (b - a) * outer.weights[q] *
                              std::exp(2.0 * space.eta() * x);
            int first = 0;
            basis.eval(x, vals, ders, first);

            for (int jf = 1; jf < fdim - 1; ++jf) {
                const int j = jf - 1;
                // Convolution term: int phi_j(z) n(z - x) dz over the
                // support of phi_j, clipped to the translated y-window.
                int e_lo = 0, e_hi = 0;
                support_elements(jf, p, space.n_elements(), e_lo, e_hi);
                double conv = 0.0;
                for (int es = e_lo; es <= e_hi; ++es) {
                    const double za =
                        std::max(space.domain().x_min + es * h, x + y_lo);
                    const double zb =
                        std::min(space.domain().x_min + (es + 1) * h, x + y_hi);
                    if (zb <= za) continue;
                    // Resolve the density when it is narrower than the
                    // element.
                    const int pieces = std::max(
                        1, static_cast<int>(std::ceil((zb - za) / jumps.stdev)));
                    const double step = (zb - za) / pieces;
                    for (int seg = 0; seg < pieces; ++seg) {
                        const double sa = za + seg * step;
                        conv += integrate(inner, sa, sa + step, [&](double z) {
                            return basis.value(jf, z) *
                                   gaussian_density(z - x, jumps.mean, jumps.stdev);
                        });
                    }
                }

                double phi_j = 0.0, dphi_j = 0.0;
                if (jf >= first && jf <= first + p) {
                    phi_j = vals[jf - first];
                    dphi_j = ders[jf - first];
                }
                const double generator_term =
                    conv - phi_j * mom.m0 - dphi_j * mom.m1;

                for (int li = 0; li <= p; ++li) {
                    const int i = interior_index(first + li, fdim);
                    if (i < 0) continue;
                    J(i, j) -= wq * vals[li] * lambda_t * generator_term;
                }
            }
        }
        }
    }
    return J;
}

OperatorAssembler::OperatorAssembler(const GalerkinSpace& space, const LevyModel& model)
    : space_(space), model_(model) {
    const int dim = space.dim();
    const int p = space.degree();
    const int fdim = space.basis().full_dim();
    const int nq = 2 * (p + 1);
    const QuadratureRule rule = gauss_legendre(nq);

    stiffness_ = Matrix::Zero(dim, dim);
    convection_ = Matrix::Zero(dim, dim);
    mass_ = Matrix::Zero(dim, dim);

    std::vector<double> vals(p + 1), ders(p + 1);
    for (int e = 0; e < space.n_elements(); ++e) {
        const double a = space.domain().x_min + e * space.h();
        const double b = a + space.h();
        for (int q = 0; q < rule.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const double w =
                0.5 * (b - a) * rule.weights[q] * std::exp(2.0 * space.eta() * x);
            int first = 0;
            space.basis().eval(x, vals, ders, first);
            for (int li = 0; li <= p; ++li) {
                const int i = interior_index(first + li, fdim);
                if (i < 0) continue;
                for (int lj = 0; lj <= p; ++lj) {
                    const int j = interior_index(first + lj, fdim);
                    if (j < 0) continue;
                    stiffness_(i, j) += w * ders[lj] * ders[li];
                    convection_(i, j) += w * ders[lj] * vals[li];
                    mass_(i, j) += w * vals[lj] * vals[li];
                }
            }
        }
    }

    // Probe for an identically zero killing rate to skip its per-step
    // quadrature.
    kappa_is_zero_ = true;
    for (int k = 0; k < 5 && kappa_is_zero_; ++k) {
        const double t = model.horizon * k / 4.0;
        const double x = space.domain().x_min + space.domain().length() * (k + 0.5) / 5.0;
        if (model.kappa(t, x) != 0.0) kappa_is_zero_ = false;
    }

    if (model.jumps.kind == JumpSpec::Kind::merton) {
        JumpSpec unit = model.jumps;
        unit.intensity = [](double) { return 1.0; };
        unit_jump_ = jump_matrix(space, unit, 0.0);
    }
}

Matrix OperatorAssembler::kappa_matrix(double t) const {
    const int dim = space_.dim();
    const int p = space_.degree();
    const int fdim = space_.basis().full_dim();
    const QuadratureRule rule = gauss_legendre(2 * (p + 1));
    Matrix K = Matrix::Zero(dim, dim);
    std::vector<double> vals(p + 1), ders(p + 1);
    for (int e = 0; e < space_.n_elements(); ++e) {
        const double a = space_.domain().x_min + e * space_.h();
        const double b = a + space_.h();
        for (int q = 0; q < rule.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const double kx = model_.kappa(t, x);
            if (!std::isfinite(kx))
                throw std::runtime_error("assemble_stiffness: non-finite killing rate");
            const double w = 0.5 * (b - a) * rule.weights[q] *
                             std::exp(2.0 * space_.eta() * x) * kx;
            int first = 0;
            space_.basis().eval(x, vals, ders, first);
            for (int li = 0; li <= p; ++li) {
                const int i = interior_index(first + li, fdim);
                if (i < 0) continue;
                for (int lj = 0; lj <= p; ++lj) {
                    const int j = interior_index(first + lj, fdim);
                    if (j < 0) continue;
                    K(i, j) += w * vals[lj] * vals[li];
                }
            }
        }
    }
    return K;
}

AssembledOperator OperatorAssembler::at(double t) const {
    if (t < 0.0 || t > model_.horizon + 1e-12)
        throw std::invalid_argument("assemble_stiffness: t outside [0, T]");
    const double sigma = model_.sigma(t);
    const double b = model_.drift(t);
    const double r = model_.rate(t);
    if (!std::isfinite(sigma) || !std::isfinite(b) || !std::isfinite(r))
        throw std::runtime_error("assemble_stiffness: non-finite coefficient");

    // Integration by parts of -(sigma^2/2) u'' against v e^{2 eta x}
    // leaves the first-order coefficient sigma^2 * eta - b.
    const double c_eta = sigma * sigma * space_.eta() - b;

    AssembledOperator op;
    op.t = t;
    op.A = (0.5 * sigma * sigma) * stiffness_ + c_eta * convection_ + r * mass_;
    if (!kappa_is_zero_) op.A += kappa_matrix(t);
    if (model_.jumps.kind == JumpSpec::Kind::merton)
        op.A += model_.jumps.intensity(t) * unit_jump_;
    return op;
}

AssembledOperator assemble_stiffness(const GalerkinSpace& space,
                                     const LevyModel& model, double t) {
    return OperatorAssembler(space, model).at(t);
}

FormBounds estimate_continuity_coercivity_at(const GalerkinSpace& space,
                                             const LevyModel& model,
                                             std::span<const double> times) {
    if (times.size() < 1)
        throw std::invalid_argument("estimate_continuity_coercivity: no sample times");

    Eigen::SelfAdjointEigenSolver<Matrix> s_eig(space.v_gram());
    if (s_eig.info() != Eigen::Success)
        throw std::runtime_error("estimate_continuity_coercivity: eigensolver failed");
    const Matrix s_inv_half = s_eig.operatorInverseSqrt();

    OperatorAssembler assembler(space, model);
    double alpha_hat = 0.0;
    double beta_hat = std::numeric_limits<double>::infinity();
    for (double t : times) {
        const AssembledOperator op = assembler.at(t);
        const Matrix B = s_inv_half * op.A * s_inv_half;
        const double sv_max = B.jacobiSvd().singularValues().maxCoeff();
        Eigen::SelfAdjointEigenSolver<Matrix> sym_eig(0.5 * (B + B.transpose()));
        alpha_hat = std::max(alpha_hat, sv_max);
        beta_hat = std::min(beta_hat, sym_eig.eigenvalues().minCoeff());
    }
    return FormBounds{alpha_hat, beta_hat, beta_hat > 0.0};
}

FormBounds estimate_continuity_coercivity(const GalerkinSpace& space,
                                          const LevyModel& model, int n_samples) {
    if (n_samples < 2)
        throw std::invalid_argument("estimate_continuity_coercivity: n_samples < 2");
    std::vector<double> times(n_samples);
    for (int k = 0; k < n_samples; ++k)
        times[k] = model.horizon * k / (n_samples - 1.0);
    return estimate_continuity_coercivity_at(space, model, times);
}

namespace {

// Inner jump integral applied to a callable with zero extension.
double jump_generator_on_callable(const GalerkinSpace& space, const JumpSpec& jumps,
                                  double x, const std::function<double(double)>& u,
                                  const std::function<double(double)>& du_dx) {
    const double y_lo = jumps.mean - 8.0 * jumps.stdev;
    const double y_hi = jumps.mean + 8.0 * jumps.stdev;
    const QuadratureRule rule = gauss_legendre(8);
    const double max_len = std::max(1e-12, std::min(space.h(), jumps.stdev));
    const double ux = u(x);
    const double dux = du_dx(x);
    // Breakpoints where the zero extension kicks in and where the
    // default truncation function jumps.
    const double bks[] = {space.domain().x_min - x, space.domain().x_max - x, -1.0, 1.0};
    return composite_integrate(y_lo, y_hi, bks, max_len, rule, [&](double y) {
        const double z = x + y;
        const double uz =
            (z >= space.domain().x_min && z <= space.domain().x_max) ? u(z) : 0.0;
        return (uz - ux - dux * jumps.truncation(y)) *
               gaussian_density(y, jumps.mean, jumps.stdev);
    });
}

}  // namespace

Vector apply_bilinear_exact(const GalerkinSpace& space, const LevyModel& model,
                            double t, const std::function<double(double)>& u,
                            const std::function<double(double)>& du_dx) {
    const int p = space.degree();
    const int fdim = space.basis().full_dim();
    const double sigma = model.sigma(t);
    const double c_eta = sigma * sigma * space.eta() - model.drift(t);
    const double r = model.rate(t);
    const bool has_jumps = model.jumps.kind == JumpSpec::Kind::merton;
    const double lambda_t = has_jumps ? model.jumps.intensity(t) : 0.0;

    const QuadratureRule rule = gauss_legendre(2 * (p + 1));
    Vector out = Vector::Zero(space.dim());
    std::vector<double> vals(p + 1), ders(p + 1);
    for (int e = 0; e < space.n_elements(); ++e) {
        const double a = space.domain().x_min + e * space.h();
        const double b = a + space.h();
        for (int q = 0; q < rule.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const double w =
                0.5 * (b - a) * rule.weights[q] * std::exp(2.0 * space.eta() * x);
            const double ux = u(x);
            const double dux = du_dx(x);
            double jump_term = 0.0;
            if (has_jumps && lambda_t != 0.0)
                jump_term =
                    -lambda_t * jump_generator_on_callable(space, model.jumps, x, u, du_dx);
            int first = 0;
            space.basis().eval(x, vals, ders, first);
            for (int l = 0; l <= p; ++l) {
                const int i = interior_index(first + l, fdim);
                if (i < 0) continue;
                out[i] += w * (0.5 * sigma * sigma * dux * ders[l] +
                               (c_eta * dux + (r + model.kappa(t, x)) * ux + jump_term) *
                                   vals[l]);
            }
        }
    }
    return out;
}

double bilinear_energy_exact(const GalerkinSpace& space, const LevyModel& model,
                             double t, const std::function<double(double)>& e_fn,
                             const std::function<double(double)>& de_dx) {
    const double sigma = model.sigma(t);
    const double c_eta = sigma * sigma * space.eta() - model.drift(t);
    const double r = model.rate(t);
    const bool has_jumps = model.jumps.kind == JumpSpec::Kind::merton;
    const double lambda_t = has_jumps ? model.jumps.intensity(t) : 0.0;

    const QuadratureRule rule = gauss_legendre(4 * (space.degree() + 1));
    double acc = 0.0;
    for (int e = 0; e < space.n_elements(); ++e) {
        const double a = space.domain().x_min + e * space.h();
        const double b = a + space.h();
        acc += integrate(rule, a, b, [&](double x) {
            const double w = std::exp(2.0 * space.eta() * x);
            const double ex = e_fn(x);
            const double dex = de_dx(x);
            double jump_term = 0.0;
            if (has_jumps && lambda_t != 0.0)
                jump_term = -lambda_t * jump_generator_on_callable(space, model.jumps, x,
                                                                   e_fn, de_dx);
            return w * (0.5 * sigma * sigma * dex * dex + c_eta * dex * ex +
                        (r + model.kappa(t, x)) * ex * ex + jump_term * ex);
        });
    }
    return acc;
}

}  // namespace pidelab
