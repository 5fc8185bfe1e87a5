#include "pidelab/galerkin_space.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <complex>
#include <stdexcept>

namespace pidelab {

namespace {

// Maps a full-space basis index to the interior index, or -1 for the
// two boundary functions.
inline int interior_index(int j_full, int full_dim) {
    if (j_full <= 0 || j_full >= full_dim - 1) return -1;
    return j_full - 1;
}

}  // namespace

GalerkinSpace::GalerkinSpace(Domain1D domain, int n_elements, int degree,
                             double eta, double rho)
    : domain_(domain),
      eta_(eta),
      rho_(rho),
      basis_(domain.x_min, domain.x_max, n_elements, degree),
      dim_(n_elements * degree - 1) {
    if (!(domain.x_min < domain.x_max))
        throw std::invalid_argument("GalerkinSpace: invalid domain (x_min >= x_max)");
    if (n_elements < 2)
        throw std::invalid_argument("GalerkinSpace: n_elements must be >= 2");
    if (!(rho > 0.0 && rho <= 2.0))
        throw std::invalid_argument("GalerkinSpace: rho must lie in (0, 2]");
    assemble_gram();
    llt_M_.compute(gram_.M);
    llt_S_.compute(gram_.S);
    if (llt_M_.info() != Eigen::Success || llt_S_.info() != Eigen::Success)
        throw std::runtime_error("GalerkinSpace: Gram matrix not positive definite");
}

void GalerkinSpace::assemble_gram() {
    const int p = degree();
    const int nq = (eta_ == 0.0) ? p + 1 : 2 * (p + 1);
    const QuadratureRule rule = gauss_legendre(nq);
    const int fdim = basis_.full_dim();

    Matrix M = Matrix::Zero(dim_, dim_);
    Matrix K = Matrix::Zero(dim_, dim_);  // weighted H1 seminorm part

    std::vector<double> vals(p + 1), ders(p + 1);
    for (int e = 0; e < n_elements(); ++e) {
        const double a = domain_.x_min + e * h();
        const double b = a + h();
        for (int q = 0; q < rule.size(); ++q) {
            const double x = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
            const double w = 0.5 * (b - a) * rule.weights[q] * std::exp(2.0 * eta_ * x);
            int first = 0;
            basis_.eval(x, vals, ders, first);
            for (int li = 0; li <= p; ++li) {
                const int i = interior_index(first + li, fdim);
                if (i < 0) continue;
                for (int lj = 0; lj <= p; ++lj) {
                    const int j = interior_index(first + lj, fdim);
                    if (j < 0) continue;
                    M(i, j) += w * vals[li] * vals[lj];
                    K(i, j) += w * ders[li] * ders[lj];
                }
            }
        }
    }

    gram_.M = 0.5 * (M + M.transpose());
    if (rho_ == 1.0) {
        gram_.S = gram_.M + 0.5 * (K + K.transpose());
    } else {
        Matrix S = assemble_fractional_gram();
        gram_.S = 0.5 * (S + S.transpose());
    }
}

// Spectral assembly of the fractional Sobolev-Slobodeckii Gram matrix:
// sample the (zero-extended, exponentially weighted) basis functions on
// a fine uniform grid, take the DFT and integrate
// (1+|xi|)^{2 rho} Fphi_i conj(Fphi_j) by trapezoid.
Matrix GalerkinSpace::assemble_fractional_gram() const {
    const int per_element = 16;  // >= 8 points per element
    const int n_dom = n_elements() * per_element;
    const double dx = h() / per_element;

    // Zero-pad by 8x for frequency resolution.
    int n_fft = 1;
    while (n_fft < 8 * n_dom) n_fft *= 2;

    const int n_freq = n_fft / 2 + 1;
    Eigen::MatrixXcd spectra(n_freq, dim_);

    std::vector<double> in(n_fft, 0.0);
    std::vector<fftw_complex> out(n_freq);
    fftw_plan plan = fftw_plan_dft_r2c_1d(n_fft, in.data(), out.data(), FFTW_ESTIMATE);

    for (int j = 0; j < dim_; ++j) {
        std::fill(in.begin(), in.end(), 0.0);
        for (int k = 0; k < n_dom; ++k) {
            const double x = domain_.x_min + (k + 0.5) * dx;
            in[k] = basis_.value(j + 1, x) * std::exp(eta_ * x);
        }
        fftw_execute(plan);
        for (int k = 0; k < n_freq; ++k)
            spectra(k, j) = std::complex<double>(out[k][0], out[k][1]) * dx;
    }
    fftw_destroy_plan(plan);

    const double dxi = 2.0 * M_PI / (n_fft * dx);
    Matrix S = Matrix::Zero(dim_, dim_);
    for (int k = 0; k < n_freq; ++k) {
        const double xi = k * dxi;
        // Count both +xi and -xi; DC and Nyquist once.
        const double mult = (k == 0 || k == n_freq - 1) ? 1.0 : 2.0;
        const double weight =
            mult * std::pow(1.0 + std::abs(xi), 2.0 * rho_) * dxi / (2.0 * M_PI);
        for (int i = 0; i < dim_; ++i)
            for (int j = i; j < dim_; ++j) {
                const double term =
                    weight * std::real(spectra(k, i) * std::conj(spectra(k, j)));
                S(i, j) += term;
                if (j != i) S(j, i) += term;
            }
    }
    return S;
}

double GalerkinSpace::evaluate(const Vector& c, double x) const {
    const int p = degree();
    std::vector<double> vals(p + 1), ders(p + 1);
    int first = 0;
    basis_.eval(x, vals, ders, first);
    double acc = 0.0;
    for (int l = 0; l <= p; ++l) {
        const int i = interior_index(first + l, basis_.full_dim());
        if (i >= 0) acc += c[i] * vals[l];
    }
    return acc;
}

double GalerkinSpace::evaluate_derivative(const Vector& c, double x) const {
    const int p = degree();
    std::vector<double> vals(p + 1), ders(p + 1);
    int first = 0;
    basis_.eval(x, vals, ders, first);
    double acc = 0.0;
    for (int l = 0; l <= p; ++l) {
        const int i = interior_index(first + l, basis_.full_dim());
        if (i >= 0) acc += c[i] * ders[l];
    }
    return acc;
}

Vector GalerkinSpace::h_load(const std::function<double(double)>& g) const {
    const int p = degree();
    const QuadratureRule rule = gauss_legendre(data_quadrature_order());
    Vector b = Vector::Zero(dim_);
    std::vector<double> vals(p + 1), ders(p + 1);
    for (int e = 0; e < n_elements(); ++e) {
        const double a = domain_.x_min + e * h();
        const double bb = a + h();
        for (int q = 0; q < rule.size(); ++q) {
            const double x = 0.5 * (a + bb) + 0.5 * (bb - a) * rule.nodes[q];
            const double gx = g(x);
            if (!std::isfinite(gx))
                throw std::runtime_error("h_load: non-finite data value in quadrature");
            const double w =
                0.5 * (bb - a) * rule.weights[q] * std::exp(2.0 * eta_ * x) * gx;
            int first = 0;
            basis_.eval(x, vals, ders, first);
            for (int l = 0; l <= p; ++l) {
                const int i = interior_index(first + l, basis_.full_dim());
                if (i >= 0) b[i] += w * vals[l];
            }
        }
    }
    return b;
}

Vector GalerkinSpace::l2_project(const std::function<double(double)>& g) const {
    return llt_M_.solve(h_load(g));
}

double GalerkinSpace::norm_H(const Vector& c) const {
    if (c.size() != dim_) throw std::invalid_argument("norm_H: dimension mismatch");
    return std::sqrt(std::max(0.0, c.dot(gram_.M * c)));
}

double GalerkinSpace::norm_V(const Vector& c) const {
    if (c.size() != dim_) throw std::invalid_argument("norm_V: dimension mismatch");
    return std::sqrt(std::max(0.0, c.dot(gram_.S * c)));
}

double GalerkinSpace::dual_norm(const Vector& b) const {
    if (b.size() != dim_) throw std::invalid_argument("dual_norm: dimension mismatch");
    return std::sqrt(std::max(0.0, b.dot(llt_S_.solve(b))));
}

double GalerkinSpace::compute_lambda() const {
    // Largest generalized eigenvalue of the pencil (M, M S^{-1} M).
    const Matrix B = gram_.M * llt_S_.solve(gram_.M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(gram_.M, B);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("compute_lambda: eigensolver failed");
    return solver.eigenvalues().maxCoeff();
}

double GalerkinSpace::inverse_ratio() const {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(gram_.S, gram_.M);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("inverse_ratio: eigensolver failed");
    return std::sqrt(solver.eigenvalues().maxCoeff());
}

double GalerkinSpace::h_inner_exact(const std::function<double(double)>& f,
                                    const std::function<double(double)>& g) const {
    const QuadratureRule rule = gauss_legendre(4 * (degree() + 1));
    double acc = 0.0;
    for (int e = 0; e < n_elements(); ++e) {
        const double a = domain_.x_min + e * h();
        const double b = a + h();
        acc += integrate(rule, a, b, [&](double x) {
            return f(x) * g(x) * std::exp(2.0 * eta_ * x);
        });
    }
    return acc;
}

double estimate_inverse_constant(std::span<const GalerkinSpace* const> spaces) {
    if (spaces.size() < 3)
        throw std::invalid_argument("estimate_inverse_constant: need >= 3 spaces");
    double c_ip = 0.0;
    for (const GalerkinSpace* s : spaces)
        c_ip = std::max(c_ip, s->inverse_ratio() * std::pow(s->h(), s->rho()));
    return c_ip;
}

}  // namespace pidelab
