#pragma once

#include <span>
#include <vector>

namespace pidelab {

/// Open-knot B-spline basis of degree p on a uniform partition of
/// [x_min, x_max] into n_elements cells. Interior breakpoints carry
/// multiplicity p, so the space coincides with continuous piecewise
/// polynomials of degree p; for p = 1 the basis functions are the
/// classical hat functions.
///
/// The full basis has n_elements*p + 1 members ordered left to right.
/// Exactly the first and the last are nonzero at the endpoints.
class SplineBasis {
public:
    SplineBasis(double x_min, double x_max, int n_elements, int degree);

    double x_min() const { return x_min_; }
    double x_max() const { return x_max_; }
    int n_elements() const { return n_elements_; }
    int degree() const { return degree_; }
    double h() const { return h_; }

    /// Number of basis functions in the full (unconstrained) space.
    int full_dim() const { return n_elements_ * degree_ + 1; }

    /// Element index containing x (clamped to [0, n_elements-1]).
    int element_of(double x) const;

    /// Evaluates the degree_+1 basis functions that are nonzero at x,
    /// together with their first derivatives. first_index receives the
    /// full-space index of the first of them. values/derivs must have
    /// room for degree_+1 entries. Outside [x_min, x_max] everything is
    /// zero (zero extension).
    void eval(double x, std::span<double> values, std::span<double> derivs,
              int& first_index) const;

    /// Value and derivative of the single full-space basis function j at x.
    double value(int j, double x) const;
    double derivative(int j, double x) const;

private:
    double x_min_, x_max_, h_;
    int n_elements_, degree_;
    std::vector<double> knots_;

    int find_span(double x) const;
};

}  // namespace pidelab
