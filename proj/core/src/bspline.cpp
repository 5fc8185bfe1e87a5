#include "pidelab/bspline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pidelab {

SplineBasis::SplineBasis(double x_min, double x_max, int n_elements, int degree)
    : x_min_(x_min),
      x_max_(x_max),
      h_((x_max - x_min) / n_elements),
      n_elements_(n_elements),
      degree_(degree) {
    if (!(x_min < x_max)) throw std::invalid_argument("SplineBasis: x_min >= x_max");
    if (n_elements < 2) throw std::invalid_argument("SplineBasis: n_elements < 2");
    if (degree < 1) throw std::invalid_argument("SplineBasis: degree < 1");

    // Endpoints with multiplicity p+1, interior breakpoints with
    // multiplicity p (continuous piecewise polynomials).
    knots_.assign(degree_ + 1, x_min_);
    for (int e = 1; e < n_elements_; ++e) {
        const double bk = x_min_ + e * h_;
        knots_.insert(knots_.end(), degree_, bk);
    }
    knots_.insert(knots_.end(), degree_ + 1, x_max_);
}

int SplineBasis::element_of(double x) const {
    const int e = static_cast<int>(std::floor((x - x_min_) / h_));
    return std::clamp(e, 0, n_elements_ - 1);
}

int SplineBasis::find_span(double x) const {
    // Span index i with knots_[i] <= x < knots_[i+1]; right end clamps
    // to the last non-degenerate span.
    const int e = element_of(x);
    return degree_ + e * degree_;  // first knot of element e at index p + e*p
}

void SplineBasis::eval(double x, std::span<double> values, std::span<double> derivs,
                       int& first_index) const {
    const int p = degree_;
    if (x < x_min_ || x > x_max_) {
        first_index = 0;
        std::fill(values.begin(), values.begin() + p + 1, 0.0);
        std::fill(derivs.begin(), derivs.begin() + p + 1, 0.0);
        return;
    }
    const int span = find_span(x);
    first_index = span - p;

    // Cox-de Boor triangle with first derivatives (Piegl & Tiller,
    // DersBasisFuns specialized to derivative order 1).
    double ndu[16][16];  // degree <= 15 is far beyond desk use
    double left[16], right[16];
    if (p > 15) throw std::invalid_argument("SplineBasis: degree too large");

    ndu[0][0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - knots_[span + 1 - j];
        right[j] = knots_[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            ndu[j][r] = right[r + 1] + left[j - r];
            const double temp = ndu[r][j - 1] / ndu[j][r];
            ndu[r][j] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        ndu[j][j] = saved;
    }
    for (int j = 0; j <= p; ++j) values[j] = ndu[j][p];

    // First derivative from the (p-1)-degree column.
    for (int r = 0; r <= p; ++r) {
        double d = 0.0;
        if (r >= 1) d += ndu[r - 1][p - 1] / ndu[p][r - 1];
        if (r <= p - 1) d -= ndu[r][p - 1] / ndu[p][r];
        derivs[r] = d * p;
    }
}

double SplineBasis::value(int j, double x) const {
    double vals[16], ders[16];
    int first = 0;
    eval(x, std::span<double>(vals, degree_ + 1), std::span<double>(ders, degree_ + 1), first);
    if (j < first || j > first + degree_) return 0.0;
    return vals[j - first];
}

double SplineBasis::derivative(int j, double x) const {
    double vals[16], ders[16];
    int first = 0;
    eval(x, std::span<double>(vals, degree_ + 1), std::span<double>(ders, degree_ + 1), first);
    if (j < first || j > first + degree_) return 0.0;
    return ders[j - first];
}

}  // namespace pidelab
