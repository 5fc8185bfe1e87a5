#pragma once

#include <vector>

namespace pidelab {

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int size() const { return static_cast<int>(nodes.size()); }
};

/// Nodes and weights of the n-point Gauss-Legendre rule, exact for
/// polynomials up to degree 2n-1.
QuadratureRule gauss_legendre(int n);

/// Integrate fn over [a, b] with an n-point Gauss-Legendre rule.
template <typename Fn>
double integrate(const QuadratureRule& rule, double a, double b, Fn&& fn) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    double acc = 0.0;
    for (int q = 0; q < rule.size(); ++q)
        acc += rule.weights[q] * fn(mid + half * rule.nodes[q]);
    return half * acc;
}

}  // namespace pidelab
