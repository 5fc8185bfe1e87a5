#pragma once

#include <memory>
#include <string>

namespace pidelab {

/// Arithmetic expression in the variables t and x, parsed once and
/// evaluated many times. Supports + - * / ^ (right-assoc), parentheses,
/// unary minus, the constants pi and e, and the functions sqrt, exp,
/// log, sin, cos, abs, max(a,b), min(a,b).
class Expr {
public:
    static Expr parse(const std::string& source);

    double operator()(double t, double x) const;
    double operator()(double t) const { return (*this)(t, 0.0); }

    bool depends_on_x() const { return depends_on_x_; }
    const std::string& source() const { return source_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    bool depends_on_x_ = false;
    std::string source_;
};

}  // namespace pidelab
