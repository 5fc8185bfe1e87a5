#include "pidelab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace pidelab {

struct Expr::Node {
    enum class Op {
        constant,
        var_t,
        var_x,
        add,
        sub,
        mul,
        div,
        pow,
        neg,
        fn_sqrt,
        fn_exp,
        fn_log,
        fn_sin,
        fn_cos,
        fn_abs,
        fn_max,
        fn_min
    };

    Op op;
    double value = 0.0;
    std::shared_ptr<const Node> a, b;

    double eval(double t, double x) const {
        switch (op) {
            case Op::constant: return value;
            case Op::var_t: return t;
            case Op::var_x: return x;
            case Op::add: return a->eval(t, x) + b->eval(t, x);
            case Op::sub: return a->eval(t, x) - b->eval(t, x);
            case Op::mul: return a->eval(t, x) * b->eval(t, x);
            case Op::div: return a->eval(t, x) / b->eval(t, x);
            case Op::pow: return std::pow(a->eval(t, x), b->eval(t, x));
            case Op::neg: return -a->eval(t, x);
            case Op::fn_sqrt: return std::sqrt(a->eval(t, x));
            case Op::fn_exp: return std::exp(a->eval(t, x));
            case Op::fn_log: return std::log(a->eval(t, x));
            case Op::fn_sin: return std::sin(a->eval(t, x));
            case Op::fn_cos: return std::cos(a->eval(t, x));
            case Op::fn_abs: return std::abs(a->eval(t, x));
            case Op::fn_max: return std::max(a->eval(t, x), b->eval(t, x));
            case Op::fn_min: return std::min(a->eval(t, x), b->eval(t, x));
        }
        return 0.0;
    }

    bool uses_x() const {
        if (op == Op::var_x) return true;
        if (a && a->uses_x()) return true;
        return b && b->uses_x();
    }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Op = Expr::Node::Op;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr, double value = 0.0) {
    auto n = std::make_shared<Expr::Node>();
    n->op = op;
    n->value = value;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
}

class Parser {
public:
    explicit Parser(const std::string& src) : src_(src) {}

    NodePtr run() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected trailing input");
        return e;
    }

private:
    const std::string& src_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream msg;
        msg << "expression parse error at offset " << pos_ << ": " << what
            << " in \"" << src_ << "\"";
        throw std::invalid_argument(msg.str());
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
            ++pos_;
    }

    bool consume(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr left = term();
        for (;;) {
            if (consume('+'))
                left = make(Op::add, left, term());
            else if (consume('-'))
                left = make(Op::sub, left, term());
            else
                return left;
        }
    }

    NodePtr term() {
        NodePtr left = factor();
        for (;;) {
            if (consume('*'))
                left = make(Op::mul, left, factor());
            else if (consume('/'))
                left = make(Op::div, left, factor());
            else
                return left;
        }
    }

    NodePtr factor() {
        NodePtr base = unary();
        if (consume('^')) return make(Op::pow, base, factor());
        return base;
    }

    NodePtr unary() {
        if (consume('-')) return make(Op::neg, unary());
        if (consume('+')) return unary();
        return primary();
    }

    NodePtr primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end of input");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!consume(')')) fail("missing ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        fail("unexpected character");
    }

    NodePtr number() {
        char* end = nullptr;
        const double v = std::strtod(src_.c_str() + pos_, &end);
        if (end == src_.c_str() + pos_) fail("malformed number");
        pos_ = end - src_.c_str();
        return make(Op::constant, nullptr, nullptr, v);
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
                src_[pos_] == '_'))
            ++pos_;
        const std::string name = src_.substr(start, pos_ - start);
        if (name == "t") return make(Op::var_t);
        if (name == "x") return make(Op::var_x);
        if (name == "pi") return make(Op::constant, nullptr, nullptr, M_PI);
        if (name == "e") return make(Op::constant, nullptr, nullptr, M_E);

        static const std::vector<std::pair<std::string, Op>> unary_fns = {
            {"sqrt", Op::fn_sqrt}, {"exp", Op::fn_exp}, {"log", Op::fn_log},
            {"sin", Op::fn_sin},   {"cos", Op::fn_cos}, {"abs", Op::fn_abs}};
        for (const auto& [fn, op] : unary_fns) {
            if (name == fn) {
                if (!consume('(')) fail("expected '(' after function name");
                NodePtr arg = expression();
                if (!consume(')')) fail("missing ')'");
                return make(op, arg);
            }
        }
        if (name == "max" || name == "min") {
            if (!consume('(')) fail("expected '(' after function name");
            NodePtr a = expression();
            if (!consume(',')) fail("expected ',' between arguments");
            NodePtr b = expression();
            if (!consume(')')) fail("missing ')'");
            return make(name == "max" ? Op::fn_max : Op::fn_min, a, b);
        }
        fail("unknown identifier '" + name + "'");
    }
};

}  // namespace

Expr Expr::parse(const std::string& source) {
    Expr e;
    e.root_ = Parser(source).run();
    e.depends_on_x_ = e.root_->uses_x();
    e.source_ = source;
    return e;
}

double Expr::operator()(double t, double x) const {
    if (!root_) throw std::logic_error("Expr: evaluating an empty expression");
    return root_->eval(t, x);
}

}  // namespace pidelab
