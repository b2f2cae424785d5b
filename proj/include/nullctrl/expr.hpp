// Tiny arithmetic-expression language for coefficient definitions:
//   literals, variables t and x, + - * / ^, sin cos exp, parentheses.
// Expressions are parsed to an AST that supports exact symbolic
// differentiation in t and x, so expression-defined coefficients come with
// analytic partial derivatives.

#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

namespace nullctrl {

struct ExprError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

enum class NodeKind { constant, var_t, var_x, add, sub, mul, div, pow, neg, sin, cos, exp_fn };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    double value = 0.0;  // for constant
    NodePtr a, b;

    Node(NodeKind k, double v) : kind(k), value(v) {}
    Node(NodeKind k, NodePtr a_, NodePtr b_ = nullptr) : kind(k), a(std::move(a_)), b(std::move(b_)) {}
};

inline NodePtr make_const(double v) { return std::make_shared<Node>(NodeKind::constant, v); }

inline bool is_const(const NodePtr& n, double v) {
    return n->kind == NodeKind::constant && n->value == v;
}
inline bool is_const(const NodePtr& n) { return n->kind == NodeKind::constant; }

// constructors with constant folding
inline NodePtr make_add(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b)) return make_const(a->value + b->value);
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return std::make_shared<Node>(NodeKind::add, std::move(a), std::move(b));
}
inline NodePtr make_sub(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b)) return make_const(a->value - b->value);
    if (is_const(b, 0.0)) return a;
    return std::make_shared<Node>(NodeKind::sub, std::move(a), std::move(b));
}
inline NodePtr make_neg(NodePtr a) {
    if (is_const(a)) return make_const(-a->value);
    return std::make_shared<Node>(NodeKind::neg, std::move(a));
}
inline NodePtr make_mul(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b)) return make_const(a->value * b->value);
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return std::make_shared<Node>(NodeKind::mul, std::move(a), std::move(b));
}
inline NodePtr make_div(NodePtr a, NodePtr b) {
    if (is_const(a) && is_const(b) && b->value != 0.0) return make_const(a->value / b->value);
    if (is_const(a, 0.0)) return make_const(0.0);
    if (is_const(b, 1.0)) return a;
    return std::make_shared<Node>(NodeKind::div, std::move(a), std::move(b));
}
inline NodePtr make_pow(NodePtr a, NodePtr b) {
    if (is_const(b, 1.0)) return a;
    if (is_const(b, 0.0)) return make_const(1.0);
    if (is_const(a) && is_const(b)) return make_const(std::pow(a->value, b->value));
    return std::make_shared<Node>(NodeKind::pow, std::move(a), std::move(b));
}
inline NodePtr make_fn(NodeKind k, NodePtr a) {
    if (is_const(a)) {
        switch (k) {
            case NodeKind::sin: return make_const(std::sin(a->value));
            case NodeKind::cos: return make_const(std::cos(a->value));
            case NodeKind::exp_fn: return make_const(std::exp(a->value));
            default: break;
        }
    }
    return std::make_shared<Node>(k, std::move(a));
}

inline double eval(const Node& n, double t, double x) {
    switch (n.kind) {
        case NodeKind::constant: return n.value;
        case NodeKind::var_t: return t;
        case NodeKind::var_x: return x;
        case NodeKind::add: return eval(*n.a, t, x) + eval(*n.b, t, x);
        case NodeKind::sub: return eval(*n.a, t, x) - eval(*n.b, t, x);
        case NodeKind::mul: return eval(*n.a, t, x) * eval(*n.b, t, x);
        case NodeKind::div: return eval(*n.a, t, x) / eval(*n.b, t, x);
        case NodeKind::pow: return std::pow(eval(*n.a, t, x), eval(*n.b, t, x));
        case NodeKind::neg: return -eval(*n.a, t, x);
        case NodeKind::sin: return std::sin(eval(*n.a, t, x));
        case NodeKind::cos: return std::cos(eval(*n.a, t, x));
        case NodeKind::exp_fn: return std::exp(eval(*n.a, t, x));
    }
    return 0.0;
}

inline NodePtr diff(const NodePtr& n, NodeKind var);

inline NodePtr diff(const NodePtr& n, NodeKind var) {
    switch (n->kind) {
        case NodeKind::constant: return make_const(0.0);
        case NodeKind::var_t: return make_const(var == NodeKind::var_t ? 1.0 : 0.0);
        case NodeKind::var_x: return make_const(var == NodeKind::var_x ? 1.0 : 0.0);
        case NodeKind::add: return make_add(diff(n->a, var), diff(n->b, var));
        case NodeKind::sub: return make_sub(diff(n->a, var), diff(n->b, var));
        case NodeKind::neg: return make_neg(diff(n->a, var));
        case NodeKind::mul:
            return make_add(make_mul(diff(n->a, var), n->b), make_mul(n->a, diff(n->b, var)));
        case NodeKind::div:
            return make_div(make_sub(make_mul(diff(n->a, var), n->b), make_mul(n->a, diff(n->b, var))),
                            make_mul(n->b, n->b));
        case NodeKind::pow: {
            if (!is_const(n->b))
                throw ExprError("cannot differentiate a^b with non-constant exponent");
            double p = n->b->value;
            // d(a^p) = p a^(p-1) a'
            return make_mul(make_const(p),
                            make_mul(make_pow(n->a, make_const(p - 1.0)), diff(n->a, var)));
        }
        case NodeKind::sin: return make_mul(make_fn(NodeKind::cos, n->a), diff(n->a, var));
        case NodeKind::cos:
            return make_neg(make_mul(make_fn(NodeKind::sin, n->a), diff(n->a, var)));
        case NodeKind::exp_fn: return make_mul(make_fn(NodeKind::exp_fn, n->a), diff(n->a, var));
    }
    return make_const(0.0);
}

// recursive-descent parser
class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    NodePtr parse() {
        NodePtr e = expression();
        skip_ws();
        if (pos_ != s_.size())
            throw ExprError("unexpected trailing input at position " + std::to_string(pos_) +
                            " in \"" + s_ + "\"");
        return e;
    }

private:
    void skip_ws() { while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_; }

    bool eat(char c) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == c) { ++pos_; return true; }
        return false;
    }

    char peek() {
        skip_ws();
        return pos_ < s_.size() ? s_[pos_] : '\0';
    }

    NodePtr expression() {
        NodePtr e = term();
        for (;;) {
            if (eat('+')) e = make_add(e, term());
            else if (eat('-')) e = make_sub(e, term());
            else return e;
        }
    }

    NodePtr term() {
        NodePtr e = unary();
        for (;;) {
            if (eat('*')) e = make_mul(e, unary());
            else if (eat('/')) e = make_div(e, unary());
            else return e;
        }
    }

    NodePtr unary() {
        if (eat('-')) return make_neg(unary());
        if (eat('+')) return unary();
        return power();
    }

    NodePtr power() {
        NodePtr base = atom();
        if (eat('^')) return make_pow(base, unary());  // right associative
        return base;
    }

    NodePtr atom() {
        skip_ws();
        if (pos_ >= s_.size()) throw ExprError("unexpected end of expression in \"" + s_ + "\"");
        char c = s_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (c == '(') {
            ++pos_;
            NodePtr e = expression();
            if (!eat(')')) throw ExprError("missing ')' in \"" + s_ + "\"");
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
        throw ExprError(std::string("unexpected character '") + c + "' at position " +
                        std::to_string(pos_) + " in \"" + s_ + "\"");
    }

    NodePtr number() {
        size_t end = pos_;
        while (end < s_.size() &&
               (std::isdigit(static_cast<unsigned char>(s_[end])) || s_[end] == '.' ||
                s_[end] == 'e' || s_[end] == 'E' ||
                ((s_[end] == '+' || s_[end] == '-') && end > pos_ &&
                 (s_[end - 1] == 'e' || s_[end - 1] == 'E'))))
            ++end;
        double v;
        try {
            size_t used;
            v = std::stod(s_.substr(pos_, end - pos_), &used);
            end = pos_ + used;
        } catch (const std::exception&) {
            throw ExprError("bad numeric literal at position " + std::to_string(pos_));
        }
        pos_ = end;
        return make_const(v);
    }

    NodePtr identifier() {
        size_t end = pos_;
        while (end < s_.size() && std::isalnum(static_cast<unsigned char>(s_[end]))) ++end;
        std::string name = s_.substr(pos_, end - pos_);
        pos_ = end;
        if (name == "t") return std::make_shared<Node>(NodeKind::var_t, nullptr);
        if (name == "x") return std::make_shared<Node>(NodeKind::var_x, nullptr);
        if (name == "pi") return make_const(3.14159265358979323846);
        if (name == "sin" || name == "cos" || name == "exp") {
            if (!eat('(')) throw ExprError(name + " needs parenthesized argument");
            NodePtr arg = expression();
            if (!eat(')')) throw ExprError("missing ')' after " + name);
            if (name == "sin") return make_fn(NodeKind::sin, arg);
            if (name == "cos") return make_fn(NodeKind::cos, arg);
            return make_fn(NodeKind::exp_fn, arg);
        }
        throw ExprError("unknown identifier \"" + name + "\"");
    }

    const std::string& s_;
    size_t pos_ = 0;
};

}  // namespace detail

// Immutable parsed expression of (t, x) with exact derivatives.
class Expr {
public:
    Expr() : node_(detail::make_const(0.0)) {}
    static Expr parse(const std::string& s) { return Expr(detail::Parser(s).parse()); }
    static Expr constant(double v) { return Expr(detail::make_const(v)); }

    double operator()(double t, double x) const { return detail::eval(*node_, t, x); }

    Expr d_t() const { return Expr(detail::diff(node_, detail::NodeKind::var_t)); }
    Expr d_x() const { return Expr(detail::diff(node_, detail::NodeKind::var_x)); }

    Expr derivative(int order_t, int order_x) const {
        Expr e = *this;
        for (int k = 0; k < order_t; ++k) e = e.d_t();
        for (int k = 0; k < order_x; ++k) e = e.d_x();
        return e;
    }

    bool is_constant() const { return node_->kind == detail::NodeKind::constant; }
    double constant_value() const { return node_->value; }

private:
    explicit Expr(detail::NodePtr n) : node_(std::move(n)) {}
    detail::NodePtr node_;
};

}  // namespace nullctrl
