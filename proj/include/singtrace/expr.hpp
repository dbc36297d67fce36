#pragma once

// Small expression language for model files:
//   + - * / ^, unary minus, log ln exp sin cos sqrt abs, constants pi e,
//   one free variable (s, n, t, x or u).

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "singtrace/errors.hpp"
#include "singtrace/jet.hpp"
#include "singtrace/xreal.hpp"

namespace singtrace {

class Expression {
public:
    enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Log, Exp, Sin, Cos, Sqrt, Abs };

    struct Node {
        Op op = Op::Const;
        double value = 0.0;
        int lhs = -1;
        int rhs = -1;
        bool const_exponent = false;  // Pow only; exponent held in value
    };

    Expression() = default;

    // throws InvalidInput with the offending position
    static Expression parse(std::string_view text);
    static Expression constant(double v);

    const std::string& text() const { return text_; }
    const std::string& variable() const { return variable_; }
    bool empty() const { return nodes_.empty(); }
    bool is_constant() const;
    double constant_value() const;

    // the expression raised to a constant power
    Expression raised(double p) const;

    template <class S>
    S operator()(const S& x) const {
        return eval(root_, x);
    }

private:
    template <class S>
    S eval(int i, const S& x) const;
    bool subtree_constant(int i) const;
    void finalize();

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;
    std::string variable_;

    friend class ExprParser;
};

template <class S>
S Expression::eval(int i, const S& x) const {
    using std::abs;
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    const Node& n = nodes_[i];
    switch (n.op) {
        case Op::Const: return S(n.value);
        case Op::Var: return x;
        case Op::Add: return eval(n.lhs, x) + eval(n.rhs, x);
        case Op::Sub: return eval(n.lhs, x) - eval(n.rhs, x);
        case Op::Mul: return eval(n.lhs, x) * eval(n.rhs, x);
        case Op::Div: return eval(n.lhs, x) / eval(n.rhs, x);
        case Op::Neg: return -eval(n.lhs, x);
        case Op::Log: return log(eval(n.lhs, x));
        case Op::Exp: return exp(eval(n.lhs, x));
        case Op::Sin: return sin(eval(n.lhs, x));
        case Op::Cos: return cos(eval(n.lhs, x));
        case Op::Sqrt: return sqrt(eval(n.lhs, x));
        case Op::Abs: return abs(eval(n.lhs, x));
        case Op::Pow: {
            using std::pow;
            S base = eval(n.lhs, x);
            if (n.const_exponent) return pow(base, n.value);
            // variable exponent: exp(y log b)
            return exp(eval(n.rhs, x) * log(base));
        }
    }
    return S(std::nan(""));
}

}  // namespace singtrace
