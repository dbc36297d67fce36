#include "singtrace/expr.hpp"

#include <cctype>
#include <string>

namespace singtrace {

class ExprParser {
public:
    ExprParser(std::string text, Expression& out) : src_(std::move(text)), out_(out) {}

    int parse_all() {
        int root = parse_sum();
        skip_ws();
        if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
        return root;
    }

private:
    using Op = Expression::Op;

    [[noreturn]] void fail(const std::string& why) const {
        throw InvalidInput("expression \"" + src_ + "\": " + why + " at position " + std::to_string(pos_));
    }

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    int add(Op op, double v, int l = -1, int r = -1) {
        auto& nodes = out_.nodes_;
        // fold constant subtrees as they are built
        bool lc = l < 0 || nodes[l].op == Op::Const;
        bool rc = r < 0 || nodes[r].op == Op::Const;
        if (op != Op::Const && op != Op::Var && lc && rc) {
            Expression tmp;
            tmp.nodes_ = {nodes[l]};
            if (r >= 0) tmp.nodes_.push_back(nodes[r]);
            tmp.nodes_.push_back({op, 0.0, 0, r >= 0 ? 1 : -1});
            tmp.root_ = static_cast<int>(tmp.nodes_.size()) - 1;
            tmp.finalize();
            double folded = tmp(0.0);
            nodes.push_back({Op::Const, folded});
            return static_cast<int>(nodes.size()) - 1;
        }
        nodes.push_back({op, v, l, r});
        return static_cast<int>(nodes.size()) - 1;
    }

    int parse_sum() {
        int lhs = parse_product();
        for (;;) {
            if (accept('+')) lhs = add(Op::Add, 0, lhs, parse_product());
            else if (accept('-')) lhs = add(Op::Sub, 0, lhs, parse_product());
            else return lhs;
        }
    }

    int parse_product() {
        int lhs = parse_unary();
        for (;;) {
            if (accept('*')) lhs = add(Op::Mul, 0, lhs, parse_unary());
            else if (accept('/')) lhs = add(Op::Div, 0, lhs, parse_unary());
            else return lhs;
        }
    }

    int parse_unary() {
        if (accept('-')) return add(Op::Neg, 0, parse_unary());
        if (accept('+')) return parse_unary();
        return parse_power();
    }

    int parse_power() {
        int base = parse_primary();
        if (accept('^')) return add(Op::Pow, 0, base, parse_unary());
        return base;
    }

    int parse_primary() {
        skip_ws();
        if (pos_ >= src_.size()) fail("unexpected end");
        char c = src_[pos_];
        if (accept('(')) {
            int inner = parse_sum();
            if (!accept(')')) fail("missing ')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(src_.substr(pos_), &used);
            } catch (const std::exception&) {
                fail("bad number");
            }
            pos_ += used;
            return add(Op::Const, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            std::string id = src_.substr(start, pos_ - start);
            skip_ws();
            if (pos_ < src_.size() && src_[pos_] == '(') {
                Op op;
                if (id == "log" || id == "ln") op = Op::Log;
                else if (id == "exp") op = Op::Exp;
                else if (id == "sin") op = Op::Sin;
                else if (id == "cos") op = Op::Cos;
                else if (id == "sqrt") op = Op::Sqrt;
                else if (id == "abs") op = Op::Abs;
                else {
                    pos_ = start;
                    fail("unknown function '" + id + "'");
                }
                accept('(');
                int arg = parse_sum();
                if (!accept(')')) fail("missing ')'");
                return add(op, 0, arg);
            }
            if (id == "pi") return add(Op::Const, 3.14159265358979323846);
            if (id == "e") return add(Op::Const, 2.71828182845904523536);
            if (id == "s" || id == "n" || id == "t" || id == "x" || id == "u") {
                if (!out_.variable_.empty() && out_.variable_ != id) {
                    pos_ = start;
                    fail("second variable '" + id + "' (already using '" + out_.variable_ + "')");
                }
                out_.variable_ = id;
                return add(Op::Var, 0);
            }
            pos_ = start;
            fail("unknown identifier '" + id + "'");
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    std::string src_;
    Expression& out_;
    std::size_t pos_ = 0;
};

namespace {

std::string normalize_minus(std::string_view text) {
    // accept the typographic minus sign U+2212
    std::string s(text);
    const std::string minus = "\xE2\x88\x92";
    for (std::size_t p; (p = s.find(minus)) != std::string::npos;) s.replace(p, minus.size(), "-");
    return s;
}

}  // namespace

Expression Expression::parse(std::string_view text) {
    Expression e;
    std::string src = normalize_minus(text);
    if (src.find_first_not_of(" \t\r\n") == std::string::npos) throw InvalidInput("empty expression");
    ExprParser p(src, e);
    e.root_ = p.parse_all();
    e.text_ = std::string(text);
    e.finalize();
    return e;
}

Expression Expression::constant(double v) {
    Expression e;
    e.nodes_.push_back({Op::Const, v});
    e.root_ = 0;
    e.text_ = std::to_string(v);
    return e;
}

bool Expression::subtree_constant(int i) const {
    const Node& n = nodes_[i];
    if (n.op == Op::Var) return false;
    if (n.op == Op::Const) return true;
    bool l = n.lhs < 0 || subtree_constant(n.lhs);
    bool r = n.rhs < 0 || subtree_constant(n.rhs);
    return l && r;
}

void Expression::finalize() {
    for (auto& n : nodes_) {
        if (n.op == Op::Pow && subtree_constant(n.rhs)) {
            n.const_exponent = true;
            n.value = eval(n.rhs, 0.0);
        }
    }
}

bool Expression::is_constant() const { return !nodes_.empty() && subtree_constant(root_); }

double Expression::constant_value() const {
    if (!is_constant()) throw InvalidInput("expression \"" + text_ + "\" is not constant");
    return eval(root_, 0.0);
}

Expression Expression::raised(double p) const {
    if (p == 1.0) return *this;
    Expression e = *this;
    e.nodes_.push_back({Op::Const, p});
    int c = static_cast<int>(e.nodes_.size()) - 1;
    e.nodes_.push_back({Op::Pow, p, root_, c, true});
    e.root_ = c + 1;
    e.text_ = "(" + text_ + ")^" + std::to_string(p);
    return e;
}

}  // namespace singtrace
