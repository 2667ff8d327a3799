#pragma once

#include "nlwave/jet.hpp"
#include "nlwave/types.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>
#include <vector>

namespace nlwave {

/// Arithmetic expression in x1, x2, x3 with + - * / ^, pow, exp, sin, cos, sqrt.
/// Evaluates on doubles or on Jet for exact first and second derivatives.
class Expression {
public:
    Expression() = default;

    static Expression parse(const std::string& text, int line = 0) {
        Parser p{text, 0, line};
        Expression e;
        p.skip_ws();
        if (p.pos >= text.size()) p.fail("empty expression");
        e.root_ = p.parse_expr(e.nodes_);
        p.skip_ws();
        if (p.pos != text.size()) p.fail("unexpected character '" + std::string(1, text[p.pos]) + "'");
        e.text_ = text;
        return e;
    }

    template <class T>
    T evaluate(const std::array<T, 3>& x) const {
        return eval<T>(root_, x);
    }

    double value(const Vec3& x) const { return evaluate<double>({x[0], x[1], x[2]}); }

    Jet jet(const Vec3& x) const {
        return evaluate<Jet>({Jet::variable(0, x[0]), Jet::variable(1, x[1]), Jet::variable(2, x[2])});
    }

    /// True when no variable appears, so the value is the same everywhere.
    bool is_constant() const {
        for (const Node& n : nodes_)
            if (n.op == Op::Var) return false;
        return true;
    }

    const std::string& text() const { return text_; }

private:
    enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Exp, Sin, Cos, Sqrt };

    struct Node {
        Op op;
        double num = 0.0;
        int var = 0;
        int a = -1;
        int b = -1;
    };

    struct Parser {
        const std::string& s;
        std::size_t pos;
        int line;

        [[noreturn]] void fail(const std::string& msg) const {
            throw ParseError(msg, line, static_cast<int>(pos) + 1);
        }

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        void expect(char c) {
            if (!accept(c)) fail(std::string("expected '") + c + "'");
        }

        static int push(std::vector<Node>& nodes, Node n) {
            nodes.push_back(n);
            return static_cast<int>(nodes.size()) - 1;
        }

        int parse_expr(std::vector<Node>& nodes) {
            int lhs = parse_term(nodes);
            for (;;) {
                if (accept('+')) lhs = push(nodes, {Op::Add, 0, 0, lhs, parse_term(nodes)});
                else if (accept('-')) lhs = push(nodes, {Op::Sub, 0, 0, lhs, parse_term(nodes)});
                else return lhs;
            }
        }

        int parse_term(std::vector<Node>& nodes) {
            int lhs = parse_unary(nodes);
            for (;;) {
                if (accept('*')) lhs = push(nodes, {Op::Mul, 0, 0, lhs, parse_unary(nodes)});
                else if (accept('/')) lhs = push(nodes, {Op::Div, 0, 0, lhs, parse_unary(nodes)});
                else return lhs;
            }
        }

        int parse_unary(std::vector<Node>& nodes) {
            if (accept('-')) return push(nodes, {Op::Neg, 0, 0, parse_unary(nodes)});
            if (accept('+')) return parse_unary(nodes);
            return parse_power(nodes);
        }

        int parse_power(std::vector<Node>& nodes) {
            int base = parse_primary(nodes);
            if (accept('^')) return push(nodes, {Op::Pow, 0, 0, base, parse_unary(nodes)});
            return base;
        }

        int parse_primary(std::vector<Node>& nodes) {
            skip_ws();
            if (pos >= s.size()) fail("unexpected end of expression");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                const char* begin = s.c_str() + pos;
                char* end = nullptr;
                const double v = std::strtod(begin, &end);
                if (end == begin) fail("malformed number");
                pos += static_cast<std::size_t>(end - begin);
                return push(nodes, {Op::Num, v});
            }
            if (accept('(')) {
                int inner = parse_expr(nodes);
                expect(')');
                return inner;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::size_t start = pos;
                while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
                const std::string id = s.substr(start, pos - start);
                if (id == "x1" || id == "x2" || id == "x3") return push(nodes, {Op::Var, 0, id[1] - '1'});
                if (id == "pi") return push(nodes, {Op::Num, std::numbers::pi});
                Op f;
                if (id == "exp") f = Op::Exp;
                else if (id == "sin") f = Op::Sin;
                else if (id == "cos") f = Op::Cos;
                else if (id == "sqrt") f = Op::Sqrt;
                else if (id == "pow") f = Op::Pow;
                else {
                    pos = start;
                    fail("unknown identifier '" + id + "'");
                }
                expect('(');
                int arg = parse_expr(nodes);
                int arg2 = -1;
                if (f == Op::Pow) {
                    expect(',');
                    arg2 = parse_expr(nodes);
                }
                expect(')');
                return push(nodes, {f, 0, 0, arg, arg2});
            }
            fail(std::string("unexpected character '") + c + "'");
        }
    };

    template <class T>
    T eval(int i, const std::array<T, 3>& x) const {
        using std::cos;
        using std::exp;
        using std::pow;
        using std::sin;
        using std::sqrt;
        const Node& n = nodes_[static_cast<std::size_t>(i)];
        switch (n.op) {
            case Op::Num: return T(n.num);
            case Op::Var: return x[static_cast<std::size_t>(n.var)];
            case Op::Neg: return -eval<T>(n.a, x);
            case Op::Add: return eval<T>(n.a, x) + eval<T>(n.b, x);
            case Op::Sub: return eval<T>(n.a, x) - eval<T>(n.b, x);
            case Op::Mul: return eval<T>(n.a, x) * eval<T>(n.b, x);
            case Op::Div: return eval<T>(n.a, x) / eval<T>(n.b, x);
            case Op::Pow: return pow(eval<T>(n.a, x), eval<T>(n.b, x));
            case Op::Exp: return exp(eval<T>(n.a, x));
            case Op::Sin: return sin(eval<T>(n.a, x));
            case Op::Cos: return cos(eval<T>(n.a, x));
            case Op::Sqrt: return sqrt(eval<T>(n.a, x));
        }
        return T(0.0);
    }

    std::vector<Node> nodes_;
    int root_ = -1;
    std::string text_;
};

}  // namespace nlwave
