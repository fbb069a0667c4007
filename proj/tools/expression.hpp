#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "martinet/types.hpp"

namespace martinet::cli {

/// Arithmetic expression in x1, x2, x3 used for boundary data:
///   expr   := term (('+' | '-') term)*
///   term   := unary ('*' unary)*
///   unary  := '-' unary | power
///   power  := atom ('^' integer)?
///   atom   := number | x1 | x2 | x3 | '(' expr ')'
///           | min '(' expr ',' expr ')' | max '(' expr ',' expr ')' | abs '(' expr ')'
class Expression {
public:
    static Expression parse(std::string_view text) {
        Parser p{text, 0};
        Expression e;
        e.root_ = p.expr();
        p.skip();
        if (p.pos != text.size()) p.fail("unexpected '" + std::string(1, text[p.pos]) + "'");
        e.text_ = std::string(text);
        return e;
    }

    double operator()(const Point& x) const { return eval(*root_, x); }
    const std::string& text() const { return text_; }

private:
    enum class Op { Num, Var, Add, Sub, Mul, Neg, Pow, Min, Max, Abs };
    struct Node {
        Op op;
        double value = 0.0;
        int index = 0;
        std::shared_ptr<const Node> a;
        std::shared_ptr<const Node> b;
    };
    using Ptr = std::shared_ptr<const Node>;

    static Ptr make(Op op, Ptr a = nullptr, Ptr b = nullptr) {
        return std::make_shared<Node>(Node{op, 0.0, 0, std::move(a), std::move(b)});
    }

    static double eval(const Node& n, const Point& x) {
        switch (n.op) {
            case Op::Num: return n.value;
            case Op::Var: return x[n.index];
            case Op::Add: return eval(*n.a, x) + eval(*n.b, x);
            case Op::Sub: return eval(*n.a, x) - eval(*n.b, x);
            case Op::Mul: return eval(*n.a, x) * eval(*n.b, x);
            case Op::Neg: return -eval(*n.a, x);
            case Op::Pow: {
                const double base = eval(*n.a, x);
                double r = 1.0;
                for (int k = 0; k < n.index; ++k) r *= base;
                return r;
            }
            case Op::Min: return std::min(eval(*n.a, x), eval(*n.b, x));
            case Op::Max: return std::max(eval(*n.a, x), eval(*n.b, x));
            case Op::Abs: return std::abs(eval(*n.a, x));
        }
        return 0.0;
    }

    struct Parser {
        std::string_view s;
        std::size_t pos;

        [[noreturn]] void fail(const std::string& what) const {
            throw std::invalid_argument("expression '" + std::string(s) + "': " + what + " at offset " +
                                        std::to_string(pos));
        }
        void skip() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }
        bool accept(char c) {
            skip();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }
        void expect(char c) {
            if (!accept(c)) fail(std::string("expected '") + c + "'");
        }

        Ptr expr() {
            Ptr lhs = term();
            while (true) {
                if (accept('+')) lhs = make(Op::Add, lhs, term());
                else if (accept('-')) lhs = make(Op::Sub, lhs, term());
                else return lhs;
            }
        }
        Ptr term() {
            Ptr lhs = unary();
            while (accept('*')) lhs = make(Op::Mul, lhs, unary());
            return lhs;
        }
        Ptr unary() {
            if (accept('-')) return make(Op::Neg, unary());
            return power();
        }
        Ptr power() {
            Ptr base = atom();
            if (accept('^')) {
                skip();
                const std::size_t start = pos;
                while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
                if (start == pos) fail("expected a nonnegative integer exponent");
                auto node = std::make_shared<Node>(Node{Op::Pow, 0.0, 0, base, nullptr});
                node->index = std::stoi(std::string(s.substr(start, pos - start)));
                return node;
            }
            return base;
        }
        Ptr atom() {
            skip();
            if (pos >= s.size()) fail("unexpected end of input");
            const char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
            if (accept('(')) {
                Ptr e = expr();
                expect(')');
                return e;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                const std::size_t start = pos;
                while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
                const std::string_view word = s.substr(start, pos - start);
                if (word == "x1" || word == "x2" || word == "x3") {
                    auto node = std::make_shared<Node>(Node{Op::Var, 0.0, word[1] - '1', nullptr, nullptr});
                    return node;
                }
                if (word == "min" || word == "max") {
                    expect('(');
                    Ptr a = expr();
                    expect(',');
                    Ptr b = expr();
                    expect(')');
                    return make(word == "min" ? Op::Min : Op::Max, a, b);
                }
                if (word == "abs") {
                    expect('(');
                    Ptr a = expr();
                    expect(')');
                    return make(Op::Abs, a);
                }
                pos = start;
                fail("unknown identifier '" + std::string(word) + "'");
            }
            fail("unexpected '" + std::string(1, c) + "'");
        }
        Ptr number() {
            const std::string rest(s.substr(pos));
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(rest, &used);
            } catch (const std::exception&) {
                fail("malformed number");
            }
            pos += used;
            return std::make_shared<Node>(Node{Op::Num, v, 0, nullptr, nullptr});
        }
    };

    Ptr root_;
    std::string text_;
};

}  // namespace martinet::cli
