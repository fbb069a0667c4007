#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet {

using Exponents = std::array<unsigned, 3>;

/// Sparse polynomial in (x1, x2, x3) with real coefficients.
///
/// Terms are kept in a sorted map so iteration order (and therefore every
/// evaluation) is deterministic. Zero coefficients are never stored.
class PolynomialField {
public:
    PolynomialField() = default;

    static PolynomialField constant(double c) {
        PolynomialField p;
        p.add_term({0, 0, 0}, c);
        return p;
    }

    /// The coordinate function x_{axis+1}.
    static PolynomialField coordinate(int axis) {
        PolynomialField p;
        Exponents e{0, 0, 0};
        e.at(static_cast<std::size_t>(axis)) = 1;
        p.add_term(e, 1.0);
        return p;
    }

    static PolynomialField monomial(Exponents e, double c = 1.0) {
        PolynomialField p;
        p.add_term(e, c);
        return p;
    }

    /// f(x1) viewed as a field on R^3.
    static PolynomialField from_profile(const MartinetProfile& f, int order = 0) {
        PolynomialField p;
        auto c = f.derivative_coefficients(order);
        for (std::size_t k = 0; k < c.size(); ++k) p.add_term({static_cast<unsigned>(k), 0, 0}, c[k]);
        return p;
    }

    void add_term(const Exponents& e, double c) {
        if (c == 0.0) return;
        auto [it, inserted] = terms_.try_emplace(e, c);
        if (!inserted) {
            it->second += c;
            if (it->second == 0.0) terms_.erase(it);
        }
    }

    const std::map<Exponents, double>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int total_degree() const {
        int d = 0;
        for (const auto& [e, c] : terms_) d = std::max(d, static_cast<int>(e[0] + e[1] + e[2]));
        return d;
    }

    double coefficient(const Exponents& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? 0.0 : it->second;
    }

    double eval(const Point& p) const {
        double acc = 0.0;
        for (const auto& [e, c] : terms_) {
            acc += c * ipow(p.x1, e[0]) * ipow(p.x2, e[1]) * ipow(p.x3, e[2]);
        }
        return acc;
    }

    double operator()(const Point& p) const { return eval(p); }

    /// d/dx_{axis+1}
    PolynomialField derivative(int axis) const {
        PolynomialField out;
        const auto a = static_cast<std::size_t>(axis);
        for (const auto& [e, c] : terms_) {
            if (e.at(a) == 0) continue;
            Exponents d = e;
            d[a] -= 1;
            out.add_term(d, c * static_cast<double>(e[a]));
        }
        return out;
    }

    PolynomialField& operator+=(const PolynomialField& other) {
        for (const auto& [e, c] : other.terms_) add_term(e, c);
        return *this;
    }
    PolynomialField& operator-=(const PolynomialField& other) {
        for (const auto& [e, c] : other.terms_) add_term(e, -c);
        return *this;
    }
    PolynomialField& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            return *this;
        }
        for (auto& [e, c] : terms_) c *= s;
        return *this;
    }

    friend PolynomialField operator+(PolynomialField a, const PolynomialField& b) { return a += b; }
    friend PolynomialField operator-(PolynomialField a, const PolynomialField& b) { return a -= b; }
    friend PolynomialField operator*(double s, PolynomialField a) { return a *= s; }
    friend PolynomialField operator*(const PolynomialField& a, const PolynomialField& b) {
        PolynomialField out;
        for (const auto& [ea, ca] : a.terms_) {
            for (const auto& [eb, cb] : b.terms_) {
                out.add_term({ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]}, ca * cb);
            }
        }
        return out;
    }

    friend bool operator==(const PolynomialField&, const PolynomialField&) = default;

    /// Human-readable form that parse() accepts, coefficients printed with
    /// 17 significant digits.
    std::string to_string() const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [e, c] : terms_) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.17g", c);
            if (!out.empty()) out += (c < 0.0 ? " " : " + ");
            out += buf;
            for (int a = 0; a < 3; ++a) {
                if (e[static_cast<std::size_t>(a)] == 0) continue;
                out += "*x" + std::to_string(a + 1);
                if (e[static_cast<std::size_t>(a)] > 1) out += "^" + std::to_string(e[static_cast<std::size_t>(a)]);
            }
        }
        return out;
    }

    /// Parses sums of terms such as "1.5*x1^2*x3 - x2 + 3". A term is an
    /// optional sign, an optional numeric coefficient and factors x1, x2, x3
    /// with optional integer powers, joined by '*'.
    static PolynomialField parse(std::string_view text);

private:
    static double ipow(double x, unsigned n) {
        double r = 1.0;
        while (n > 0) {
            if (n & 1u) r *= x;
            x *= x;
            n >>= 1u;
        }
        return r;
    }

    std::map<Exponents, double> terms_;
};

namespace detail {

class FieldParser {
public:
    explicit FieldParser(std::string_view s) : s_(s) {}

    PolynomialField run() {
        PolynomialField out;
        skip_ws();
        if (pos_ == s_.size()) fail("empty polynomial");
        bool first = true;
        while (true) {
            skip_ws();
            if (pos_ == s_.size()) break;
            double sign = 1.0;
            if (peek() == '+' || peek() == '-') {
                sign = peek() == '-' ? -1.0 : 1.0;
                ++pos_;
            } else if (!first) {
                fail("expected '+' or '-'");
            }
            first = false;
            auto [e, c] = term();
            out.add_term(e, sign * c);
        }
        return out;
    }

private:
    std::pair<Exponents, double> term() {
        skip_ws();
        double coeff = 1.0;
        Exponents e{0, 0, 0};
        bool have_factor = false;
        if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
            coeff = number();
            have_factor = true;
        }
        while (true) {
            skip_ws();
            if (have_factor) {
                if (pos_ < s_.size() && peek() == '*') {
                    ++pos_;
                    skip_ws();
                } else {
                    break;
                }
            }
            if (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(peek())) || peek() == '.')) {
                coeff *= number();
            } else if (pos_ < s_.size() && peek() == 'x') {
                ++pos_;
                if (pos_ >= s_.size() || peek() < '1' || peek() > '3') fail("expected x1, x2 or x3");
                const auto axis = static_cast<std::size_t>(peek() - '1');
                ++pos_;
                unsigned power = 1;
                skip_ws();
                if (pos_ < s_.size() && peek() == '^') {
                    ++pos_;
                    skip_ws();
                    const std::size_t start = pos_;
                    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
                    if (start == pos_) fail("expected integer exponent");
                    power = static_cast<unsigned>(std::stoul(std::string(s_.substr(start, pos_ - start))));
                }
                e[axis] += power;
            } else {
                fail("expected number or variable");
            }
            have_factor = true;
        }
        return {e, coeff};
    }

    double number() {
        const std::string rest(s_.substr(pos_));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(rest, &used);
        } catch (const std::exception&) {
            fail("bad number");
        }
        pos_ += used;
        return v;
    }

    char peek() const { return s_[pos_]; }
    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    [[noreturn]] void fail(const std::string& what) const {
        throw std::invalid_argument("polynomial parse error at offset " + std::to_string(pos_) + ": " + what +
                                    " in \"" + std::string(s_) + "\"");
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline PolynomialField PolynomialField::parse(std::string_view text) { return detail::FieldParser(text).run(); }

}  // namespace martinet
