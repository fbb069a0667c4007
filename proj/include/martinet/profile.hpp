#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace martinet {

/// The profile f(x1) = sum_k c_k x1^k of the second vector field
/// X2 = d/dx2 + f(x1) d/dx3.
///
/// Derivatives of every order are exact: each one is a coefficient
/// sequence computed once at construction. Construction rejects profiles
/// with f' identically zero, since then X1, X2 never generate d/dx3.
class MartinetProfile {
public:
    explicit MartinetProfile(std::vector<double> coeffs) {
        while (coeffs.size() > 1 && coeffs.back() == 0.0) coeffs.pop_back();
        for (double c : coeffs) {
            if (!std::isfinite(c)) throw std::invalid_argument("profile coefficients must be finite");
        }
        bool nonconstant = false;
        for (std::size_t k = 1; k < coeffs.size(); ++k) nonconstant = nonconstant || coeffs[k] != 0.0;
        if (!nonconstant) throw std::invalid_argument("profile must have f' not identically zero");

        derivatives_.push_back(std::move(coeffs));
        while (derivatives_.back().size() > 1) {
            const auto& prev = derivatives_.back();
            std::vector<double> next(prev.size() - 1);
            for (std::size_t k = 1; k < prev.size(); ++k) next[k - 1] = static_cast<double>(k) * prev[k];
            derivatives_.push_back(std::move(next));
        }
    }

    MartinetProfile(std::initializer_list<double> coeffs) : MartinetProfile(std::vector<double>(coeffs)) {}

    /// f(x1) = x1, the Heisenberg group.
    static MartinetProfile heisenberg() { return MartinetProfile({0.0, 1.0}); }
    /// f(x1) = x1^2 / 2, the classical Martinet distribution.
    static MartinetProfile martinet() { return MartinetProfile({0.0, 0.0, 0.5}); }
    /// f(x1) = x1^k.
    static MartinetProfile monomial(int k) {
        std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
        c.back() = 1.0;
        return MartinetProfile(std::move(c));
    }

    std::span<const double> coefficients() const { return derivatives_.front(); }
    int degree() const { return static_cast<int>(derivatives_.front().size()) - 1; }

    /// Coefficients of f^(order); empty-equivalent {0} past the degree.
    std::span<const double> derivative_coefficients(int order) const {
        if (order < 0) throw std::invalid_argument("derivative order must be nonnegative");
        if (static_cast<std::size_t>(order) >= derivatives_.size()) return zero_;
        return derivatives_[static_cast<std::size_t>(order)];
    }

    /// f^(order)(x1).
    double eval(double x1, int order = 0) const {
        auto c = derivative_coefficients(order);
        double acc = 0.0;
        for (std::size_t k = c.size(); k-- > 0;) acc = acc * x1 + c[k];
        return acc;
    }

    double operator()(double x1) const { return eval(x1, 0); }

    /// integral_0^t f(x1 + a s) ds, computed from the finite Taylor expansion
    /// sum_k f^(k)(x1) a^k t^(k+1) / (k+1)!. With order > 0 the same sum is
    /// formed from f^(order), which gives the x1-derivative of the integral.
    double flow_integral(double x1, double a, double t, int order = 0) const {
        double acc = 0.0;
        double factor = t;  // a^k t^(k+1) / (k+1)!
        for (int k = 0; order + k <= degree(); ++k) {
            acc += eval(x1, order + k) * factor;
            factor *= a * t / static_cast<double>(k + 2);
        }
        return acc;
    }

    /// d/da of flow_integral(x1, a, t).
    double flow_integral_da(double x1, double a, double t) const {
        // sum_{k>=1} f^(k)(x1) k a^(k-1) t^(k+1) / (k+1)!
        double acc = 0.0;
        double factor = t * t / 2.0;  // a^(k-1) t^(k+1) / (k+1)! at k = 1
        for (int k = 1; k <= degree(); ++k) {
            acc += eval(x1, k) * static_cast<double>(k) * factor;
            factor *= a * t / static_cast<double>(k + 2);
        }
        return acc;
    }

    std::string to_string() const {
        std::string out;
        auto c = coefficients();
        for (std::size_t k = 0; k < c.size(); ++k) {
            if (c[k] == 0.0) continue;
            if (!out.empty()) out += " + ";
            out += std::to_string(c[k]);
            if (k >= 1) out += "*x1";
            if (k >= 2) out += "^" + std::to_string(k);
        }
        return out.empty() ? "0" : out;
    }

private:
    std::vector<std::vector<double>> derivatives_;
    static inline const std::vector<double> zero_{0.0};
};

}  // namespace martinet
