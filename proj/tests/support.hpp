#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "martinet/polynomial_field.hpp"
#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet::testing {

inline PolynomialField random_field(std::mt19937_64& rng, unsigned max_degree, int max_terms = 8) {
    std::uniform_int_distribution<unsigned> e(0, max_degree);
    std::uniform_int_distribution<int> nterms(1, max_terms);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    PolynomialField u;
    const int n = nterms(rng);
    for (int k = 0; k < n; ++k) {
        unsigned a = e(rng);
        unsigned b = e(rng);
        unsigned d = e(rng);
        while (a + b + d > max_degree) {
            if (a > 0) --a;
            else if (b > 0) --b;
            else --d;
        }
        u.add_term({a, b, d}, c(rng));
    }
    return u;
}

inline MartinetProfile random_profile(std::mt19937_64& rng, int max_degree) {
    std::uniform_int_distribution<int> deg(1, max_degree);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    std::vector<double> coeffs(static_cast<std::size_t>(deg(rng)) + 1);
    for (double& x : coeffs) x = c(rng);
    if (coeffs.back() == 0.0) coeffs.back() = 1.0;
    return MartinetProfile(coeffs);
}

inline Point random_point(std::mt19937_64& rng, double r) {
    std::uniform_real_distribution<double> c(-r, r);
    const double a = c(rng);
    const double b = c(rng);
    return {a, b, c(rng)};
}

/// |a - b| / max(1, |b|)
inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

/// Plain power-basis evaluation of f^(order), independent of the library's
/// derivative tables.
inline double profile_oracle(const std::vector<double>& c, double x, int order) {
    double s = 0.0;
    for (std::size_t k = static_cast<std::size_t>(order); k < c.size(); ++k) {
        double fall = 1.0;
        for (int j = 0; j < order; ++j) fall *= static_cast<double>(k) - j;
        s += c[k] * fall * std::pow(x, static_cast<double>(k) - order);
    }
    return s;
}

/// Partial derivative d^(i+j+k) u / dx1^i dx2^j dx3^k evaluated term by
/// term from the exponent map.
inline double partial(const PolynomialField& u, unsigned i, unsigned j, unsigned k, const Point& p) {
    double s = 0.0;
    for (const auto& [e, c] : u.terms()) {
        if (e[0] < i || e[1] < j || e[2] < k) continue;
        double v = c;
        const unsigned ord[3] = {i, j, k};
        for (int a = 0; a < 3; ++a) {
            const unsigned n = e[static_cast<std::size_t>(a)];
            for (unsigned m = 0; m < ord[a]; ++m) v *= static_cast<double>(n - m);
            v *= std::pow(p[a], static_cast<double>(n - ord[a]));
        }
        s += v;
    }
    return s;
}

}  // namespace martinet::testing
