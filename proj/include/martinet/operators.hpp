#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "martinet/polynomial_field.hpp"
#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet {

/// Raised when an operator needs a power of ||grad_0 u|| that is undefined
/// at a critical point.
class DegenerateGradient : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Symbolic action of X1 = d/dx1, X2 = d/dx2 + f d/dx3 and
/// X3 = [X1, X2] = f' d/dx3 on a polynomial field. The result is again a
/// polynomial field, so compositions such as X1 X2 u stay exact.
inline PolynomialField vector_field(const PolynomialField& u, const MartinetProfile& f, int index) {
    switch (index) {
        case 1: return u.derivative(0);
        case 2: return u.derivative(1) + PolynomialField::from_profile(f) * u.derivative(2);
        case 3: return PolynomialField::from_profile(f, 1) * u.derivative(2);
        default: throw std::invalid_argument("vector field index must be 1, 2 or 3");
    }
}

/// X_index u evaluated at p.
inline double apply_vector_field(const PolynomialField& u, const MartinetProfile& f, int index, const Point& p) {
    switch (index) {
        case 1: return u.derivative(0).eval(p);
        case 2: return u.derivative(1).eval(p) + f(p.x1) * u.derivative(2).eval(p);
        case 3: return f.eval(p.x1, 1) * u.derivative(2).eval(p);
        default: throw std::invalid_argument("vector field index must be 1, 2 or 3");
    }
}

inline HorizontalVector horizontal_gradient(const PolynomialField& u, const MartinetProfile& f, const Point& p) {
    return {apply_vector_field(u, f, 1, p), apply_vector_field(u, f, 2, p)};
}

inline SemiHorizontalVector semi_horizontal_gradient(const PolynomialField& u, const MartinetProfile& f,
                                                     const Point& p) {
    return {apply_vector_field(u, f, 1, p), apply_vector_field(u, f, 2, p), apply_vector_field(u, f, 3, p)};
}

/// (D^2 u)* with entries (X_i X_j u + X_j X_i u) / 2, i, j in {1, 2}.
inline Sym2 symmetrized_hessian(const PolynomialField& u, const MartinetProfile& f, const Point& p) {
    const PolynomialField x1u = vector_field(u, f, 1);
    const PolynomialField x2u = vector_field(u, f, 2);
    const double x11 = vector_field(x1u, f, 1).eval(p);
    const double x12 = vector_field(x2u, f, 1).eval(p);  // X1 X2 u
    const double x21 = vector_field(x1u, f, 2).eval(p);  // X2 X1 u
    const double x22 = vector_field(x2u, f, 2).eval(p);
    return {x11, 0.5 * (x12 + x21), x22};
}

/// <(D^2 u)* grad_0 u, grad_0 u>
inline double infinity_laplacian(const PolynomialField& u, const MartinetProfile& f, const Point& p) {
    return symmetrized_hessian(u, f, p).quadratic_form(horizontal_gradient(u, f, p));
}

/// X1(|grad_0 u|^(q-2) X1 u) + X2(|grad_0 u|^(q-2) X2 u), expanded by the
/// product rule into
///   |grad_0 u|^(q-2) (X1X1u + X2X2u) + (q-2) |grad_0 u|^(q-4) Delta_inf u.
/// At a critical point the second term is taken as 0 for q = 2 and q >= 4;
/// for 2 < q < 4 it is undefined and DegenerateGradient is thrown.
inline double q_laplacian(const PolynomialField& u, const MartinetProfile& f, const Point& p, double q) {
    if (!(q >= 2.0) || !std::isfinite(q)) throw std::invalid_argument("q-Laplacian requires 2 <= q < inf");
    const HorizontalVector g = horizontal_gradient(u, f, p);
    const Sym2 h = symmetrized_hessian(u, f, p);
    const double trace = h.m11 + h.m22;
    const double n2 = g.norm_squared();
    if (q == 2.0) return trace;
    if (n2 == 0.0) {
        if (q < 4.0) throw DegenerateGradient("q-Laplacian with 2 < q < 4 is undefined where grad_0 u = 0");
        // |grad|^(q-2) vanishes; the (q-2)|grad|^(q-4) factor is 1 at q = 4 and
        // 0 beyond, but multiplies Delta_inf u = 0 in both cases.
        return 0.0;
    }
    const double n = std::sqrt(n2);
    return std::pow(n, q - 2.0) * trace + (q - 2.0) * std::pow(n, q - 4.0) * h.quadratic_form(g);
}

enum class JensenKind { F, G };

/// Jensen's auxiliary operators
///   F_eps(eta, X) = min{|eta|^2 - eps^2, -<X eta, eta>}
///   G_eps(eta, X) = max{eps^2 - |eta|^2, -<X eta, eta>}
inline double jensen_operator(JensenKind kind, const HorizontalVector& eta, const Sym2& x, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("Jensen operator requires eps > 0");
    const double gap = eta.norm_squared() - eps * eps;
    const double curvature = -x.quadratic_form(eta);
    return kind == JensenKind::F ? std::min(gap, curvature) : std::max(-gap, curvature);
}

}  // namespace martinet
