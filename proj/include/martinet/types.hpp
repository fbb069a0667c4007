#pragma once

#include <array>
#include <cmath>
#include <utility>

namespace martinet {

/// A point of the Martinet space in coordinates (x1, x2, x3).
struct Point {
    double x1 = 0.0;
    double x2 = 0.0;
    double x3 = 0.0;

    constexpr double operator[](int axis) const { return axis == 0 ? x1 : (axis == 1 ? x2 : x3); }
    constexpr double& operator[](int axis) { return axis == 0 ? x1 : (axis == 1 ? x2 : x3); }

    bool is_finite() const { return std::isfinite(x1) && std::isfinite(x2) && std::isfinite(x3); }

    friend constexpr bool operator==(const Point&, const Point&) = default;
};

inline double euclidean_distance(const Point& p, const Point& q) {
    return std::hypot(p.x1 - q.x1, p.x2 - q.x2, p.x3 - q.x3);
}

/// Components along (X1, X2).
struct HorizontalVector {
    double a1 = 0.0;
    double a2 = 0.0;

    double norm_squared() const { return a1 * a1 + a2 * a2; }
    double norm() const { return std::hypot(a1, a2); }

    friend constexpr bool operator==(const HorizontalVector&, const HorizontalVector&) = default;
};

/// Components along (X1, X2, X3).
struct SemiHorizontalVector {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;

    HorizontalVector horizontal() const { return {a1, a2}; }
    double norm_squared() const { return a1 * a1 + a2 * a2 + a3 * a3; }

    friend constexpr bool operator==(const SemiHorizontalVector&, const SemiHorizontalVector&) = default;
};

/// 2x2 symmetric matrix, upper triangle stored.
struct Sym2 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m22 = 0.0;

    double quadratic_form(const HorizontalVector& v) const {
        return m11 * v.a1 * v.a1 + 2.0 * m12 * v.a1 * v.a2 + m22 * v.a2 * v.a2;
    }

    HorizontalVector apply(const HorizontalVector& v) const {
        return {m11 * v.a1 + m12 * v.a2, m12 * v.a1 + m22 * v.a2};
    }

    friend Sym2 operator+(const Sym2& a, const Sym2& b) { return {a.m11 + b.m11, a.m12 + b.m12, a.m22 + b.m22}; }
    friend Sym2 operator*(double s, const Sym2& a) { return {s * a.m11, s * a.m12, s * a.m22}; }
    friend constexpr bool operator==(const Sym2&, const Sym2&) = default;
};

/// 3x3 symmetric matrix, upper triangle stored.
struct Sym3 {
    double m11 = 0.0;
    double m12 = 0.0;
    double m13 = 0.0;
    double m22 = 0.0;
    double m23 = 0.0;
    double m33 = 0.0;

    double operator()(int i, int j) const {
        if (i > j) std::swap(i, j);
        switch (i * 3 + j) {
            case 0: return m11;
            case 1: return m12;
            case 2: return m13;
            case 4: return m22;
            case 5: return m23;
            default: return m33;
        }
    }

    static Sym3 identity() { return {1.0, 0.0, 0.0, 1.0, 0.0, 1.0}; }

    friend Sym3 operator+(const Sym3& a, const Sym3& b) {
        return {a.m11 + b.m11, a.m12 + b.m12, a.m13 + b.m13, a.m22 + b.m22, a.m23 + b.m23, a.m33 + b.m33};
    }
    friend Sym3 operator*(double s, const Sym3& a) {
        return {s * a.m11, s * a.m12, s * a.m13, s * a.m22, s * a.m23, s * a.m33};
    }
    friend constexpr bool operator==(const Sym3&, const Sym3&) = default;
};

using Vec3 = std::array<double, 3>;
using Mat23 = std::array<std::array<double, 3>, 2>;
using Mat33 = std::array<std::array<double, 3>, 3>;

}  // namespace martinet
