#pragma once

#include <stdexcept>

#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet {

/// Euclidean second-order jet element: gradient in R^3, Hessian in S^3.
struct EuclideanJet2 {
    Vec3 eta{0.0, 0.0, 0.0};
    Sym3 hessian{};

    friend bool operator==(const EuclideanJet2&, const EuclideanJet2&) = default;
};

/// Martinet second-order jet element: semi-horizontal gradient and a
/// symmetric 2x2 horizontal Hessian.
struct MartinetJet2 {
    SemiHorizontalVector eta{};
    Sym2 hessian{};

    friend bool operator==(const MartinetJet2&, const MartinetJet2&) = default;
};

/// Rows (1, 0, 0) and (0, 1, f(x1)): the coefficients of X1, X2.
inline Mat23 coefficient_matrix_A(const MartinetProfile& f, const Point& p) {
    return {{{1.0, 0.0, 0.0}, {0.0, 1.0, f(p.x1)}}};
}

/// A(p) stacked over (0, 0, f'(x1)).
inline Mat33 coefficient_matrix_B(const MartinetProfile& f, const Point& p) {
    return {{{1.0, 0.0, 0.0}, {0.0, 1.0, f(p.x1)}, {0.0, 0.0, f.eval(p.x1, 1)}}};
}

/// (eta3 / 2) f'(x1) on the off-diagonal.
inline Sym2 twisting_matrix_T(double eta3, const MartinetProfile& f, const Point& p) {
    return {0.0, 0.5 * eta3 * f.eval(p.x1, 1), 0.0};
}

/// Maps a Euclidean jet at p to (B(p) eta, A(p) X A(p)^T + T(eta, p)).
inline MartinetJet2 twist_jet(const EuclideanJet2& j, const MartinetProfile& f, const Point& p) {
    const auto a = coefficient_matrix_A(f, p);
    const auto b = coefficient_matrix_B(f, p);

    MartinetJet2 out;
    out.eta.a1 = b[0][0] * j.eta[0] + b[0][1] * j.eta[1] + b[0][2] * j.eta[2];
    out.eta.a2 = b[1][0] * j.eta[0] + b[1][1] * j.eta[1] + b[1][2] * j.eta[2];
    out.eta.a3 = b[2][0] * j.eta[0] + b[2][1] * j.eta[1] + b[2][2] * j.eta[2];

    // A X A^T, entry (r, s) = sum_{i,k} A[r][i] X(i,k) A[s][k]
    auto axat = [&](int r, int s) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int k = 0; k < 3; ++k) {
                acc += a[static_cast<std::size_t>(r)][static_cast<std::size_t>(i)] * j.hessian(i, k) *
                       a[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
            }
        }
        return acc;
    };
    out.hessian = Sym2{axat(0, 0), axat(0, 1), axat(1, 1)} + twisting_matrix_T(j.eta[2], f, p);
    return out;
}

/// Horizontalized gradients of the doubling penalty
///   phi(p, q) = (x1-y1)^2/2 + (x2-y2)^4/4 + (x3-y3)^4/4
/// at tau = 1: upsilon_p = B(p) grad_p phi, upsilon_q = B(q) (-grad_q phi).
/// Scale both vectors by tau to obtain the jet gradients.
struct PenaltyJetPair {
    SemiHorizontalVector upsilon_p;
    SemiHorizontalVector upsilon_q;
    double phi = 0.0;
    double tau = 1.0;
};

inline double doubling_penalty(const Point& p, const Point& q) {
    const double d1 = p.x1 - q.x1;
    const double d2 = p.x2 - q.x2;
    const double d3 = p.x3 - q.x3;
    return 0.5 * d1 * d1 + 0.25 * d2 * d2 * d2 * d2 + 0.25 * d3 * d3 * d3 * d3;
}

inline PenaltyJetPair penalty_jet_pair(const Point& p, const Point& q, double tau, const MartinetProfile& f) {
    if (!(tau > 0.0)) throw std::invalid_argument("penalty_jet_pair requires tau > 0");
    const double d1 = p.x1 - q.x1;
    const double d2 = p.x2 - q.x2;
    const double d3 = p.x3 - q.x3;
    // grad_p phi = -grad_q phi
    const Vec3 g{d1, d2 * d2 * d2, d3 * d3 * d3};
    auto horizontalize = [&](const Point& at) {
        return SemiHorizontalVector{g[0], g[1] + f(at.x1) * g[2], f.eval(at.x1, 1) * g[2]};
    };
    return {horizontalize(p), horizontalize(q), doubling_penalty(p, q), tau};
}

struct VectorGap {
    double gap = 0.0;  // |upsilon_p|^2 - |upsilon_q|^2
    double phi = 0.0;
};

/// The first components agree, so the gap is evaluated in the factored form
/// (a_p - a_q)(a_p + a_q) per component, which avoids cancellation.
inline VectorGap vector_gap(const Point& p, const Point& q, const MartinetProfile& f) {
    const auto pair = penalty_jet_pair(p, q, 1.0, f);
    const double d3 = p.x3 - q.x3;
    const double g3 = d3 * d3 * d3;
    const double diff2 = (f(p.x1) - f(q.x1)) * g3;
    const double diff3 = (f.eval(p.x1, 1) - f.eval(q.x1, 1)) * g3;
    const double gap = diff2 * (pair.upsilon_p.a2 + pair.upsilon_q.a2) + diff3 * (pair.upsilon_p.a3 + pair.upsilon_q.a3);
    return {gap, pair.phi};
}

struct EtaPair {
    HorizontalVector plus;
    HorizontalVector minus;

    double gap() const { return plus.norm_squared() - minus.norm_squared(); }
};

/// Horizontal gradients produced by the weighted quadratic penalty
/// sum_k tau_k (x_k - y_k)^2 / 2, twisted at p (plus) and at q (minus).
inline EtaPair imp_eta_pair(const Point& p, const Point& q, const Vec3& tau, const MartinetProfile& f) {
    for (double t : tau) {
        if (!(t > 0.0)) throw std::invalid_argument("imp_eta_pair requires positive tau components");
    }
    const double g1 = tau[0] * (p.x1 - q.x1);
    const double g2 = tau[1] * (p.x2 - q.x2);
    const double g3 = tau[2] * (p.x3 - q.x3);
    return {{g1, g2 + f(p.x1) * g3}, {g1, g2 + f(q.x1) * g3}};
}

}  // namespace martinet
