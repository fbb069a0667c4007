#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "martinet/errors.hpp"
#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet {

/// Smallest k >= 1 with f^(k)(x1) != 0. For the polynomial profiles accepted
/// by MartinetProfile such a k always exists and is at most deg f.
inline int bracket_order(const MartinetProfile& f, double x1) {
    for (int k = 1; k <= f.degree(); ++k) {
        if (f.eval(x1, k) != 0.0) return k;
    }
    throw std::logic_error("bracket_order: profile has f' identically zero");
}

/// |x1 - y1| + |x2 - y2| + |x3 - y3|^(1/(r+1)) with r the bracket order at
/// p.x1. Comparable to the Carnot-Caratheodory distance up to constants.
inline double ball_box_distance(const Point& p, const Point& q, const MartinetProfile& f) {
    const int r = bracket_order(f, p.x1);
    return std::abs(p.x1 - q.x1) + std::abs(p.x2 - q.x2) + std::pow(std::abs(p.x3 - q.x3), 1.0 / (r + 1.0));
}

/// Horizontal curve with piecewise-constant controls on [0, duration]:
/// x1' = u1, x2' = u2, x3' = f(x1) u2 on each of the equal segments.
struct ControlCurve {
    Point start;
    std::vector<double> u1;
    std::vector<double> u2;
    double duration = 1.0;

    std::size_t segments() const { return u1.size(); }
    double segment_duration() const { return duration / static_cast<double>(u1.size()); }

    /// Integrates the segments exactly (f is a polynomial).
    Point endpoint(const MartinetProfile& f) const {
        const double dt = segment_duration();
        Point x = start;
        for (std::size_t k = 0; k < u1.size(); ++k) {
            x.x3 += u2[k] * f.flow_integral(x.x1, u1[k], dt);
            x.x1 += u1[k] * dt;
            x.x2 += u2[k] * dt;
        }
        return x;
    }

    /// Sum of segment durations times sqrt(u1^2 + u2^2).
    double length() const {
        const double dt = segment_duration();
        double acc = 0.0;
        for (std::size_t k = 0; k < u1.size(); ++k) acc += dt * std::hypot(u1[k], u2[k]);
        return acc;
    }

    ControlCurve reversed(const MartinetProfile& f) const {
        ControlCurve r;
        r.start = endpoint(f);
        r.duration = duration;
        r.u1.assign(u1.rbegin(), u1.rend());
        r.u2.assign(u2.rbegin(), u2.rend());
        for (auto& v : r.u1) v = -v;
        for (auto& v : r.u2) v = -v;
        return r;
    }
};

struct CcOptions {
    int segments = 32;
    /// L-BFGS iterations allowed per random start.
    int iters = 4000;
    std::uint64_t seed = 0;
    int starts = 8;
    /// Required Euclidean endpoint mismatch.
    double endpoint_tol = 1e-6;
};

struct CcResult {
    double length = 0.0;
    double mismatch = 0.0;
    ControlCurve curve;
    int feasible_starts = 0;
};

namespace detail {

/// Endpoint map of the control vector z = (u1_0, u2_0, u1_1, u2_1, ...)
/// together with its Jacobian (3 x 2N, row-major).
struct EndpointEval {
    Vec3 end{};
    std::vector<double> jac;
};

inline EndpointEval endpoint_with_jacobian(const MartinetProfile& f, const Point& start, std::span<const double> z,
                                           double dt) {
    const std::size_t n = z.size() / 2;
    EndpointEval out;
    out.jac.assign(3 * z.size(), 0.0);
    std::vector<double> x1(n);
    double cur = start.x1;
    double x2 = start.x2;
    double x3 = start.x3;
    for (std::size_t k = 0; k < n; ++k) {
        x1[k] = cur;
        const double a = z[2 * k];
        const double b = z[2 * k + 1];
        x3 += b * f.flow_integral(cur, a, dt);
        cur += a * dt;
        x2 += b * dt;
    }
    out.end = {cur, x2, x3};

    double* j1 = out.jac.data();
    double* j2 = j1 + z.size();
    double* j3 = j2 + z.size();
    double suffix = 0.0;  // dt * sum_{j > k} u2_j dI_j/dx
    for (std::size_t k = n; k-- > 0;) {
        const double a = z[2 * k];
        const double b = z[2 * k + 1];
        j1[2 * k] = dt;
        j2[2 * k + 1] = dt;
        j3[2 * k + 1] = f.flow_integral(x1[k], a, dt);
        j3[2 * k] = b * f.flow_integral_da(x1[k], a, dt) + suffix;
        suffix += dt * b * f.flow_integral(x1[k], a, dt, 1);
    }
    return out;
}

/// Limited-memory BFGS with Armijo backtracking. Returns iterations used.
template <class Objective>
int lbfgs_minimize(Objective&& objective, std::vector<double>& x, int max_iters, double gtol) {
    const std::size_t n = x.size();
    constexpr std::size_t memory = 12;
    std::vector<std::vector<double>> s_hist;
    std::vector<std::vector<double>> y_hist;
    std::vector<double> rho_hist;
    std::vector<double> g(n);
    std::vector<double> g_new(n);
    std::vector<double> x_new(n);
    std::vector<double> d(n);
    std::vector<double> alpha(memory);

    double fx = objective(x, g);
    int it = 0;
    for (; it < max_iters; ++it) {
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        if (gnorm <= gtol) break;

        // two-loop recursion
        d = g;
        const std::size_t m = s_hist.size();
        for (std::size_t i = m; i-- > 0;) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += s_hist[i][k] * d[k];
            alpha[i] = rho_hist[i] * dot;
            for (std::size_t k = 0; k < n; ++k) d[k] -= alpha[i] * y_hist[i][k];
        }
        double gamma = 1.0;
        if (m > 0) {
            double yy = 0.0;
            for (std::size_t k = 0; k < n; ++k) yy += y_hist[m - 1][k] * y_hist[m - 1][k];
            gamma = 1.0 / (rho_hist[m - 1] * yy);
        }
        for (auto& v : d) v *= gamma;
        for (std::size_t i = 0; i < m; ++i) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n; ++k) dot += y_hist[i][k] * d[k];
            const double beta = rho_hist[i] * dot;
            for (std::size_t k = 0; k < n; ++k) d[k] += (alpha[i] - beta) * s_hist[i][k];
        }
        for (auto& v : d) v = -v;

        double slope = 0.0;
        for (std::size_t k = 0; k < n; ++k) slope += g[k] * d[k];
        if (!(slope < 0.0)) {
            // not a descent direction: restart from steepest descent
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (std::size_t k = 0; k < n; ++k) d[k] = -g[k];
            slope = 0.0;
            for (std::size_t k = 0; k < n; ++k) slope += g[k] * d[k];
        }

        double step = 1.0;
        if (m == 0) {
            double dn = 0.0;
            for (double v : d) dn = std::max(dn, std::abs(v));
            step = std::min(1.0, 0.1 / std::max(dn, 1e-300));
        }
        double f_new = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t k = 0; k < n; ++k) x_new[k] = x[k] + step * d[k];
            f_new = objective(x_new, g_new);
            if (std::isfinite(f_new) && f_new <= fx + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        std::vector<double> s(n);
        std::vector<double> y(n);
        double sy = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            s[k] = x_new[k] - x[k];
            y[k] = g_new[k] - g[k];
            sy += s[k] * y[k];
        }
        x.swap(x_new);
        g.swap(g_new);
        fx = f_new;
        if (sy > 1e-300) {
            if (s_hist.size() == memory) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }
    }
    return it;
}

}  // namespace detail

/// Upper bound on the Carnot-Caratheodory distance d(p, q) by direct
/// transcription: piecewise-constant controls on [0, 1], minimizing the
/// energy (1/2) int |u|^2 subject to the endpoint constraint, which is
/// enforced by an augmented Lagrangian with geometric penalty growth. The
/// reported value is the length of the best curve whose endpoint lies
/// within options.endpoint_tol of q.
///
/// Controls are scaled by the ball-box size of q relative to p and the
/// x3 constraint by the size of the x3 displacement, so dilation-related
/// targets produce dilated solutions from the same seed.
inline CcResult cc_upper_bound_curve(const Point& p, const Point& q, const MartinetProfile& f,
                                     const CcOptions& opt = {}) {
    if (opt.segments < 4) throw std::invalid_argument("cc_upper_bound requires at least 4 segments");
    if (opt.iters < 1) throw std::invalid_argument("cc_upper_bound requires a positive iteration budget");
    if (opt.starts < 1) throw std::invalid_argument("cc_upper_bound requires at least one start");
    if (!p.is_finite() || !q.is_finite()) throw std::invalid_argument("cc_upper_bound requires finite points");

    const auto n = static_cast<std::size_t>(opt.segments);
    const double dt = 1.0 / static_cast<double>(n);

    CcResult best;
    best.curve.start = p;
    best.curve.u1.assign(n, 0.0);
    best.curve.u2.assign(n, 0.0);
    if (p == q) return best;

    const double scale = ball_box_distance(p, q, f);
    const Vec3 delta{q.x1 - p.x1, q.x2 - p.x2, q.x3 - p.x3};
    const int order = bracket_order(f, p.x1);
    const Vec3 kappa{scale, scale, std::max(std::abs(delta[2]), std::pow(scale, order + 1.0))};

    // Endpoint residual in scaled units for the scaled controls z.
    auto residual = [&](std::span<const double> z, std::vector<double>& w, detail::EndpointEval& ev, Vec3& c) {
        for (std::size_t k = 0; k < z.size(); ++k) w[k] = scale * z[k];
        ev = detail::endpoint_with_jacobian(f, p, w, dt);
        for (std::size_t i = 0; i < 3; ++i) c[i] = (ev.end[i] - (p[static_cast<int>(i)] + delta[i])) / kappa[i];
    };

    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double best_length = std::numeric_limits<double>::infinity();
    double best_mismatch = std::numeric_limits<double>::infinity();

    for (int start = 0; start < opt.starts; ++start) {
        std::vector<double> z(2 * n);
        double coef[2][2][2];  // [harmonic][cos/sin][component]
        for (auto& h : coef) {
            for (auto& cs : h) {
                for (auto& v : cs) v = normal(rng);
            }
        }
        for (std::size_t k = 0; k < n; ++k) {
            const double t = (static_cast<double>(k) + 0.5) * dt;
            for (std::size_t c = 0; c < 2; ++c) {
                double v = delta[c] / scale;
                for (std::size_t m = 0; m < 2; ++m) {
                    const double w = 2.0 * std::numbers::pi * static_cast<double>(m + 1) * t;
                    v += 2.0 * (coef[m][0][c] * std::cos(w) + coef[m][1][c] * std::sin(w)) / static_cast<double>(m + 1);
                }
                z[2 * k + c] = v;
            }
        }

        // The loop part of the initial controls may wind the wrong way for the
        // x3 target; its mirror image (loop part of u2 negated) winds the other
        // way. Keep whichever starts closer to feasibility.
        {
            std::vector<double> mirrored = z;
            for (std::size_t k = 0; k < n; ++k) {
                mirrored[2 * k + 1] = 2.0 * delta[1] / scale - z[2 * k + 1];
            }
            std::vector<double> ws(2 * n);
            detail::EndpointEval e0;
            detail::EndpointEval e1;
            Vec3 c0{};
            Vec3 c1{};
            residual(z, ws, e0, c0);
            residual(mirrored, ws, e1, c1);
            if (std::hypot(c1[0], c1[1], c1[2]) < std::hypot(c0[0], c0[1], c0[2])) z.swap(mirrored);
        }

        Vec3 lambda{0.0, 0.0, 0.0};
        double mu = 1e3;
        std::vector<double> w(2 * n);
        detail::EndpointEval ev;
        Vec3 c{};
        int budget = opt.iters;
        double prev_violation = std::numeric_limits<double>::infinity();

        auto lagrangian = [&](const std::vector<double>& zz, std::vector<double>& grad) {
            residual(zz, w, ev, c);
            double energy = 0.0;
            for (std::size_t k = 0; k < zz.size(); ++k) {
                energy += 0.5 * dt * zz[k] * zz[k];
                grad[k] = dt * zz[k];
            }
            double val = energy;
            for (std::size_t i = 0; i < 3; ++i) {
                val += lambda[i] * c[i] + 0.5 * mu * c[i] * c[i];
                const double weight = (lambda[i] + mu * c[i]) * scale / kappa[i];
                const double* row = ev.jac.data() + i * zz.size();
                for (std::size_t k = 0; k < zz.size(); ++k) grad[k] += weight * row[k];
            }
            return val;
        };

        for (int outer = 0; outer < 60 && budget > 0; ++outer) {
            const double gtol = std::max(1e-11, 1e-2 * std::pow(0.1, outer));
            budget -= detail::lbfgs_minimize(lagrangian, z, std::min(budget, 500), gtol);
            residual(z, w, ev, c);
            const double violation = std::max({std::abs(c[0]), std::abs(c[1]), std::abs(c[2])});
            if (violation <= 1e-10) break;
            for (std::size_t i = 0; i < 3; ++i) lambda[i] += mu * c[i];
            if (violation > 0.25 * prev_violation) mu = std::min(mu * 10.0, 1e12);
            prev_violation = violation;
            budget -= 1;

        }

        residual(z, w, ev, c);
        const double mismatch =
            std::hypot(ev.end[0] - q.x1, ev.end[1] - q.x2, ev.end[2] - q.x3);
        ControlCurve curve;
        curve.start = p;
        curve.u1.resize(n);
        curve.u2.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            curve.u1[k] = w[2 * k];
            curve.u2[k] = w[2 * k + 1];
        }
        const double len = curve.length();
        best_mismatch = std::min(best_mismatch, mismatch);
        if (mismatch <= opt.endpoint_tol) {
            ++best.feasible_starts;
            if (len < best_length) {
                best_length = len;
                best.length = len;
                best.mismatch = mismatch;
                best.curve = std::move(curve);
            }
        }
    }

    if (best.feasible_starts == 0) {
        throw NonConvergence("cc_upper_bound: endpoint mismatch " + std::to_string(best_mismatch) +
                                 " exceeds tolerance; raise the segment count or iteration budget",
                             best_mismatch, opt.iters);
    }
    return best;
}

inline double cc_upper_bound(const Point& p, const Point& q, const MartinetProfile& f, int segments, int iters,
                             std::uint64_t seed) {
    CcOptions opt;
    opt.segments = segments;
    opt.iters = iters;
    opt.seed = seed;
    return cc_upper_bound_curve(p, q, f, opt).length;
}

/// Least-squares slope of log y against log x.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope needs matching samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const auto n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ScalingFit {
    double slope = 0.0;
    std::vector<double> deltas;
    std::vector<double> lengths;
};

/// Fits the exponent of d(base, base + delta e_axis) ~ delta^slope.
inline ScalingFit scaling_exponent(const MartinetProfile& f, const Point& base, int axis,
                                   std::span<const double> deltas, const CcOptions& opt = {}) {
    if (axis < 0 || axis > 2) throw std::invalid_argument("axis must be 0, 1 or 2");
    if (deltas.size() < 4) throw std::invalid_argument("scaling_exponent needs at least 4 deltas");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double d : deltas) {
        if (!(d > 0.0)) throw std::invalid_argument("deltas must be positive");
        lo = std::min(lo, d);
        hi = std::max(hi, d);
    }
    if (hi / lo < 100.0 * (1.0 - 1e-12)) throw std::invalid_argument("deltas must span at least two decades");

    ScalingFit fit;
    fit.deltas.assign(deltas.begin(), deltas.end());
    for (double d : deltas) {
        Point target = base;
        target[axis] += d;
        fit.lengths.push_back(cc_upper_bound_curve(base, target, f, opt).length);
    }
    fit.slope = loglog_slope(fit.deltas, fit.lengths);
    return fit;
}

}  // namespace martinet
