#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "martinet/errors.hpp"
#include "martinet/grid.hpp"
#include "martinet/polynomial_field.hpp"
#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet {

enum class Interpolation { Trilinear };

struct SolverConfig {
    /// Horizontal step. Non-positive means "3 h" with h the largest spacing.
    double eps = 0.0;
    int directions = 32;
    double tol = 1e-6;
    long max_iters = 100000;
    Interpolation interpolation = Interpolation::Trilinear;
    /// Worker threads per sweep; results do not depend on this value.
    int threads = 1;

    double resolved_eps(const GridFunction& u) const { return eps > 0.0 ? eps : 3.0 * u.max_spacing(); }

    void validate(const GridFunction& u) const {
        if (!(tol > 0.0)) throw std::invalid_argument("solver tol must be positive");
        if (directions < 8 || directions % 2 != 0) {
            throw std::invalid_argument("solver needs an even number of directions, at least 8");
        }
        if (max_iters < 1) throw std::invalid_argument("solver max_iters must be positive");
        if (threads < 1) throw std::invalid_argument("solver threads must be positive");
        if (resolved_eps(u) < u.max_spacing() * (1.0 - 1e-12)) {
            throw std::invalid_argument("solver eps must be at least the grid spacing");
        }
    }
};

/// Unit horizontal direction cos(theta) X1 + sin(theta) X2 for
/// theta = 2 pi k / m, exact on quarter turns.
inline std::array<double, 2> direction_components(int k, int m) {
    if ((4 * k) % m == 0) {
        switch ((4 * k / m) % 4) {
            case 0: return {1.0, 0.0};
            case 1: return {0.0, 1.0};
            case 2: return {-1.0, 0.0};
            default: return {0.0, -1.0};
        }
    }
    const double theta = 2.0 * std::numbers::pi * k / m;
    return {std::cos(theta), std::sin(theta)};
}

/// Endpoint of the integral curve of cos X1 + sin X2 from p after time t
/// (t may be negative).
inline Point horizontal_flow(const MartinetProfile& f, const Point& p, double c, double s, double t) {
    return {p.x1 + c * t, p.x2 + s * t, p.x3 + s * f.flow_integral(p.x1, c, t)};
}

/// Value of u at the time-eps horizontal flow from lattice node p in
/// direction theta. Throws OutOfHull if the endpoint leaves the lattice.
inline double horizontal_sample(const GridFunction& u, const MartinetProfile& f, const LatticeIndex& p, double theta,
                                double eps) {
    return u.interpolate(horizontal_flow(f, u.node(p), std::cos(theta), std::sin(theta), eps));
}

namespace detail {

struct Sample {
    std::uint32_t base = 0;
    std::array<double, 3> frac{};
};

/// Largest t <= eps (found by bisection when needed) such that both flow
/// endpoints at +t and -t stay in the lattice hull.
inline double clamped_arm(const GridFunction& u, const MartinetProfile& f, const Point& p, double c, double s,
                          double eps) {
    const auto& dom = u.domain();
    double t = eps;
    const std::array<double, 2> comp{c, s};
    for (std::size_t a = 0; a < 2; ++a) {
        if (comp[a] == 0.0) continue;
        const double room = std::min(dom.upper[a] - p[static_cast<int>(a)], p[static_cast<int>(a)] - dom.lower[a]);
        t = std::min(t, room / std::abs(comp[a]));
    }
    auto fits = [&](double tt) {
        return u.contains(horizontal_flow(f, p, c, s, tt)) && u.contains(horizontal_flow(f, p, c, s, -tt));
    };
    if (fits(t)) return t;
    double lo = 0.0;
    double hi = t;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fits(mid) ? lo : hi) = mid;
    }
    return lo;
}

inline Sample make_sample(const GridFunction& u, const Point& q) {
    std::array<int, 3> base{};
    Sample smp;
    u.locate(q, base, smp.frac);
    smp.base = static_cast<std::uint32_t>(u.index({base[0], base[1], base[2]}));
    return smp;
}

/// The M samples used at an interior node: entry k is direction k, entry
/// k + M/2 the opposite direction, both at the same clamped arm length.
inline std::vector<Sample> midpoint_stencil(const GridFunction& u, const MartinetProfile& f, std::size_t idx,
                                            int directions, double eps) {
    const Point p = u.node(idx);
    const int half = directions / 2;
    std::vector<Sample> out(static_cast<std::size_t>(directions));
    for (int k = 0; k < half; ++k) {
        const auto [c, s] = direction_components(k, directions);
        const double t = clamped_arm(u, f, p, c, s, eps);
        out[static_cast<std::size_t>(k)] = make_sample(u, horizontal_flow(f, p, c, s, t));
        out[static_cast<std::size_t>(k + half)] = make_sample(u, horizontal_flow(f, p, c, s, -t));
    }
    return out;
}

inline double midpoint_value(const GridFunction& u, const Sample* samples, int count) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (int k = 0; k < count; ++k) {
        const double v = u.trilinear(samples[k].base, samples[k].frac);
        hi = std::max(hi, v);
        lo = std::min(lo, v);
    }
    return 0.5 * (hi + lo);
}

inline std::vector<std::size_t> interior_nodes(const GridFunction& u) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!u.is_boundary(i)) out.push_back(i);
    }
    return out;
}

/// Runs body(begin, end, worker) over [0, count) split into contiguous
/// chunks, one per worker.
template <class Body>
void parallel_chunks(std::size_t count, int threads, Body&& body) {
    const auto workers = static_cast<std::size_t>(std::max(1, threads));
    if (workers == 1 || count < 2 * workers) {
        body(std::size_t{0}, count, std::size_t{0});
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(count, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e, w] { body(b, e, w); });
    }
    for (auto& t : pool) t.join();
}

/// Tracks sup-norm changes of a linearly converging fixed-point iteration
/// and estimates the distance to the fixed point as change * rho / (1 - rho)
/// with rho the largest recent change ratio. Changes at the rounding level
/// of the iterate (noise_floor) count as converged.
class ConvergenceMonitor {
public:
    explicit ConvergenceMonitor(double tol, double noise_floor = 0.0) : tol_(tol), floor_(noise_floor) {}

    bool update(double change) {
        last_ = change;
        if (prev_ > 0.0) {
            ratios_.push_back(change / prev_);
            if (ratios_.size() > window) ratios_.pop_front();
        }
        prev_ = change;
        if (change <= floor_) {
            estimate_ = change;
            return true;
        }
        if (change > tol_ || ratios_.size() < window) return false;
        const double rho = *std::max_element(ratios_.begin(), ratios_.end());
        if (rho >= 1.0) return false;
        estimate_ = change * rho / (1.0 - rho);
        return estimate_ <= tol_;
    }

    double last_change() const { return last_; }
    double error_estimate() const { return estimate_; }

private:
    static constexpr std::size_t window = 8;
    double tol_;
    double floor_;
    double prev_ = 0.0;
    double last_ = std::numeric_limits<double>::infinity();
    double estimate_ = std::numeric_limits<double>::infinity();
    std::deque<double> ratios_;
};

}  // namespace detail

/// 1/2 (max + min) of u over the horizontal samples around interior node p.
inline double midpoint_update(const GridFunction& u, const MartinetProfile& f, const LatticeIndex& p,
                              const SolverConfig& cfg) {
    if (u.is_boundary(p)) throw std::invalid_argument("midpoint_update needs an interior node");
    cfg.validate(u);
    const auto stencil = detail::midpoint_stencil(u, f, u.index(p), cfg.directions, cfg.resolved_eps(u));
    return detail::midpoint_value(u, stencil.data(), cfg.directions);
}

enum class Initialization { Zero, BoundaryHarmonic, Random };

struct SolveReport {
    GridFunction solution;
    long iterations = 0;
    double final_change = 0.0;
    double error_estimate = 0.0;
    double residual_sup = 0.0;
    double residual_mean = 0.0;
    bool converged = false;
};

/// Interior initial guesses for the Jacobi solvers. Boundary values of u
/// are kept.
inline void initialize_interior(GridFunction& u, Initialization init, std::uint64_t seed = 0) {
    const auto interior = detail::interior_nodes(u);
    switch (init) {
        case Initialization::Zero:
            for (auto i : interior) u.values()[i] = 0.0;
            break;
        case Initialization::Random: {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -lo;
            for (std::size_t i = 0; i < u.size(); ++i) {
                if (u.is_boundary(i)) {
                    lo = std::min(lo, u.values()[i]);
                    hi = std::max(hi, u.values()[i]);
                }
            }
            std::mt19937_64 rng(seed);
            std::uniform_real_distribution<double> dist(lo - 1.0, hi + 1.0);
            for (auto i : interior) u.values()[i] = dist(rng);
            break;
        }
        case Initialization::BoundaryHarmonic: {
            // Jacobi sweeps of the 7-point Euclidean Laplacian from zero.
            for (auto i : interior) u.values()[i] = 0.0;
            std::vector<double> next = u.values();
            const auto n3 = std::size_t{1};
            const auto n2 = static_cast<std::size_t>(u.counts()[2]);
            const auto n1 = n2 * static_cast<std::size_t>(u.counts()[1]);
            for (int sweep = 0; sweep < 200; ++sweep) {
                const auto& v = u.values();
                for (auto i : interior) {
                    next[i] = (v[i - n1] + v[i + n1] + v[i - n2] + v[i + n2] + v[i - n3] + v[i + n3]) / 6.0;
                }
                u.values().swap(next);
            }
            break;
        }
    }
}

/// Per-node defect u - midpoint_update(u) (zero on the boundary layer).
inline GridFunction residual(const GridFunction& u, const MartinetProfile& f, const SolverConfig& cfg) {
    cfg.validate(u);
    GridFunction r(u.domain(), u.counts());
    const double eps = cfg.resolved_eps(u);
    for (auto i : detail::interior_nodes(u)) {
        const auto stencil = detail::midpoint_stencil(u, f, i, cfg.directions, eps);
        r.values()[i] = u.values()[i] - detail::midpoint_value(u, stencil.data(), cfg.directions);
    }
    return r;
}

struct ResidualNorms {
    double sup = 0.0;
    double mean = 0.0;
};

inline ResidualNorms residual_norms(const GridFunction& r) {
    ResidualNorms n;
    std::size_t count = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (r.is_boundary(i)) continue;
        n.sup = std::max(n.sup, std::abs(r.values()[i]));
        n.mean += std::abs(r.values()[i]);
        ++count;
    }
    if (count > 0) n.mean /= static_cast<double>(count);
    return n;
}

namespace detail {

/// Double-buffered Jacobi iteration of a pointwise update; boundary nodes
/// are never written. Throws NonConvergence after max_iters.
template <class Update>
SolveReport jacobi_iterate(GridFunction u, const std::vector<std::size_t>& interior, const SolverConfig& cfg,
                           Update&& update, const char* name) {
    GridFunction next = u;
    double scale = 0.0;
    for (double v : u.values()) scale = std::max(scale, std::abs(v));
    ConvergenceMonitor monitor(cfg.tol, std::min(cfg.tol, 64.0 * std::numeric_limits<double>::epsilon() * scale));
    std::vector<double> worker_change(static_cast<std::size_t>(std::max(1, cfg.threads)), 0.0);
    SolveReport report;
    for (long it = 1; it <= cfg.max_iters; ++it) {
        std::fill(worker_change.begin(), worker_change.end(), 0.0);
        parallel_chunks(interior.size(), cfg.threads, [&](std::size_t b, std::size_t e, std::size_t w) {
            double local = 0.0;
            for (std::size_t j = b; j < e; ++j) {
                const std::size_t idx = interior[j];
                const double v = update(u, j);
                local = std::max(local, std::abs(v - u.values()[idx]));
                next.values()[idx] = v;
            }
            worker_change[w] = local;
        });
        u.values().swap(next.values());
        const double change = *std::max_element(worker_change.begin(), worker_change.end());
        if (monitor.update(change)) {
            report.iterations = it;
            report.final_change = change;
            report.error_estimate = monitor.error_estimate();
            report.converged = true;
            report.solution = std::move(u);
            return report;
        }
    }
    throw NonConvergence(std::string(name) + ": no convergence after " + std::to_string(cfg.max_iters) +
                             " sweeps (last sup-norm change " + std::to_string(monitor.last_change()) + ")",
                         monitor.last_change(), cfg.max_iters);
}

}  // namespace detail

/// Solves the infinity-Laplace Dirichlet problem on the lattice of `start`
/// by Jacobi sweeps of midpoint_update. Boundary-layer values of `start`
/// are the Dirichlet datum; interior values are the initial guess.
///
/// Convergence is declared when the sup-norm change is at most tol and the
/// estimated distance to the fixed point is at most tol as well.
inline SolveReport solve_infinity_laplace(const GridFunction& start, const MartinetProfile& f,
                                          const SolverConfig& cfg) {
    cfg.validate(start);
    const double eps = cfg.resolved_eps(start);
    const auto interior = detail::interior_nodes(start);
    const auto m = static_cast<std::size_t>(cfg.directions);
    std::vector<detail::Sample> stencils(interior.size() * m);
    for (std::size_t j = 0; j < interior.size(); ++j) {
        auto s = detail::midpoint_stencil(start, f, interior[j], cfg.directions, eps);
        std::copy(s.begin(), s.end(), stencils.begin() + static_cast<std::ptrdiff_t>(j * m));
    }
    auto report = detail::jacobi_iterate(
        start, interior, cfg,
        [&](const GridFunction& u, std::size_t j) {
            return detail::midpoint_value(u, stencils.data() + j * m, cfg.directions);
        },
        "solve_infinity_laplace");
    const auto norms = residual_norms(residual(report.solution, f, cfg));
    report.residual_sup = norms.sup;
    report.residual_mean = norms.mean;
    return report;
}

/// Lattice of `counts` nodes on dom, boundary layer filled from dom.boundary
/// and interior initialized by `init`.
inline GridFunction make_dirichlet_grid(const BoxDomain& dom, std::array<int, 3> counts,
                                        Initialization init = Initialization::Zero, std::uint64_t seed = 0) {
    GridFunction u(dom, counts);
    u.fill_boundary(dom.boundary);
    initialize_interior(u, init, seed);
    return u;
}

inline SolveReport solve_infinity_laplace(const BoxDomain& dom, std::array<int, 3> counts, const MartinetProfile& f,
                                          const SolverConfig& cfg, Initialization init = Initialization::Zero,
                                          std::uint64_t seed = 0) {
    return solve_infinity_laplace(make_dirichlet_grid(dom, counts, init, seed), f, cfg);
}

/// Semi-Lagrangian Jacobi solver for the strictly monotone model
///   sigma u - (X1X1 u + X2X2 u) = rhs.
/// X_i X_i u is the second difference along the X_i flow with arm t_i, so
///   u <- (rhs + S1 / t1^2 + S2 / t2^2) / (sigma + 2 / t1^2 + 2 / t2^2)
/// with S_i the sum of the two samples along X_i. Each update contracts
/// by at most 4 / (4 + sigma eps^2) when both arms equal eps.
inline SolveReport solve_monotone_model(const GridFunction& start, const MartinetProfile& f, double sigma,
                                        const PolynomialField& rhs, const SolverConfig& cfg) {
    if (!(sigma > 0.0)) throw std::invalid_argument("monotone model requires sigma > 0");
    cfg.validate(start);
    const double eps = cfg.resolved_eps(start);
    const auto interior = detail::interior_nodes(start);

    struct Stencil {
        std::array<detail::Sample, 4> samples;
        double w1 = 0.0;  // 1 / t1^2
        double w2 = 0.0;  // 1 / t2^2
        double rhs = 0.0;
    };
    std::vector<Stencil> stencils(interior.size());
    for (std::size_t j = 0; j < interior.size(); ++j) {
        const Point p = start.node(interior[j]);
        Stencil& st = stencils[j];
        const double t1 = detail::clamped_arm(start, f, p, 1.0, 0.0, eps);
        const double t2 = detail::clamped_arm(start, f, p, 0.0, 1.0, eps);
        st.samples[0] = detail::make_sample(start, horizontal_flow(f, p, 1.0, 0.0, t1));
        st.samples[1] = detail::make_sample(start, horizontal_flow(f, p, 1.0, 0.0, -t1));
        st.samples[2] = detail::make_sample(start, horizontal_flow(f, p, 0.0, 1.0, t2));
        st.samples[3] = detail::make_sample(start, horizontal_flow(f, p, 0.0, 1.0, -t2));
        st.w1 = 1.0 / (t1 * t1);
        st.w2 = 1.0 / (t2 * t2);
        st.rhs = rhs.eval(p);
    }
    return detail::jacobi_iterate(
        start, interior, cfg,
        [&](const GridFunction& u, std::size_t j) {
            const Stencil& st = stencils[j];
            const double s1 = u.trilinear(st.samples[0].base, st.samples[0].frac) +
                              u.trilinear(st.samples[1].base, st.samples[1].frac);
            const double s2 = u.trilinear(st.samples[2].base, st.samples[2].frac) +
                              u.trilinear(st.samples[3].base, st.samples[3].frac);
            return (st.rhs + s1 * st.w1 + s2 * st.w2) / (sigma + 2.0 * st.w1 + 2.0 * st.w2);
        },
        "solve_monotone_model");
}

}  // namespace martinet
