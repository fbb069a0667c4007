#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "martinet/distance.hpp"
#include "martinet/grid.hpp"
#include "martinet/jets.hpp"
#include "martinet/polynomial_field.hpp"
#include "martinet/profile.hpp"
#include "martinet/solver.hpp"
#include "martinet/types.hpp"

namespace martinet {

/// Separable doubling penalty sum_k weight_k |x_k - y_k|^power_k.
struct SeparablePenalty {
    std::array<double, 3> weight{0.0, 0.0, 0.0};
    std::array<int, 3> power{2, 2, 2};

    double term(int axis, double d) const {
        const auto a = static_cast<std::size_t>(axis);
        double r = 1.0;
        for (int k = 0; k < power[a]; ++k) r *= d;
        return weight[a] * r;
    }

    double operator()(const Point& p, const Point& q) const {
        return term(0, p.x1 - q.x1) + term(1, p.x2 - q.x2) + term(2, p.x3 - q.x3);
    }

    /// tau ((x1-y1)^2/2 + (x2-y2)^4/4 + (x3-y3)^4/4)
    static SeparablePenalty quartic(double tau) { return {{0.5 * tau, 0.25 * tau, 0.25 * tau}, {2, 4, 4}}; }
    /// sum_k tau_k (x_k - y_k)^2 / 2
    static SeparablePenalty weighted_quadratic(const Vec3& tau) {
        return {{0.5 * tau[0], 0.5 * tau[1], 0.5 * tau[2]}, {2, 2, 2}};
    }
};

/// Maximizer of u(p) - v(q) - penalty(p, q) over the closed box, with some
/// coordinates optionally tied (x_k = y_k).
struct DoubledArgmax {
    double value = -std::numeric_limits<double>::infinity();
    Point p;
    Point q;
    double u_p = 0.0;
    double v_q = 0.0;
    double penalty = 0.0;
};

struct SearchOptions {
    int grid_n = 16;
    int refinement_rounds = 3;
    int refinement_factor = 4;
    /// Half-width of the local refinement lattice, in refined steps.
    int refinement_radius = 4;
    int threads = 1;
};

namespace detail {

inline std::vector<double> lattice_axis(double lo, double hi, int n) {
    std::vector<double> x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = (i == n - 1) ? hi : lo + i * (hi - lo) / (n - 1);
    return x;
}

/// Exhaustive search of u(p) - v(q) - penalty(p, q) over the product of two
/// tensor lattices. Candidates are visited in lexicographic (p, q) order and
/// only a strictly better value replaces the incumbent, so the first
/// maximizer in that order wins regardless of how the p-range is split
/// between workers.
inline DoubledArgmax search_product_lattice(const PolynomialField& u, const PolynomialField& v,
                                            const std::array<std::vector<double>, 3>& pa,
                                            const std::array<std::vector<double>, 3>& qa,
                                            const SeparablePenalty& pen, const std::array<bool, 3>& tied,
                                            int threads) {
    const std::size_t n1 = pa[0].size(), n2 = pa[1].size(), n3 = pa[2].size();
    const std::size_t m1 = qa[0].size(), m2 = qa[1].size(), m3 = qa[2].size();
    for (std::size_t a = 0; a < 3; ++a) {
        if (tied[a] && pa[a] != qa[a]) throw std::invalid_argument("tied coordinates need identical lattices");
    }

    std::vector<double> uv(n1 * n2 * n3);
    for (std::size_t i = 0; i < n1; ++i)
        for (std::size_t j = 0; j < n2; ++j)
            for (std::size_t k = 0; k < n3; ++k) uv[(i * n2 + j) * n3 + k] = u.eval({pa[0][i], pa[1][j], pa[2][k]});
    std::vector<double> vv(m1 * m2 * m3);
    double v_min = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m1; ++i)
        for (std::size_t j = 0; j < m2; ++j)
            for (std::size_t k = 0; k < m3; ++k) {
                const double val = v.eval({qa[0][i], qa[1][j], qa[2][k]});
                vv[(i * m2 + j) * m3 + k] = val;
                v_min = std::min(v_min, val);
            }
    std::array<std::vector<double>, 3> table;
    for (std::size_t a = 0; a < 3; ++a) {
        table[a].resize(pa[a].size() * qa[a].size());
        for (std::size_t i = 0; i < pa[a].size(); ++i)
            for (std::size_t j = 0; j < qa[a].size(); ++j)
                table[a][i * qa[a].size() + j] = pen.term(static_cast<int>(a), pa[a][i] - qa[a][j]);
    }

    struct Best {
        double value = -std::numeric_limits<double>::infinity();
        std::size_t pi = 0;
        std::size_t qi = 0;
    };
    std::vector<Best> partial(static_cast<std::size_t>(std::max(1, threads)));
    const std::size_t np = uv.size();

    parallel_chunks(np, threads, [&](std::size_t b, std::size_t e, std::size_t w) {
        Best best;
        for (std::size_t pi = b; pi < e; ++pi) {
            const double up = uv[pi];
            if (up - v_min <= best.value) continue;
            const std::size_t i = pi / (n2 * n3), j = (pi / n3) % n2, k = pi % n3;
            const std::size_t j1b = tied[0] ? i : 0, j1e = tied[0] ? i + 1 : m1;
            const std::size_t j2b = tied[1] ? j : 0, j2e = tied[1] ? j + 1 : m2;
            const std::size_t j3b = tied[2] ? k : 0, j3e = tied[2] ? k + 1 : m3;
            const double* t1 = table[0].data() + i * m1;
            const double* t2 = table[1].data() + j * m2;
            const double* t3 = table[2].data() + k * m3;
            for (std::size_t j1 = j1b; j1 < j1e; ++j1) {
                const double a1 = up - t1[j1];
                for (std::size_t j2 = j2b; j2 < j2e; ++j2) {
                    const double a12 = a1 - t2[j2];
                    const double* vrow = vv.data() + (j1 * m2 + j2) * m3;
                    for (std::size_t j3 = j3b; j3 < j3e; ++j3) {
                        const double val = a12 - t3[j3] - vrow[j3];
                        if (val > best.value) {
                            best.value = val;
                            best.pi = pi;
                            best.qi = (j1 * m2 + j2) * m3 + j3;
                        }
                    }
                }
            }
        }
        partial[w] = best;
    });

    Best best;
    for (const auto& b : partial) {
        if (b.value > best.value) best = b;  // earlier worker wins ties
    }
    DoubledArgmax out;
    const std::size_t i = best.pi / (n2 * n3), j = (best.pi / n3) % n2, k = best.pi % n3;
    const std::size_t a = best.qi / (m2 * m3), b = (best.qi / m3) % m2, c = best.qi % m3;
    out.p = {pa[0][i], pa[1][j], pa[2][k]};
    out.q = {qa[0][a], qa[1][b], qa[2][c]};
    out.u_p = uv[best.pi];
    out.v_q = vv[best.qi];
    out.penalty = pen(out.p, out.q);
    out.value = out.u_p - out.v_q - out.penalty;
    return out;
}

inline std::vector<double> local_axis(double center, double step, int radius, double lo, double hi) {
    std::vector<double> x;
    for (int k = -radius; k <= radius; ++k) {
        const double c = center + k * step;
        if (c >= lo && c <= hi) x.push_back(c);
    }
    return x;
}

}  // namespace detail

/// Supremum of u(p) - v(q) - penalty(p, q) over the closed box: exhaustive
/// search over the grid_n^3 x grid_n^3 lattice, then refinement rounds on
/// local lattices around the incumbent, each finer by refinement_factor.
inline DoubledArgmax maximize_doubled(const PolynomialField& u, const PolynomialField& v, const BoxDomain& dom,
                                      const SeparablePenalty& pen, const std::array<bool, 3>& tied,
                                      const SearchOptions& opt) {
    if (opt.grid_n < 2) throw std::invalid_argument("search lattice needs at least 2 nodes per axis");
    std::array<std::vector<double>, 3> axes;
    for (std::size_t a = 0; a < 3; ++a) axes[a] = detail::lattice_axis(dom.lower[a], dom.upper[a], opt.grid_n);
    DoubledArgmax best = detail::search_product_lattice(u, v, axes, axes, pen, tied, opt.threads);

    std::array<double, 3> step{};
    for (std::size_t a = 0; a < 3; ++a) step[a] = (dom.upper[a] - dom.lower[a]) / (opt.grid_n - 1);
    for (int round = 0; round < opt.refinement_rounds; ++round) {
        std::array<std::vector<double>, 3> pa;
        std::array<std::vector<double>, 3> qa;
        for (std::size_t a = 0; a < 3; ++a) {
            step[a] /= opt.refinement_factor;
            const auto ai = static_cast<int>(a);
            pa[a] = detail::local_axis(best.p[ai], step[a], opt.refinement_radius, dom.lower[a], dom.upper[a]);
            qa[a] = tied[a] ? pa[a]
                            : detail::local_axis(best.q[ai], step[a], opt.refinement_radius, dom.lower[a],
                                                 dom.upper[a]);
        }
        const DoubledArgmax local = detail::search_product_lattice(u, v, pa, qa, pen, tied, opt.threads);
        if (local.value > best.value) best = local;
    }
    return best;
}

/// Outcome of one penalized maximization together with the jet quantities
/// built from its maximizers.
struct PenaltyReport {
    Vec3 tau{0.0, 0.0, 0.0};
    double m = 0.0;
    Point p;
    Point q;
    double u_p = 0.0;
    double v_q = 0.0;
    /// Unweighted penalty phi(p, q) (for the weighted quadratic penalty the
    /// weights are part of phi).
    double phi = 0.0;
    /// The subtracted penalty, tau * phi.
    double tau_phi = 0.0;
    /// |upsilon_p|^2 - |upsilon_q|^2 from the quartic penalty at tau = 1.
    double vector_gap = 0.0;
    /// Horizontal gradients twisted at p and q and their norm gap.
    EtaPair eta;
    /// Slice suprema (iterated search only): x1 = y1, and x1 = y1, x2 = y2.
    std::optional<DoubledArgmax> slice_23;
    std::optional<DoubledArgmax> slice_3;
};

/// M_tau = sup (u(p) - v(q) - tau phi(p, q)) with
/// phi = (x1-y1)^2/2 + (x2-y2)^4/4 + (x3-y3)^4/4.
inline PenaltyReport penalty_argmax(const PolynomialField& u, const PolynomialField& v, const BoxDomain& dom,
                                    double tau, const MartinetProfile& f, const SearchOptions& opt = {}) {
    if (!(tau > 0.0)) throw std::invalid_argument("penalty_argmax requires tau > 0");
    if (opt.grid_n < 8) throw std::invalid_argument("penalty_argmax requires grid_n >= 8");
    const auto best = maximize_doubled(u, v, dom, SeparablePenalty::quartic(tau), {false, false, false}, opt);
    PenaltyReport r;
    r.tau = {tau, tau, tau};
    r.p = best.p;
    r.q = best.q;
    r.u_p = best.u_p;
    r.v_q = best.v_q;
    r.phi = doubling_penalty(best.p, best.q);
    r.tau_phi = best.penalty;
    r.m = r.u_p - r.v_q - r.tau_phi;
    const auto jets = penalty_jet_pair(best.p, best.q, tau, f);
    r.vector_gap = jets.upsilon_p.norm_squared() - jets.upsilon_q.norm_squared();
    r.eta = {jets.upsilon_p.horizontal(), jets.upsilon_q.horizontal()};
    return r;
}

/// M_{tau1,tau2,tau3} for the weighted quadratic penalty, plus the
/// constrained suprema M_{tau2,tau3} (x1 = y1) and M_{tau3} (x1 = y1 and
/// x2 = y2).
inline PenaltyReport iterated_penalty_argmax(const PolynomialField& u, const PolynomialField& v,
                                             const BoxDomain& dom, const Vec3& tau, const MartinetProfile& f,
                                             const SearchOptions& opt = {}) {
    for (double t : tau) {
        if (!(t > 0.0)) throw std::invalid_argument("iterated_penalty_argmax requires positive tau");
    }
    if (opt.grid_n < 8) throw std::invalid_argument("iterated_penalty_argmax requires grid_n >= 8");
    const auto pen = SeparablePenalty::weighted_quadratic(tau);
    const auto full = maximize_doubled(u, v, dom, pen, {false, false, false}, opt);
    PenaltyReport r;
    r.tau = tau;
    r.p = full.p;
    r.q = full.q;
    r.u_p = full.u_p;
    r.v_q = full.v_q;
    r.phi = full.penalty;
    r.tau_phi = full.penalty;
    r.m = r.u_p - r.v_q - r.tau_phi;
    r.vector_gap = vector_gap(full.p, full.q, f).gap;
    r.eta = imp_eta_pair(full.p, full.q, tau, f);
    r.slice_23 = maximize_doubled(u, v, dom, SeparablePenalty::weighted_quadratic({tau[0], tau[1], tau[2]}),
                                  {true, false, false}, opt);
    r.slice_3 = maximize_doubled(u, v, dom, SeparablePenalty::weighted_quadratic({tau[0], tau[1], tau[2]}),
                                 {true, true, false}, opt);
    return r;
}

/// Escalates the components of tau one at a time in the given order, each
/// by factor 10 from tau_start up to tau_end, and records the iterated
/// search after every step.
inline std::vector<PenaltyReport> escalation_path(const PolynomialField& u, const PolynomialField& v,
                                                  const BoxDomain& dom, const std::array<int, 3>& order,
                                                  double tau_start, double tau_end, const MartinetProfile& f,
                                                  const SearchOptions& opt = {}) {
    std::array<int, 3> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2}) throw std::invalid_argument("order must be a permutation of 0, 1, 2");
    if (!(tau_start > 0.0) || !(tau_end >= tau_start)) throw std::invalid_argument("need 0 < tau_start <= tau_end");
    Vec3 tau{tau_start, tau_start, tau_start};
    std::vector<PenaltyReport> path;
    path.push_back(iterated_penalty_argmax(u, v, dom, tau, f, opt));
    for (int axis : order) {
        const auto a = static_cast<std::size_t>(axis);
        while (tau[a] * 10.0 <= tau_end * (1.0 + 1e-12)) {
            tau[a] *= 10.0;
            path.push_back(iterated_penalty_argmax(u, v, dom, tau, f, opt));
        }
    }
    return path;
}

/// One-parameter family of point pairs (p(t), q(t)).
using PairFamily = std::function<std::pair<Point, Point>(double)>;

/// p(t) = (t, sqrt(t) c2, sqrt(t) c3), q = origin; phi(p, q) is of order t^2.
inline PairFamily default_gap_family(double c2 = 1.0, double c3 = 1.0) {
    return [c2, c3](double t) {
        const double r = std::sqrt(t);
        return std::pair<Point, Point>{{t, r * c2, r * c3}, {0.0, 0.0, 0.0}};
    };
}

struct GapRow {
    double t = 0.0;
    double phi = 0.0;
    double vector_gap = 0.0;
    /// |eta+|^2 - |eta-|^2 with tau2 (x2 - y2) and tau3 (x3 - y3) held at
    /// +-1 (tau_k = 1 / |x_k - y_k|, or 1 when the difference vanishes) and
    /// tau1 = 1.
    double eta_gap = 0.0;
};

struct GapTable {
    std::vector<GapRow> rows;
    /// Slope of log |vector_gap| against log phi over rows with nonzero gap
    /// (NaN when fewer than two such rows).
    double vector_gap_slope = std::numeric_limits<double>::quiet_NaN();
    /// Slope of log |eta_gap| against log |x1 - y1|.
    double eta_gap_slope = std::numeric_limits<double>::quiet_NaN();
};

inline GapTable gap_asymptotics(const MartinetProfile& f, const PairFamily& family, std::span<const double> t_values) {
    if (t_values.size() < 4) throw std::invalid_argument("gap_asymptotics needs at least 4 t values");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (double t : t_values) {
        if (!(t > 0.0)) throw std::invalid_argument("t values must be positive");
        lo = std::min(lo, t);
        hi = std::max(hi, t);
    }
    if (hi / lo < 1000.0 * (1.0 - 1e-12)) throw std::invalid_argument("t values must span at least three decades");

    GapTable table;
    std::vector<double> phis, gaps, d1s, etas;
    for (double t : t_values) {
        const auto [p, q] = family(t);
        const auto vg = vector_gap(p, q, f);
        auto unit_weight = [](double d) { return d == 0.0 ? 1.0 : 1.0 / std::abs(d); };
        const Vec3 tau{1.0, unit_weight(p.x2 - q.x2), unit_weight(p.x3 - q.x3)};
        const double eg = imp_eta_pair(p, q, tau, f).gap();
        table.rows.push_back({t, vg.phi, vg.gap, eg});
        if (vg.gap != 0.0 && vg.phi > 0.0) {
            phis.push_back(vg.phi);
            gaps.push_back(std::abs(vg.gap));
        }
        if (eg != 0.0 && p.x1 != q.x1) {
            d1s.push_back(std::abs(p.x1 - q.x1));
            etas.push_back(std::abs(eg));
        }
    }
    if (phis.size() >= 2) table.vector_gap_slope = loglog_slope(phis, gaps);
    if (d1s.size() >= 2) table.eta_gap_slope = loglog_slope(d1s, etas);
    return table;
}

/// max over the interior of (u1 - u2)_+ for the infinity-Laplace solutions
/// with boundary data g1 <= g2.
struct ComparisonResult {
    double max_violation = 0.0;
    SolveReport first;
    SolveReport second;
};

inline ComparisonResult comparison_harness(const BoxDomain& dom, std::array<int, 3> counts, const MartinetProfile& f,
                                           const BoundaryDatum& g1, const BoundaryDatum& g2,
                                           const SolverConfig& cfg, Initialization init = Initialization::Zero) {
    GridFunction a(dom, counts);
    GridFunction b(dom, counts);
    a.fill_boundary(g1);
    b.fill_boundary(g2);
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.is_boundary(i) && a.values()[i] > b.values()[i]) {
            throw std::invalid_argument("comparison_harness requires g1 <= g2 on the boundary lattice");
        }
    }
    initialize_interior(a, init);
    initialize_interior(b, init);
    ComparisonResult out;
    out.first = solve_infinity_laplace(a, f, cfg);
    out.second = solve_infinity_laplace(b, f, cfg);
    const auto& u1 = out.first.solution.values();
    const auto& u2 = out.second.solution.values();
    for (std::size_t i = 0; i < u1.size(); ++i) {
        if (!a.is_boundary(i)) out.max_violation = std::max(out.max_violation, u1[i] - u2[i]);
    }
    return out;
}

}  // namespace martinet
