#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "expression.hpp"
#include "martinet/distance.hpp"
#include "martinet/errors.hpp"
#include "martinet/experiments.hpp"
#include "martinet/grid.hpp"
#include "martinet/jets.hpp"
#include "martinet/operators.hpp"
#include "martinet/solver.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace martinet;
using martinet::cli::ConfigError;
using martinet::cli::Expression;
using martinet::cli::RunConfig;

namespace {

struct Context {
    std::string command;
    RunConfig cfg;
    fs::path out;
    std::uint64_t seed = 0;
    int threads = 1;
};

json to_json(const Point& p) { return json::array({p.x1, p.x2, p.x3}); }

/// Writes `text` to out/name and returns the path.
fs::path write_file(const Context& ctx, const std::string& name, const std::string& text) {
    const fs::path path = ctx.out / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw std::runtime_error("failed writing " + path.string());
    return path;
}

void write_summary(const Context& ctx, json body) {
    json doc;
    doc["command"] = ctx.command;
    for (auto& [k, v] : body.items()) doc[k] = v;
    json config;
    for (const auto& [k, v] : ctx.cfg.used_entries()) config[k] = v;
    doc["config"] = config;
    doc["seed"] = ctx.seed;
    write_file(ctx, "summary.json", doc.dump(2) + "\n");
}

/// One JSON object per line plus a CSV with the same (scalar) columns.
class Table {
public:
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add(const json& record, const std::vector<double>& row) {
        lines_ += record.dump() + "\n";
        for (std::size_t k = 0; k < row.size(); ++k) csv_ += (k ? "," : "") + format_double(row[k]);
        csv_ += "\n";
    }

    void write(const Context& ctx, const std::string& stem) const {
        std::string head;
        for (std::size_t k = 0; k < columns_.size(); ++k) head += (k ? "," : "") + columns_[k];
        write_file(ctx, stem + ".jsonl", lines_);
        write_file(ctx, stem + ".csv", head + "\n" + csv_);
    }

private:
    std::vector<std::string> columns_;
    std::string lines_;
    std::string csv_;
};

PolynomialField field(const RunConfig& cfg, const std::string& key) {
    try {
        return PolynomialField::parse(cfg.text(key));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

Expression expression(const RunConfig& cfg, const std::string& key) {
    try {
        return Expression::parse(cfg.text(key));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config key '" + key + "': " + e.what());
    }
}

BoxDomain domain(const RunConfig& cfg) {
    const auto lo = cfg.point("domain.lower");
    const auto hi = cfg.point("domain.upper");
    try {
        return BoxDomain({lo.x1, lo.x2, lo.x3}, {hi.x1, hi.x2, hi.x3});
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config keys 'domain.lower'/'domain.upper': " + std::string(e.what()));
    }
}

std::array<int, 3> lattice_counts(const RunConfig& cfg, const BoxDomain& dom) {
    const double h = cfg.number("domain.h");
    if (!(h > 0.0)) throw ConfigError("config key 'domain.h' must be positive");
    std::array<int, 3> counts{};
    for (std::size_t a = 0; a < 3; ++a) {
        const double side = dom.upper[a] - dom.lower[a];
        const double cells = std::round(side / h);
        if (cells < 2.0 || std::abs(cells * h - side) > 1e-9 * side) {
            throw ConfigError("config key 'domain.h' must divide every side of the box into at least 2 cells");
        }
        if (cells > 4096.0) throw ConfigError("config key 'domain.h' gives more than 4097 nodes per axis");
        counts[a] = static_cast<int>(cells) + 1;
    }
    return counts;
}

SolverConfig solver_config(const Context& ctx) {
    SolverConfig sc;
    sc.eps = ctx.cfg.number("solver.eps");
    sc.directions = static_cast<int>(ctx.cfg.integer("solver.directions"));
    sc.tol = ctx.cfg.number("solver.tol");
    sc.max_iters = ctx.cfg.integer("solver.max_iters");
    sc.threads = ctx.threads;
    return sc;
}

Initialization initialization(const RunConfig& cfg) {
    const auto s = cfg.text("solver.init");
    if (s == "zero") return Initialization::Zero;
    if (s == "harmonic") return Initialization::BoundaryHarmonic;
    if (s == "random") return Initialization::Random;
    throw ConfigError("config key 'solver.init' must be zero, harmonic or random, got '" + s + "'");
}

SearchOptions search_options(const Context& ctx) {
    SearchOptions o;
    o.grid_n = static_cast<int>(ctx.cfg.integer("search.grid_n"));
    o.refinement_rounds = static_cast<int>(ctx.cfg.integer("search.refinement_rounds"));
    o.refinement_factor = static_cast<int>(ctx.cfg.integer("search.refinement_factor"));
    o.refinement_radius = static_cast<int>(ctx.cfg.integer("search.refinement_radius"));
    o.threads = ctx.threads;
    return o;
}

json report_json(const SolveReport& r) {
    return {{"iterations", r.iterations},       {"final_change", r.final_change},
            {"error_estimate", r.error_estimate}, {"residual_sup", r.residual_sup},
            {"residual_mean", r.residual_mean},   {"converged", r.converged}};
}

std::string dims(const std::array<int, 3>& c) {
    return std::to_string(c[0]) + "x" + std::to_string(c[1]) + "x" + std::to_string(c[2]);
}

int run_solve(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    auto dom = domain(ctx.cfg);
    const auto counts = lattice_counts(ctx.cfg, dom);
    dom.boundary = expression(ctx.cfg, "boundary.g");
    const auto sc = solver_config(ctx);
    const auto init = initialization(ctx.cfg);
    const auto report = solve_infinity_laplace(dom, counts, f, sc, init, ctx.seed);
    write_grid_csv((ctx.out / "solution.csv").string(), report.solution);
    json body = report_json(report);
    body["grid"] = counts;
    write_summary(ctx, body);
    std::cout << "solve: " << dims(counts) << " grid, " << report.iterations << " sweeps, residual sup "
              << format_double(report.residual_sup) << ", wrote " << (ctx.out / "solution.csv").string() << "\n";
    return 0;
}

int run_monotone(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    auto dom = domain(ctx.cfg);
    const auto counts = lattice_counts(ctx.cfg, dom);
    const auto g = expression(ctx.cfg, "boundary.g");
    const double sigma = ctx.cfg.number("monotone.sigma");
    const auto rhs = field(ctx.cfg, "monotone.rhs");
    const auto sc = solver_config(ctx);
    GridFunction start(dom, counts);
    start.fill_boundary(g);
    initialize_interior(start, initialization(ctx.cfg), ctx.seed);
    const auto report = solve_monotone_model(start, f, sigma, rhs, sc);
    write_grid_csv((ctx.out / "solution.csv").string(), report.solution);
    json body = report_json(report);
    body["grid"] = counts;
    std::string extra;
    if (!ctx.cfg.text("monotone.exact").empty()) {
        const auto exact = field(ctx.cfg, "monotone.exact");
        double err = 0.0;
        const auto& u = report.solution;
        for (std::size_t i = 0; i < u.size(); ++i) {
            err = std::max(err, std::abs(u.values()[i] - exact(u.node(u.unravel(i)))));
        }
        body["sup_error"] = err;
        extra = ", sup error " + format_double(err);
    }
    write_summary(ctx, body);
    std::cout << "monotone: " << dims(counts) << " grid, " << report.iterations << " sweeps" << extra << ", wrote "
              << (ctx.out / "solution.csv").string() << "\n";
    return 0;
}

CcOptions cc_options(const Context& ctx) {
    CcOptions o;
    o.segments = static_cast<int>(ctx.cfg.integer("distance.segments"));
    o.iters = static_cast<int>(ctx.cfg.integer("distance.iters"));
    o.starts = static_cast<int>(ctx.cfg.integer("distance.starts"));
    o.endpoint_tol = ctx.cfg.number("distance.endpoint_tol");
    o.seed = ctx.seed;
    return o;
}

int run_distance(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    const auto mode = ctx.cfg.text("distance.mode");
    const auto opt = cc_options(ctx);
    const Point p = ctx.cfg.point("distance.p");
    if (mode == "pair") {
        const Point q = ctx.cfg.point("distance.q");
        const auto r = cc_upper_bound_curve(p, q, f, opt);
        const double bb = ball_box_distance(p, q, f);
        std::string csv = "segment,u1,u2\n";
        for (std::size_t k = 0; k < r.curve.u1.size(); ++k) {
            csv += std::to_string(k) + "," + format_double(r.curve.u1[k]) + "," + format_double(r.curve.u2[k]) + "\n";
        }
        write_file(ctx, "controls.csv", csv);
        write_summary(ctx, {{"p", to_json(p)},
                            {"q", to_json(q)},
                            {"length", r.length},
                            {"mismatch", r.mismatch},
                            {"ball_box", bb},
                            {"feasible_starts", r.feasible_starts}});
        std::cout << "distance: cc upper bound " << format_double(r.length) << ", ball-box " << format_double(bb)
                  << "\n";
        return 0;
    }
    if (mode != "exponent") throw ConfigError("config key 'distance.mode' must be pair or exponent, got '" + mode + "'");
    const long axis = ctx.cfg.integer("distance.axis");
    if (axis < 1 || axis > 3) throw ConfigError("config key 'distance.axis' must be 1, 2 or 3");
    const auto deltas = ctx.cfg.numbers("distance.deltas");
    ScalingFit fit;
    try {
        fit = scaling_exponent(f, p, static_cast<int>(axis - 1), deltas, opt);
    } catch (const NonConvergence&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config key 'distance.deltas': " + std::string(e.what()));
    }
    Table table({"delta", "length", "ball_box"});
    for (std::size_t k = 0; k < fit.deltas.size(); ++k) {
        Point q = p;
        q[static_cast<int>(axis - 1)] += fit.deltas[k];
        const double bb = ball_box_distance(p, q, f);
        table.add({{"delta", fit.deltas[k]}, {"length", fit.lengths[k]}, {"ball_box", bb}},
                  {fit.deltas[k], fit.lengths[k], bb});
    }
    table.write(ctx, "distance");
    write_summary(ctx, {{"axis", axis}, {"slope", fit.slope}, {"bracket_order", bracket_order(f, p.x1)}});
    std::cout << "distance: log-log slope " << format_double(fit.slope) << " along x" << axis << " over "
              << fit.deltas.size() << " deltas\n";
    return 0;
}

PolynomialField random_field(std::mt19937_64& rng, unsigned max_degree) {
    std::uniform_int_distribution<unsigned> e(0, max_degree);
    std::uniform_int_distribution<int> nterms(1, 8);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    PolynomialField u;
    const int n = nterms(rng);
    for (int k = 0; k < n; ++k) {
        unsigned a = e(rng), b = e(rng), d = e(rng);
        while (a + b + d > max_degree) {
            if (a > 0) --a;
            else if (b > 0) --b;
            else --d;
        }
        u.add_term({a, b, d}, c(rng));
    }
    return u;
}

MartinetProfile random_profile(std::mt19937_64& rng, int max_degree) {
    std::uniform_int_distribution<int> deg(1, max_degree);
    std::uniform_real_distribution<double> c(-2.0, 2.0);
    std::vector<double> coeffs(static_cast<std::size_t>(deg(rng)) + 1);
    for (double& x : coeffs) x = c(rng);
    if (coeffs.back() == 0.0) coeffs.back() = 1.0;
    return MartinetProfile(coeffs);
}

int run_twist_check(const Context& ctx) {
    const long samples = ctx.cfg.integer("twist.samples");
    const long degree = ctx.cfg.integer("twist.max_degree");
    const double radius = ctx.cfg.number("twist.radius");
    if (samples < 1) throw ConfigError("config key 'twist.samples' must be positive");
    if (degree < 1 || degree > 12) throw ConfigError("config key 'twist.max_degree' must lie in 1..12");
    if (!(radius > 0.0)) throw ConfigError("config key 'twist.radius' must be positive");
    std::mt19937_64 rng(ctx.seed);
    std::uniform_real_distribution<double> coord(-radius, radius);
    double worst = 0.0;
    long worst_sample = 0;
    for (long s = 0; s < samples; ++s) {
        const auto u = random_field(rng, static_cast<unsigned>(degree));
        const auto f = random_profile(rng, static_cast<int>(degree));
        const double a = coord(rng), b = coord(rng);
        const Point p{a, b, coord(rng)};
        auto d = [&](int i) { return u.derivative(i); };
        EuclideanJet2 j;
        j.eta = {d(0)(p), d(1)(p), d(2)(p)};
        j.hessian = {d(0).derivative(0)(p), d(0).derivative(1)(p), d(0).derivative(2)(p),
                     d(1).derivative(1)(p), d(1).derivative(2)(p), d(2).derivative(2)(p)};
        const auto tw = twist_jet(j, f, p);
        const auto g = semi_horizontal_gradient(u, f, p);
        const auto h = symmetrized_hessian(u, f, p);
        const double pairs[6][2] = {{tw.eta.a1, g.a1},         {tw.eta.a2, g.a2},         {tw.eta.a3, g.a3},
                                    {tw.hessian.m11, h.m11}, {tw.hessian.m12, h.m12}, {tw.hessian.m22, h.m22}};
        for (const auto& [x, y] : pairs) {
            const double err = std::abs(x - y) / std::max(1.0, std::abs(y));
            if (err > worst) {
                worst = err;
                worst_sample = s;
            }
        }
    }
    write_summary(ctx, {{"samples", samples}, {"max_relative_error", worst}, {"worst_sample", worst_sample}});
    std::cout << "twist-check: " << samples << " samples, max relative error " << format_double(worst) << "\n";
    return 0;
}

json penalty_json(const PenaltyReport& r) {
    return {{"tau", r.tau},           {"m", r.m},         {"p", to_json(r.p)},
            {"q", to_json(r.q)},      {"u_p", r.u_p},     {"v_q", r.v_q},
            {"phi", r.phi},           {"tau_phi", r.tau_phi}, {"vector_gap", r.vector_gap},
            {"eta_gap", r.eta.gap()}};
}

std::vector<double> penalty_row(const PenaltyReport& r) {
    return {r.tau[0], r.tau[1], r.tau[2], r.m,       r.p.x1,         r.p.x2,      r.p.x3,
            r.q.x1,   r.q.x2,   r.q.x3,   r.u_p,     r.v_q,          r.phi,       r.tau_phi,
            r.vector_gap, r.eta.gap()};
}

const std::vector<std::string> penalty_columns{"tau1", "tau2", "tau3", "m",   "p1",      "p2",
                                               "p3",   "q1",   "q2",   "q3",  "u_p",     "v_q",
                                               "phi",  "tau_phi", "vector_gap", "eta_gap"};

int run_maxprin(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    const auto dom = domain(ctx.cfg);
    const auto u = field(ctx.cfg, "maxprin.u");
    const auto v = field(ctx.cfg, "maxprin.v");
    const auto taus = ctx.cfg.numbers("maxprin.taus");
    if (taus.empty()) throw ConfigError("config key 'maxprin.taus' lists no values");
    const auto opt = search_options(ctx);

    Table penalty(penalty_columns);
    bool nonincreasing = true;
    double prev = std::numeric_limits<double>::infinity();
    PenaltyReport last;
    for (double tau : taus) {
        if (!(tau > 0.0)) throw ConfigError("config key 'maxprin.taus' must be positive");
        last = penalty_argmax(u, v, dom, tau, f, opt);
        nonincreasing = nonincreasing && last.m <= prev;
        prev = last.m;
        penalty.add(penalty_json(last), penalty_row(last));
    }
    penalty.write(ctx, "penalty");

    const auto ts = ctx.cfg.numbers("maxprin.gap_t");
    GapTable gaps;
    try {
        gaps = gap_asymptotics(f, default_gap_family(ctx.cfg.number("maxprin.gap_c2"), ctx.cfg.number("maxprin.gap_c3")),
                               ts);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config key 'maxprin.gap_t': " + std::string(e.what()));
    }
    Table gap({"t", "phi", "vector_gap", "eta_gap"});
    for (const auto& row : gaps.rows) {
        gap.add({{"t", row.t}, {"phi", row.phi}, {"vector_gap", row.vector_gap}, {"eta_gap", row.eta_gap}},
                {row.t, row.phi, row.vector_gap, row.eta_gap});
    }
    gap.write(ctx, "gap");

    write_summary(ctx, {{"final_m", last.m},
                        {"final_tau_phi", last.tau_phi},
                        {"m_nonincreasing", nonincreasing},
                        {"vector_gap_slope", gaps.vector_gap_slope},
                        {"eta_gap_slope", gaps.eta_gap_slope}});
    std::cout << "maxprin: M = " << format_double(last.m) << " and tau phi = " << format_double(last.tau_phi)
              << " at tau = " << format_double(taus.back()) << ", gap slope " << format_double(gaps.vector_gap_slope)
              << "\n";
    return 0;
}

std::array<int, 3> parse_order(const std::string& s) {
    if (s.size() != 3) throw ConfigError("config key 'imp.orders' entries must be permutations of 123, got '" + s + "'");
    std::array<int, 3> order{};
    for (std::size_t k = 0; k < 3; ++k) order[k] = s[k] - '1';
    auto sorted = order;
    std::sort(sorted.begin(), sorted.end());
    if (sorted != std::array<int, 3>{0, 1, 2}) {
        throw ConfigError("config key 'imp.orders' entries must be permutations of 123, got '" + s + "'");
    }
    return order;
}

int run_imp(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    const auto dom = domain(ctx.cfg);
    const auto u = field(ctx.cfg, "imp.u");
    const auto v = field(ctx.cfg, "imp.v");
    const auto opt = search_options(ctx);
    const auto tau_v = ctx.cfg.numbers("imp.tau");
    if (tau_v.size() != 3) throw ConfigError("config key 'imp.tau' expects three weights");
    for (double t : tau_v) {
        if (!(t > 0.0)) throw ConfigError("config key 'imp.tau' must be positive");
    }
    const double tau_start = ctx.cfg.number("imp.tau_start");
    const double tau_end = ctx.cfg.number("imp.tau_end");
    if (!(tau_start > 0.0) || !(tau_end >= tau_start)) {
        throw ConfigError("config keys 'imp.tau_start'/'imp.tau_end' need 0 < tau_start <= tau_end");
    }
    std::vector<std::string> orders;
    {
        std::istringstream in(ctx.cfg.text("imp.orders"));
        std::string tok;
        while (in >> tok) orders.push_back(tok);
    }

    auto columns = penalty_columns;
    columns.insert(columns.begin(), "order");
    columns.insert(columns.begin() + 1, "step");
    for (const char* c : {"m_23", "m_3"}) columns.emplace_back(c);
    Table table(columns);
    auto add = [&](const std::string& order, int step, const PenaltyReport& r) {
        json rec;
        rec["order"] = order;
        rec["step"] = step;
        const json base = penalty_json(r);
        for (const auto& [k, val] : base.items()) rec[k] = val;
        rec["m_23"] = r.slice_23->value;
        rec["m_3"] = r.slice_3->value;
        auto row = penalty_row(r);
        row.insert(row.begin(), {order.empty() ? 0.0 : std::stod(order), static_cast<double>(step)});
        row.push_back(r.slice_23->value);
        row.push_back(r.slice_3->value);
        table.add(rec, row);
    };

    const auto single = iterated_penalty_argmax(u, v, dom, {tau_v[0], tau_v[1], tau_v[2]}, f, opt);
    add("", 0, single);
    json finals = json::object();
    for (const auto& o : orders) {
        const auto path = escalation_path(u, v, dom, parse_order(o), tau_start, tau_end, f, opt);
        for (std::size_t k = 0; k < path.size(); ++k) add(o, static_cast<int>(k), path[k]);
        finals[o] = path.back().m;
    }
    table.write(ctx, "imp");
    write_summary(ctx, {{"m", single.m},
                        {"m_23", single.slice_23->value},
                        {"m_3", single.slice_3->value},
                        {"eta_gap", single.eta.gap()},
                        {"escalation_final_m", finals}});
    std::cout << "imp: M = " << format_double(single.m) << ", M_23 = " << format_double(single.slice_23->value)
              << ", M_3 = " << format_double(single.slice_3->value) << ", " << orders.size() << " escalation paths\n";
    return 0;
}

int run_compare(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    const auto dom = domain(ctx.cfg);
    const auto counts = lattice_counts(ctx.cfg, dom);
    const auto g1 = expression(ctx.cfg, "compare.g1");
    const auto g2 = expression(ctx.cfg, "compare.g2");
    const auto sc = solver_config(ctx);
    const auto init = initialization(ctx.cfg);
    ComparisonResult r;
    try {
        r = comparison_harness(dom, counts, f, g1, g2, sc, init);
    } catch (const NonConvergence&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config keys 'compare.g1'/'compare.g2': " + std::string(e.what()));
    }
    write_grid_csv((ctx.out / "u1.csv").string(), r.first.solution);
    write_grid_csv((ctx.out / "u2.csv").string(), r.second.solution);
    write_summary(ctx, {{"grid", counts},
                        {"max_violation", r.max_violation},
                        {"first", report_json(r.first)},
                        {"second", report_json(r.second)}});
    std::cout << "compare: " << dims(counts) << " grid, max (u1 - u2)+ = " << format_double(r.max_violation) << "\n";
    return 0;
}

int run_operators(const Context& ctx) {
    const auto f = ctx.cfg.profile();
    const auto u = field(ctx.cfg, "operators.u");
    const auto pts = ctx.cfg.points("operators.points");
    const auto qs = ctx.cfg.numbers("operators.q");
    const double eps = ctx.cfg.number("operators.eps");
    if (!(eps > 0.0)) throw ConfigError("config key 'operators.eps' must be positive");
    for (double q : qs) {
        if (!(q >= 2.0)) throw ConfigError("config key 'operators.q' values must be at least 2");
    }
    std::vector<std::string> columns{"x1", "x2", "x3", "X1u", "X2u", "X3u", "h11", "h12", "h22", "inf_laplacian",
                                     "jensen_f", "jensen_g"};
    for (double q : qs) columns.push_back("q_laplacian_" + format_double(q));
    Table table(columns);
    for (const auto& p : pts) {
        const auto g = semi_horizontal_gradient(u, f, p);
        const auto h = symmetrized_hessian(u, f, p);
        const double lap = infinity_laplacian(u, f, p);
        const HorizontalVector eta{g.a1, g.a2};
        const double jf = jensen_operator(JensenKind::F, eta, h, eps);
        const double jg = jensen_operator(JensenKind::G, eta, h, eps);
        json ql = json::array();
        std::vector<double> row{p.x1, p.x2, p.x3, g.a1, g.a2, g.a3, h.m11, h.m12, h.m22, lap, jf, jg};
        for (double q : qs) {
            try {
                const double val = q_laplacian(u, f, p, q);
                ql.push_back({{"q", q}, {"value", val}});
                row.push_back(val);
            } catch (const DegenerateGradient&) {
                ql.push_back({{"q", q}, {"value", nullptr}});
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            }
        }
        table.add({{"point", to_json(p)},
                   {"semi_horizontal_gradient", json::array({g.a1, g.a2, g.a3})},
                   {"hessian", json::array({h.m11, h.m12, h.m22})},
                   {"inf_laplacian", lap},
                   {"jensen_f", jf},
                   {"jensen_g", jg},
                   {"q_laplacian", ql}},
                  row);
    }
    table.write(ctx, "operators");
    write_summary(ctx, {{"points", pts.size()}});
    std::cout << "operators: evaluated " << pts.size() << " points\n";
    return 0;
}

using Runner = int (*)(const Context&);

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerics on Martinet spaces: operators, distances, infinity-Laplace solver and experiments"};
    app.require_subcommand(1);

    struct Options {
        std::string config;
        std::string out = ".";
        std::uint64_t seed = 0;
        int threads = 1;
        std::vector<std::string> overrides;
    } opts;

    const std::vector<std::tuple<std::string, std::string, Runner>> commands{
        {"solve", "Solve the infinity-Laplace Dirichlet problem", run_solve},
        {"monotone", "Solve the strictly monotone model equation", run_monotone},
        {"distance", "Carnot-Caratheodory upper bound or its scaling exponent", run_distance},
        {"twist-check", "Check the jet twisting identity on random samples", run_twist_check},
        {"maxprin", "Penalty maximum principle sweep and gap asymptotics", run_maxprin},
        {"imp", "Iterated penalty maxima and escalation paths", run_imp},
        {"compare", "Discrete comparison of two Dirichlet problems", run_compare},
        {"operators", "Evaluate horizontal operators of a polynomial field", run_operators},
    };
    std::vector<std::pair<CLI::App*, Runner>> subs;
    for (const auto& [name, help, runner] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config, "INI run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.out, "Output directory")->capture_default_str();
        sub->add_option("--seed", opts.seed, "Random seed")->capture_default_str();
        sub->add_option("--threads", opts.threads, "Worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
        sub->add_option("--set", opts.overrides, "Override a config entry: section.key=value");
        subs.emplace_back(sub, runner);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    for (const auto& [sub, runner] : subs) {
        if (!sub->parsed()) continue;
        Context ctx;
        ctx.command = sub->get_name();
        ctx.seed = opts.seed;
        ctx.threads = opts.threads;
        ctx.out = opts.out;
        try {
            ctx.cfg = RunConfig::load(opts.config, opts.overrides);
            fs::create_directories(ctx.out);
            return runner(ctx);
        } catch (const NonConvergence& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 2;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 1;
        }
    }
    return 1;
}
