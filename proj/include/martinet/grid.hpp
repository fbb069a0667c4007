#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "martinet/errors.hpp"
#include "martinet/types.hpp"

namespace martinet {

using BoundaryDatum = std::function<double(const Point&)>;

/// Axis-aligned box with an optional Dirichlet datum g on its boundary.
struct BoxDomain {
    Vec3 lower{0.0, 0.0, 0.0};
    Vec3 upper{1.0, 1.0, 1.0};
    BoundaryDatum boundary;

    BoxDomain() = default;
    BoxDomain(Vec3 lo, Vec3 hi, BoundaryDatum g = {}) : lower(lo), upper(hi), boundary(std::move(g)) { validate(); }

    static BoxDomain cube(double lo, double hi, BoundaryDatum g = {}) {
        return BoxDomain({lo, lo, lo}, {hi, hi, hi}, std::move(g));
    }

    void validate() const {
        for (std::size_t a = 0; a < 3; ++a) {
            if (!std::isfinite(lower[a]) || !std::isfinite(upper[a]) || !(lower[a] < upper[a])) {
                throw std::invalid_argument("box domain requires finite lower < upper on every axis");
            }
        }
    }
};

using LatticeIndex = std::array<int, 3>;

/// Values on the (n1 x n2 x n3) lattice of a box, boundary layer included.
/// Storage is row-major with x3 fastest.
class GridFunction {
public:
    GridFunction() = default;

    GridFunction(const BoxDomain& dom, std::array<int, 3> counts) : domain_(dom), counts_(counts) {
        dom.validate();
        for (std::size_t a = 0; a < 3; ++a) {
            if (counts_[a] < 3) throw std::invalid_argument("grid needs at least 3 nodes per axis");
            spacing_[a] = (dom.upper[a] - dom.lower[a]) / (counts_[a] - 1);
        }
        values_.assign(static_cast<std::size_t>(counts_[0]) * static_cast<std::size_t>(counts_[1]) *
                           static_cast<std::size_t>(counts_[2]),
                       0.0);
    }

    GridFunction(const BoxDomain& dom, int n) : GridFunction(dom, {n, n, n}) {}

    const BoxDomain& domain() const { return domain_; }
    const std::array<int, 3>& counts() const { return counts_; }
    double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
    double max_spacing() const { return std::max({spacing_[0], spacing_[1], spacing_[2]}); }
    std::size_t size() const { return values_.size(); }

    std::vector<double>& values() { return values_; }
    const std::vector<double>& values() const { return values_; }

    std::size_t index(const LatticeIndex& ijk) const {
        return (static_cast<std::size_t>(ijk[0]) * static_cast<std::size_t>(counts_[1]) +
                static_cast<std::size_t>(ijk[1])) *
                   static_cast<std::size_t>(counts_[2]) +
               static_cast<std::size_t>(ijk[2]);
    }

    LatticeIndex unravel(std::size_t idx) const {
        const auto n2 = static_cast<std::size_t>(counts_[1]);
        const auto n3 = static_cast<std::size_t>(counts_[2]);
        return {static_cast<int>(idx / (n2 * n3)), static_cast<int>((idx / n3) % n2), static_cast<int>(idx % n3)};
    }

    double coordinate(int axis, int i) const {
        const auto a = static_cast<std::size_t>(axis);
        if (i == counts_[a] - 1) return domain_.upper[a];
        return domain_.lower[a] + i * spacing_[a];
    }

    Point node(const LatticeIndex& ijk) const {
        return {coordinate(0, ijk[0]), coordinate(1, ijk[1]), coordinate(2, ijk[2])};
    }
    Point node(std::size_t idx) const { return node(unravel(idx)); }

    bool is_boundary(const LatticeIndex& ijk) const {
        for (std::size_t a = 0; a < 3; ++a) {
            if (ijk[a] == 0 || ijk[a] == counts_[a] - 1) return true;
        }
        return false;
    }
    bool is_boundary(std::size_t idx) const { return is_boundary(unravel(idx)); }

    double& at(const LatticeIndex& ijk) { return values_[index(ijk)]; }
    double at(const LatticeIndex& ijk) const { return values_[index(ijk)]; }

    /// Writes g onto the boundary layer.
    void fill_boundary(const BoundaryDatum& g) {
        if (!g) throw std::invalid_argument("no boundary datum");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (is_boundary(i)) values_[i] = g(node(i));
        }
    }

    void fill(const std::function<double(const Point&)>& fn) {
        for (std::size_t i = 0; i < values_.size(); ++i) values_[i] = fn(node(i));
    }

    bool contains(const Point& p, double slack = 1e-12) const {
        for (int a = 0; a < 3; ++a) {
            const auto ua = static_cast<std::size_t>(a);
            const double pad = slack * (domain_.upper[ua] - domain_.lower[ua]);
            if (!(p[a] >= domain_.lower[ua] - pad && p[a] <= domain_.upper[ua] + pad)) return false;
        }
        return true;
    }

    /// Trilinear interpolation; OutOfHull outside the lattice hull.
    double interpolate(const Point& p) const {
        if (!contains(p)) throw OutOfHull("sample point outside the lattice hull");
        std::array<int, 3> base{};
        std::array<double, 3> frac{};
        locate(p, base, frac);
        return trilinear(index({base[0], base[1], base[2]}), frac);
    }

    /// Lower corner and fractional offsets of the lattice cell holding p
    /// (p assumed inside the hull).
    void locate(const Point& p, std::array<int, 3>& base, std::array<double, 3>& frac) const {
        for (std::size_t a = 0; a < 3; ++a) {
            const double s = (p[static_cast<int>(a)] - domain_.lower[a]) / spacing_[a];
            int i = static_cast<int>(std::floor(s));
            i = std::clamp(i, 0, counts_[a] - 2);
            base[a] = i;
            frac[a] = std::clamp(s - i, 0.0, 1.0);
        }
    }

    double trilinear(std::size_t base, const std::array<double, 3>& w) const {
        const auto s3 = std::size_t{1};
        const auto s2 = static_cast<std::size_t>(counts_[2]);
        const auto s1 = s2 * static_cast<std::size_t>(counts_[1]);
        const double* v = values_.data() + base;
        const double c00 = v[0] * (1.0 - w[2]) + v[s3] * w[2];
        const double c01 = v[s2] * (1.0 - w[2]) + v[s2 + s3] * w[2];
        const double c10 = v[s1] * (1.0 - w[2]) + v[s1 + s3] * w[2];
        const double c11 = v[s1 + s2] * (1.0 - w[2]) + v[s1 + s2 + s3] * w[2];
        const double c0 = c00 * (1.0 - w[1]) + c01 * w[1];
        const double c1 = c10 * (1.0 - w[1]) + c11 * w[1];
        return c0 * (1.0 - w[0]) + c1 * w[0];
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values_) m = std::max(m, std::abs(v));
        return m;
    }

    friend bool operator==(const GridFunction& a, const GridFunction& b) {
        return a.domain_.lower == b.domain_.lower && a.domain_.upper == b.domain_.upper && a.counts_ == b.counts_ &&
               a.values_ == b.values_;
    }

private:
    BoxDomain domain_;
    std::array<int, 3> counts_{0, 0, 0};
    std::array<double, 3> spacing_{0.0, 0.0, 0.0};
    std::vector<double> values_;
};

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with header "x1,x2,x3,value", one row per node, x3 fastest.
inline void write_grid_csv(std::ostream& os, const GridFunction& u) {
    os << "x1,x2,x3,value\n";
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Point p = u.node(i);
        os << format_double(p.x1) << ',' << format_double(p.x2) << ',' << format_double(p.x3) << ','
           << format_double(u.values()[i]) << '\n';
    }
}

inline void write_grid_csv(const std::string& path, const GridFunction& u) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_grid_csv(os, u);
}

/// Reads a grid written by write_grid_csv. The lattice is recovered from
/// the distinct coordinates; rows must come in x3-fastest order.
inline GridFunction read_grid_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "x1,x2,x3,value") {
        throw std::invalid_argument("grid CSV must start with header x1,x2,x3,value");
    }
    std::vector<std::array<double, 4>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::array<double, 4> r{};
        std::stringstream ss(line);
        std::string cell;
        for (std::size_t c = 0; c < 4; ++c) {
            if (!std::getline(ss, cell, ',')) throw std::invalid_argument("grid CSV row with fewer than 4 columns");
            r[c] = std::stod(cell);
        }
        rows.push_back(r);
    }
    std::array<std::vector<double>, 3> axes;
    for (std::size_t a = 0; a < 3; ++a) {
        std::map<double, int> seen;
        for (const auto& r : rows) seen.emplace(r[a], 0);
        for (const auto& [x, unused] : seen) axes[a].push_back(x);
    }
    const std::array<int, 3> counts{static_cast<int>(axes[0].size()), static_cast<int>(axes[1].size()),
                                    static_cast<int>(axes[2].size())};
    if (static_cast<std::size_t>(counts[0]) * static_cast<std::size_t>(counts[1]) *
            static_cast<std::size_t>(counts[2]) !=
        rows.size()) {
        throw std::invalid_argument("grid CSV rows do not form a full lattice");
    }
    BoxDomain dom({axes[0].front(), axes[1].front(), axes[2].front()},
                  {axes[0].back(), axes[1].back(), axes[2].back()});
    GridFunction u(dom, counts);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Point p = u.node(i);
        if (p.x1 != rows[i][0] || p.x2 != rows[i][1] || p.x3 != rows[i][2]) {
            throw std::invalid_argument("grid CSV rows are not a uniform x3-fastest lattice");
        }
        u.values()[i] = rows[i][3];
    }
    return u;
}

inline GridFunction read_grid_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_grid_csv(is);
}

}  // namespace martinet
