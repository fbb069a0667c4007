#pragma once

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "martinet/profile.hpp"
#include "martinet/types.hpp"

namespace martinet::cli {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Every accepted key with its default value. A run config is an INI file
/// with flat [section] blocks of `key = value` lines; `;` and `#` start
/// comments. Lists are separated by spaces or commas, point lists by `;`.
inline const std::map<std::string, std::string>& config_schema() {
    static const std::map<std::string, std::string> schema{
        {"profile.coeffs", "0 1"},
        {"domain.lower", "-1 -1 -1"},
        {"domain.upper", "1 1 1"},
        {"domain.h", "0.0625"},
        {"boundary.g", "0"},
        {"solver.eps", "0"},
        {"solver.directions", "32"},
        {"solver.tol", "1e-6"},
        {"solver.max_iters", "100000"},
        {"solver.init", "zero"},
        {"monotone.sigma", "1"},
        {"monotone.rhs", "0"},
        {"monotone.exact", ""},
        {"distance.mode", "exponent"},
        {"distance.p", "0 0 0"},
        {"distance.q", "0 0 0.01"},
        {"distance.axis", "3"},
        {"distance.deltas", "0.001 0.002 0.005 0.01 0.02 0.05 0.1"},
        {"distance.segments", "32"},
        {"distance.iters", "4000"},
        {"distance.starts", "8"},
        {"distance.endpoint_tol", "1e-6"},
        {"twist.samples", "1000"},
        {"twist.max_degree", "4"},
        {"twist.radius", "2"},
        {"search.grid_n", "16"},
        {"search.refinement_rounds", "3"},
        {"search.refinement_factor", "4"},
        {"search.refinement_radius", "4"},
        {"maxprin.u", "1 - x1^2 - x2^2 - x3^2"},
        {"maxprin.v", "0"},
        {"maxprin.taus", "10 100 1000 10000 100000"},
        {"maxprin.gap_t", "0.1 0.01 0.001 0.0001"},
        {"maxprin.gap_c2", "1"},
        {"maxprin.gap_c3", "1"},
        {"imp.u", "1 - x1^2 - x2^2 - x3^2"},
        {"imp.v", "0"},
        {"imp.tau", "10 10 10"},
        {"imp.orders", "123 321"},
        {"imp.tau_start", "1"},
        {"imp.tau_end", "1000"},
        {"compare.g1", "x1"},
        {"compare.g2", "x1 + 0.1"},
        {"operators.u", "x1^2 + x1*x3"},
        {"operators.points", "0 0 0; 1 0 0"},
        {"operators.q", "2 4"},
        {"operators.eps", "0.1"},
    };
    return schema;
}

class RunConfig {
public:
    RunConfig() = default;

    /// Reads `path` (empty for defaults only) and applies `section.key=value`
    /// overrides in order.
    static RunConfig load(const std::string& path, const std::vector<std::string>& overrides) {
        RunConfig c;
        if (!path.empty()) {
            boost::property_tree::ptree tree;
            try {
                boost::property_tree::ini_parser::read_ini(path, tree);
            } catch (const boost::property_tree::ini_parser_error& e) {
                throw ConfigError("cannot read config: " + std::string(e.what()));
            }
            for (const auto& [section, body] : tree) {
                if (body.empty()) throw ConfigError("config key '" + section + "' is outside any [section]");
                for (const auto& [key, leaf] : body) c.set(section + "." + key, leaf.get_value<std::string>());
            }
        }
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw ConfigError("override '" + o + "' is not of the form section.key=value");
            c.set(trim(o.substr(0, eq)), trim(o.substr(eq + 1)));
        }
        return c;
    }

    void set(const std::string& key, const std::string& value) {
        if (!config_schema().contains(key)) throw ConfigError("unknown config key '" + key + "'");
        values_[key] = value;
    }

    std::string text(const std::string& key) const {
        const auto it = config_schema().find(key);
        if (it == config_schema().end()) throw std::logic_error("unregistered config key " + key);
        used_.insert(key);
        const auto v = values_.find(key);
        return v == values_.end() ? it->second : v->second;
    }

    double number(const std::string& key) const {
        const std::string s = text(key);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || !trim(s.substr(used)).empty() || !std::isfinite(v)) {
            throw ConfigError("config key '" + key + "' expects a finite number, got '" + s + "'");
        }
        return v;
    }

    long integer(const std::string& key) const {
        const double v = number(key);
        if (v != std::floor(v) || std::abs(v) > 9.0e15) {
            throw ConfigError("config key '" + key + "' expects an integer, got '" + text(key) + "'");
        }
        return static_cast<long>(v);
    }

    std::vector<double> numbers(const std::string& key) const {
        std::string s = text(key);
        for (char& ch : s) {
            if (ch == ',') ch = ' ';
        }
        std::istringstream in(s);
        std::vector<double> out;
        std::string tok;
        while (in >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v)) {
                throw ConfigError("config key '" + key + "' expects a list of numbers, got '" + text(key) + "'");
            }
            out.push_back(v);
        }
        return out;
    }

    Point point(const std::string& key) const { return to_point(key, numbers(key)); }

    std::vector<Point> points(const std::string& key) const {
        std::vector<Point> out;
        std::istringstream in(text(key));
        std::string item;
        while (std::getline(in, item, ';')) {
            if (trim(item).empty()) continue;
            RunConfig tmp;
            tmp.values_[key] = item;
            out.push_back(to_point(key, tmp.numbers(key)));
        }
        if (out.empty()) throw ConfigError("config key '" + key + "' lists no points");
        return out;
    }

    MartinetProfile profile() const {
        const auto c = numbers("profile.coeffs");
        try {
            return MartinetProfile(c);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("config key 'profile.coeffs': " + std::string(e.what()));
        }
    }

    /// Keys read so far with their effective values, in key order.
    std::map<std::string, std::string> used_entries() const {
        std::map<std::string, std::string> out;
        for (const auto& k : used_) {
            const auto v = values_.find(k);
            out[k] = v == values_.end() ? config_schema().at(k) : v->second;
        }
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return {};
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static Point to_point(const std::string& key, const std::vector<double>& v) {
        if (v.size() != 3) throw ConfigError("config key '" + key + "' expects three coordinates");
        return {v[0], v[1], v[2]};
    }

    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

}  // namespace martinet::cli
