#pragma once

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace martinet::testing {

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string shell_quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') q += "'\\''";
        else q += c;
    }
    return q + "'";
}

/// Runs the CLI binary with `args`, capturing stdout and stderr in `scratch`.
inline CliRun run_cli(const std::string& binary, const std::vector<std::string>& args,
                      const std::filesystem::path& scratch) {
    std::filesystem::create_directories(scratch);
    std::string cmd = shell_quote(binary);
    for (const auto& a : args) cmd += " " + shell_quote(a);
    const auto out = scratch / "stdout.txt";
    const auto err = scratch / "stderr.txt";
    cmd += " >" + shell_quote(out.string()) + " 2>" + shell_quote(err.string());
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

/// File name -> contents for every regular file directly in `dir`.
inline std::map<std::string, std::string> directory_contents(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.is_regular_file()) files[e.path().filename().string()] = slurp(e.path());
    }
    return files;
}

struct CliCase {
    std::string name;
    std::vector<std::string> args;
};

/// One small, seeded invocation of every subcommand.
inline std::vector<CliCase> cli_cases() {
    return {
        {"solve", {"solve", "--seed", "5", "--set", "domain.h=0.125", "--set", "solver.init=random", "--set",
                   "boundary.g=min(x1, x2) + 0.5*x3^2", "--set", "profile.coeffs=0 0 0.5"}},
        {"monotone", {"monotone", "--set", "domain.h=0.125", "--set", "boundary.g=x1^2", "--set",
                      "monotone.rhs=x1^2 - 2", "--set", "monotone.exact=x1^2"}},
        {"distance", {"distance", "--seed", "3", "--set", "distance.mode=pair", "--set", "distance.q=0.1 -0.05 0.02",
                      "--set", "distance.segments=16", "--set", "distance.starts=4"}},
        {"distance-exponent", {"distance", "--seed", "3", "--set", "distance.segments=16", "--set",
                               "distance.starts=4", "--set", "distance.deltas=0.001 0.01 0.1 0.05"}},
        {"twist-check", {"twist-check", "--seed", "11", "--set", "twist.samples=200"}},
        {"maxprin", {"maxprin", "--set", "maxprin.u=x1*x3 + x2", "--set", "maxprin.v=x1*x3 + x2 - 0.25",
                     "--set", "maxprin.taus=1 10 100", "--set", "search.grid_n=10"}},
        {"imp", {"imp", "--set", "imp.u=x1*x2 - x3^2", "--set", "imp.v=x1*x2 - x3^2 - 0.1", "--set",
                 "search.grid_n=8", "--set", "search.refinement_rounds=1", "--set", "imp.tau_end=10"}},
        {"compare", {"compare", "--seed", "2", "--set", "domain.h=0.125", "--set", "compare.g1=min(x1, x3)",
                     "--set", "compare.g2=max(x1, x3)", "--set", "solver.init=random"}},
        {"operators", {"operators", "--set", "operators.points=0 0 0; 1 0.5 -0.25; -0.3 0.2 0.1", "--set",
                       "operators.q=2 3 4 10"}},
    };
}

}  // namespace martinet::testing
