#pragma once

#include <optional>
#include <set>
#include <string>

#include "itereig/driver.hpp"

namespace itereig {

struct GenSpec {
    std::size_t m = 0;
    double ax = 0, bx = 0, gx = 0;
    double ay = 0, by = 0, gy = 0;
};

struct RunConfig {
    std::optional<GenSpec> gen;  // exactly one of gen / matrix_path
    std::string matrix_path;
    std::string mass_path;  // optional mass matrix file
    std::string eig_path;   // optional EIGB1 sidecar

    Complex sigma = 0.0;
    double delta = 0.1;
    std::size_t max_outer = 30;
    double outer_tol = 1e-10;
    std::size_t max_inner = 0;

    std::string precond = "none";  // none | ilu | tuned-i | tuned-a | poly
    double droptol = 1e-2;
    std::size_t degree = 10;
    std::string poly_scheme = "cheb";  // cheb | contour

    std::size_t block = 1;
    std::set<std::string> emit;  // summary, outer, inner, weights
    std::string out_dir = ".";
};

struct RunResult {
    OuterTrace trace;
    std::vector<std::string> files;
};

// Loads the problem, builds the configured preconditioner regime, runs the
// outer iteration and writes the requested CSV files into out_dir. Partial
// outputs are removed if anything fails.
RunResult run(const RunConfig& config);

// Runs each config (same problem source required) into a subdirectory and
// writes comparison.csv in the first config's out_dir.
std::vector<RunResult> compare(std::vector<RunConfig> configs);

}  // namespace itereig
