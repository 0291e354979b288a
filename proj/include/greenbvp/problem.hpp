#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "greenbvp/expression.hpp"
#include "greenbvp/greens.hpp"
#include "greenbvp/hammerstein.hpp"

namespace greenbvp {

/// A problem file: one `key = value` per line, `#` starts a comment.
///
///   preset    = example-3.5          optional base, later keys override it
///   a2, a1, a0 = <expression in t>
///   bc        = periodic | dirichlet | general
///   bc.row1, bc.row2 = b1 b2 c1 c2   (bc = general)
///   d1, d2    = v1 v2 ...            boundary targets, one per component
///   kernel    = numeric | periodic_xpp_minus_x | periodic_xpp_xp_x
///   dim       = N
///   rhs       = single | box
///   f0        = <expression>         componentwise, or N expressions separated by ';'
///   rho       = <expression>
///   c, mu, alpha, eta = <expression in t>;  m = <number>;  accretive = true | false
///   conditions = id, id, ...        checks reported by `check` (default: all)
///   grid, tol, max_iter, seed, selection, members, perturb, method, lambda_max
struct ProblemSpec {
    std::string name;
    std::string a2 = "1", a1 = "0", a0 = "-1";
    std::string bc = "periodic";
    std::vector<double> row1, row2;
    std::vector<double> d1, d2;
    std::string kernel = "numeric";
    std::size_t dim = 1;
    std::string rhs = "single";
    std::string f0 = "0";
    std::string rho = "0";
    std::optional<std::string> c;
    std::optional<double> m;
    std::optional<std::string> mu, alpha, eta;
    bool accretive = false;
    std::optional<std::size_t> grid;
    double tol = 1e-10;
    std::size_t max_iter = 10000;
    std::uint64_t seed = 0;
    std::string selection = "center";
    std::size_t members = 64;
    std::vector<std::size_t> perturb;
    std::vector<std::string> conditions;  // empty: every condition
    std::string method = "both";
    double lambda_max = 3.0;

    CoefficientSet coefficients() const;
    BoundaryConditions boundary() const;
    RightHandSide right_hand_side() const;
    /// Closed-form kernel when requested (it must match the coefficients and bc), else build_greens.
    GreensKernel kernel_on(const Grid& grid) const;
};

/// Throws InvalidArgument on unknown keys, malformed values or invalid expressions.
ProblemSpec parse_problem(std::string_view text);
ProblemSpec load_problem(const std::filesystem::path& path);

std::vector<std::string> preset_names();
/// Problem-file text of a named preset; throws InvalidArgument for unknown names.
std::string preset_text(std::string_view name);

}  // namespace greenbvp
