#pragma once

#include <cstddef>

#include <Eigen/Core>

#include "greenbvp/greens.hpp"
#include "greenbvp/grid.hpp"

namespace greenbvp {

/// Nyström matrix of u -> 2 int |G(., s)| eta(s) u(s) ds.
struct ComparisonMatrix {
    Grid grid;
    Eigen::MatrixXd entries;
};

/// Entries 2 w_ij |G(t_i, s_j)| eta(s_j) with branch-split weights w_ij.
/// Throws InvalidArgument when eta is negative at a node.
ComparisonMatrix build_comparison(const GreensKernel& kernel, const ScalarFunction& eta);

struct PowerResult {
    double radius = 0.0;
    std::size_t iterations = 0;
    /// Collatz-Wielandt bracket min_i (Mv)_i / v_i <= r <= max_i (Mv)_i / v_i at the last iterate.
    double lower = 0.0;
    double upper = 0.0;
};

/// Perron root of a nonnegative matrix by power iteration from the all-ones vector.
///
/// Converged when successive Rayleigh quotients differ by at most tol. Throws
/// DivergenceError carrying the quotient differences when max_iter is reached.
PowerResult power_radius(const Eigen::MatrixXd& m, double tol = 1e-12, std::size_t max_iter = 10000);
PowerResult power_radius(const ComparisonMatrix& m, double tol = 1e-12, std::size_t max_iter = 10000);

/// Periodic operator and kernel sign behind a Hill-type eigenvalue search.
///
/// For a sign-definite periodic kernel G of L, lambda is an eigenvalue of the
/// comparison operator iff L u = sign(G) (2 eta / lambda) u has a nontrivial
/// periodic solution, i.e. iff u1(1) + u2'(1) = 1 + det of the monodromy matrix.
struct HillProblem {
    CoefficientSet coeffs = CoefficientSet::constant(1.0, 0.0, -1.0);
    double kernel_sign = -1.0;

    /// Periodic x'' - x, whose kernel is negative.
    static HillProblem xpp_minus_x() { return {}; }
};

struct HillValue {
    double discriminant = 0.0;  // u1(1) + u2'(1)
    double target = 2.0;        // 1 + u1(1) u2'(1) - u1'(1) u2(1)
};

HillValue hill_value(const HillProblem& problem, const ScalarFunction& eta, double lambda, const Grid& grid);

/// u1(1) + u2'(1) for u'' = (1 - 2 eta(t) / lambda) u. Throws InvalidArgument unless lambda > 0.
double hill_discriminant(const ScalarFunction& eta, double lambda, const Grid& grid);

struct HillRadius {
    double radius = 0.0;
    bool root_found = false;
    bool tangential = false;  // located by the min |D - target| fallback
    std::size_t evaluations = 0;
};

/// Largest lambda in (0, lambda_max] with D(lambda) = target.
///
/// Scans 200 equal subintervals from the top, bisects the first sign change to
/// 1e-8, and falls back to the scan point minimizing |D - target| when that
/// minimum is below 1e-6. Returns radius 0 and root_found = false otherwise.
HillRadius hill_radius(const ScalarFunction& eta, double lambda_max, const Grid& grid,
                       const HillProblem& problem = HillProblem::xpp_minus_x());

}  // namespace greenbvp
