#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "greenbvp/hammerstein.hpp"

namespace greenbvp {

/// F_n(t,x) = F(t,x) + x/n with the metadata shifted accordingly.
struct PerturbedProblem {
    RightHandSide base;
    std::size_t n = 1;
    RightHandSide rhs;
    /// Bound on ||x|| + ||x'|| for solutions of every F_k with a lift of C^1 norm <= 1;
    /// unknown without growth metadata.
    std::optional<double> bound_R;
    /// (sup|G| + sup_t ||dG/dt(t,.)||_2) R / n.
    std::optional<double> eps_n;
};

/// Throws ConditionViolation when (m + 1) sup_t ||G(t,.)||_2 >= 1. Without growth
/// metadata the check cannot be made and bound_R, eps_n stay empty.
PerturbedProblem perturb(const RightHandSide& rhs, std::size_t n, const KernelNorms& norms, const Grid& grid);

struct PerturbedSolve {
    Solution best;                // smallest residual_ode among converged runs
    double uniqueness_spread = 0.0;  // max pairwise ||x_a - x_b|| + ||x_a' - x_b'||
    std::size_t converged = 0;
    std::size_t diverged = 0;
};

/// Picard solves of x = h + H F_n(x) from `starts` random initial selections.
///
/// Needs a single-valued base marked accretive; when eps_n is known the lift must
/// satisfy ||h||_{C^1} <= eps_n. Throws DivergenceError when no start converges.
PerturbedSolve solve_perturbed(const PerturbedProblem& pp, const HammersteinOperator& op, const Lift& h,
                               std::size_t starts, std::uint64_t seed, const PicardOptions& options = {});

struct SchemeStep {
    std::size_t n = 0;
    std::optional<double> eps_n;
    double max_gap = 0.0;  // sup over samples of ||H(x/n)||_{C^1}
    bool gap_ok = false;   // max_gap <= eps_n
    double spread = 0.0;
    bool unique_ok = false;  // spread <= 1e-6
    std::size_t converged = 0;
    std::string note;
};

struct SchemeReport {
    std::vector<SchemeStep> steps;
    std::optional<double> bound_R;
    bool all_ok() const;
};

/// Checks the two approximation conditions for each n: ||Psi_n(x) - Psi(x)||_{C^1}
/// = ||H(x/n)||_{C^1} <= eps_n on 20 random x in the C^1 ball of radius R, and
/// multi-start uniqueness of the perturbed problem with zero lift.
SchemeReport perturbation_scheme(const RightHandSide& rhs, const HammersteinOperator& op,
                                 const std::vector<std::size_t>& n_list, double tol, std::uint64_t seed = 0,
                                 std::size_t starts = 5);

struct FunnelBundle {
    std::vector<Solution> members;
    std::vector<std::uint64_t> seeds;
    std::uint64_t seed = 0;
    std::size_t requested = 0;
    double diameter_c1 = 0.0;
    double max_residual = 0.0;       // largest dist(w(t_i), F(t_i, x(t_i))) over the members
    std::optional<double> bound_R;   // C^1 a-priori bound
    std::optional<double> bound_sup; // sup-norm a-priori bound
    bool within_bounds = true;
    bool low_confidence = false;     // fewer than half of the members converged
};

/// Samples solutions of a box-valued problem by freezing M random node-wise
/// selection fields f0 + rho theta_k, theta_k(t_i) in [-1,1]^N, and solving each.
FunnelBundle sample_funnel(const HammersteinOperator& op, const RightHandSide& rhs, std::size_t members,
                           std::uint64_t seed, double tol, const Lift* lift = nullptr);

/// min over random (t, x, y) and selections u in F(t,x), w in F(t,y) of
/// <u - w, x - y> - modulus |x - y|^2. Accretive on the samples iff >= -1e-10.
double accretivity_probe(const RightHandSide& rhs, std::size_t samples, std::uint64_t seed, double modulus = 0.0,
                         double state_radius = 2.0);

/// c0 + sum_k a_k cos(2 pi k t) + b_k sin(2 pi k t), k = 1..degree.
struct TrigPolynomial {
    double c0 = 0.0;
    std::vector<double> a;
    std::vector<double> b;

    double value(double t) const;
    double d1(double t) const;
    double d2(double t) const;
};

/// <L x, x>_{L^2} by quadrature with the exact derivatives of x.
double dissipativity_pairing(const CoefficientSet& coeffs, const Grid& grid, const TrigPolynomial& x);

/// max of <L x, x>_{L^2} over random real trigonometric polynomials of degree <= 5,
/// using their exact derivatives. Throws InvalidArgument when a0 > 0 at a node.
double dissipativity_probe(const CoefficientSet& coeffs, const Grid& grid, std::size_t samples, std::uint64_t seed);

}  // namespace greenbvp
