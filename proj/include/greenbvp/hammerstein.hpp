#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "greenbvp/greens.hpp"
#include "greenbvp/grid.hpp"

namespace greenbvp {

using VectorField = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;
using StateScalar = std::function<double(double t, const Eigen::VectorXd& x)>;

enum class RhsKind { single, box };

/// Sublinear growth |F(t,x)|^+ <= c(t) + m |x|.
struct Growth {
    ScalarFunction c;
    double m = 0.0;
};

/// Right-hand side F(t,x): either {f0(t,x)} or the box f0(t,x) + rho(t,x) [-1,1]^N.
///
/// The optional metadata (growth, Lipschitz modulus mu, alpha, eta) feeds the
/// condition checks; it is declared by the caller and audited by probe_metadata.
struct RightHandSide {
    RhsKind kind = RhsKind::single;
    std::size_t dim = 1;
    VectorField f0;
    StateScalar rho;
    std::optional<Growth> growth;
    std::optional<ScalarFunction> lipschitz;
    std::optional<ScalarFunction> alpha;
    std::optional<ScalarFunction> eta;
    bool accretive = false;

    static RightHandSide single(std::size_t dim, VectorField f0);
    static RightHandSide box(std::size_t dim, VectorField f0, StateScalar rho);

    void validate() const;

    Eigen::VectorXd center(double t, const Eigen::VectorXd& x) const;
    double radius(double t, const Eigen::VectorXd& x) const;

    /// Closest point of F(t,x) to v (componentwise clamp onto the box).
    Eigen::VectorXd nearest(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
    double distance(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& v) const;
};

/// Largest violation of the declared growth and Lipschitz bounds on random probes
/// (t uniform on [0,1], states uniform in [-state_radius, state_radius]^N).
/// Values <= 0 mean the declaration held on every probe; nullopt means not declared.
struct MetadataAudit {
    std::optional<double> growth_excess;
    std::optional<double> lipschitz_excess;
};

MetadataAudit probe_metadata(const RightHandSide& rhs, std::size_t samples, std::uint64_t seed,
                             double state_radius = 2.0);

struct CenterSelection {};
struct RandomSelection {
    std::uint64_t seed = 0;
};
struct NearestSelection {
    SampledFunction target;
};
using SelectionSpec = std::variant<CenterSelection, RandomSelection, NearestSelection>;

/// Node-wise selection w(t_i) in F(t_i, x(t_i)).
SampledFunction nemytskii(const RightHandSide& rhs, const SampledFunction& x, const SelectionSpec& selection);

/// Quadrature discretization of u -> int G(., s) u(s) ds and its t-derivative.
///
/// Each row integrates the two kernel branches separately over [0, t_i] and
/// [t_i, 1], so the diagonal kink of G and the jump of dG/dt do not spoil
/// the quadrature order.
class HammersteinOperator {
public:
    explicit HammersteinOperator(GreensKernel kernel);

    struct Result {
        SampledFunction value;
        SampledFunction derivative;
    };

    Result apply(const SampledFunction& u) const;

    const GreensKernel& kernel() const noexcept { return kernel_; }
    const Eigen::MatrixXd& value_matrix() const noexcept { return value_; }
    const Eigen::MatrixXd& derivative_matrix() const noexcept { return derivative_; }
    /// sup over the node lattice of |G(t_i, s_j)|.
    double sup_abs() const noexcept { return sup_abs_; }

private:
    GreensKernel kernel_;
    Eigen::MatrixXd value_;
    Eigen::MatrixXd derivative_;
    double sup_abs_ = 0.0;
};

HammersteinOperator::Result apply_H(const GreensKernel& kernel, const SampledFunction& u);

struct ConditionResult {
    std::string id;
    double lhs = 0.0;
    double rhs = 1.0;
    double margin = 0.0;
    bool pass = false;
    bool evaluable = false;
};

/// Condition identifiers:
///   "sublinear_growth"  m sup_t ||G(t,.)||_2 < 1
///   "eta_norm"          2 sup_t ||G(t,.)||_2 ||eta||_2 < 1
///   "perturbed_growth"  (m + 1) sup_t ||G(t,.)||_2 < 1
///   "lipschitz_l1"      ||mu||_1 sup |G| < 1
struct ConditionReport {
    std::vector<ConditionResult> conditions;
    std::optional<double> contraction_q;
    double m_threshold = 0.0;    // 1 / sup_t ||G(t,.)||_2
    double eta_threshold = 0.0;  // 1 / (2 sup_t ||G(t,.)||_2)
    double mu_threshold = 0.0;   // 1 / sup |G|

    const ConditionResult& get(std::string_view id) const;
    /// True when every evaluable condition passes.
    bool all_pass() const;
};

ConditionReport check_conditions(const KernelNorms& norms, const RightHandSide& rhs, const Grid& grid);

struct AprioriBounds {
    double sup_norm_bound = 0.0;  // bound on sup_t |x(t)|
    double c1_bound = 0.0;        // R, bound on ||x|| + ||x'||
};

/// Solution bounds from the growth metadata. A lift h with ||h|| = lift_sup and
/// ||h'|| = lift_dsup shifts both bounds. Throws ConditionViolation when
/// m sup_t ||G(t,.)||_2 >= 1 and InvalidArgument when growth is undeclared.
AprioriBounds apriori_bounds(const KernelNorms& norms, const RightHandSide& rhs, const Grid& grid,
                             double lift_sup = 0.0, double lift_dsup = 0.0);

struct Solution {
    SampledFunction x;
    SampledFunction dx;
    SampledFunction w;  // selection with L x = w
    double residual_ode = 0.0;
    double residual_bc = 0.0;
    std::size_t iterations = 0;
    std::vector<double> increments;  // ||w_{k+1} - w_k||_1
    bool converged = false;
    bool guaranteed = false;  // contraction constant known and < 1
    std::optional<double> contraction_q;
};

struct PicardOptions {
    double tol = 1e-10;
    std::size_t max_iter = 10000;
    /// Starting selection; overrides the selection rule when set.
    std::optional<SampledFunction> initial;
};

/// Zero lift of dimension dim (homogeneous boundary conditions).
Lift zero_lift(const Grid& grid, std::size_t dim);

/// Fixed-point iteration w_{k+1} = P_{F(t, h + H w_k)}(w_k), x = h + H w.
///
/// The first selection comes from `start` applied to F(t, h(t)) unless
/// options.initial is given. Stops when ||w_{k+1} - w_k||_1 <= tol. Throws
/// DivergenceError (with the increment history) when max_iter is exhausted or
/// the iterates stop being finite.
Solution picard_solve(const HammersteinOperator& op, const Lift& lift, const RightHandSide& rhs,
                      const SelectionSpec& start, const PicardOptions& options = {});

/// Largest ratio of consecutive increments, ignoring increments below `floor`.
double max_increment_ratio(const std::vector<double>& increments, double floor = 1e-13);

/// f(t,x) = lambda x + g(t).
struct LinearRhs {
    double lambda = 0.0;
    SampledFunction g;
};

/// Second-order finite differences for a2 x'' + a1 x' + (a0 - lambda) x = g with the
/// boundary rows discretized by one-sided second-order stencils. No kernel involved.
SampledFunction fd_oracle(const CoefficientSet& coeffs, const BoundaryConditions& bc, const LinearRhs& rhs,
                          const Grid& grid);

/// Finite-difference derivatives: central inside, one-sided second order at the ends.
SampledFunction fd_first_derivative(const SampledFunction& x);
SampledFunction fd_second_derivative(const SampledFunction& x);

struct Residuals {
    double ode = 0.0;            // ||L x - nearest selection||_1
    double bc = 0.0;             // |B_1 x - d_1| + |B_2 x - d_2|
    double selection_gap = 0.0;  // max_i dist(L x(t_i), F(t_i, x(t_i)))
};

/// Residuals of a candidate solution. Endpoint slopes come from dx when given,
/// otherwise from one-sided differences of x.
Residuals residual_check(const CoefficientSet& coeffs, const BoundaryConditions& bc, const RightHandSide& rhs,
                         const SampledFunction& x, const SampledFunction* dx = nullptr);

}  // namespace greenbvp
