#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string_view>

#include <Eigen/Core>

#include "greenbvp/grid.hpp"
#include "greenbvp/ivp.hpp"

namespace greenbvp {

/// Two boundary functionals B_i x = b_i1 x(0) + b_i2 x'(0) + c_i1 x(1) + c_i2 x'(1) = d_i.
///
/// Empty target vectors mean zero targets of whatever dimension the problem has.
struct BoundaryConditions {
    std::array<std::array<double, 4>, 2> rows{};
    Eigen::VectorXd d1;
    Eigen::VectorXd d2;

    static BoundaryConditions periodic();
    static BoundaryConditions dirichlet(Eigen::VectorXd d1 = {}, Eigen::VectorXd d2 = {});

    /// Throws InvalidArgument unless the 2x4 coefficient block has rank 2.
    void validate() const;

    bool homogeneous() const;
    bool is_periodic() const;

    /// B_row applied to scalar boundary data.
    double apply(std::size_t row, double x0, double dx0, double x1, double dx1) const;

    /// Target d_row in dimension `dim` (zeros when unset).
    Eigen::VectorXd target(std::size_t row, std::size_t dim) const;
};

/// Canonical solutions u1 (1,0) and u2 (0,1) of the homogeneous equation at the nodes.
struct FundamentalSystem {
    Grid grid;
    Eigen::VectorXd u1, du1, u2, du2;
    Eigen::VectorXd wronskian;
};

inline constexpr double kDegenerateWronskian = 1e-10;
inline constexpr double kIncompatibilityThreshold = 1e-8;

/// Throws DegenerateWronskian when |W(t_i)| < 1e-10 at any node.
FundamentalSystem fundamental_system(const CoefficientSet& coeffs, const Grid& grid);

/// The matrix [B_i u_j].
Eigen::Matrix2d boundary_matrix(const FundamentalSystem& fs, const BoundaryConditions& bc);

/// det [B_i u_j]; |det| < 1e-8 means the reduced problem is incompatible-violating.
double compatibility_determinant(const CoefficientSet& coeffs, const BoundaryConditions& bc, const Grid& grid);

enum class KernelRepresentation { closed_form_periodic_xpp_minus_x, closed_form_periodic_xpp_xp_x, numeric };

std::string_view to_string(KernelRepresentation r);

/// Branch-aware evaluator behind a GreensKernel. Indices are grid nodes (t_i, s_j).
///
/// `lower` is the s <= t formula and `upper` the t <= s formula; both stay
/// smooth when evaluated outside their own triangle.
class KernelBranches {
public:
    virtual ~KernelBranches() = default;
    virtual double lower(std::size_t i, std::size_t j) const = 0;
    virtual double upper(std::size_t i, std::size_t j) const = 0;
    virtual double dt_lower(std::size_t i, std::size_t j) const = 0;
    virtual double dt_upper(std::size_t i, std::size_t j) const = 0;
};

/// Green's function G(t,s) of L with homogeneous boundary conditions, on a grid.
///
/// Immutable and cheap to copy. The scalar kernel acts componentwise on R^N.
class GreensKernel {
public:
    GreensKernel(KernelRepresentation rep, Grid grid, CoefficientSet coeffs, BoundaryConditions bc,
                 std::shared_ptr<const KernelBranches> branches);

    KernelRepresentation representation() const noexcept { return rep_; }
    const Grid& grid() const noexcept { return grid_; }
    const CoefficientSet& coefficients() const noexcept { return coeffs_; }
    const BoundaryConditions& boundary() const noexcept { return bc_; }

    double lower(std::size_t i, std::size_t j) const { return branches_->lower(i, j); }
    double upper(std::size_t i, std::size_t j) const { return branches_->upper(i, j); }
    double dt_lower(std::size_t i, std::size_t j) const { return branches_->dt_lower(i, j); }
    double dt_upper(std::size_t i, std::size_t j) const { return branches_->dt_upper(i, j); }

    /// G(t_i, s_j); the diagonal gets the common branch value.
    double operator()(std::size_t i, std::size_t j) const { return j <= i ? lower(i, j) : upper(i, j); }

    /// Dense snapshot G(t_i, s_j).
    Eigen::MatrixXd dense() const;

private:
    KernelRepresentation rep_;
    Grid grid_;
    CoefficientSet coeffs_;
    BoundaryConditions bc_;
    std::shared_ptr<const KernelBranches> branches_;
};

/// Numeric kernel by variation of parameters plus a 2x2 boundary correction.
///
/// Throws IncompatibleProblem when |det [B_i u_j]| < 1e-8.
GreensKernel build_greens(const CoefficientSet& coeffs, const BoundaryConditions& bc, const Grid& grid);

enum class ClosedFormId { periodic_xpp_minus_x, periodic_xpp_xp_x };

/// Parses "periodic_xpp_minus_x" / "periodic_xpp_xp_x"; throws InvalidArgument otherwise.
ClosedFormId parse_closed_form_id(std::string_view id);

/// Exact kernels of x'' - x and x'' - x' - x under periodic conditions.
GreensKernel closed_form_kernel(ClosedFormId id, const Grid& grid);
GreensKernel closed_form_kernel(std::string_view id, const Grid& grid);

/// Continuous evaluation of a closed-form kernel off the grid.
double closed_form_value(ClosedFormId id, double t, double s);

struct Lift {
    SampledFunction h;
    SampledFunction dh;
};

/// The solution of L h = 0, B_1 h = d_1, B_2 h = d_2 (componentwise in R^dim).
Lift homogeneous_lift(const CoefficientSet& coeffs, const BoundaryConditions& bc, const Grid& grid,
                      std::size_t dim = 1);

struct KernelNorms {
    double sup_l2_rows = 0.0;     // sup_t ||G(t,.)||_2
    double sup_l2_rows_dt = 0.0;  // sup_t ||dG/dt(t,.)||_2
    double sup_abs = 0.0;         // sup_{t,s} |G(t,s)|
    std::optional<double> l2_of_l2_dt2;
};

KernelNorms kernel_norms(const GreensKernel& kernel);

/// Maximum violations of the defining properties of a Green's function.
struct KernelDiagnostics {
    double diagonal_gap = 0.0;   // |lower - upper| on t = s
    double jump_error = 0.0;     // |dG/dt(s+,s) - dG/dt(s-,s) - 1/a2(s)| over interior s
    double ode_residual = 0.0;   // |a2 G'' + a1 G' + a0 G| away from the diagonal band
    double bc_residual = 0.0;    // |B_k G(., s)| over interior s
};

KernelDiagnostics validate_kernel(const GreensKernel& kernel, std::size_t band = 2);

/// Max node-wise difference between two kernels on the same grid.
double max_kernel_difference(const GreensKernel& a, const GreensKernel& b);

/// CSV snapshot: header row of s-nodes, then one row of G(t_i, s_j) per t_i, 17 significant digits.
void write_kernel_csv(const GreensKernel& kernel, std::ostream& out);

}  // namespace greenbvp
