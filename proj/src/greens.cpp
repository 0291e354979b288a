#include "greenbvp/greens.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

// Numeric kernel: G(t,s) = K(t,s)[s <= t] + c1(s) u1(t) + c2(s) u2(t).
class NumericBranches final : public KernelBranches {
public:
    NumericBranches(FundamentalSystem fs, Eigen::VectorXd inv_a2w, Eigen::VectorXd c1, Eigen::VectorXd c2)
        : fs_(std::move(fs)), inv_(std::move(inv_a2w)), c1_(std::move(c1)), c2_(std::move(c2)) {}

    double lower(std::size_t i, std::size_t j) const override { return particular(i, j) + upper(i, j); }
    double upper(std::size_t i, std::size_t j) const override {
        const auto ti = idx(i), sj = idx(j);
        return c1_[sj] * fs_.u1[ti] + c2_[sj] * fs_.u2[ti];
    }
    double dt_lower(std::size_t i, std::size_t j) const override {
        const auto ti = idx(i), sj = idx(j);
        return (fs_.u1[sj] * fs_.du2[ti] - fs_.du1[ti] * fs_.u2[sj]) * inv_[sj] + dt_upper(i, j);
    }
    double dt_upper(std::size_t i, std::size_t j) const override {
        const auto ti = idx(i), sj = idx(j);
        return c1_[sj] * fs_.du1[ti] + c2_[sj] * fs_.du2[ti];
    }

private:
    static Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }
    double particular(std::size_t i, std::size_t j) const {
        const auto ti = idx(i), sj = idx(j);
        return (fs_.u1[sj] * fs_.u2[ti] - fs_.u1[ti] * fs_.u2[sj]) * inv_[sj];
    }

    FundamentalSystem fs_;
    Eigen::VectorXd inv_;
    Eigen::VectorXd c1_;
    Eigen::VectorXd c2_;
};

// Kernels printed in closed form, of the shape sum_k A_k exp(r_k (t - s)) on each branch.
struct ExponentialBranch {
    std::array<double, 2> amp;
    std::array<double, 2> rate;

    double value(double d) const { return amp[0] * std::exp(rate[0] * d) + amp[1] * std::exp(rate[1] * d); }
    double slope(double d) const {
        return amp[0] * rate[0] * std::exp(rate[0] * d) + amp[1] * rate[1] * std::exp(rate[1] * d);
    }
};

struct ClosedForm {
    ExponentialBranch lower;  // s <= t
    ExponentialBranch upper;  // t <= s
};

ClosedForm closed_form(ClosedFormId id) {
    const double e = std::exp(1.0);
    switch (id) {
        case ClosedFormId::periodic_xpp_minus_x:
            // 1/2 (e/(1-e) e^{s-t} + 1/(1-e) e^{t-s}) below the diagonal, roles swapped above.
            return ClosedForm{{{0.5 * e / (1.0 - e), 0.5 / (1.0 - e)}, {-1.0, 1.0}},
                              {{0.5 / (1.0 - e), 0.5 * e / (1.0 - e)}, {-1.0, 1.0}}};
        case ClosedFormId::periodic_xpp_xp_x: {
            const double l1 = 0.5 * (std::sqrt(5.0) + 1.0);
            const double l2 = -0.5 * (std::sqrt(5.0) - 1.0);
            const double scale = 1.0 / (l2 - l1);
            const double e1 = std::exp(l1);
            const double e2 = std::exp(l2);
            return ClosedForm{{{-scale / (1.0 - e1), scale / (1.0 - e2)}, {l1, l2}},
                              {{-scale * e1 / (1.0 - e1), scale * e2 / (1.0 - e2)}, {l1, l2}}};
        }
    }
    throw InvalidArgument("unknown closed-form kernel");
}

class ClosedFormBranches final : public KernelBranches {
public:
    ClosedFormBranches(ClosedForm form, Grid grid) : form_(form), grid_(std::move(grid)) {}

    double lower(std::size_t i, std::size_t j) const override { return form_.lower.value(diff(i, j)); }
    double upper(std::size_t i, std::size_t j) const override { return form_.upper.value(diff(i, j)); }
    double dt_lower(std::size_t i, std::size_t j) const override { return form_.lower.slope(diff(i, j)); }
    double dt_upper(std::size_t i, std::size_t j) const override { return form_.upper.slope(diff(i, j)); }

private:
    double diff(std::size_t i, std::size_t j) const { return grid_.node(i) - grid_.node(j); }

    ClosedForm form_;
    Grid grid_;
};

std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Eigen::VectorXd coefficient_samples(const ScalarFunction& f, const Grid& grid) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] = f(grid.node(i));
    }
    return out;
}

}  // namespace

BoundaryConditions BoundaryConditions::periodic() {
    BoundaryConditions bc;
    bc.rows = {{{1.0, 0.0, -1.0, 0.0}, {0.0, 1.0, 0.0, -1.0}}};
    return bc;
}

BoundaryConditions BoundaryConditions::dirichlet(Eigen::VectorXd d1, Eigen::VectorXd d2) {
    BoundaryConditions bc;
    bc.rows = {{{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}}};
    bc.d1 = std::move(d1);
    bc.d2 = std::move(d2);
    return bc;
}

void BoundaryConditions::validate() const {
    Eigen::Matrix<double, 2, 4> block;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 4; ++c) {
            block(r, c) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
        }
    }
    if (!block.allFinite()) {
        throw InvalidArgument("boundary coefficients must be finite");
    }
    Eigen::FullPivLU<Eigen::Matrix<double, 2, 4>> lu(block);
    lu.setThreshold(1e-12);
    if (lu.rank() != 2) {
        throw InvalidArgument("boundary coefficient block must have rank 2");
    }
    if (d1.size() != 0 && d2.size() != 0 && d1.size() != d2.size()) {
        throw InvalidArgument("boundary targets d1 and d2 differ in dimension");
    }
}

bool BoundaryConditions::homogeneous() const {
    return (d1.size() == 0 || d1.isZero(0.0)) && (d2.size() == 0 || d2.isZero(0.0));
}

bool BoundaryConditions::is_periodic() const {
    const auto p = periodic();
    return rows == p.rows;
}

double BoundaryConditions::apply(std::size_t row, double x0, double dx0, double x1, double dx1) const {
    const auto& r = rows.at(row);
    return r[0] * x0 + r[1] * dx0 + r[2] * x1 + r[3] * dx1;
}

Eigen::VectorXd BoundaryConditions::target(std::size_t row, std::size_t dim) const {
    const Eigen::VectorXd& d = row == 0 ? d1 : d2;
    if (d.size() == 0) {
        return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    }
    if (static_cast<std::size_t>(d.size()) != dim) {
        throw InvalidArgument("boundary target dimension does not match the problem dimension");
    }
    return d;
}

FundamentalSystem fundamental_system(const CoefficientSet& coeffs, const Grid& grid) {
    const IvpSolution s1 = solve_ivp2(coeffs, 1.0, 0.0, grid);
    const IvpSolution s2 = solve_ivp2(coeffs, 0.0, 1.0, grid);
    FundamentalSystem fs{grid, s1.y.values.col(0), s1.dy.values.col(0), s2.y.values.col(0), s2.dy.values.col(0),
                         {}};
    fs.wronskian = fs.u1.cwiseProduct(fs.du2) - fs.u2.cwiseProduct(fs.du1);
    for (Eigen::Index i = 0; i < fs.wronskian.size(); ++i) {
        if (!(std::abs(fs.wronskian[i]) >= kDegenerateWronskian)) {
            std::ostringstream msg;
            msg << "Wronskian degenerates at t = " << grid.node(static_cast<std::size_t>(i)) << " (W = "
                << fs.wronskian[i] << ")";
            throw DegenerateWronskian(msg.str());
        }
    }
    return fs;
}

Eigen::Matrix2d boundary_matrix(const FundamentalSystem& fs, const BoundaryConditions& bc) {
    const Eigen::Index n = fs.u1.size() - 1;
    Eigen::Matrix2d m;
    for (std::size_t r = 0; r < 2; ++r) {
        const auto row = static_cast<Eigen::Index>(r);
        m(row, 0) = bc.apply(r, fs.u1[0], fs.du1[0], fs.u1[n], fs.du1[n]);
        m(row, 1) = bc.apply(r, fs.u2[0], fs.du2[0], fs.u2[n], fs.du2[n]);
    }
    return m;
}

double compatibility_determinant(const CoefficientSet& coeffs, const BoundaryConditions& bc, const Grid& grid) {
    bc.validate();
    return boundary_matrix(fundamental_system(coeffs, grid), bc).determinant();
}

std::string_view to_string(KernelRepresentation r) {
    switch (r) {
        case KernelRepresentation::closed_form_periodic_xpp_minus_x:
            return "closed_form_periodic_xpp_minus_x";
        case KernelRepresentation::closed_form_periodic_xpp_xp_x:
            return "closed_form_periodic_xpp_xp_x";
        case KernelRepresentation::numeric:
            return "numeric";
    }
    return "unknown";
}

GreensKernel::GreensKernel(KernelRepresentation rep, Grid grid, CoefficientSet coeffs, BoundaryConditions bc,
                           std::shared_ptr<const KernelBranches> branches)
    : rep_(rep), grid_(std::move(grid)), coeffs_(std::move(coeffs)), bc_(std::move(bc)),
      branches_(std::move(branches)) {
    if (!branches_) {
        throw InvalidArgument("kernel needs branch evaluators");
    }
}

Eigen::MatrixXd GreensKernel::dense() const {
    const auto size = static_cast<Eigen::Index>(grid_.size());
    Eigen::MatrixXd g(size, size);
    for (std::size_t i = 0; i < grid_.size(); ++i) {
        for (std::size_t j = 0; j < grid_.size(); ++j) {
            g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (*this)(i, j);
        }
    }
    return g;
}

GreensKernel build_greens(const CoefficientSet& coeffs, const BoundaryConditions& bc, const Grid& grid) {
    bc.validate();
    FundamentalSystem fs = fundamental_system(coeffs, grid);
    const Eigen::Matrix2d m = boundary_matrix(fs, bc);
    const double det = m.determinant();
    if (!(std::abs(det) >= kIncompatibilityThreshold)) {
        std::ostringstream msg;
        msg << "completely homogeneous problem has a nontrivial solution: det [B_i u_j] = " << det;
        throw IncompatibleProblem(msg.str(), det);
    }

    const auto size = static_cast<Eigen::Index>(grid.size());
    const Eigen::Index n = size - 1;
    const Eigen::VectorXd a2 = coefficient_samples(coeffs.a2, grid);
    const Eigen::VectorXd inv = (a2.cwiseProduct(fs.wronskian)).cwiseInverse();

    // Boundary correction: [B_i u_j] c(s) = -(B_1 K(., s), B_2 K(., s)); K vanishes with its slope at t = 0.
    const Eigen::Matrix2d minv = m.inverse();
    Eigen::VectorXd c1(size), c2(size);
    for (Eigen::Index j = 0; j < size; ++j) {
        const double k1 = (fs.u1[j] * fs.u2[n] - fs.u1[n] * fs.u2[j]) * inv[j];
        const double dk1 = (fs.u1[j] * fs.du2[n] - fs.du1[n] * fs.u2[j]) * inv[j];
        Eigen::Vector2d rhs;
        rhs[0] = -bc.apply(0, 0.0, 0.0, k1, dk1);
        rhs[1] = -bc.apply(1, 0.0, 0.0, k1, dk1);
        const Eigen::Vector2d c = minv * rhs;
        c1[j] = c[0];
        c2[j] = c[1];
    }
    auto branches = std::make_shared<NumericBranches>(std::move(fs), inv, std::move(c1), std::move(c2));
    return GreensKernel(KernelRepresentation::numeric, grid, coeffs, bc, std::move(branches));
}

ClosedFormId parse_closed_form_id(std::string_view id) {
    if (id == "periodic_xpp_minus_x") {
        return ClosedFormId::periodic_xpp_minus_x;
    }
    if (id == "periodic_xpp_xp_x") {
        return ClosedFormId::periodic_xpp_xp_x;
    }
    throw InvalidArgument("unknown closed-form kernel id: " + std::string(id));
}

GreensKernel closed_form_kernel(ClosedFormId id, const Grid& grid) {
    const bool first = id == ClosedFormId::periodic_xpp_minus_x;
    auto coeffs = first ? CoefficientSet::constant(1.0, 0.0, -1.0) : CoefficientSet::constant(1.0, -1.0, -1.0);
    auto rep = first ? KernelRepresentation::closed_form_periodic_xpp_minus_x
                     : KernelRepresentation::closed_form_periodic_xpp_xp_x;
    return GreensKernel(rep, grid, std::move(coeffs), BoundaryConditions::periodic(),
                        std::make_shared<ClosedFormBranches>(closed_form(id), grid));
}

GreensKernel closed_form_kernel(std::string_view id, const Grid& grid) {
    return closed_form_kernel(parse_closed_form_id(id), grid);
}

double closed_form_value(ClosedFormId id, double t, double s) {
    const ClosedForm f = closed_form(id);
    return s <= t ? f.lower.value(t - s) : f.upper.value(t - s);
}

Lift homogeneous_lift(const CoefficientSet& coeffs, const BoundaryConditions& bc, const Grid& grid,
                      std::size_t dim) {
    bc.validate();
    if (dim == 0) {
        throw InvalidArgument("lift dimension must be positive");
    }
    const Eigen::VectorXd d1 = bc.target(0, dim);
    const Eigen::VectorXd d2 = bc.target(1, dim);
    Lift lift{SampledFunction(grid, dim), SampledFunction(grid, dim)};
    if (d1.isZero(0.0) && d2.isZero(0.0)) {
        return lift;
    }
    const FundamentalSystem fs = fundamental_system(coeffs, grid);
    const Eigen::Matrix2d m = boundary_matrix(fs, bc);
    const double det = m.determinant();
    if (!(std::abs(det) >= kIncompatibilityThreshold)) {
        std::ostringstream msg;
        msg << "completely homogeneous problem has a nontrivial solution: det [B_i u_j] = " << det;
        throw IncompatibleProblem(msg.str(), det);
    }
    Eigen::Matrix<double, 2, Eigen::Dynamic> targets(2, static_cast<Eigen::Index>(dim));
    targets.row(0) = d1.transpose();
    targets.row(1) = d2.transpose();
    const Eigen::Matrix<double, 2, Eigen::Dynamic> alpha = m.inverse() * targets;
    lift.h.values = fs.u1 * alpha.row(0) + fs.u2 * alpha.row(1);
    lift.dh.values = fs.du1 * alpha.row(0) + fs.du2 * alpha.row(1);
    return lift;
}

KernelNorms kernel_norms(const GreensKernel& kernel) {
    const Grid& grid = kernel.grid();
    const std::size_t n = grid.intervals();
    const Eigen::VectorXd a2 = coefficient_samples(kernel.coefficients().a2, grid);
    const Eigen::VectorXd a1 = coefficient_samples(kernel.coefficients().a1, grid);
    const Eigen::VectorXd a0 = coefficient_samples(kernel.coefficients().a0, grid);

    KernelNorms out;
    Eigen::VectorXd dt2_rows(static_cast<Eigen::Index>(n + 1));
    for (std::size_t i = 0; i <= n; ++i) {
        const Eigen::VectorXd wl = grid.segment_weights(0, i);
        const Eigen::VectorXd wu = grid.segment_weights(i, n);
        const auto ii = static_cast<Eigen::Index>(i);
        double g2 = 0.0, gt2 = 0.0, gtt2 = 0.0;
        for (std::size_t j = 0; j <= n; ++j) {
            const double g = kernel(i, j);
            out.sup_abs = std::max(out.sup_abs, std::abs(g));
            if (j <= i) {
                const double w = wl[static_cast<Eigen::Index>(j)];
                const double gl = kernel.lower(i, j);
                const double dl = kernel.dt_lower(i, j);
                const double ddl = -(a1[ii] * dl + a0[ii] * gl) / a2[ii];
                g2 += w * gl * gl;
                gt2 += w * dl * dl;
                gtt2 += w * ddl * ddl;
            }
            if (j >= i) {
                const double w = wu[static_cast<Eigen::Index>(j - i)];
                const double gu = kernel.upper(i, j);
                const double du = kernel.dt_upper(i, j);
                const double ddu = -(a1[ii] * du + a0[ii] * gu) / a2[ii];
                g2 += w * gu * gu;
                gt2 += w * du * du;
                gtt2 += w * ddu * ddu;
            }
        }
        out.sup_l2_rows = std::max(out.sup_l2_rows, std::sqrt(g2));
        out.sup_l2_rows_dt = std::max(out.sup_l2_rows_dt, std::sqrt(gt2));
        dt2_rows[ii] = gtt2;
    }
    out.l2_of_l2_dt2 = std::sqrt(quadrature(grid, dt2_rows));
    return out;
}

KernelDiagnostics validate_kernel(const GreensKernel& kernel, std::size_t band) {
    const Grid& grid = kernel.grid();
    const std::size_t n = grid.intervals();
    const double h = grid.step();
    const auto& coeffs = kernel.coefficients();
    const auto& bc = kernel.boundary();

    KernelDiagnostics d;
    for (std::size_t i = 0; i <= n; ++i) {
        d.diagonal_gap = std::max(d.diagonal_gap, std::abs(kernel.lower(i, i) - kernel.upper(i, i)));
    }
    for (std::size_t j = 1; j < n; ++j) {
        const double jump = kernel.dt_lower(j, j) - kernel.dt_upper(j, j);
        d.jump_error = std::max(d.jump_error, std::abs(jump - 1.0 / coeffs.a2(grid.node(j))));
        for (std::size_t r = 0; r < 2; ++r) {
            const double b = bc.apply(r, kernel.upper(0, j), kernel.dt_upper(0, j), kernel.lower(n, j),
                                      kernel.dt_lower(n, j));
            d.bc_residual = std::max(d.bc_residual, std::abs(b));
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        const double t = grid.node(i);
        const double a2 = coeffs.a2(t), a1 = coeffs.a1(t), a0 = coeffs.a0(t);
        for (std::size_t j = 0; j <= n; ++j) {
            const std::size_t gap = i > j ? i - j : j - i;
            if (gap < band) {
                continue;
            }
            const bool low = j < i;
            auto value = [&](std::size_t k) { return low ? kernel.lower(k, j) : kernel.upper(k, j); };
            const double g = value(i);
            const double gtt = (value(i + 1) - 2.0 * g + value(i - 1)) / (h * h);
            const double gt = low ? kernel.dt_lower(i, j) : kernel.dt_upper(i, j);
            d.ode_residual = std::max(d.ode_residual, std::abs(a2 * gtt + a1 * gt + a0 * g));
        }
    }
    return d;
}

double max_kernel_difference(const GreensKernel& a, const GreensKernel& b) {
    if (!(a.grid() == b.grid())) {
        throw InvalidArgument("kernels live on different grids");
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < a.grid().size(); ++i) {
        for (std::size_t j = 0; j < a.grid().size(); ++j) {
            diff = std::max(diff, std::abs(a(i, j) - b(i, j)));
        }
    }
    return diff;
}

void write_kernel_csv(const GreensKernel& kernel, std::ostream& out) {
    const Grid& grid = kernel.grid();
    for (std::size_t j = 0; j < grid.size(); ++j) {
        out << (j ? "," : "") << format17(grid.node(j));
    }
    out << '\n';
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t j = 0; j < grid.size(); ++j) {
            out << (j ? "," : "") << format17(kernel(i, j));
        }
        out << '\n';
    }
}

}  // namespace greenbvp
