#include "greenbvp/hammerstein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
    if (!(a == b)) {
        throw InvalidArgument(std::string(what) + ": grids do not match");
    }
}

double l1_of(const Grid& grid, const ScalarFunction& f) {
    Eigen::VectorXd v(idx(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        v[idx(i)] = std::abs(f(grid.node(i)));
    }
    return quadrature(grid, v);
}

double l2_of(const Grid& grid, const ScalarFunction& f) {
    Eigen::VectorXd v(idx(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = f(grid.node(i));
        v[idx(i)] = s * s;
    }
    return std::sqrt(quadrature(grid, v));
}

ConditionResult make_condition(std::string id, double lhs) {
    ConditionResult c;
    c.id = std::move(id);
    c.lhs = lhs;
    c.rhs = 1.0;
    c.margin = 1.0 - lhs;
    c.pass = lhs < 1.0;
    c.evaluable = true;
    return c;
}

ConditionResult not_evaluable(std::string id) {
    ConditionResult c;
    c.id = std::move(id);
    c.lhs = std::nan("");
    c.margin = std::nan("");
    return c;
}

Eigen::VectorXd boundary_values(const BoundaryConditions& bc, std::size_t row, const SampledFunction& x,
                                const SampledFunction& dx) {
    const Eigen::Index n = x.values.rows() - 1;
    Eigen::VectorXd out(x.values.cols());
    for (Eigen::Index c = 0; c < x.values.cols(); ++c) {
        out[c] = bc.apply(row, x.values(0, c), dx.values(0, c), x.values(n, c), dx.values(n, c));
    }
    return out;
}

double boundary_residual(const BoundaryConditions& bc, const SampledFunction& x, const SampledFunction& dx) {
    double r = 0.0;
    for (std::size_t row = 0; row < 2; ++row) {
        r += (boundary_values(bc, row, x, dx) - bc.target(row, x.dim())).norm();
    }
    return r;
}

SampledFunction apply_operator(const CoefficientSet& coeffs, const SampledFunction& x, const SampledFunction& dx) {
    const SampledFunction ddx = fd_second_derivative(x);
    SampledFunction out(x.grid, x.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.grid.node(i);
        out.values.row(idx(i)) = coeffs.a2(t) * ddx.values.row(idx(i)) + coeffs.a1(t) * dx.values.row(idx(i)) +
                                 coeffs.a0(t) * x.values.row(idx(i));
    }
    return out;
}

}  // namespace

RightHandSide RightHandSide::single(std::size_t dim, VectorField f0) {
    RightHandSide r;
    r.kind = RhsKind::single;
    r.dim = dim;
    r.f0 = std::move(f0);
    return r;
}

RightHandSide RightHandSide::box(std::size_t dim, VectorField f0, StateScalar rho) {
    RightHandSide r;
    r.kind = RhsKind::box;
    r.dim = dim;
    r.f0 = std::move(f0);
    r.rho = std::move(rho);
    return r;
}

void RightHandSide::validate() const {
    if (dim == 0) {
        throw InvalidArgument("right-hand side dimension must be positive");
    }
    if (!f0) {
        throw InvalidArgument("right-hand side needs f0");
    }
    if (kind == RhsKind::box && !rho) {
        throw InvalidArgument("box-valued right-hand side needs a radius function");
    }
    if (growth && (!growth->c || growth->m < 0.0)) {
        throw InvalidArgument("growth metadata needs c and m >= 0");
    }
}

Eigen::VectorXd RightHandSide::center(double t, const Eigen::VectorXd& x) const {
    Eigen::VectorXd v = f0(t, x);
    if (static_cast<std::size_t>(v.size()) != dim) {
        throw InvalidArgument("f0 returned a vector of the wrong dimension");
    }
    return v;
}

double RightHandSide::radius(double t, const Eigen::VectorXd& x) const {
    if (kind == RhsKind::single) {
        return 0.0;
    }
    const double r = rho(t, x);
    if (r < 0.0) {
        throw InvalidArgument("box radius must be nonnegative");
    }
    return r;
}

Eigen::VectorXd RightHandSide::nearest(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
    const Eigen::VectorXd c = center(t, x);
    const double r = radius(t, x);
    if (r == 0.0) {
        return c;
    }
    return (v - c).cwiseMax(-r).cwiseMin(r) + c;
}

double RightHandSide::distance(double t, const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
    return (v - nearest(t, x, v)).norm();
}

MetadataAudit probe_metadata(const RightHandSide& rhs, std::size_t samples, std::uint64_t seed,
                             double state_radius) {
    rhs.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> state(-state_radius, state_radius);
    auto draw = [&] {
        Eigen::VectorXd v(idx(rhs.dim));
        for (auto& c : v) {
            c = state(rng);
        }
        return v;
    };
    const double root_n = std::sqrt(static_cast<double>(rhs.dim));
    MetadataAudit audit;
    if (rhs.growth) {
        audit.growth_excess = -std::numeric_limits<double>::infinity();
    }
    if (rhs.lipschitz) {
        audit.lipschitz_excess = -std::numeric_limits<double>::infinity();
    }
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = unit(rng);
        const Eigen::VectorXd x = draw();
        const Eigen::VectorXd y = draw();
        if (rhs.growth) {
            const double size = rhs.center(t, x).norm() + root_n * rhs.radius(t, x);
            const double excess = size - (rhs.growth->c(t) + rhs.growth->m * x.norm());
            audit.growth_excess = std::max(*audit.growth_excess, excess);
        }
        if (rhs.lipschitz) {
            const double spread = (rhs.center(t, x) - rhs.center(t, y)).norm() +
                                   root_n * std::abs(rhs.radius(t, x) - rhs.radius(t, y));
            const double excess = spread - (*rhs.lipschitz)(t) * (x - y).norm();
            audit.lipschitz_excess = std::max(*audit.lipschitz_excess, excess);
        }
    }
    return audit;
}

SampledFunction nemytskii(const RightHandSide& rhs, const SampledFunction& x, const SelectionSpec& selection) {
    rhs.validate();
    if (x.dim() != rhs.dim) {
        throw InvalidArgument("nemytskii: state dimension does not match the right-hand side");
    }
    SampledFunction w(x.grid, rhs.dim);
    std::mt19937_64 rng(0);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    if (const auto* r = std::get_if<RandomSelection>(&selection)) {
        rng.seed(r->seed);
    }
    const auto* near = std::get_if<NearestSelection>(&selection);
    if (near) {
        require_same_grid(near->target.grid, x.grid, "nemytskii");
        if (near->target.dim() != rhs.dim) {
            throw InvalidArgument("nemytskii: nearest-to target has the wrong dimension");
        }
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.grid.node(i);
        const Eigen::VectorXd xi = x.at(i);
        Eigen::VectorXd wi;
        if (near) {
            wi = rhs.nearest(t, xi, near->target.at(i));
        } else {
            wi = rhs.center(t, xi);
            if (std::holds_alternative<RandomSelection>(selection)) {
                const double r = rhs.radius(t, xi);
                for (auto& c : wi) {
                    c += r * coeff(rng);
                }
            }
        }
        w.values.row(idx(i)) = wi.transpose();
    }
    return w;
}

HammersteinOperator::HammersteinOperator(GreensKernel kernel) : kernel_(std::move(kernel)) {
    const Grid& grid = kernel_.grid();
    const std::size_t n = grid.intervals();
    value_ = Eigen::MatrixXd::Zero(idx(n + 1), idx(n + 1));
    derivative_ = Eigen::MatrixXd::Zero(idx(n + 1), idx(n + 1));
    // A single-interval branch segment would fall back to the trapezoid rule, whose
    // O(h^3) error shows up as O(h) in second differences of Hu. Those segments use
    // the cubic through four nodes instead, reaching past the diagonal on the
    // smooth extension of the branch.
    const double h = grid.step();
    const std::array<double, 4> one_step{9.0 * h / 24.0, 19.0 * h / 24.0, -5.0 * h / 24.0, h / 24.0};
    for (std::size_t i = 0; i <= n; ++i) {
        if (i == 1) {
            for (std::size_t j = 0; j < 4; ++j) {
                value_(1, idx(j)) += one_step[j] * kernel_.lower(1, j);
                derivative_(1, idx(j)) += one_step[j] * kernel_.dt_lower(1, j);
            }
        } else {
            const Eigen::VectorXd wl = grid.segment_weights(0, i);
            for (std::size_t j = 0; j <= i; ++j) {
                value_(idx(i), idx(j)) += wl[idx(j)] * kernel_.lower(i, j);
                derivative_(idx(i), idx(j)) += wl[idx(j)] * kernel_.dt_lower(i, j);
            }
        }
        if (i == n - 1) {
            for (std::size_t k = 0; k < 4; ++k) {
                value_(idx(i), idx(n - k)) += one_step[k] * kernel_.upper(i, n - k);
                derivative_(idx(i), idx(n - k)) += one_step[k] * kernel_.dt_upper(i, n - k);
            }
        } else {
            const Eigen::VectorXd wu = grid.segment_weights(i, n);
            for (std::size_t j = i; j <= n; ++j) {
                value_(idx(i), idx(j)) += wu[idx(j - i)] * kernel_.upper(i, j);
                derivative_(idx(i), idx(j)) += wu[idx(j - i)] * kernel_.dt_upper(i, j);
            }
        }
        for (std::size_t j = 0; j <= n; ++j) {
            sup_abs_ = std::max(sup_abs_, std::abs(kernel_(i, j)));
        }
    }
}

HammersteinOperator::Result HammersteinOperator::apply(const SampledFunction& u) const {
    require_same_grid(u.grid, kernel_.grid(), "apply_H");
    return Result{SampledFunction(u.grid, Eigen::MatrixXd(value_ * u.values)),
                  SampledFunction(u.grid, Eigen::MatrixXd(derivative_ * u.values))};
}

HammersteinOperator::Result apply_H(const GreensKernel& kernel, const SampledFunction& u) {
    return HammersteinOperator(kernel).apply(u);
}

const ConditionResult& ConditionReport::get(std::string_view id) const {
    for (const auto& c : conditions) {
        if (c.id == id) {
            return c;
        }
    }
    throw InvalidArgument("unknown condition id: " + std::string(id));
}

bool ConditionReport::all_pass() const {
    return std::all_of(conditions.begin(), conditions.end(),
                       [](const ConditionResult& c) { return !c.evaluable || c.pass; });
}

ConditionReport check_conditions(const KernelNorms& norms, const RightHandSide& rhs, const Grid& grid) {
    rhs.validate();
    ConditionReport report;
    report.m_threshold = 1.0 / norms.sup_l2_rows;
    report.eta_threshold = 0.5 / norms.sup_l2_rows;
    report.mu_threshold = 1.0 / norms.sup_abs;

    if (rhs.growth) {
        report.conditions.push_back(make_condition("sublinear_growth", rhs.growth->m * norms.sup_l2_rows));
    } else {
        report.conditions.push_back(not_evaluable("sublinear_growth"));
    }
    if (rhs.eta) {
        report.conditions.push_back(make_condition("eta_norm", 2.0 * norms.sup_l2_rows * l2_of(grid, *rhs.eta)));
    } else {
        report.conditions.push_back(not_evaluable("eta_norm"));
    }
    if (rhs.growth) {
        report.conditions.push_back(
            make_condition("perturbed_growth", (rhs.growth->m + 1.0) * norms.sup_l2_rows));
    } else {
        report.conditions.push_back(not_evaluable("perturbed_growth"));
    }
    if (rhs.lipschitz) {
        const double q = l1_of(grid, *rhs.lipschitz) * norms.sup_abs;
        report.contraction_q = q;
        report.conditions.push_back(make_condition("lipschitz_l1", q));
    } else {
        report.conditions.push_back(not_evaluable("lipschitz_l1"));
    }
    return report;
}

AprioriBounds apriori_bounds(const KernelNorms& norms, const RightHandSide& rhs, const Grid& grid, double lift_sup,
                             double lift_dsup) {
    rhs.validate();
    if (!rhs.growth) {
        throw InvalidArgument("a-priori bounds need declared growth metadata (c, m)");
    }
    const double m = rhs.growth->m;
    const double contraction = m * norms.sup_l2_rows;
    if (!(contraction < 1.0)) {
        std::ostringstream msg;
        msg << "a-priori bound undefined: m sup ||G(t,.)||_2 = " << contraction << " >= 1";
        throw ConditionViolation(msg.str());
    }
    AprioriBounds b;
    const double c_l2 = l2_of(grid, rhs.growth->c);
    b.sup_norm_bound = (lift_sup + norms.sup_l2_rows * c_l2) / (1.0 - contraction);
    const double bound = b.sup_norm_bound;
    const auto& c = rhs.growth->c;
    const double c_hat = l2_of(grid, [&](double t) { return c(t) + m * bound; });
    b.c1_bound = lift_sup + lift_dsup + c_hat * (norms.sup_l2_rows + norms.sup_l2_rows_dt);
    return b;
}

Lift zero_lift(const Grid& grid, std::size_t dim) { return Lift{SampledFunction(grid, dim), SampledFunction(grid, dim)}; }

Solution picard_solve(const HammersteinOperator& op, const Lift& lift, const RightHandSide& rhs,
                      const SelectionSpec& start, const PicardOptions& options) {
    rhs.validate();
    const Grid& grid = op.kernel().grid();
    require_same_grid(lift.h.grid, grid, "picard_solve");
    if (lift.h.dim() != rhs.dim || lift.dh.dim() != rhs.dim) {
        throw InvalidArgument("picard_solve: lift dimension does not match the right-hand side");
    }
    if (!(options.tol > 0.0) || options.max_iter == 0) {
        throw InvalidArgument("picard_solve: tol must be positive and max_iter nonzero");
    }

    std::optional<double> q;
    if (rhs.lipschitz) {
        q = l1_of(grid, *rhs.lipschitz) * op.sup_abs();
    }

    SampledFunction w = options.initial ? *options.initial : nemytskii(rhs, lift.h, start);
    require_same_grid(w.grid, grid, "picard_solve");
    if (w.dim() != rhs.dim) {
        throw InvalidArgument("picard_solve: initial selection has the wrong dimension");
    }

    std::vector<double> increments;
    bool converged = false;
    std::size_t iter = 0;
    SampledFunction next(grid, rhs.dim);
    while (iter < options.max_iter) {
        ++iter;
        const Eigen::MatrixXd x = lift.h.values + op.value_matrix() * w.values;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            next.values.row(idx(i)) =
                rhs.nearest(grid.node(i), x.row(idx(i)).transpose(), w.values.row(idx(i)).transpose()).transpose();
        }
        const double inc = lp_norms(next - w).l1;
        increments.push_back(inc);
        if (!std::isfinite(inc) || !next.values.allFinite()) {
            throw DivergenceError("picard iteration produced non-finite values", increments);
        }
        std::swap(w, next);
        if (inc <= options.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "picard iteration did not reach tol = " << options.tol << " within " << options.max_iter
            << " iterations (last increment " << increments.back() << ")";
        throw DivergenceError(msg.str(), increments);
    }

    const auto hw = op.apply(w);
    Solution sol{lift.h + hw.value, lift.dh + hw.derivative, w, 0.0, 0.0, iter, std::move(increments), true,
                 q && *q < 1.0, q};
    const auto& coeffs = op.kernel().coefficients();
    sol.residual_ode = lp_norms(apply_operator(coeffs, sol.x, sol.dx) - sol.w).l1;
    sol.residual_bc = boundary_residual(op.kernel().boundary(), sol.x, sol.dx);
    return sol;
}

double max_increment_ratio(const std::vector<double>& increments, double floor) {
    double ratio = 0.0;
    for (std::size_t k = 1; k < increments.size(); ++k) {
        if (increments[k - 1] > floor && increments[k] > floor) {
            ratio = std::max(ratio, increments[k] / increments[k - 1]);
        }
    }
    return ratio;
}

SampledFunction fd_first_derivative(const SampledFunction& x) {
    const Eigen::Index n = x.values.rows() - 1;
    const double h = x.grid.step();
    SampledFunction d(x.grid, x.dim());
    const auto& v = x.values;
    d.values.row(0) = (-3.0 * v.row(0) + 4.0 * v.row(1) - v.row(2)) / (2.0 * h);
    for (Eigen::Index i = 1; i < n; ++i) {
        d.values.row(i) = (v.row(i + 1) - v.row(i - 1)) / (2.0 * h);
    }
    d.values.row(n) = (3.0 * v.row(n) - 4.0 * v.row(n - 1) + v.row(n - 2)) / (2.0 * h);
    return d;
}

SampledFunction fd_second_derivative(const SampledFunction& x) {
    const Eigen::Index n = x.values.rows() - 1;
    const double h2 = x.grid.step() * x.grid.step();
    SampledFunction d(x.grid, x.dim());
    const auto& v = x.values;
    d.values.row(0) = (2.0 * v.row(0) - 5.0 * v.row(1) + 4.0 * v.row(2) - v.row(3)) / h2;
    for (Eigen::Index i = 1; i < n; ++i) {
        d.values.row(i) = (v.row(i + 1) - 2.0 * v.row(i) + v.row(i - 1)) / h2;
    }
    d.values.row(n) = (2.0 * v.row(n) - 5.0 * v.row(n - 1) + 4.0 * v.row(n - 2) - v.row(n - 3)) / h2;
    return d;
}

SampledFunction fd_oracle(const CoefficientSet& coeffs, const BoundaryConditions& bc, const LinearRhs& rhs,
                          const Grid& grid) {
    coeffs.validate(grid);
    bc.validate();
    require_same_grid(rhs.g.grid, grid, "fd_oracle");
    const std::size_t dim = rhs.g.dim();
    const Eigen::Index n = idx(grid.intervals());
    const double h = grid.step();

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(3 * n + 8));
    auto boundary_row = [&](Eigen::Index row, std::size_t which) {
        const auto& r = bc.rows[which];
        // x'(0) ~ (-3 x0 + 4 x1 - x2) / 2h, x'(1) ~ (3 xn - 4 x_{n-1} + x_{n-2}) / 2h
        entries.emplace_back(row, 0, r[0] - 3.0 * r[1] / (2.0 * h));
        entries.emplace_back(row, 1, 4.0 * r[1] / (2.0 * h));
        entries.emplace_back(row, 2, -r[1] / (2.0 * h));
        entries.emplace_back(row, n, r[2] + 3.0 * r[3] / (2.0 * h));
        entries.emplace_back(row, n - 1, -4.0 * r[3] / (2.0 * h));
        entries.emplace_back(row, n - 2, r[3] / (2.0 * h));
    };
    boundary_row(0, 0);
    for (Eigen::Index i = 1; i < n; ++i) {
        const double t = grid.node(static_cast<std::size_t>(i));
        const double a2 = coeffs.a2(t), a1 = coeffs.a1(t), a0 = coeffs.a0(t) - rhs.lambda;
        entries.emplace_back(i, i - 1, a2 / (h * h) - a1 / (2.0 * h));
        entries.emplace_back(i, i, -2.0 * a2 / (h * h) + a0);
        entries.emplace_back(i, i + 1, a2 / (h * h) + a1 / (2.0 * h));
    }
    boundary_row(n, 1);

    Eigen::SparseMatrix<double> a(n + 1, n + 1);
    a.setFromTriplets(entries.begin(), entries.end());
    a.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) {
        throw IncompatibleProblem("finite-difference system is singular", 0.0);
    }
    Eigen::MatrixXd b = rhs.g.values;
    b.row(0) = bc.target(0, dim).transpose();
    b.row(n) = bc.target(1, dim).transpose();
    Eigen::MatrixXd x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite()) {
        throw IncompatibleProblem("finite-difference system is singular", 0.0);
    }
    return SampledFunction(grid, std::move(x));
}

Residuals residual_check(const CoefficientSet& coeffs, const BoundaryConditions& bc, const RightHandSide& rhs,
                         const SampledFunction& x, const SampledFunction* dx) {
    rhs.validate();
    if (x.dim() != rhs.dim) {
        throw InvalidArgument("residual_check: state dimension does not match the right-hand side");
    }
    const SampledFunction slope = dx ? *dx : fd_first_derivative(x);
    // Interior slopes always come from the same differences so the check stays independent of the kernel.
    const SampledFunction lx = apply_operator(coeffs, x, fd_first_derivative(x));
    Residuals r;
    SampledFunction gap(x.grid, rhs.dim);
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = x.grid.node(i);
        const Eigen::VectorXd li = lx.at(i);
        const Eigen::VectorXd proj = rhs.nearest(t, x.at(i), li);
        gap.values.row(idx(i)) = (li - proj).transpose();
        r.selection_gap = std::max(r.selection_gap, (li - proj).norm());
    }
    r.ode = lp_norms(gap).l1;
    r.bc = boundary_residual(bc, x, slope);
    return r;
}

}  // namespace greenbvp
