#include "greenbvp/funnel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "greenbvp/error.hpp"

namespace greenbvp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kUniquenessSpread = 1e-6;

Eigen::Index idx(std::size_t k) { return static_cast<Eigen::Index>(k); }

double l2_of(const Grid& grid, const ScalarFunction& f) {
    Eigen::VectorXd v(idx(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double s = f(grid.node(i));
        v[idx(i)] = s * s;
    }
    return std::sqrt(quadrature(grid, v));
}

double c1_distance(const Solution& a, const Solution& b) { return c1_norm(a.x - b.x, a.dx - b.dx); }

double max_pairwise(const std::vector<Solution>& members) {
    double d = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i) {
        for (std::size_t j = i + 1; j < members.size(); ++j) {
            d = std::max(d, c1_distance(members[i], members[j]));
        }
    }
    return d;
}

SampledFunction uniform_field(const Grid& grid, std::size_t dim, double amplitude, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-amplitude, amplitude);
    SampledFunction f(grid, dim);
    for (auto& v : f.values.reshaped()) {
        v = u(rng);
    }
    return f;
}

TrigPolynomial random_trig(std::size_t degree, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    TrigPolynomial p;
    p.c0 = u(rng);
    for (std::size_t k = 0; k < degree; ++k) {
        p.a.push_back(u(rng));
        p.b.push_back(u(rng));
    }
    return p;
}

}  // namespace

PerturbedProblem perturb(const RightHandSide& rhs, std::size_t n, const KernelNorms& norms, const Grid& grid) {
    rhs.validate();
    if (n == 0) {
        throw InvalidArgument("perturbation index n must be positive");
    }
    const double inv = 1.0 / static_cast<double>(n);
    PerturbedProblem pp;
    pp.base = rhs;
    pp.n = n;
    pp.rhs = rhs;
    pp.rhs.f0 = [f0 = rhs.f0, inv](double t, const Eigen::VectorXd& x) { return Eigen::VectorXd(f0(t, x) + inv * x); };
    if (rhs.lipschitz) {
        pp.rhs.lipschitz = [mu = *rhs.lipschitz, inv](double t) { return mu(t) + inv; };
    }
    if (rhs.alpha) {
        pp.rhs.alpha = [alpha = *rhs.alpha, inv](double t) { return alpha(t) + inv; };
    } else if (rhs.accretive) {
        pp.rhs.alpha = [inv](double) { return inv; };
    }
    if (rhs.growth) {
        const double m = rhs.growth->m;
        const double s = norms.sup_l2_rows;
        if (!((m + 1.0) * s < 1.0)) {
            std::ostringstream msg;
            msg << "perturbation scheme needs (m + 1) sup ||G(t,.)||_2 < 1, got " << (m + 1.0) * s;
            throw ConditionViolation(msg.str());
        }
        pp.rhs.growth->m = m + inv;
        const auto& c = rhs.growth->c;
        const double r1 = (1.0 + s * l2_of(grid, c)) / (1.0 - (m + 1.0) * s);
        const double c_hat = l2_of(grid, [&](double t) { return c(t) + (m + 1.0) * r1; });
        pp.bound_R = r1 + 1.0 + norms.sup_l2_rows_dt * c_hat;
        pp.eps_n = (norms.sup_abs + norms.sup_l2_rows_dt) * *pp.bound_R * inv;
    }
    return pp;
}

PerturbedSolve solve_perturbed(const PerturbedProblem& pp, const HammersteinOperator& op, const Lift& h,
                               std::size_t starts, std::uint64_t seed, const PicardOptions& options) {
    if (pp.base.kind != RhsKind::single || !pp.base.accretive) {
        throw InvalidArgument("solve_perturbed needs a single-valued right-hand side marked accretive");
    }
    if (starts == 0) {
        throw InvalidArgument("solve_perturbed needs at least one start");
    }
    if (pp.eps_n) {
        const double size = c1_norm(h.h, h.dh);
        if (size > *pp.eps_n) {
            std::ostringstream msg;
            msg << "lift has C^1 norm " << size << " > eps_n = " << *pp.eps_n;
            throw InvalidArgument(msg.str());
        }
    }
    const Grid& grid = op.kernel().grid();
    std::mt19937_64 rng(seed);
    std::vector<Solution> runs;
    std::size_t diverged = 0;
    std::vector<double> last_increments;
    for (std::size_t k = 0; k < starts; ++k) {
        PicardOptions opt = options;
        opt.initial = uniform_field(grid, pp.rhs.dim, 0.5, rng);
        try {
            runs.push_back(picard_solve(op, h, pp.rhs, CenterSelection{}, opt));
        } catch (const DivergenceError& e) {
            ++diverged;
            last_increments = e.increments();
        }
    }
    if (runs.empty()) {
        throw DivergenceError("every start of the perturbed problem diverged", std::move(last_increments));
    }
    const auto best = std::min_element(runs.begin(), runs.end(), [](const Solution& a, const Solution& b) {
        return a.residual_ode < b.residual_ode;
    });
    return PerturbedSolve{*best, max_pairwise(runs), runs.size(), diverged};
}

bool SchemeReport::all_ok() const {
    return std::all_of(steps.begin(), steps.end(), [](const SchemeStep& s) { return s.gap_ok && s.unique_ok; });
}

SchemeReport perturbation_scheme(const RightHandSide& rhs, const HammersteinOperator& op,
                                 const std::vector<std::size_t>& n_list, double tol, std::uint64_t seed,
                                 std::size_t starts) {
    rhs.validate();
    if (rhs.kind != RhsKind::single || !rhs.accretive) {
        throw InvalidArgument("the perturbation scheme needs a single-valued right-hand side marked accretive");
    }
    const Grid& grid = op.kernel().grid();
    const auto norms = kernel_norms(op.kernel());
    const auto conditions = check_conditions(norms, rhs, grid);
    for (const char* id : {"eta_norm", "perturbed_growth"}) {
        const auto& c = conditions.get(id);
        if (c.evaluable && !c.pass) {
            throw ConditionViolation(std::string("condition ") + id + " fails");
        }
    }

    SchemeReport report;
    report.bound_R = perturb(rhs, 1, norms, grid).bound_R;

    // Random points of the C^1 ball of radius R (radius 1 when R is unknown).
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = report.bound_R.value_or(1.0);
    std::vector<SampledFunction> samples;
    for (int k = 0; k < 20; ++k) {
        std::vector<TrigPolynomial> parts;
        for (std::size_t c = 0; c < rhs.dim; ++c) {
            parts.push_back(random_trig(3, rng));
        }
        SampledFunction x(grid, rhs.dim), dx(grid, rhs.dim);
        for (std::size_t i = 0; i < grid.size(); ++i) {
            for (std::size_t c = 0; c < rhs.dim; ++c) {
                x.values(idx(i), idx(c)) = parts[c].value(grid.node(i));
                dx.values(idx(i), idx(c)) = parts[c].d1(grid.node(i));
            }
        }
        x *= radius * unit(rng) / c1_norm(x, dx);
        samples.push_back(std::move(x));
    }

    for (std::size_t n : n_list) {
        SchemeStep step;
        step.n = n;
        const auto pp = perturb(rhs, n, norms, grid);
        step.eps_n = pp.eps_n;
        for (const auto& x : samples) {
            const auto gap = op.apply((1.0 / static_cast<double>(n)) * x);
            step.max_gap = std::max(step.max_gap, c1_norm(gap.value, gap.derivative));
        }
        if (step.eps_n) {
            step.gap_ok = step.max_gap <= *step.eps_n;
        } else {
            step.note = "eps_n unavailable without growth metadata";
        }
        PicardOptions opt;
        opt.tol = tol;
        try {
            const auto solved = solve_perturbed(pp, op, zero_lift(grid, rhs.dim), starts, seed + n, opt);
            step.spread = solved.uniqueness_spread;
            step.converged = solved.converged;
            step.unique_ok = solved.converged >= 2 && solved.uniqueness_spread <= kUniquenessSpread;
            if (solved.diverged > 0) {
                step.note += (step.note.empty() ? "" : "; ") + std::to_string(solved.diverged) + " starts diverged";
            }
        } catch (const DivergenceError&) {
            step.note += (step.note.empty() ? "" : "; ") + std::string("all starts diverged");
        }
        report.steps.push_back(std::move(step));
    }
    return report;
}

FunnelBundle sample_funnel(const HammersteinOperator& op, const RightHandSide& rhs, std::size_t members,
                           std::uint64_t seed, double tol, const Lift* lift) {
    rhs.validate();
    if (members == 0) {
        throw InvalidArgument("sample_funnel needs at least one member");
    }
    const Grid& grid = op.kernel().grid();
    const auto& kernel = op.kernel();
    const Lift h = lift ? *lift : homogeneous_lift(kernel.coefficients(), kernel.boundary(), grid, rhs.dim);
    const auto norms = kernel_norms(kernel);
    const auto conditions = check_conditions(norms, rhs, grid);
    const auto& growth = conditions.get("sublinear_growth");
    if (growth.evaluable && !growth.pass) {
        throw ConditionViolation("sample_funnel needs m sup ||G(t,.)||_2 < 1");
    }

    FunnelBundle bundle;
    bundle.seed = seed;
    bundle.requested = members;
    if (rhs.growth) {
        const auto b = apriori_bounds(norms, rhs, grid, lp_norms(h.h).sup, lp_norms(h.dh).sup);
        bundle.bound_sup = b.sup_norm_bound;
        bundle.bound_R = b.c1_bound;
    }
    const auto n = static_cast<double>(grid.intervals());
    for (std::size_t k = 0; k < members; ++k) {
        const std::uint64_t member_seed = seed + k;
        std::mt19937_64 rng(member_seed);
        const auto theta = uniform_field(grid, rhs.dim, 1.0, rng).values;
        auto frozen = RightHandSide::single(
            rhs.dim, [f0 = rhs.f0, rho = rhs.kind == RhsKind::box ? rhs.rho : StateScalar{}, theta,
                      n](double t, const Eigen::VectorXd& x) {
                Eigen::VectorXd v = f0(t, x);
                if (rho) {
                    v += rho(t, x) * theta.row(static_cast<Eigen::Index>(std::lround(t * n))).transpose();
                }
                return v;
            });
        frozen.lipschitz = rhs.lipschitz;
        frozen.growth = rhs.growth;
        PicardOptions opt;
        opt.tol = tol;
        try {
            auto sol = picard_solve(op, h, frozen, CenterSelection{}, opt);
            // Node-wise random selections are too rough for finite-difference residuals of x,
            // so members are checked in integral form: x = h + H w by construction, and w
            // must be a selection of F along x.
            for (std::size_t i = 0; i < grid.size(); ++i) {
                bundle.max_residual =
                    std::max(bundle.max_residual, rhs.distance(grid.node(i), sol.x.at(i), sol.w.at(i)));
            }
            if (bundle.bound_sup && lp_norms(sol.x).sup > *bundle.bound_sup * (1.0 + 1e-3)) {
                bundle.within_bounds = false;
            }
            if (bundle.bound_R && c1_norm(sol.x, sol.dx) > *bundle.bound_R * (1.0 + 1e-3)) {
                bundle.within_bounds = false;
            }
            bundle.members.push_back(std::move(sol));
            bundle.seeds.push_back(member_seed);
        } catch (const DivergenceError&) {
        }
    }
    bundle.diameter_c1 = max_pairwise(bundle.members);
    bundle.low_confidence = 2 * bundle.members.size() < members;
    return bundle;
}

double accretivity_probe(const RightHandSide& rhs, std::size_t samples, std::uint64_t seed, double modulus,
                         double state_radius) {
    rhs.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);
    std::uniform_real_distribution<double> state(-state_radius, state_radius);
    const auto dim = idx(rhs.dim);
    auto draw_state = [&] {
        Eigen::VectorXd v(dim);
        for (auto& c : v) {
            c = state(rng);
        }
        return v;
    };
    auto draw_selection = [&](double t, const Eigen::VectorXd& x) {
        Eigen::VectorXd v = rhs.center(t, x);
        const double r = rhs.radius(t, x);
        for (auto& c : v) {
            c += r * coeff(rng);
        }
        return v;
    };
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = unit(rng);
        const Eigen::VectorXd x = draw_state();
        const Eigen::VectorXd y = draw_state();
        const Eigen::VectorXd u = draw_selection(t, x);
        const Eigen::VectorXd w = draw_selection(t, y);
        best = std::min(best, (u - w).dot(x - y) - modulus * (x - y).squaredNorm());
    }
    return best;
}

double TrigPolynomial::value(double t) const {
    double v = c0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double w = kTwoPi * static_cast<double>(k + 1);
        v += a[k] * std::cos(w * t) + b[k] * std::sin(w * t);
    }
    return v;
}

double TrigPolynomial::d1(double t) const {
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double w = kTwoPi * static_cast<double>(k + 1);
        v += w * (-a[k] * std::sin(w * t) + b[k] * std::cos(w * t));
    }
    return v;
}

double TrigPolynomial::d2(double t) const {
    double v = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double w = kTwoPi * static_cast<double>(k + 1);
        v -= w * w * (a[k] * std::cos(w * t) + b[k] * std::sin(w * t));
    }
    return v;
}

double dissipativity_pairing(const CoefficientSet& coeffs, const Grid& grid, const TrigPolynomial& x) {
    if (x.a.size() != x.b.size()) {
        throw InvalidArgument("trigonometric polynomial needs as many sine as cosine coefficients");
    }
    Eigen::VectorXd integrand(idx(grid.size()));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double t = grid.node(i);
        const double v = x.value(t);
        integrand[idx(i)] = (coeffs.a2(t) * x.d2(t) + coeffs.a1(t) * x.d1(t) + coeffs.a0(t) * v) * v;
    }
    return quadrature(grid, integrand);
}

double dissipativity_probe(const CoefficientSet& coeffs, const Grid& grid, std::size_t samples, std::uint64_t seed) {
    coeffs.validate(grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (coeffs.a0(grid.node(i)) > 0.0) {
            std::ostringstream msg;
            msg << "dissipativity probe needs a0 <= 0; a0(" << grid.node(i) << ") = " << coeffs.a0(grid.node(i));
            throw InvalidArgument(msg.str());
        }
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> degree(0, 5);
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < samples; ++k) {
        worst = std::max(worst, dissipativity_pairing(coeffs, grid, random_trig(degree(rng), rng)));
    }
    return worst;
}

}  // namespace greenbvp
