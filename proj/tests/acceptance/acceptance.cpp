// Acceptance run at desk scale (n = 512). One PASS/FAIL line per criterion;
// exit status is nonzero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "greenbvp/error.hpp"
#include "greenbvp/funnel.hpp"
#include "greenbvp/greens.hpp"
#include "greenbvp/hammerstein.hpp"
#include "greenbvp/spectral.hpp"

using namespace greenbvp;

namespace {

constexpr std::size_t kN = 512;
constexpr double kPi = std::numbers::pi;
constexpr double kE = std::numbers::e;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    Outcome() { detail.precision(9); }
    Outcome(Outcome&&) = default;
    Outcome& operator=(Outcome&&) = default;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

ScalarFunction constant(double v) {
    return [v](double) { return v; };
}

CoefficientSet xpp_minus_x() { return CoefficientSet::constant(1.0, 0.0, -1.0); }
CoefficientSet xpp_xp_x() { return CoefficientSet::constant(1.0, -1.0, -1.0); }

GreensKernel numeric_kernel(const CoefficientSet& c, const Grid& g) {
    return build_greens(c, BoundaryConditions::periodic(), g);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double round_to(double v, int digits) {
    const double s = std::pow(10.0, digits);
    return std::round(v * s) / s;
}

// sup_t ||G(t,.)||_2 of a closed form by composite Simpson on a fine, kink-aligned grid.
double fine_sup_l2(ClosedFormId id, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n);
        auto simpson = [&](double a, double b, std::size_t m) {
            if (b - a <= 0.0) {
                return 0.0;
            }
            m += m % 2;
            const double h = (b - a) / static_cast<double>(m);
            double s = 0.0;
            for (std::size_t k = 0; k <= m; ++k) {
                const double x = a + h * static_cast<double>(k);
                const double v = closed_form_value(id, t, x);
                const double w = (k == 0 || k == m) ? 1.0 : (k % 2 ? 4.0 : 2.0);
                s += w * v * v;
            }
            return s * h / 3.0;
        };
        best = std::max(best, std::sqrt(simpson(0.0, t, 2000) + simpson(t, 1.0, 2000)));
    }
    return best;
}

Outcome sup_l2_xpp_minus_x() {
    Outcome o;
    const Grid g(kN);
    const double computed = kernel_norms(numeric_kernel(xpp_minus_x(), g)).sup_l2_rows;
    const double exact = std::sqrt((kE * kE + 2.0 * kE - 1.0) / (4.0 * (kE - 1.0) * (kE - 1.0)));
    o.detail << "periodic x''-x sup_t||G(t,.)||_2 = " << computed << " exact " << exact << " rel "
             << rel(computed, exact);
    o.require(rel(computed, exact) <= 1e-4, "relative error <= 1e-4");
    o.require(round_to(computed, 5) == 1.00066, "rounds to 1.00066");
    return o;
}

Outcome sup_l2_xpp_xp_x() {
    Outcome o;
    const Grid g(kN);
    const double computed = kernel_norms(numeric_kernel(xpp_xp_x(), g)).sup_l2_rows;
    const double fine = fine_sup_l2(ClosedFormId::periodic_xpp_xp_x, 400);
    const double m_threshold = 1.0 / computed;
    o.detail << "periodic x''-x'-x sup_t||G(t,.)||_2 = " << computed << " (square " << computed * computed
             << ", fine-quadrature oracle " << fine << ") m-threshold " << m_threshold;
    o.require(rel(computed, 1.00065) <= 1e-3, "within 1e-3 of 1.00065");
    o.require(rel(computed * computed, 1.0013) <= 1e-3, "square within 1e-3 of 1.0013");
    o.require(rel(computed, fine) <= 1e-4, "agrees with the fine-quadrature oracle");
    o.require(round_to(m_threshold, 3) == 0.999, "m-threshold rounds to 0.999");
    return o;
}

Outcome sup_abs_threshold() {
    Outcome o;
    const Grid g(kN);
    const auto norms = kernel_norms(numeric_kernel(xpp_minus_x(), g));
    const double exact = (kE + 1.0) / (2.0 * (kE - 1.0));
    auto rhs = RightHandSide::single(1, [](double, const Eigen::VectorXd& x) { return Eigen::VectorXd(x); });
    rhs.lipschitz = constant(0.5);
    const double threshold = check_conditions(norms, rhs, g).mu_threshold;
    o.detail << "periodic x''-x sup|G| = " << norms.sup_abs << " exact " << exact << ", mu-threshold " << threshold;
    o.require(std::abs(norms.sup_abs - exact) <= 1e-4, "sup|G| within 1e-4");
    o.require(std::abs(threshold - 1.0 / exact) <= 1e-4, "threshold within 1e-4 of 2(e-1)/(e+1)");
    o.require(round_to(threshold, 3) == 0.924, "threshold rounds to 0.924");
    return o;
}

Outcome spectral_radius() {
    Outcome o;
    const Grid g(kN);
    const auto kernel = numeric_kernel(xpp_minus_x(), g);
    o.detail << "constant eta:";
    for (double eta : {0.1, 0.3, 0.45}) {
        const double power = power_radius(build_comparison(kernel, constant(eta))).radius;
        const auto hill = hill_radius(constant(eta), 2.0, g);
        const double gap = std::abs(power - hill.radius);
        o.detail << " eta=" << eta << " power " << power << " hill " << hill.radius << " gap " << gap << ";";
        o.require(std::abs(power - 2.0 * eta) <= 1e-3, "power within 1e-3 of 2 eta");
        o.require(hill.root_found && std::abs(hill.radius - 2.0 * eta) <= 1e-3, "hill within 1e-3 of 2 eta");
        o.require(gap <= 2e-3, "cross-method gap <= 2e-3");
    }
    return o;
}

Outcome kernel_suite() {
    Outcome o;
    const Grid g(kN);
    const std::pair<CoefficientSet, ClosedFormId> cases[] = {{xpp_minus_x(), ClosedFormId::periodic_xpp_minus_x},
                                                              {xpp_xp_x(), ClosedFormId::periodic_xpp_xp_x}};
    for (const auto& [coeffs, id] : cases) {
        const auto numeric = numeric_kernel(coeffs, g);
        const auto d = validate_kernel(numeric);
        const double node_error = max_kernel_difference(numeric, closed_form_kernel(id, g));
        o.detail << (id == ClosedFormId::periodic_xpp_minus_x ? "x''-x" : "x''-x'-x") << ": diag " << d.diagonal_gap
                 << " jump " << d.jump_error << " ode " << d.ode_residual << " bc " << d.bc_residual << " vs closed "
                 << node_error << "; ";
        o.require(d.diagonal_gap <= 1e-6, "diagonal continuity <= 1e-6");
        o.require(d.jump_error <= 10.0 / static_cast<double>(kN), "jump within 10/n");
        o.require(d.ode_residual <= 1e-5, "off-diagonal ODE residual <= 1e-5");
        o.require(d.bc_residual <= 1e-6, "BC residual <= 1e-6");
        o.require(node_error <= 1e-6, "numeric vs closed form <= 1e-6");
    }
    return o;
}

Outcome oracle_equivalence() {
    Outcome o;
    const Grid g(kN);
    const double tol = std::max(1e-4, 20.0 / static_cast<double>(kN * kN));
    const ScalarFunction forcing = [](double t) {
        return std::cos(2.0 * kPi * t) + 0.5 * std::sin(6.0 * kPi * t) - 0.25;
    };
    const std::pair<CoefficientSet, const char*> cases[] = {{xpp_minus_x(), "x''-x"}, {xpp_xp_x(), "x''-x'-x"}};
    double worst = 0.0;
    for (const auto& [coeffs, name] : cases) {
        const HammersteinOperator op(numeric_kernel(coeffs, g));
        for (double lambda : {0.0, 0.3, -0.3}) {
            auto rhs = RightHandSide::single(1, [lambda, forcing](double t, const Eigen::VectorXd& x) {
                return Eigen::VectorXd(lambda * x + Eigen::VectorXd::Constant(x.size(), forcing(t)));
            });
            const auto sol = picard_solve(op, zero_lift(g, 1), rhs, CenterSelection{});
            const auto oracle = fd_oracle(coeffs, BoundaryConditions::periodic(),
                                          LinearRhs{lambda, SampledFunction::sample_scalar(g, forcing)}, g);
            const double diff = (sol.x.values - oracle.values).cwiseAbs().maxCoeff();
            worst = std::max(worst, diff);
            o.require(diff <= tol, std::string(name) + " lambda " + std::to_string(lambda));
        }
    }
    o.detail << "6 linear problems, worst sup-norm gap " << worst << " (tolerance " << tol << ")";
    return o;
}

Outcome contraction() {
    Outcome o;
    const Grid g(kN);
    struct Case {
        const char* name;
        CoefficientSet coeffs;
        std::size_t dim;
        VectorField f;
    };
    const Case cases[] = {
        {"x''-x, 0.5 sin x + cos 2pi t", xpp_minus_x(), 1,
         [](double t, const Eigen::VectorXd& x) {
             return Eigen::VectorXd(0.5 * x.array().sin() + std::cos(2.0 * kPi * t));
         }},
        {"x''-x'-x, 0.5 atan x + sin 2pi t", xpp_xp_x(), 1,
         [](double t, const Eigen::VectorXd& x) {
             return Eigen::VectorXd(0.5 * x.array().atan() + std::sin(2.0 * kPi * t));
         }},
        {"x''-x, 2D coupled", xpp_minus_x(), 2,
         [](double t, const Eigen::VectorXd& x) {
             return Eigen::VectorXd(0.3 * x.array().sin() + 0.1 * std::atan(x[0] - x[1]) + std::cos(2.0 * kPi * t));
         }},
    };
    const double tol = 1e-10;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> amp(-3.0, 3.0);
    for (const auto& c : cases) {
        const HammersteinOperator op(numeric_kernel(c.coeffs, g));
        auto rhs = RightHandSide::single(c.dim, c.f);
        // |D_x f| <= 0.3 + 0.1 |(1,-1)| |(1,-1)| = 0.5 for the coupled case.
        rhs.lipschitz = constant(0.5);
        const auto q = check_conditions(kernel_norms(op.kernel()), rhs, g).contraction_q.value();
        PicardOptions opt;
        opt.tol = tol;
        std::optional<SampledFunction> first;
        double worst_ratio = 0.0, worst_spread = 0.0;
        for (int start = 0; start < 5; ++start) {
            opt.initial = SampledFunction(g, c.dim);
            for (auto& v : opt.initial->values.reshaped()) {
                v = amp(rng);
            }
            const auto sol = picard_solve(op, zero_lift(g, c.dim), rhs, CenterSelection{}, opt);
            worst_ratio = std::max(worst_ratio, max_increment_ratio(sol.increments));
            if (!first) {
                first = sol.w;
            } else {
                worst_spread = std::max(worst_spread, lp_norms(sol.w - *first).l1);
            }
        }
        o.detail << c.name << ": q " << q << " ratio " << worst_ratio << " spread " << worst_spread << "; ";
        o.require(q < 1.0, std::string(c.name) + " q < 1");
        o.require(worst_ratio <= q + 0.05, std::string(c.name) + " ratio <= q + 0.05");
        o.require(worst_spread <= 10.0 * tol, std::string(c.name) + " 5-start spread <= 10 tol");
    }
    return o;
}

RightHandSide accretive_arctan(std::size_t dim) {
    auto rhs = RightHandSide::single(dim, [](double, const Eigen::VectorXd& x) {
        return Eigen::VectorXd(x.array().atan());
    });
    rhs.accretive = true;
    rhs.growth = Growth{constant(0.5 * kPi * std::sqrt(static_cast<double>(dim))), 0.0};
    rhs.lipschitz = constant(1.0);
    return rhs;
}

RightHandSide accretive_cubic(std::size_t dim) {
    auto rhs = RightHandSide::single(dim, [](double, const Eigen::VectorXd& x) {
        return Eigen::VectorXd(x.array().cube());
    });
    rhs.accretive = true;
    return rhs;
}

Outcome perturbation_criterion() {
    Outcome o;
    const Grid g(kN);
    const std::vector<std::size_t> ns{4, 16, 64};
    // The growth condition (m+1) sup||G||_2 < 1 needs a kernel with sup||G||_2 < 1: periodic x'' - 4x.
    const HammersteinOperator stiff(numeric_kernel(CoefficientSet::constant(1.0, 0.0, -4.0), g));
    const HammersteinOperator wide(numeric_kernel(xpp_minus_x(), g));

    const auto atan_report = perturbation_scheme(accretive_arctan(2), stiff, ns, 1e-10, 11);
    o.detail << "arctan (x''-4x):";
    for (const auto& s : atan_report.steps) {
        o.detail << " n=" << s.n << " gap " << s.max_gap << "/" << s.eps_n.value_or(NAN) << " spread " << s.spread
                 << ";";
        o.require(s.eps_n && s.gap_ok, "arctan gap <= eps_n at n=" + std::to_string(s.n));
        o.require(s.unique_ok && s.spread <= 1e-6, "arctan spread <= 1e-6 at n=" + std::to_string(s.n));
    }
    const auto cubic_report = perturbation_scheme(accretive_cubic(2), wide, ns, 1e-10, 11);
    o.detail << " cubic (x''-x, eps_n undefined without growth):";
    for (const auto& s : cubic_report.steps) {
        o.detail << " n=" << s.n << " spread " << s.spread << ";";
        o.require(s.unique_ok && s.spread <= 1e-6, "cubic spread <= 1e-6 at n=" + std::to_string(s.n));
    }
    return o;
}

Outcome apriori_containment() {
    Outcome o;
    const Grid g(kN);
    const HammersteinOperator op(numeric_kernel(xpp_minus_x(), g));
    const auto norms = kernel_norms(op.kernel());
    std::vector<double> diameters;
    for (double r : {0.2, 0.4}) {
        auto rhs = RightHandSide::box(
            2,
            [](double t, const Eigen::VectorXd& x) {
                return Eigen::VectorXd(0.3 * x.array().sin() + 0.5 * std::cos(2.0 * kPi * t));
            },
            [r](double, const Eigen::VectorXd&) { return r; });
        // |f0 + r theta| <= 0.5 sqrt2 + 0.3 |x| + r sqrt2.
        rhs.growth = Growth{constant((0.5 + r) * std::sqrt(2.0)), 0.3};
        rhs.lipschitz = constant(0.3);
        const auto audit = probe_metadata(rhs, 4000, 3);
        o.require(*audit.growth_excess <= 0.0, "growth declaration holds on probes");
        const auto bounds = apriori_bounds(norms, rhs, g);
        const auto bundle = sample_funnel(op, rhs, 64, 77, 1e-10);
        double worst_sup = 0.0, worst_c1 = 0.0;
        for (const auto& m : bundle.members) {
            worst_sup = std::max(worst_sup, lp_norms(m.x).sup / bounds.sup_norm_bound);
            worst_c1 = std::max(worst_c1, c1_norm(m.x, m.dx) / bounds.c1_bound);
        }
        diameters.push_back(bundle.diameter_c1);
        o.detail << "radius " << r << ": " << bundle.members.size() << "/64 members, max sup/bound " << worst_sup
                 << ", max C1/R " << worst_c1 << ", diameter " << bundle.diameter_c1 << "; ";
        o.require(bundle.members.size() == 64, "all 64 members converge");
        o.require(worst_sup <= 1.001, "sup-norm bound within 0.1%");
        o.require(worst_c1 <= 1.001, "C1 bound within 0.1%");
    }
    o.require(diameters[0] <= diameters[1], "matched-seed diameter monotone in radius");
    return o;
}

Outcome dissipativity() {
    Outcome o;
    const Grid g(kN);
    const std::pair<CoefficientSet, const char*> cases[] = {
        {xpp_minus_x(), "(0,-1)"},
        {CoefficientSet::monic_form([](double t) { return std::sin(t); }, constant(-0.5)), "(sin t,-0.5)"}};
    for (const auto& [coeffs, name] : cases) {
        const double worst = dissipativity_probe(coeffs, g, 100, 17);
        o.detail << "(a1,a0)=" << name << " max <Lx,x> " << worst << "; ";
        o.require(worst <= 1e-8, std::string(name) + " max <= 1e-8");
    }
    return o;
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"sup L2 norm, periodic x''-x", sup_l2_xpp_minus_x},
        {"sup L2 norm and m-threshold, periodic x''-x'-x", sup_l2_xpp_xp_x},
        {"sup |G| and Lipschitz threshold, periodic x''-x", sup_abs_threshold},
        {"spectral radius 2 eta, power and Hill", spectral_radius},
        {"kernel correctness suite", kernel_suite},
        {"Green's solve vs finite-difference oracle", oracle_equivalence},
        {"contraction behaviour", contraction},
        {"perturbation scheme", perturbation_criterion},
        {"a-priori containment of funnel members", apriori_containment},
        {"dissipativity probe", dissipativity},
    };
    int failures = 0;
    int index = 0;
    for (const auto& [name, fn] : criteria) {
        ++index;
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > 10.0) {
            o.pass = false;
            o.detail << " [failed: runtime " << seconds << " s > 10 s]";
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2d %s (%.2f s): %s\n", o.pass ? "PASS" : "FAIL", index, name, seconds, o.detail.str().c_str());
    }
    std::printf("%d of %d criteria passed\n", index - failures, index);
    return failures == 0 ? 0 : 1;
}
