#include "greenbvp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "greenbvp/error.hpp"
#include "greenbvp/funnel.hpp"
#include "greenbvp/greens.hpp"
#include "greenbvp/hammerstein.hpp"
#include "greenbvp/io.hpp"
#include "greenbvp/problem.hpp"
#include "greenbvp/spectral.hpp"

namespace greenbvp::cli {

namespace {

namespace fs = std::filesystem;

constexpr std::size_t kDefaultGrid = 512;

struct Common {
    std::string problem_file;
    std::string preset;
    std::optional<std::size_t> grid;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
};

struct Context {
    ProblemSpec spec;
    Grid grid;
    std::uint64_t seed;
    std::optional<fs::path> out_dir;
};

Context load(const Common& c) {
    if (c.problem_file.empty() == c.preset.empty()) {
        throw InvalidArgument("give exactly one of a problem file or --preset");
    }
    ProblemSpec spec;
    if (!c.preset.empty()) {
        spec = parse_problem(preset_text(c.preset));
        spec.name = c.preset;
    } else {
        spec = load_problem(c.problem_file);
    }
    const std::size_t n = c.grid ? *c.grid : spec.grid.value_or(kDefaultGrid);
    Context ctx{spec, Grid(n), c.seed.value_or(spec.seed), std::nullopt};
    if (!c.out_dir.empty()) {
        ctx.out_dir = fs::path(c.out_dir);
        fs::create_directories(*ctx.out_dir);
    }
    return ctx;
}

void emit(const Context& ctx, std::ostream& out, const std::string& file, const Json& report) {
    const std::string text = dump_json(report);
    out << text;
    if (ctx.out_dir) {
        write_file_atomic(*ctx.out_dir / file, text);
    }
}

int cmd_greens(const Context& ctx, bool csv, std::ostream& out) {
    const auto coeffs = ctx.spec.coefficients();
    const auto bc = ctx.spec.boundary();
    const double det = compatibility_determinant(coeffs, bc, ctx.grid);
    const auto kernel = ctx.spec.kernel_on(ctx.grid);
    const auto norms = kernel_norms(kernel);
    const auto diag = validate_kernel(kernel);
    Json report{{"problem", ctx.spec.name},
                {"grid", ctx.grid.intervals()},
                {"representation", std::string(to_string(kernel.representation()))},
                {"determinant", det},
                {"norms", to_json(norms)},
                {"thresholds",
                 {{"m", 1.0 / norms.sup_l2_rows},
                  {"eta", 1.0 / (2.0 * norms.sup_l2_rows)},
                  {"mu", 1.0 / norms.sup_abs}}},
                {"diagnostics",
                 {{"diagonal_gap", diag.diagonal_gap},
                  {"jump_error", diag.jump_error},
                  {"ode_residual", diag.ode_residual},
                  {"bc_residual", diag.bc_residual}}}};
    emit(ctx, out, "greens.json", report);
    if (csv && ctx.out_dir) {
        std::ostringstream text;
        write_kernel_csv(kernel, text);
        write_file_atomic(*ctx.out_dir / "kernel.csv", text.str());
    }
    return ok;
}

int cmd_check(const Context& ctx, std::ostream& out) {
    const auto kernel = ctx.spec.kernel_on(ctx.grid);
    auto report = check_conditions(kernel_norms(kernel), ctx.spec.right_hand_side(), ctx.grid);
    if (!ctx.spec.conditions.empty()) {
        const auto& wanted = ctx.spec.conditions;
        std::erase_if(report.conditions, [&wanted](const ConditionResult& c) {
            return std::find(wanted.begin(), wanted.end(), c.id) == wanted.end();
        });
    }
    Json j = to_json(report);
    j["problem"] = ctx.spec.name;
    j["grid"] = ctx.grid.intervals();
    emit(ctx, out, "check.json", j);
    return report.all_pass() ? ok : condition_failure;
}

SelectionSpec parse_selection(const std::string& name, std::uint64_t seed) {
    if (name == "center") {
        return CenterSelection{};
    }
    if (name == "random") {
        return RandomSelection{seed};
    }
    throw InvalidArgument("selection must be center or random, got '" + name + "'");
}

int cmd_solve(const Context& ctx, std::ostream& out) {
    const auto rhs = ctx.spec.right_hand_side();
    const HammersteinOperator op(ctx.spec.kernel_on(ctx.grid));
    const auto lift = homogeneous_lift(ctx.spec.coefficients(), ctx.spec.boundary(), ctx.grid, rhs.dim);
    PicardOptions options;
    options.tol = ctx.spec.tol;
    options.max_iter = ctx.spec.max_iter;
    const auto sol = picard_solve(op, lift, rhs, parse_selection(ctx.spec.selection, ctx.seed), options);
    Json summary = solution_summary(sol);
    summary["problem"] = ctx.spec.name;
    summary["selection"] = ctx.spec.selection;
    summary["seed"] = ctx.seed;
    summary["tol"] = ctx.spec.tol;
    emit(ctx, out, "summary.json", summary);
    if (ctx.out_dir) {
        std::ostringstream csv;
        write_solution_csv(sol, csv);
        write_file_atomic(*ctx.out_dir / "solution.csv", csv.str());
    }
    return ok;
}

// Sign of a periodic kernel, or nullopt when G changes sign or touches zero.
std::optional<double> kernel_sign(const GreensKernel& kernel) {
    const Eigen::MatrixXd g = kernel.dense();
    if ((g.array() < 0.0).all()) {
        return -1.0;
    }
    if ((g.array() > 0.0).all()) {
        return 1.0;
    }
    return std::nullopt;
}

int cmd_spectral(const Context& ctx, std::ostream& out, std::ostream& err) {
    const std::string& method = ctx.spec.method;
    if (method != "power" && method != "hill" && method != "both") {
        throw InvalidArgument("method must be power, hill or both, got '" + method + "'");
    }
    const auto rhs = ctx.spec.right_hand_side();
    if (!rhs.eta) {
        throw InvalidArgument("spectral needs eta in the problem file");
    }
    const auto kernel = ctx.spec.kernel_on(ctx.grid);
    Json report{{"problem", ctx.spec.name}, {"method", method}, {"mesh", ctx.grid.intervals()}};

    std::optional<PowerResult> power;
    std::optional<HillRadius> hill;
    if (method != "hill") {
        power = power_radius(build_comparison(kernel, *rhs.eta));
        report["power"] = to_json(*power);
    }
    if (method != "power") {
        const auto sign = kernel_sign(kernel);
        if (!ctx.spec.boundary().is_periodic() || !sign) {
            err << "hill method refused: it needs periodic boundary conditions and a sign-definite kernel\n";
            if (method == "hill") {
                return condition_failure;
            }
            report["hill"] = nullptr;
            report["hill_refused"] = "kernel is not periodic and sign-definite";
        } else {
            hill = hill_radius(*rhs.eta, ctx.spec.lambda_max, ctx.grid, HillProblem{ctx.spec.coefficients(), *sign});
            report["hill"] = to_json(*hill);
        }
    }
    if (power) {
        report["radius"] = power->radius;
        report["iterations"] = power->iterations;
    } else {
        report["radius"] = hill->radius;
        report["iterations"] = hill->evaluations;
    }
    if (power && hill) {
        report["gap"] = std::abs(power->radius - hill->radius);
    }
    emit(ctx, out, "spectral.json", report);
    if (method == "hill" && !hill->root_found) {
        err << "hill method found no root in (0, " << ctx.spec.lambda_max << "]\n";
    }
    return ok;
}

int cmd_funnel(const Context& ctx, std::ostream& out, std::ostream& err) {
    const auto rhs = ctx.spec.right_hand_side();
    const HammersteinOperator op(ctx.spec.kernel_on(ctx.grid));
    const fs::path dir = ctx.out_dir.value_or(fs::path("funnel-out"));
    int code = ok;
    Json report{{"problem", ctx.spec.name}, {"grid", ctx.grid.intervals()}, {"out", dir.generic_string()}};

    if (!ctx.spec.perturb.empty()) {
        const auto scheme = perturbation_scheme(rhs, op, ctx.spec.perturb, ctx.spec.tol, ctx.seed);
        report["scheme"] = to_json(scheme);
        if (!scheme.all_ok()) {
            code = condition_failure;
        }
    }
    if (rhs.kind == RhsKind::box || ctx.spec.perturb.empty()) {
        const auto lift = homogeneous_lift(ctx.spec.coefficients(), ctx.spec.boundary(), ctx.grid, rhs.dim);
        const auto bundle = sample_funnel(op, rhs, ctx.spec.members, ctx.seed, ctx.spec.tol, &lift);
        report["manifest"] = export_bundle(bundle, dir);
        if (bundle.low_confidence) {
            err << "warning: only " << bundle.members.size() << " of " << bundle.requested
                << " funnel members converged\n";
            code = std::max(code, static_cast<int>(divergence));
        }
    }
    fs::create_directories(dir);
    const std::string text = dump_json(report);
    write_file_atomic(dir / "funnel.json", text);
    out << text;
    return code;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Green's functions and Hammerstein operators for two-point boundary value problems", "greenbvp"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "greenbvp 0.1.0");

    Common common;
    ProblemSpec overrides;
    std::optional<double> tol;
    std::optional<std::size_t> max_iter, members;
    std::optional<std::string> selection, method;
    std::vector<std::size_t> perturb;
    std::vector<std::string> conditions;
    bool csv = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("problem", common.problem_file, "Problem file (key = value)");
        sub->add_option("--preset", common.preset, "Built-in problem")->check(CLI::IsMember(preset_names()));
        sub->add_option("--grid", common.grid, "Grid intervals (even, >= 4; default 512)");
        sub->add_option("--seed", common.seed, "Random seed");
        sub->add_option("--out", common.out_dir, "Output directory");
    };

    auto* greens = app.add_subcommand("greens", "Kernel norms, compatibility determinant and thresholds");
    add_common(greens);
    greens->add_flag("--csv", csv, "Write kernel.csv into --out");

    auto* check = app.add_subcommand("check", "Evaluate the existence and uniqueness conditions");
    add_common(check);
    check->add_option("--conditions", conditions, "Condition ids to evaluate (default: those in the problem file)")
        ->delimiter(',')
        ->check(CLI::IsMember({"sublinear_growth", "eta_norm", "perturbed_growth", "lipschitz_l1"}));

    auto* solve = app.add_subcommand("solve", "Picard iteration for the fixed-point form");
    add_common(solve);
    solve->add_option("--tol", tol, "Stop when the L1 increment is at most tol");
    solve->add_option("--max-iter", max_iter, "Iteration cap");
    solve->add_option("--selection", selection, "Starting selection")->check(CLI::IsMember({"center", "random"}));

    auto* spectral = app.add_subcommand("spectral", "Spectral radius of the comparison operator");
    add_common(spectral);
    spectral->add_option("--method", method, "power, hill or both")
        ->check(CLI::IsMember({"power", "hill", "both"}));

    auto* funnel = app.add_subcommand("funnel", "Sample a solution funnel and check the perturbation scheme");
    add_common(funnel);
    funnel->add_option("--members", members, "Number of bundle members");
    funnel->add_option("--perturb", perturb, "Perturbation indices n")->delimiter(',');
    funnel->add_option("--tol", tol, "Picard tolerance per member");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? ok : usage;
    }

    try {
        Context ctx = load(common);
        if (tol) {
            ctx.spec.tol = *tol;
        }
        if (max_iter) {
            ctx.spec.max_iter = *max_iter;
        }
        if (selection) {
            ctx.spec.selection = *selection;
        }
        if (method) {
            ctx.spec.method = *method;
        }
        if (members) {
            ctx.spec.members = *members;
        }
        if (!perturb.empty()) {
            ctx.spec.perturb = perturb;
        }
        if (!conditions.empty()) {
            ctx.spec.conditions = conditions;
        }
        if (greens->parsed()) {
            return cmd_greens(ctx, csv, out);
        }
        if (check->parsed()) {
            return cmd_check(ctx, out);
        }
        if (solve->parsed()) {
            return cmd_solve(ctx, out);
        }
        if (spectral->parsed()) {
            return cmd_spectral(ctx, out, err);
        }
        return cmd_funnel(ctx, out, err);
    } catch (const IncompatibleProblem& e) {
        err << "incompatibility: " << e.what() << " (determinant " << format_double(e.determinant()) << ")\n";
        return incompatible;
    } catch (const ConditionViolation& e) {
        err << "condition failure: " << e.what() << '\n';
        return condition_failure;
    } catch (const DivergenceError& e) {
        err << "divergence: " << e.what() << '\n';
        err << dump_json(Json{{"increments", e.increments()}});
        return divergence;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return usage;
    }
}

}  // namespace greenbvp::cli
