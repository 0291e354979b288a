#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "greenbvp/cli.hpp"
#include "greenbvp/error.hpp"
#include "greenbvp/funnel.hpp"
#include "greenbvp/greens.hpp"
#include "greenbvp/hammerstein.hpp"
#include "greenbvp/io.hpp"
#include "greenbvp/problem.hpp"
#include "greenbvp/spectral.hpp"

namespace py = pybind11;
using namespace greenbvp;

namespace {

// JSON crosses the boundary as text; the Python side decodes it.
std::string json_text(const Json& j) { return dump_json(j); }

py::dict solution_dict(const Solution& sol) {
    py::dict d;
    d["t"] = Eigen::VectorXd(sol.x.grid.nodes());
    d["x"] = sol.x.values;
    d["dx"] = sol.dx.values;
    d["w"] = sol.w.values;
    d["summary"] = json_text(solution_summary(sol));
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Green's functions and Hammerstein operators for two-point boundary value problems";

    auto base = py::register_exception<Error>(m, "Error");
    py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
    py::register_exception<SingularCoefficient>(m, "SingularCoefficient", base.ptr());
    py::register_exception<DegenerateWronskian>(m, "DegenerateWronskian", base.ptr());
    py::register_exception<IncompatibleProblem>(m, "IncompatibleProblem", base.ptr());
    py::register_exception<ConditionViolation>(m, "ConditionViolation", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

    py::class_<Grid>(m, "Grid")
        .def(py::init<std::size_t>(), py::arg("n"))
        .def_property_readonly("intervals", &Grid::intervals)
        .def_property_readonly("nodes", [](const Grid& g) { return Eigen::VectorXd(g.nodes()); })
        .def_property_readonly("weights", [](const Grid& g) { return Eigen::VectorXd(g.weights()); })
        .def("__repr__", [](const Grid& g) { return "Grid(" + std::to_string(g.intervals()) + ")"; });

    py::class_<KernelNorms>(m, "KernelNorms")
        .def_readonly("sup_l2", &KernelNorms::sup_l2_rows)
        .def_readonly("sup_l2_dt", &KernelNorms::sup_l2_rows_dt)
        .def_readonly("sup_abs", &KernelNorms::sup_abs)
        .def_readonly("l2_of_l2_dt2", &KernelNorms::l2_of_l2_dt2);

    py::class_<GreensKernel>(m, "GreensKernel")
        .def_property_readonly("representation",
                               [](const GreensKernel& k) { return std::string(to_string(k.representation())); })
        .def_property_readonly("grid", &GreensKernel::grid)
        .def("dense", &GreensKernel::dense)
        .def("__call__", &GreensKernel::operator(), py::arg("i"), py::arg("j"));

    m.def(
        "constant_kernel",
        [](double a2, double a1, double a0, const std::string& bc, std::size_t n) {
            BoundaryConditions b;
            if (bc == "periodic") {
                b = BoundaryConditions::periodic();
            } else if (bc == "dirichlet") {
                b = BoundaryConditions::dirichlet();
            } else {
                throw InvalidArgument("bc must be periodic or dirichlet");
            }
            return build_greens(CoefficientSet::constant(a2, a1, a0), b, Grid(n));
        },
        py::arg("a2"), py::arg("a1"), py::arg("a0"), py::arg("bc") = "periodic", py::arg("n") = 512,
        "Numeric Green's function of a2 x'' + a1 x' + a0 x with periodic or Dirichlet conditions.");
    m.def(
        "closed_form_kernel", [](const std::string& id, std::size_t n) { return closed_form_kernel(id, Grid(n)); },
        py::arg("id"), py::arg("n") = 512);
    m.def("closed_form_value",
          [](const std::string& id, double t, double s) { return closed_form_value(parse_closed_form_id(id), t, s); },
          py::arg("id"), py::arg("t"), py::arg("s"));
    m.def("kernel_norms", &kernel_norms, py::arg("kernel"));
    m.def(
        "validate_kernel",
        [](const GreensKernel& k) {
            const auto d = validate_kernel(k);
            py::dict out;
            out["diagonal_gap"] = d.diagonal_gap;
            out["jump_error"] = d.jump_error;
            out["ode_residual"] = d.ode_residual;
            out["bc_residual"] = d.bc_residual;
            return out;
        },
        py::arg("kernel"));

    m.def(
        "power_radius",
        [](const Eigen::MatrixXd& a, double tol) {
            const auto r = power_radius(a, tol);
            return py::make_tuple(r.radius, r.iterations);
        },
        py::arg("matrix"), py::arg("tol") = 1e-12, "Perron root and iteration count of a nonnegative matrix.");
    m.def(
        "comparison_radius",
        [](const GreensKernel& k, const ScalarFunction& eta) { return power_radius(build_comparison(k, eta)).radius; },
        py::arg("kernel"), py::arg("eta"));
    m.def(
        "hill_radius",
        [](const ScalarFunction& eta, double lambda_max, std::size_t n) {
            const auto r = hill_radius(eta, lambda_max, Grid(n));
            return py::make_tuple(r.radius, r.root_found);
        },
        py::arg("eta"), py::arg("lambda_max") = 3.0, py::arg("n") = 512,
        "Hill-discriminant radius for periodic x'' - x.");

    m.def(
        "dissipativity_probe",
        [](const ScalarFunction& a1, const ScalarFunction& a0, std::size_t samples, std::uint64_t seed, std::size_t n) {
            return dissipativity_probe(CoefficientSet::monic_form(a1, a0), Grid(n), samples, seed);
        },
        py::arg("a1"), py::arg("a0"), py::arg("samples") = 100, py::arg("seed") = 0, py::arg("n") = 512);

    py::class_<ProblemSpec>(m, "ProblemSpec")
        .def_static("parse", &parse_problem, py::arg("text"))
        .def_static(
            "preset", [](const std::string& name) {
                auto spec = parse_problem(preset_text(name));
                spec.name = name;
                return spec;
            },
            py::arg("name"))
        .def_readwrite("name", &ProblemSpec::name)
        .def_readwrite("dim", &ProblemSpec::dim)
        .def_readwrite("tol", &ProblemSpec::tol)
        .def_readwrite("seed", &ProblemSpec::seed)
        .def("kernel", [](const ProblemSpec& s, std::size_t n) { return s.kernel_on(Grid(n)); }, py::arg("n") = 512)
        .def(
            "check",
            [](const ProblemSpec& s, std::size_t n) {
                const Grid g(n);
                return json_text(to_json(check_conditions(kernel_norms(s.kernel_on(g)), s.right_hand_side(), g)));
            },
            py::arg("n") = 512)
        .def(
            "solve",
            [](const ProblemSpec& s, std::size_t n) {
                const Grid g(n);
                const auto rhs = s.right_hand_side();
                const HammersteinOperator op(s.kernel_on(g));
                const auto lift = homogeneous_lift(s.coefficients(), s.boundary(), g, rhs.dim);
                PicardOptions opt;
                opt.tol = s.tol;
                opt.max_iter = s.max_iter;
                return solution_dict(picard_solve(op, lift, rhs, CenterSelection{}, opt));
            },
            py::arg("n") = 512);

    m.def("preset_names", &preset_names);
    m.def("preset_text", [](const std::string& name) { return preset_text(name); }, py::arg("name"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = cli::run(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command line in-process; returns (exit code, stdout, stderr).");
}
