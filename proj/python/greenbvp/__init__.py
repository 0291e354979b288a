"""Green's functions and Hammerstein operators for second-order two-point BVPs."""

import json

from ._core import (
    ConditionViolation,
    DegenerateWronskian,
    DivergenceError,
    Error,
    GreensKernel,
    Grid,
    IncompatibleProblem,
    InvalidArgument,
    KernelNorms,
    ProblemSpec,
    SingularCoefficient,
    closed_form_kernel,
    closed_form_value,
    comparison_radius,
    constant_kernel,
    dissipativity_probe,
    hill_radius,
    kernel_norms,
    power_radius,
    preset_names,
    preset_text,
    run_cli,
    validate_kernel,
)

__version__ = "0.1.0"


def check(spec, n=512):
    """Condition report of a ProblemSpec as a dict."""
    return json.loads(spec.check(n))


def solve(spec, n=512):
    """Picard solution of a ProblemSpec: dict with t, x, dx, w arrays and a summary dict."""
    out = spec.solve(n)
    out["summary"] = json.loads(out["summary"])
    return out


def cli(*args):
    """Runs a greenbvp command; returns (exit code, decoded JSON or None, stderr)."""
    code, out, err = run_cli([str(a) for a in args])
    try:
        report = json.loads(out) if out.strip() else None
    except json.JSONDecodeError:
        report = None
    return code, report, err


__all__ = [
    "ConditionViolation",
    "DegenerateWronskian",
    "DivergenceError",
    "Error",
    "GreensKernel",
    "Grid",
    "IncompatibleProblem",
    "InvalidArgument",
    "KernelNorms",
    "ProblemSpec",
    "SingularCoefficient",
    "check",
    "cli",
    "closed_form_kernel",
    "closed_form_value",
    "comparison_radius",
    "constant_kernel",
    "dissipativity_probe",
    "hill_radius",
    "kernel_norms",
    "power_radius",
    "preset_names",
    "preset_text",
    "run_cli",
    "solve",
    "validate_kernel",
]
