"""Kernel-representation solver for p(t) u_t = u_xx + f(t, x) with a complex,
time-dependent coefficient p, plus independent verification tools."""

__version__ = "0.1.0"

from .coefficients import (  # noqa: E402
    CoefficientProfile,
    ConditionReport,
    LemmaReport,
    OmegaCache,
    check_conditions,
    eval_p,
    eval_p_inv,
    lemma_report,
    mean_H,
    omega,
    omega0,
)
from .data import DataFunction, SteadySource  # noqa: E402
from .kernel import KernelArg, decay_radius, kernel_eval, kernel_mass  # noqa: E402
from .quadrature import QuadResult, integrate_duhamel, integrate_finite, integrate_line  # noqa: E402
from .solver import (  # noqa: E402
    GridSpec,
    ProblemSpec,
    SolutionField,
    solve,
    solve_duhamel,
    solve_grid,
    solve_homogeneous,
)

__all__ = [
    "CoefficientProfile", "ConditionReport", "LemmaReport", "OmegaCache", "check_conditions",
    "eval_p", "eval_p_inv", "lemma_report", "mean_H", "omega", "omega0",
    "DataFunction", "SteadySource",
    "KernelArg", "decay_radius", "kernel_eval", "kernel_mass",
    "QuadResult", "integrate_duhamel", "integrate_finite", "integrate_line",
    "GridSpec", "ProblemSpec", "SolutionField", "solve", "solve_duhamel", "solve_grid",
    "solve_homogeneous",
]
