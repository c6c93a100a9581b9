import math

import numpy as np
import pytest
import sympy as sp

from degenheat.coefficients import CoefficientProfile
from degenheat.data import DataFunction, SteadySource
from degenheat.errors import DomainError, DomainTooSmallError
from degenheat.solver import GridSpec, ProblemSpec, SolutionField, solve_grid
from degenheat.verify import (
    EXACT_FIELDS,
    _Tridiagonal,
    cn_oracle,
    compare_fields,
    exact_field,
    exact_solution_field,
    fd_residual,
    initial_check,
    mms_source,
    residual_patches,
)

ONE = CoefficientProfile.constant(1.0)
HEAT = ProblemSpec(ONE, DataFunction.gaussian())


def field_from(func, grid):
    t, x = np.meshgrid(grid.times, grid.xs, indexing="ij")
    return SolutionField(grid.times, grid.xs, func(t, x))


# --------------------------------------------------------------------------
# manufactured solutions


def _sympy_fields():
    t, x = sp.symbols("t x", real=True)
    return t, x, {
        "const": sp.Integer(1),
        "t_gaussian": t * sp.exp(-x ** 2),
        "decaying_sine": sp.exp(-t) * sp.sin(x),
        "heat_gaussian": sp.exp(-x ** 2 / (1 + 4 * t)) / sp.sqrt(1 + 4 * t),
    }


@pytest.mark.parametrize("name", EXACT_FIELDS)
def test_exact_field_derivatives_against_sympy(name):
    t, x, exprs = _sympy_fields()
    expr = exprs[name]
    u_t = sp.lambdify((t, x), sp.diff(expr, t), "numpy")
    u_xx = sp.lambdify((t, x), sp.diff(expr, x, 2), "numpy")
    ex = exact_field(name)
    tt, xx = np.meshgrid(np.linspace(0.05, 2, 7), np.linspace(-3, 3, 11), indexing="ij")
    assert np.allclose(ex.u_t(tt, xx), u_t(tt, xx) + 0 * tt, atol=1e-13)
    assert np.allclose(ex.u_xx(tt, xx), u_xx(tt, xx) + 0 * tt, atol=1e-13)


def test_mms_examples():
    src, phi, _ = mms_source("decaying_sine", ONE)
    x = np.linspace(-3, 3, 13)
    assert np.allclose(src(0.7, x), 0, atol=1e-15)
    src, phi, _ = mms_source("const", ONE, c=2.5)
    assert np.all(src(0.3, x) == 0) and np.all(phi(x) == 2.5)
    src, phi, _ = mms_source("t_gaussian", ONE)
    for t in (0.0, 0.4, 1.3):
        expected = np.exp(-x ** 2) * (1 - t * (4 * x ** 2 - 2))
        assert np.allclose(src(t, x), expected, atol=1e-14)
    assert np.all(phi(x) == 0)
    with pytest.raises(DomainError):
        mms_source("nope", ONE)


def test_mms_source_uses_coefficient():
    arc = CoefficientProfile.phase_arc(0, math.pi / 4, 1, 2)
    src, _, ex = mms_source("t_gaussian", arc)
    x = np.linspace(-2, 2, 5)
    t = 1.5
    p = np.exp(1j * math.pi / 8)
    assert np.allclose(src(t, x), p * ex.u_t(t, x) - ex.u_xx(t, x), atol=1e-15)


# --------------------------------------------------------------------------
# residual


def test_residual_constant_field():
    grid = GridSpec(0.1, 1.0, 4, -1, 1, 5)
    field = field_from(lambda t, x: np.full(t.shape, 2.0 + 1j), grid)
    rep = fd_residual(field, ProblemSpec(CoefficientProfile.constant(1 + 1j), DataFunction.const(2 + 1j)))
    assert rep.sup_norm < 1e-13 and rep.l2_norm < 1e-13
    assert len(rep.worst) == 4


def test_residual_too_small():
    grid = GridSpec(0.1, 1.0, 2, -1, 1, 5)
    with pytest.raises(DomainError):
        fd_residual(field_from(lambda t, x: t + x, grid), HEAT)


def test_residual_second_order_on_closed_form():
    ex = exact_field("heat_gaussian")
    norms = []
    for k in (2, 4, 8):
        grid = GridSpec(0.2, 0.6, 8 * k + 1, -3.0, 3.0, 24 * k + 1)
        norms.append(fd_residual(field_from(ex.u, grid), HEAT).sup_norm)
    rates = np.log2(np.array(norms[:-1]) / np.array(norms[1:]))
    assert np.all(rates > 1.85)


def test_residual_of_kernel_solution_converges():
    norms = []
    for k in (1, 2):
        grid = GridSpec(0.3, 0.5, 4 * k + 1, -1.0, 1.0, 8 * k + 1)
        norms.append(fd_residual(solve_grid(HEAT, grid), HEAT).sup_norm)
    assert norms[1] < norms[0] / 3


def test_residual_discriminates_duhamel_form():
    two = CoefficientProfile.constant(2.0)
    grid = GridSpec(0.5, 1.0, 5, -1.0, 1.0, 9)
    unweighted = ProblemSpec(two, DataFunction.zero(), SteadySource(DataFunction.const(1)),
                        duhamel_form="paper")
    corrected = ProblemSpec(two, DataFunction.zero(), SteadySource(DataFunction.const(1)))
    assert abs(fd_residual(solve_grid(unweighted, grid), unweighted).sup_norm - 1.0) < 1e-4
    assert fd_residual(solve_grid(corrected, grid), corrected).sup_norm < 1e-4


def test_residual_patches():
    rep = residual_patches(HEAT, [0.2, 0.5], [-1.0, 0.0, 1.5])
    assert rep.sup_norm < 1e-3
    assert len(rep.worst) == 2


# --------------------------------------------------------------------------
# initial trace


def test_initial_trace_gaussian():
    rep = initial_check(HEAT, [4.0 ** -k for k in range(1, 6)], np.linspace(-3, 3, 25))
    assert rep.monotone
    assert rep.errors[-1] <= 1e-2 * rep.errors[0]
    assert rep.passed


def test_initial_trace_constant():
    prob = ProblemSpec(CoefficientProfile.constant(1 + 1j), DataFunction.const(1.5))
    rep = initial_check(prob, [0.5, 0.1, 0.01], np.linspace(-1, 1, 5))
    assert max(rep.errors) <= 1e-9


def test_initial_trace_sine():
    prob = ProblemSpec(ONE, DataFunction.sine())
    xs = np.linspace(-math.pi, math.pi, 33)  # includes +-pi/2 where |sin| = 1
    times = [0.5, 0.25, 0.125]
    rep = initial_check(prob, times, xs)
    for t, e in zip(times, rep.errors):
        assert abs(e - (1 - math.exp(-t))) < 1e-8


def test_initial_trace_validation():
    with pytest.raises(DomainError):
        initial_check(HEAT, [0.1, 0.2], [0.0])
    with pytest.raises(DomainError):
        initial_check(HEAT, [0.1, -0.1], [0.0])


# --------------------------------------------------------------------------
# Crank-Nicolson oracle


def test_thomas_against_dense_solve():
    n = 12
    diag, off = 2.0 + 0.5j, -0.7 + 0.2j
    mat = np.diag(np.full(n, diag)) + np.diag(np.full(n - 1, off), 1) + np.diag(np.full(n - 1, off), -1)
    rhs = np.arange(n) + 1j * np.cos(np.arange(n))
    x = np.array(_Tridiagonal(diag, off, n, 1e-14).solve(list(rhs)))
    assert np.allclose(x, np.linalg.solve(mat, rhs), atol=1e-13)


def test_oracle_heat_benchmark():
    grid = GridSpec(0.5, 0.5, 1, -4.0, 4.0, 41)
    oracle = cn_oracle(HEAT, grid, 12.0, 1e-3, 0.02)
    sup, _ = compare_fields(oracle, exact_solution_field(exact_field("heat_gaussian"), grid))
    assert sup < 1e-4


def test_oracle_second_order_in_time():
    prob = ProblemSpec(CoefficientProfile.constant(1 + 0.5j), DataFunction.gaussian())
    grid = GridSpec(0.8, 0.8, 1, -3.0, 3.0, 13)
    ref = cn_oracle(prob, grid, 10.0, 0.0025, 0.05)
    errs = [compare_fields(cn_oracle(prob, grid, 10.0, dt, 0.05), ref)[0] for dt in (0.08, 0.04)]
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_oracle_zero_field():
    prob = ProblemSpec(ONE, DataFunction.zero())
    oracle = cn_oracle(prob, GridSpec(1e-3, 1e-3, 1, -1, 1, 5), 5.0, 1e-3)
    assert np.all(oracle.values == 0)


def test_oracle_with_source_and_varying_coefficient():
    arc = CoefficientProfile.phase_arc(0, math.pi / 4, 0.2, 0.6)
    src, phi, ex = mms_source("t_gaussian", arc)
    prob = ProblemSpec(arc, phi, src)
    grid = GridSpec(0.3, 0.9, 3, -2.0, 2.0, 9)
    sup, _ = compare_fields(cn_oracle(prob, grid, 10.0, 1e-3, 0.02), exact_solution_field(ex, grid))
    assert sup < 1e-4


def test_oracle_domain_checks():
    with pytest.raises(DomainTooSmallError):
        cn_oracle(ProblemSpec(ONE, DataFunction.sine()), GridSpec(0.1, 0.1, 1, 0, 0, 1), 5.0, 1e-2)
    with pytest.raises(DomainError):
        cn_oracle(HEAT, GridSpec(0.1, 0.1, 1, -9, 9, 3), 5.0, 1e-2)
    with pytest.raises(DomainError):
        cn_oracle(HEAT, GridSpec(0.1, 0.1, 1, 0, 0, 1), 5.0, 1e-2, theta=0.3)


def test_oracle_backward_euler_variant():
    grid = GridSpec(0.5, 0.5, 1, -2.0, 2.0, 9)
    exact = exact_solution_field(exact_field("heat_gaussian"), grid)
    sup, _ = compare_fields(cn_oracle(HEAT, grid, 10.0, 1e-3, 0.02, theta=1.0), exact)
    assert sup < 1e-3


# --------------------------------------------------------------------------


def test_compare_fields():
    grid = GridSpec(0.1, 1.0, 3, -1, 1, 5)
    a = field_from(lambda t, x: np.sin(x) * t + 1j, grid)
    assert compare_fields(a, a) == (0.0, 0.0)
    b = SolutionField(a.t_grid, a.x_grid, a.values + 1e-3)
    assert compare_fields(a, b)[0] == pytest.approx(1e-3, rel=1e-9)
    other = field_from(lambda t, x: t + x, GridSpec(0.1, 1.0, 3, -1, 1, 6))
    with pytest.raises(DomainError):
        compare_fields(a, other)


def test_kernel_vs_oracle_heat():
    grid = GridSpec(0.1, 1.0, 5, -4.0, 4.0, 41)
    sup, _ = compare_fields(solve_grid(HEAT, grid), cn_oracle(HEAT, grid, 12.0, 1e-3, 0.02))
    assert sup <= 1e-4
