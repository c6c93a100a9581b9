"""Checks on computed solutions that do not go through the kernel formula.

* :func:`fd_residual` plugs a field into the PDE with centered differences;
* :func:`initial_check` measures how the solution approaches its datum;
* :func:`cn_oracle` integrates the PDE directly with Crank-Nicolson steps;
* :func:`mms_source` builds source and datum for a known exact solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .coefficients import CoefficientProfile, eval_p_inv
from .errors import DomainError, DomainTooSmallError, OracleError
from .solver import GridSpec, ProblemSpec, SolutionField, solve

# --------------------------------------------------------------------------
# manufactured solutions


@dataclass(frozen=True)
class ExactField:
    name: str
    u: Callable
    u_t: Callable
    u_xx: Callable


def _heat_u(t, x):
    s = 1.0 + 4.0 * t
    return s ** -0.5 * np.exp(-x * x / s)


def _heat_uxx(t, x):
    s = 1.0 + 4.0 * t
    return _heat_u(t, x) * (4.0 * x * x / s - 2.0) / s


def exact_field(name: str, c: complex = 1.0) -> ExactField:
    """Registry of smooth exact fields with closed-form derivatives."""
    if name == "const":
        return ExactField(
            name,
            lambda t, x: np.full(np.broadcast(t, x).shape, c, dtype=complex),
            lambda t, x: np.zeros(np.broadcast(t, x).shape, dtype=complex),
            lambda t, x: np.zeros(np.broadcast(t, x).shape, dtype=complex),
        )
    if name == "t_gaussian":
        return ExactField(
            name,
            lambda t, x: t * np.exp(-x * x),
            lambda t, x: np.exp(-x * x) + 0.0 * t,
            lambda t, x: t * (4.0 * x * x - 2.0) * np.exp(-x * x),
        )
    if name == "decaying_sine":
        return ExactField(
            name,
            lambda t, x: np.exp(-t) * np.sin(x),
            lambda t, x: -np.exp(-t) * np.sin(x),
            lambda t, x: -np.exp(-t) * np.sin(x),
        )
    if name == "heat_gaussian":
        return ExactField(name, _heat_u, _heat_uxx, _heat_uxx)
    raise DomainError(f"unknown exact field {name!r}")


EXACT_FIELDS = ("const", "t_gaussian", "decaying_sine", "heat_gaussian")


@dataclass(frozen=True)
class ManufacturedSource:
    """f(t, x) = p(t) u_t - u_xx for a registry field."""

    field_name: str
    coefficient: CoefficientProfile
    c: complex = 1.0

    @property
    def exact(self) -> ExactField:
        return exact_field(self.field_name, self.c)

    @property
    def is_zero(self) -> bool:
        return self.field_name == "const"

    def __call__(self, t, x):
        ex = self.exact
        t_arr = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        p = self.coefficient.values(t_arr)
        return (p * ex.u_t(t_arr, x) - ex.u_xx(t_arr, x)).astype(complex)


@dataclass(frozen=True)
class ManufacturedInitial:
    """phi(x) = u(0, x) for a registry field."""

    field_name: str
    c: complex = 1.0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.asarray(exact_field(self.field_name, self.c).u(0.0, x), dtype=complex)


def mms_source(name: str, coefficient: CoefficientProfile, c: complex = 1.0):
    """Source, datum and exact field that make ``name`` the exact solution."""
    exact_field(name, c)
    return ManufacturedSource(name, coefficient, complex(c)), ManufacturedInitial(name, complex(c)), \
        exact_field(name, c)


def exact_solution_field(ex: ExactField, grid: GridSpec) -> SolutionField:
    t, x = np.meshgrid(grid.times, grid.xs, indexing="ij")
    return SolutionField(grid.times, grid.xs, ex.u(t, x), {"exact": ex.name})


# --------------------------------------------------------------------------
# residual of the PDE


@dataclass
class ResidualReport:
    sup_norm: float
    l2_norm: float
    dt: float
    dx: float
    worst: list = field(default_factory=list)  # (t, x, |r|) per time row

    def as_dict(self) -> dict:
        return {"sup_norm": self.sup_norm, "l2_norm": self.l2_norm, "dt": self.dt,
                "dx": self.dx, "worst": [list(w) for w in self.worst]}


def _uniform_step(grid, name):
    steps = np.diff(grid)
    h = float(steps.mean())
    if not np.allclose(steps, h, rtol=1e-9, atol=0.0):
        raise DomainError(f"{name} grid must be uniform")
    return h


def fd_residual(field: SolutionField, problem: ProblemSpec) -> ResidualReport:
    """Residual p u_t - u_xx - f with second-order differences.

    The time derivative is centered in the interior and one-sided
    second-order at the first and last rows; the second x-derivative is
    centered, so the first and last columns are left out.
    """
    u = field.values
    nt, nx = u.shape
    if nt < 3 or nx < 3:
        raise DomainError("fd_residual needs at least 3 points in t and in x")
    dt = _uniform_step(field.t_grid, "t")
    dx = _uniform_step(field.x_grid, "x")

    u_t = np.empty_like(u)
    u_t[1:-1] = (u[2:] - u[:-2]) / (2 * dt)
    u_t[0] = (-3 * u[0] + 4 * u[1] - u[2]) / (2 * dt)
    u_t[-1] = (3 * u[-1] - 4 * u[-2] + u[-3]) / (2 * dt)
    u_xx = (u[:, 2:] - 2 * u[:, 1:-1] + u[:, :-2]) / (dx * dx)

    ts = field.t_grid
    xs = field.x_grid[1:-1]
    p = problem.coefficient.values(ts)[:, None]
    f = problem.source(ts[:, None], xs[None, :])
    r = np.abs(p * u_t[:, 1:-1] - u_xx - f)

    worst = []
    for i in range(nt):
        j = int(np.argmax(r[i]))
        worst.append((float(ts[i]), float(xs[j]), float(r[i, j])))
    return ResidualReport(
        sup_norm=float(r.max()),
        l2_norm=float(math.sqrt(np.sum(r * r) * dt * dx)),
        dt=dt, dx=dx, worst=worst,
    )


def residual_patches(problem: ProblemSpec, times: Sequence[float], xs: Sequence[float],
                     ht: float = 1e-3, hx: float = 1e-2) -> ResidualReport:
    """Residual at selected points from small 3x3 stencil fields around each.

    Keeps the finite-difference error at O(ht^2 + hx^2) without solving on a
    fine global grid.
    """
    sup = 0.0
    sq = 0.0
    worst = []
    for t in times:
        if not t - ht > 0:
            raise DomainError("patch times must exceed the time step")
        row_worst = (float(t), float("nan"), -1.0)
        for x in xs:
            tg = np.array([t - ht, t, t + ht])
            xg = np.array([x - hx, x, x + hx])
            vals = np.array([[solve(problem, float(a), float(b)) for b in xg] for a in tg])
            rep = fd_residual(SolutionField(tg, xg, vals), problem)
            # the centered row is the accurate one
            r = rep.worst[1][2]
            sup = max(sup, r)
            sq += r * r
            if r > row_worst[2]:
                row_worst = (float(t), float(x), r)
        worst.append(row_worst)
    n = max(1, len(times) * len(xs))
    return ResidualReport(sup_norm=sup, l2_norm=math.sqrt(sq / n), dt=ht, dx=hx, worst=worst)


# --------------------------------------------------------------------------
# initial trace


@dataclass
class InitialTraceReport:
    times: list
    errors: list
    slack: float

    @property
    def monotone(self) -> bool:
        return all(b <= a + self.slack for a, b in zip(self.errors, self.errors[1:]))

    @property
    def ratio(self) -> float:
        return self.errors[-1] / self.errors[0] if self.errors[0] > 0 else 0.0

    @property
    def passed(self) -> bool:
        return self.monotone and (self.errors[-1] <= 1e-2 * self.errors[0] + self.slack)

    def as_dict(self) -> dict:
        return {"times": list(self.times), "errors": list(self.errors), "monotone": self.monotone,
                "ratio": self.ratio, "passed": self.passed}


def initial_check(problem: ProblemSpec, times: Sequence[float], x_grid: Sequence[float],
                  slack: float = 1e-8) -> InitialTraceReport:
    """sup_x |u(t_k, x) - phi(x)| for a decreasing sequence of times."""
    times = [float(t) for t in times]
    if any(t <= 0 for t in times):
        raise DomainError("initial_check times must be positive")
    if any(b >= a for a, b in zip(times, times[1:])):
        raise DomainError("initial_check times must be decreasing")
    xs = np.asarray(x_grid, dtype=float)
    phi = problem.phi(xs)
    errors = []
    for t in times:
        u = np.array([solve(problem, t, float(x)) for x in xs])
        errors.append(float(np.max(np.abs(u - phi))))
    return InitialTraceReport(times, errors, slack)


# --------------------------------------------------------------------------
# Crank-Nicolson oracle


class _Tridiagonal:
    """LU factors of a constant-off-diagonal tridiagonal matrix (Thomas)."""

    def __init__(self, diag: complex, off: complex, n: int, pivot_floor: float):
        c_prime = [0j] * n
        inv_den = [0j] * n
        den = diag
        for i in range(n):
            if i > 0:
                den = diag - off * c_prime[i - 1]
            if abs(den) < pivot_floor:
                raise OracleError(f"tridiagonal pivot {abs(den):.3g} below floor at row {i}")
            inv_den[i] = 1.0 / den
            c_prime[i] = off / den
        self.off = off
        self.c_prime = c_prime
        self.inv_den = inv_den

    def solve(self, rhs):
        n = len(rhs)
        off, cp, inv = self.off, self.c_prime, self.inv_den
        d = [0j] * n
        prev = 0j
        for i in range(n):
            prev = (rhs[i] - off * prev) * inv[i]
            d[i] = prev
        for i in range(n - 2, -1, -1):
            d[i] -= cp[i] * d[i + 1]
        return d


def cn_oracle(problem: ProblemSpec, grid: GridSpec, halfwidth: float, dt: float,
              dx: float = 0.02, theta: float = 0.5, tail_tol: float = 1e-10,
              pivot_floor: float = 1e-14) -> SolutionField:
    """Theta-scheme solution of u_t = (u_xx + f) / p on [-L, L], u(+-L) = 0.

    1/p is frozen at each step midpoint. Steps land exactly on the grid
    times; the x values are read off with a cubic spline.
    """
    if not 0.5 <= theta <= 1.0:
        raise DomainError("theta must lie in [1/2, 1]")
    if not dt > 0 or not dx > 0:
        raise DomainError("dt and dx must be positive")
    L = float(halfwidth)
    xs_req = grid.xs
    if xs_req.min() < -L or xs_req.max() > L:
        raise DomainError("requested x grid leaves the oracle domain")
    n_cells = int(round(2 * L / dx))
    nodes = np.linspace(-L, L, n_cells + 1)
    h = nodes[1] - nodes[0]
    inner = nodes[1:-1]

    edge = np.array([-L, L])
    phi_all = problem.phi(nodes)
    scale = max(1.0, float(np.max(np.abs(phi_all))))
    if np.max(np.abs(problem.phi(edge))) > tail_tol * scale:
        raise DomainTooSmallError(f"|phi| at +-{L} exceeds the tail tolerance")
    for t in grid.times:
        if np.max(np.abs(problem.source(float(t), edge))) > tail_tol * scale:
            raise DomainTooSmallError(f"|f({t}, +-{L})| exceeds the tail tolerance")

    u = np.asarray(problem.phi(inner), dtype=complex)
    t_now = 0.0
    f_now = np.asarray(problem.source(0.0, inner), dtype=complex)
    factor, factor_key = None, None
    rows = []
    for target in grid.times:
        span = float(target) - t_now
        steps = max(1, int(math.ceil(span / dt - 1e-9)))
        k = span / steps
        for _ in range(steps):
            t_next = t_now + k
            m = eval_p_inv(problem.coefficient, t_now + 0.5 * k)
            r = m * k / (h * h)
            key = (m, k)
            if key != factor_key:
                factor = _Tridiagonal(1.0 + 2.0 * theta * r, -theta * r, inner.size, pivot_floor)
                factor_key = key
            f_next = np.asarray(problem.source(t_next, inner), dtype=complex)
            lap = np.empty_like(u)
            lap[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2]
            lap[0] = u[1] - 2.0 * u[0]
            lap[-1] = u[-2] - 2.0 * u[-1]
            rhs = u + (1.0 - theta) * r * lap + m * k * (theta * f_next + (1.0 - theta) * f_now)
            u = np.array(factor.solve(rhs.tolist()), dtype=complex)
            t_now, f_now = t_next, f_next
        full = np.concatenate([[0j], u, [0j]])
        re = CubicSpline(nodes, full.real)(xs_req)
        im = CubicSpline(nodes, full.imag)(xs_req)
        rows.append(re + 1j * im)

    return SolutionField(
        grid.times, xs_req, np.array(rows),
        {"oracle": "crank_nicolson", "theta": theta, "dt": dt, "dx": h, "halfwidth": L},
    )


# --------------------------------------------------------------------------


def compare_fields(a: SolutionField, b: SolutionField) -> tuple[float, float]:
    """(sup, L2) norms of a - b; the L2 norm uses grid-cell weights."""
    if not (np.array_equal(a.t_grid, b.t_grid) and np.array_equal(a.x_grid, b.x_grid)):
        raise DomainError("fields live on different grids")
    d = np.abs(a.values - b.values)
    wt = float(np.diff(a.t_grid).mean()) if a.t_grid.size > 1 else 1.0
    wx = float(np.diff(a.x_grid).mean()) if a.x_grid.size > 1 else 1.0
    return float(d.max()), float(math.sqrt(np.sum(d * d) * wt * wx))
