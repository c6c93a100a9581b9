"""Kernel representation of the solution: a convolution of the initial datum
with Q(omega(t), .) plus a Duhamel integral of source slices propagated by
Q(omega(t) - omega(tau), .)."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .coefficients import OMEGA_TOL, P_FLOOR, CoefficientProfile, OmegaCache
from .data import ZERO_SOURCE
from .errors import DegenerateRegimeError, DomainError
from .kernel import decay_radius
from .quadrature import QuadResult, integrate_duhamel, integrate_line

DUHAMEL_FORMS = ("corrected", "paper")
_WINDOW_SAMPLES = 257


@dataclass(frozen=True)
class ProblemSpec:
    """Coefficient, data and numerical settings of one Cauchy problem.

    ``phi`` maps an array of x to values; ``source`` maps (t, x) to values.
    ``duhamel_form="corrected"`` weights each source slice by 1/p(tau);
    ``"paper"`` leaves it unweighted.
    """

    coefficient: CoefficientProfile
    phi: Callable
    source: Callable = ZERO_SOURCE
    hoelder: Optional[tuple] = None
    duhamel_form: str = "corrected"
    quad_tol: float = 1e-10
    rho_min: float = 1e-10
    eps_split: Optional[float] = None
    tail_tol: float = 1e-16
    omega_tol: float = OMEGA_TOL

    def __post_init__(self):
        if self.duhamel_form not in DUHAMEL_FORMS:
            raise DomainError(f"duhamel_form must be one of {DUHAMEL_FORMS}")
        if self.hoelder is not None:
            coeff, alpha = self.hoelder
            if not coeff >= 0:
                raise DomainError("Hoelder constant B must be >= 0")
            if not 0 < alpha <= 1:
                raise DomainError("Hoelder exponent alpha must lie in (0, 1]")
            object.__setattr__(self, "hoelder", (float(coeff), float(alpha)))
        if not self.quad_tol > 0 or not self.rho_min > 0:
            raise DomainError("quad_tol and rho_min must be positive")
        if not 0 < self.tail_tol < 1:
            raise DomainError("tail_tol must lie in (0, 1)")

    @cached_property
    def omega_cache(self) -> OmegaCache:
        return OmegaCache(self.coefficient, tol=self.omega_tol, floor=P_FLOOR)

    def split_width(self, t: float) -> float:
        eps = self.eps_split if self.eps_split is not None else 1e-6 * t
        return min(eps, 0.5 * t)


@dataclass(frozen=True)
class GridSpec:
    t0: float
    t1: float
    nt: int
    x0: float
    x1: float
    nx: int

    def __post_init__(self):
        if self.nt < 1 or self.nx < 1:
            raise DomainError("grid counts must be >= 1")
        if not self.t0 > 0:
            raise DomainError("grid times must be strictly positive")
        if self.nt > 1 and not self.t1 > self.t0:
            raise DomainError("t range must be increasing")
        if self.nx > 1 and not self.x1 > self.x0:
            raise DomainError("x range must be increasing")

    @property
    def times(self) -> np.ndarray:
        return np.linspace(self.t0, self.t1, self.nt) if self.nt > 1 else np.array([float(self.t0)])

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.x0, self.x1, self.nx) if self.nx > 1 else np.array([float(self.x0)])


@dataclass
class SolutionField:
    t_grid: np.ndarray
    x_grid: np.ndarray
    values: np.ndarray
    provenance: dict = field(default_factory=dict)
    evaluations: int = 0

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.t_grid.size, self.x_grid.size):
            raise DomainError("field values do not match the grid")


def _regime_omega(problem, t, tau=None):
    cache = problem.omega_cache
    w = cache.omega(t) if tau is None else cache.omega(t) - cache.omega(tau)
    if not w.real >= problem.rho_min:
        where = f"t={t!r}" if tau is None else f"t={t!r}, tau={tau!r}"
        raise DegenerateRegimeError(
            f"Re omega = {w.real:.3g} < rho_min = {problem.rho_min:.3g} at {where}",
            t=t, tau=tau,
        )
    return w


def _data_scale(values) -> float:
    s = float(np.max(np.abs(values)))
    return s if s > 0 and math.isfinite(s) else 1.0


def _points_of(func):
    getter = getattr(func, "breakpoints", None)
    return getter() if callable(getter) else None


def _convolve(omega, x, data, tail_tol, quad_tol) -> QuadResult:
    """Truncated ``int Q(omega, y - x) data(y) dy`` with absolute tolerance
    ``quad_tol`` times the sampled sup of ``data`` on the window."""
    radius = decay_radius(omega, tail_tol)
    window = np.linspace(x - radius, x + radius, _WINDOW_SAMPLES)
    scale = _data_scale(data(window))
    inv = -0.25 / omega
    log_norm = math.log(2.0) + 0.5 * math.log(math.pi) + 0.5 * np.log(omega)

    def integrand(y):
        z = y - x
        return np.exp(inv * (z * z) - log_norm) * data(y)

    return integrate_line(integrand, x, radius, quad_tol * scale, points=_points_of(data))


def _homogeneous(problem: ProblemSpec, t: float, x: float) -> QuadResult:
    if not t > 0:
        raise DomainError("solution times must be positive")
    w = _regime_omega(problem, t)
    return _convolve(w, x, problem.phi, problem.tail_tol, problem.quad_tol)


def _duhamel(problem: ProblemSpec, t: float, x: float) -> QuadResult:
    if not t > 0:
        raise DomainError("solution times must be positive")
    source = problem.source
    if getattr(source, "is_zero", False):
        return QuadResult(0j, 0.0, 0)
    cache = problem.omega_cache
    profile = problem.coefficient
    corrected = problem.duhamel_form == "corrected"
    w_t = cache.omega(t)
    eps = problem.split_width(t)

    # Fix the absolute tolerance from the source magnitude seen along the way.
    probe = np.linspace(x - 10.0, x + 10.0, 65)
    fscale = max(_data_scale(source(s, probe)) for s in (0.0, 0.5 * t, t))
    inner_tol = problem.quad_tol * fscale
    inv_p = {}

    def weight(tau):
        if not corrected:
            return 1.0
        if tau not in inv_p:
            inv_p[tau] = 1.0 / complex(profile.values(tau))
        return inv_p[tau]

    def inner(tau):
        w = w_t - cache.omega(tau)
        if not w.real >= problem.rho_min:
            raise DegenerateRegimeError(
                f"Re omega0 = {w.real:.3g} < rho_min at t={t!r}, tau={tau!r}", t=t, tau=tau
            )
        res = _convolve(w, x, lambda y: source(tau, y), problem.tail_tol, inner_tol)
        return weight(tau) * res.value

    slice_omega = w_t - cache.omega(t - eps)
    weight_bound = max(abs(weight(t - eps)), abs(weight(t))) if corrected else 1.0
    return integrate_duhamel(
        inner, t, eps, tol=problem.quad_tol * fscale * t,
        hoelder=problem.hoelder, slice_omega=slice_omega, weight_bound=weight_bound,
        points=profile.breakpoints(t - eps),
    )


def solve_homogeneous(problem: ProblemSpec, t: float, x: float) -> complex:
    """Initial-datum term at (t, x)."""
    return _homogeneous(problem, t, x).value


def solve_duhamel(problem: ProblemSpec, t: float, x: float) -> complex:
    """Source term at (t, x)."""
    return _duhamel(problem, t, x).value


def solve_detailed(problem: ProblemSpec, t: float, x: float) -> tuple[complex, int, float]:
    """(value, integrand evaluations, combined error estimate)."""
    h = _homogeneous(problem, t, x)
    d = _duhamel(problem, t, x)
    return h.value + d.value, h.evaluations + d.evaluations, h.error_estimate + d.error_estimate


def solve(problem: ProblemSpec, t: float, x: float) -> complex:
    return solve_detailed(problem, t, x)[0]


def thread_count() -> int:
    raw = os.environ.get("DEGENHEAT_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        n = 1
    return max(1, n)


def solve_grid(problem: ProblemSpec, grid: GridSpec, homogeneous_only: bool = False,
               threads: Optional[int] = None) -> SolutionField:
    """Evaluate the solution on every grid point, t-major.

    Omega checkpoints for the whole time range are filled first, so the
    parallel phase only reads the cache. The first failing point (in
    t-major order) aborts the run.
    """
    times, xs = grid.times, grid.xs
    for t in times:
        _regime_omega(problem, float(t))
    points = [(float(t), float(x)) for t in times for x in xs]

    def one(pt):
        t, x = pt
        try:
            if homogeneous_only:
                r = _homogeneous(problem, t, x)
                return r.value, r.evaluations
            v, n, _ = solve_detailed(problem, t, x)
            return v, n
        except Exception as exc:
            exc.args = (f"at grid point (t={t!r}, x={x!r}): {exc}",) + exc.args[1:]
            exc.point = (t, x)
            raise

    n_threads = threads if threads is not None else thread_count()
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(one, points))
    else:
        results = [one(pt) for pt in points]

    values = np.array([r[0] for r in results], dtype=complex).reshape(times.size, xs.size)
    return SolutionField(
        t_grid=times,
        x_grid=xs,
        values=values,
        provenance={
            "terms": "homogeneous" if homogeneous_only else "homogeneous+duhamel",
            "duhamel_form": problem.duhamel_form,
            "quad_tol": problem.quad_tol,
            "rho_min": problem.rho_min,
            "tail_tol": problem.tail_tol,
            "eps_split": problem.eps_split,
        },
        evaluations=int(sum(r[1] for r in results)),
    )
