"""The complex coefficient p(t), its accumulated inverse and hypothesis checks.

``omega(t)`` is the integral of 1/p over [0, t]; ``omega0(t, tau)`` the
integral over [tau, t]; ``mean_H(t, tau)`` its mean value over that
interval. The checks in :func:`check_conditions` and :func:`lemma_report`
are sampling based: they inspect a finite (adaptively refined) set of
times and say so in their reports.
"""

from __future__ import annotations

import bisect
import math
import threading
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Any, Mapping, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.optimize import minimize_scalar

from .errors import DegenerateCoefficientError, DomainError
from .quadrature import integrate_finite

P_FLOOR = 1e-12
OMEGA_TOL = 1e-12
CHECKPOINT_STEP = 2.0 ** -4

KINDS = ("constant", "phase_arc", "rational", "table")


@dataclass(frozen=True)
class CoefficientProfile:
    """Immutable description of p(t), t >= 0.

    Use the ``constant``, ``phase_arc``, ``rational`` and ``table``
    constructors; they validate and normalize the parameters.
    """

    kind: str
    params: Mapping[str, Any]

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown coefficient kind {self.kind!r}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @classmethod
    def constant(cls, value) -> "CoefficientProfile":
        return cls("constant", {"value": complex(value)})

    @classmethod
    def phase_arc(cls, theta0: float, theta1: float, ramp_start: float, ramp_end: float):
        """p(t) = exp(i theta(t)), theta linear on the ramp and clamped outside."""
        if not ramp_end > ramp_start:
            raise DomainError("phase_arc ramp must have ramp_start < ramp_end")
        return cls("phase_arc", {
            "theta0": float(theta0), "theta1": float(theta1),
            "ramp_start": float(ramp_start), "ramp_end": float(ramp_end),
        })

    @classmethod
    def rational(cls, numerator: Sequence[float], denominator: Sequence[float]):
        """p(t) = N(t) / D(t); coefficients in ascending powers of t."""
        num = tuple(float(c) for c in numerator)
        den = tuple(float(c) for c in denominator)
        if not num or not den or not any(den):
            raise DomainError("rational profile needs nonempty numerator and nonzero denominator")
        return cls("rational", {"numerator": num, "denominator": den})

    @classmethod
    def table(cls, times: Sequence[float], values: Sequence[complex]):
        """Linear interpolation between knots, constant beyond the ends."""
        ts = tuple(float(t) for t in times)
        ps = tuple(complex(p) for p in values)
        if len(ts) != len(ps) or not ts:
            raise DomainError("table needs matching, nonempty knot lists")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise DomainError("table knots must be strictly increasing")
        return cls("table", {"times": ts, "values": ps})

    def values(self, t) -> np.ndarray:
        """Vectorized p(t) without domain checks."""
        t = np.asarray(t, dtype=float)
        kind, prm = self.kind, self.params
        if kind == "constant":
            return np.full(t.shape, prm["value"], dtype=complex)
        if kind == "phase_arc":
            a, b = prm["ramp_start"], prm["ramp_end"]
            s = np.clip((t - a) / (b - a), 0.0, 1.0)
            theta = prm["theta0"] + (prm["theta1"] - prm["theta0"]) * s
            return np.exp(1j * theta)
        if kind == "rational":
            with np.errstate(divide="ignore", invalid="ignore"):
                return (P.polyval(t, prm["numerator"]) / P.polyval(t, prm["denominator"])).astype(complex)
        ts = np.asarray(prm["times"])
        ps = np.asarray(prm["values"])
        return np.interp(t, ts, ps.real) + 1j * np.interp(t, ts, ps.imag)

    def breakpoints(self, t_max: float = math.inf) -> list[float]:
        """Times in (0, t_max) where p may fail to be smooth."""
        if self.kind == "phase_arc":
            pts = [self.params["ramp_start"], self.params["ramp_end"]]
        elif self.kind == "table":
            pts = list(self.params["times"])
        else:
            pts = []
        return sorted(p for p in pts if 0 < p < t_max)


def eval_p(profile: CoefficientProfile, t: float) -> complex:
    if not t >= 0:
        raise DomainError(f"p(t) is defined for t >= 0, got t={t}")
    return complex(profile.values(t))


def eval_p_inv(profile: CoefficientProfile, t: float, floor: float = P_FLOOR) -> complex:
    p = eval_p(profile, t)
    if not abs(p) >= floor:
        raise DegenerateCoefficientError(
            f"|p({t})| = {abs(p):.3g} is below the floor {floor:.3g}", t=t
        )
    return 1.0 / p


def _inverse_values(profile, t, floor):
    p = profile.values(t)
    mag = np.abs(p)
    bad = ~(mag >= floor)
    if np.any(bad):
        where = float(np.asarray(t).ravel()[np.flatnonzero(bad.ravel())[0]])
        raise DegenerateCoefficientError(
            f"|p({where})| is below the floor {floor:.3g}", t=where
        )
    return 1.0 / p


class OmegaCache:
    """Accumulated integral of 1/p with cached checkpoints.

    Checkpoints sit at multiples of ``step`` (a power of two). ``omega(t)``
    adds the integral from the nearest checkpoint below ``t``, so repeated
    queries cost at most one short adaptive integral each. Checkpoint
    insertion is serialized with a lock; reads never block.
    """

    def __init__(self, profile: CoefficientProfile, tol: float = OMEGA_TOL,
                 step: float = CHECKPOINT_STEP, floor: float = P_FLOOR):
        self.profile = profile
        self.tol = tol
        self.step = step
        self.floor = floor
        self._breaks = profile.breakpoints()
        self._checkpoints = [0j]
        self._lock = threading.Lock()

    @property
    def checkpoint_grid(self) -> np.ndarray:
        return self.step * np.arange(len(self._checkpoints))

    def _piece(self, a: float, b: float) -> complex:
        lo = bisect.bisect_right(self._breaks, a)
        hi = bisect.bisect_left(self._breaks, b)
        res = integrate_finite(
            lambda s: _inverse_values(self.profile, s, self.floor),
            a, b, self.tol * max(b - a, 1e-300) / self.step,
            points=self._breaks[lo:hi],
        )
        return res.value

    def _ensure(self, k: int) -> None:
        if k < len(self._checkpoints):
            return
        with self._lock:
            while len(self._checkpoints) <= k:
                j = len(self._checkpoints) - 1
                a, b = j * self.step, (j + 1) * self.step
                self._checkpoints.append(self._checkpoints[j] + self._piece(a, b))

    def omega(self, t: float) -> complex:
        if not t >= 0:
            raise DomainError(f"omega needs t >= 0, got t={t}")
        k = int(math.floor(t / self.step))
        self._ensure(k)
        base = k * self.step
        if t == base:
            return self._checkpoints[k]
        return self._checkpoints[k] + self._piece(base, t)


def omega(cache: OmegaCache, t: float) -> complex:
    return cache.omega(t)


def omega0(cache: OmegaCache, t: float, tau: float) -> complex:
    if tau > t:
        raise DomainError(f"omega0 needs tau <= t, got t={t}, tau={tau}")
    if tau == t:
        return 0j
    return cache.omega(t) - cache.omega(tau)


def mean_H(cache: OmegaCache, t: float, tau: float) -> complex:
    """Mean of 1/p over [tau, t]; with tau = 0 this is H1(t)."""
    if not t > tau:
        raise DomainError(f"mean_H needs t > tau, got t={t}, tau={tau}")
    return omega0(cache, t, tau) / (t - tau)


# --------------------------------------------------------------------------
# hypothesis checks


@dataclass
class ConditionReport:
    t_max: float
    samples: int
    min_spacing: float
    continuous_ok: bool
    max_refined_jump: float
    nonvanishing_ok: bool
    min_abs_p: float
    min_abs_p_t: float
    repart_ok: bool
    min_re_p: float
    min_re_p_t: float
    re_p0: float
    p0_estimate: Optional[float]
    im_integral_inf: Optional[float]
    positive_segments: list = field(default_factory=list)
    sampling_based: bool = True

    @property
    def p0_ok(self) -> bool:
        return self.p0_estimate is not None and math.isfinite(self.p0_estimate)

    @property
    def passed(self) -> bool:
        return self.continuous_ok and self.nonvanishing_ok and self.repart_ok and self.p0_ok

    def as_dict(self) -> dict:
        return {
            "t_max": self.t_max,
            "samples": self.samples,
            "min_spacing": self.min_spacing,
            "sampling_based": self.sampling_based,
            "continuous_ok": self.continuous_ok,
            "max_refined_jump": self.max_refined_jump,
            "nonvanishing_ok": self.nonvanishing_ok,
            "min_abs_p": self.min_abs_p,
            "min_abs_p_t": self.min_abs_p_t,
            "repart_ok": self.repart_ok,
            "min_re_p": self.min_re_p,
            "min_re_p_t": self.min_re_p_t,
            "re_p0": self.re_p0,
            "p0_ok": self.p0_ok,
            "p0_estimate": self.p0_estimate,
            "im_integral_inf": self.im_integral_inf,
            "positive_segments": [list(s) for s in self.positive_segments],
            "passed": self.passed,
        }


def _refined_jump(profile, lo, hi, depth=40):
    """Follow the larger half-jump down ``depth`` bisections; return the last jump."""
    for _ in range(depth):
        mid = 0.5 * (lo + hi)
        p_lo, p_mid, p_hi = profile.values(np.array([lo, mid, hi]))
        if not np.all(np.isfinite([p_lo, p_mid, p_hi])):
            return math.inf
        if abs(p_mid - p_lo) >= abs(p_hi - p_mid):
            hi = mid
        else:
            lo = mid
    jump = abs(complex(profile.values(hi)) - complex(profile.values(lo)))
    return jump if math.isfinite(jump) else math.inf


def _sign_change(profile, lo, hi, positive_at_lo, floor, iters=80):
    """Bisect for the boundary of {Re p > floor} between lo and hi."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if (complex(profile.values(mid)).real > floor) == positive_at_lo:
            lo = mid
        else:
            hi = mid
    return hi if positive_at_lo else lo


def positive_segments(profile: CoefficientProfile, t_max: float, samples: int = 1024,
                      floor: float = P_FLOOR) -> list[tuple[float, float]]:
    """Maximal subintervals of [0, t_max] where Re p > floor, from a sample."""
    ts = np.union1d(np.linspace(0.0, t_max, samples), profile.breakpoints(t_max))
    pos = profile.values(ts).real > floor
    segments = []
    start = 0.0 if pos[0] else None
    for i in range(1, ts.size):
        if pos[i] == pos[i - 1]:
            continue
        edge = _sign_change(profile, ts[i - 1], ts[i], bool(pos[i - 1]), floor)
        if pos[i]:
            start = edge
        else:
            if start is not None and edge > start:
                segments.append((float(start), float(edge)))
            start = None
    if start is not None and t_max > start:
        segments.append((float(start), float(t_max)))
    return segments


def check_conditions(profile: CoefficientProfile, t_max: float, samples: int = 1024,
                     floor: float = P_FLOOR, jump_tol: float = 1e-6) -> ConditionReport:
    """Sample-based verdicts on continuity, nonvanishing, Re p >= 0 and the
    bounded imaginary integral, plus the maximal segments where Re p > 0."""
    if not t_max > 0:
        raise DomainError("t_max must be positive")
    if samples < 2:
        raise DomainError("need at least two samples")

    ts = np.union1d(np.linspace(0.0, t_max, samples), profile.breakpoints(t_max))
    ps = profile.values(ts)
    finite = np.isfinite(ps)
    scale = 1.0 + float(np.max(np.abs(ps[finite]))) if np.any(finite) else 1.0

    # 1: continuity, by chasing the largest sampled jumps down to tiny widths
    if not np.all(finite):
        continuous_ok, worst_jump = False, math.inf
    else:
        jumps = np.abs(np.diff(ps))
        worst_jump = 0.0
        for i in np.argsort(jumps)[::-1][:8]:
            worst_jump = max(worst_jump, _refined_jump(profile, ts[i], ts[i + 1]))
        continuous_ok = worst_jump <= jump_tol * scale

    # 2: nonvanishing, with a local minimization around the smallest sample
    mags = np.where(finite, np.abs(ps), np.inf)
    i = int(np.argmin(mags))
    min_abs, min_abs_t = float(mags[i]), float(ts[i])
    lo, hi = ts[max(i - 1, 0)], ts[min(i + 1, ts.size - 1)]
    if hi > lo:
        res = minimize_scalar(lambda s: abs(complex(profile.values(s))),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12 * max(t_max, 1.0)})
        if res.fun < min_abs:
            min_abs, min_abs_t = float(res.fun), float(res.x)
    nonvanishing_ok = min_abs >= floor

    # 3: Re p >= 0 everywhere and Re p(0) > 0
    re = np.where(finite, ps.real, -np.inf)
    j = int(np.argmin(re))
    min_re, min_re_t = float(re[j]), float(ts[j])
    re_p0 = float(ps[0].real) if finite[0] else -math.inf
    repart_ok = min_re >= -floor and re_p0 > floor

    # 4: the running integral of Im(1/p), via the accumulated omega
    p0_estimate = im_inf = None
    if nonvanishing_ok and np.all(finite):
        cache = OmegaCache(profile, floor=floor)
        im = np.array([cache.omega(float(t)).imag for t in ts])
        p0_estimate = float(max(0.0, im.max()))
        im_inf = float(min(0.0, im.min()))

    return ConditionReport(
        t_max=float(t_max),
        samples=int(ts.size),
        min_spacing=float(np.min(np.diff(ts))),
        continuous_ok=bool(continuous_ok),
        max_refined_jump=float(worst_jump),
        nonvanishing_ok=bool(nonvanishing_ok),
        min_abs_p=min_abs,
        min_abs_p_t=min_abs_t,
        repart_ok=bool(repart_ok),
        min_re_p=min_re,
        min_re_p_t=min_re_t,
        re_p0=re_p0,
        p0_estimate=p0_estimate,
        im_integral_inf=im_inf,
        positive_segments=positive_segments(profile, t_max, samples, floor),
    )


# --------------------------------------------------------------------------
# lemma diagnostics


@dataclass(frozen=True)
class LemmaRow:
    lemma: int
    t: float
    tau: float
    H: complex
    abs_H: float
    arg_H: float
    delta_margin: float
    lhs: float
    mid: float
    rhs: float
    applicable: bool
    note: str = ""

    @property
    def identity_error(self) -> float:
        return abs(self.lhs - self.mid)

    @property
    def mid_minus_rhs(self) -> float:
        return self.mid - self.rhs


@dataclass
class LemmaReport:
    rows: list
    identity_tol: float

    def identity_ok(self) -> bool:
        return all(r.identity_error <= self.identity_tol * max(1.0, abs(r.lhs))
                   for r in self.rows if not math.isnan(r.lhs))

    def margins_ok(self) -> bool:
        return all(0.0 <= r.delta_margin <= 0.5 * math.pi for r in self.rows if r.applicable)

    @property
    def passed(self) -> bool:
        return self.identity_ok() and self.margins_ok()


def _row(cache, lemma, t, tau, applicable, note):
    H = mean_H(cache, t, tau)
    width = t - tau
    abs_h = abs(H)
    arg_h = math.atan2(H.imag, H.real)
    delta = 0.5 * math.pi - abs(arg_h)
    lhs = omega0(cache, t, tau).real
    mid = width * abs_h * math.cos(arg_h)
    rhs = width * abs_h * math.sin(delta)
    return LemmaRow(lemma, float(t), float(tau), H, abs_h, arg_h, delta, lhs, mid, rhs,
                    applicable, note)


def _re_positive_on(profile, tau, t, floor, samples=257):
    ts = np.union1d(np.linspace(tau, t, samples), [b for b in profile.breakpoints(t) if b > tau])
    return bool(np.all(profile.values(ts).real > floor))


def lemma_report(cache: OmegaCache, eval_points: Sequence[tuple[float, float]],
                 identity_tol: float = 1e-12) -> LemmaReport:
    """Rows for the mean-value estimates on each ``(t, tau)`` pair.

    For every pair: one row for the interval estimate (needs Re p > 0 on
    all of [tau, t]) and one for the pointwise variant (needs Re p(tau) > 0).
    For every distinct t: one row for the estimate from 0. Rows whose
    hypotheses fail are kept and flagged ``applicable=False``. delta is the
    largest admissible value, pi/2 - |arg H|. The ordering of ``mid`` and
    ``rhs`` is reported through ``mid_minus_rhs`` and never asserted.
    """
    profile, floor = cache.profile, cache.floor
    rows = []
    seen = []
    for t, tau in eval_points:
        t, tau = float(t), float(tau)
        if not t > tau >= 0:
            rows.append(LemmaRow(1, t, tau, complex("nan"), *([math.nan] * 6), False,
                                 "needs t > tau >= 0"))
            continue
        ok1 = _re_positive_on(profile, tau, t, floor)
        rows.append(_row(cache, 1, t, tau, ok1, "" if ok1 else "Re p > 0 fails on [tau, t]"))
        ok2 = complex(profile.values(tau)).real > floor
        rows.append(_row(cache, 2, t, tau, ok2, "" if ok2 else "Re p(tau) > 0 fails"))
        if t not in seen:
            seen.append(t)
    for t in seen:
        rows.append(_row(cache, 3, t, 0.0, True, ""))
    return LemmaReport(rows=rows, identity_tol=identity_tol)
