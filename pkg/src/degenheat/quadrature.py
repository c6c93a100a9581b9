"""Adaptive Gauss-Kronrod integration of complex-valued integrands.

Integrands are called with a 1-D float array of nodes and must return an
array of the same shape (real or complex). All panels that need refinement
in one sweep are evaluated together, so a single integrand call sees many
panels at once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, NonConvergenceError
from .kernel import absolute_moment

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod nodes (1, 3, 5 from each end, plus 0).
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[[13, 11, 9]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]

MAX_PANELS = 2 ** 20
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QuadResult:
    value: complex
    error_estimate: float
    evaluations: int
    slice_bound: Optional[float] = None


def _apply_rules(integrand, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    fx = np.asarray(integrand(x.ravel()), dtype=complex).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        bad = x[~np.isfinite(fx)][0]
        raise ValueError(f"integrand is not finite at x={bad!r}")
    kronrod = half * (fx @ KRONROD_WEIGHTS)
    gauss = half * (fx @ GAUSS_WEIGHTS)
    resabs = np.abs(half) * (np.abs(fx) @ KRONROD_WEIGHTS)
    return kronrod, np.abs(kronrod - gauss), resabs


def integrate_finite(
    integrand: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float,
    points: Optional[Sequence[float]] = None,
    max_panels: int = MAX_PANELS,
) -> QuadResult:
    """Integrate ``integrand`` over [a, b] to absolute tolerance ``tol``.

    Each panel carries the 15-point Kronrod value and the difference to the
    embedded 7-point Gauss value as its error estimate. While the summed
    estimate exceeds ``tol`` every panel whose estimate exceeds its share
    ``tol / n_panels`` is bisected (the worst panel always qualifies).
    Panels whose estimate is already at rounding level are not split.
    ``points`` are interior breakpoints (kinks of the integrand) that
    always become panel edges.
    """
    a = float(a)
    b = float(b)
    if not b >= a:
        raise DomainError(f"integration limits must satisfy a <= b, got [{a}, {b}]")
    if not tol > 0:
        raise DomainError("tol must be positive")
    if a == b:
        return QuadResult(0j, 0.0, 0)

    edges = [a]
    if points is not None:
        edges += sorted(float(p) for p in points if a < p < b)
    edges.append(b)
    edges = np.unique(np.asarray(edges))
    lo, hi = edges[:-1], edges[1:]
    value, err, resabs = _apply_rules(integrand, lo, hi)
    evaluations = 15 * lo.size
    min_width = 64 * _EPS * max(abs(a), abs(b), b - a)

    while True:
        total = float(np.sum(err))
        if total <= tol:
            break
        rounding = err <= 50 * _EPS * resabs
        narrow = (hi - lo) <= min_width
        split = (err > tol / lo.size) & ~rounding & ~narrow
        if not np.any(split):
            partial = QuadResult(complex(np.sum(value)), total, evaluations)
            raise NonConvergenceError(
                f"quadrature on [{a}, {b}] stalled at error {total:.3g} > tol {tol:.3g}",
                partial=partial,
            )
        if lo.size + int(np.count_nonzero(split)) > max_panels:
            partial = QuadResult(complex(np.sum(value)), total, evaluations)
            raise NonConvergenceError(
                f"quadrature on [{a}, {b}] exceeded {max_panels} panels "
                f"with error {total:.3g} > tol {tol:.3g}",
                partial=partial,
            )
        mid = 0.5 * (lo[split] + hi[split])
        new_lo = np.concatenate([lo[split], mid])
        new_hi = np.concatenate([mid, hi[split]])
        v, e, r = _apply_rules(integrand, new_lo, new_hi)
        evaluations += 15 * new_lo.size
        keep = ~split
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        value = np.concatenate([value[keep], v])
        err = np.concatenate([err[keep], e])
        resabs = np.concatenate([resabs[keep], r])
        order = np.argsort(lo, kind="stable")
        lo, hi, value, err, resabs = lo[order], hi[order], value[order], err[order], resabs[order]

    return QuadResult(complex(np.sum(value)), float(np.sum(err)), evaluations)


def integrate_line(integrand, center: float, radius: float, tol: float, points=None) -> QuadResult:
    """Integrate over [center - radius, center + radius].

    Stands in for an integral over the whole line: the caller picks
    ``radius`` (normally from :func:`degenheat.kernel.decay_radius`) so the
    integrand is negligible outside, and the tails are simply not included.
    """
    if not radius > 0:
        raise DomainError("radius must be positive")
    return integrate_finite(integrand, center - radius, center + radius, tol, points=points)


def integrate_duhamel(
    inner: Callable[[float], complex],
    t: float,
    eps_split: Optional[float] = None,
    tol: float = 1e-10,
    hoelder: Optional[tuple] = None,
    slice_omega: Optional[complex] = None,
    weight_bound: float = 1.0,
    points: Optional[Sequence[float]] = None,
) -> QuadResult:
    """Time integral of the Duhamel term, ``int_0^t inner(tau) dtau``.

    ``inner(tau)`` is the spatial integral at time ``tau``. The bulk
    [0, t - eps_split] is integrated adaptively; the last slice is taken as
    ``eps_split * inner(t - eps_split)``. With Hoelder data ``(B, alpha)``
    and the kernel argument on the slice, the slice error is bounded by
    ``eps_split * weight_bound * B * int |Q||z|^alpha dz`` and added to the
    error estimate; without it ``slice_bound`` is None.
    """
    t = float(t)
    if eps_split is None:
        eps_split = 1e-6 * t
    if not 0 < eps_split < t:
        raise DomainError(f"need 0 < eps_split < t, got eps_split={eps_split}, t={t}")

    def vectorized(taus):
        return np.array([inner(float(tau)) for tau in taus], dtype=complex)

    split_at = t - eps_split
    bulk = integrate_finite(vectorized, 0.0, split_at, tol, points=points)
    tail = eps_split * complex(inner(split_at))

    slice_bound = None
    if hoelder is not None and slice_omega is not None:
        coeff, alpha = hoelder
        slice_bound = eps_split * weight_bound * coeff * absolute_moment(slice_omega, alpha)
    error = bulk.error_estimate + (slice_bound if slice_bound is not None else 0.0)
    return QuadResult(bulk.value + tail, error, bulk.evaluations + 1, slice_bound)


__all__ = [
    "QuadResult",
    "integrate_finite",
    "integrate_line",
    "integrate_duhamel",
    "MAX_PANELS",
]

