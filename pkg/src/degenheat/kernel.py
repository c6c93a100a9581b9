"""Complex Gaussian kernel ``Q(omega, z) = exp(-z^2 / (4 omega)) / (2 sqrt(pi omega))``.

``omega`` is the accumulated integral of 1/p (``omega(t)`` for the initial
datum, ``omega(t) - omega(tau)`` for a source slice). The square root is
the principal branch, so for Re omega > 0 the prefactor is continuous in
omega and ``arg sqrt(omega)`` stays inside (-pi/4, pi/4).
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import DegenerateKernelError, DomainError

_LOG_2_SQRT_PI = math.log(2.0) + 0.5 * math.log(math.pi)


class KernelArg(NamedTuple):
    omega: complex
    z: float


def _require_decay(omega) -> complex:
    omega = complex(omega)
    if not omega.real > 0:
        raise DegenerateKernelError(
            f"kernel needs Re omega > 0, got omega={omega!r}", omega=omega
        )
    return omega


def kernel_eval(omega, z):
    """Evaluate Q(omega, z); ``z`` may be a scalar or an array.

    Works in log form, so far-field values underflow quietly to 0 instead
    of producing inf * 0.
    """
    omega = _require_decay(omega)
    inv = 1.0 / omega
    z = np.asarray(z, dtype=float)
    log_q = (-0.25 * inv) * (z * z) - (_LOG_2_SQRT_PI + 0.5 * np.log(omega))
    with np.errstate(under="ignore"):
        out = np.exp(log_q)
    if out.ndim == 0:
        return complex(out)
    return out


def kernel_mass(omega) -> complex:
    """Exact value of the integral of Q(omega, .) over the line (always 1)."""
    _require_decay(omega)
    return 1.0 + 0.0j


def decay_radius(omega, tol: float) -> float:
    """Radius beyond which ``|exp(-z^2 / (4 omega))| <= tol``."""
    omega = _require_decay(omega)
    if not 0 < tol < 1:
        if tol == 1:
            return 0.0
        raise DomainError(f"tol must lie in (0, 1), got {tol}")
    return math.sqrt(4.0 * abs(omega) ** 2 * math.log(1.0 / tol) / omega.real)


def absolute_moment(omega, alpha: float = 0.0) -> float:
    """``int |Q(omega, z)| |z|^alpha dz`` in closed form.

    alpha = 0 gives the L1 norm ``sqrt(|omega| / Re omega)``, which is 1 only
    for real omega.
    """
    omega = _require_decay(omega)
    if alpha < 0:
        raise DomainError("alpha must be nonnegative")
    mod = abs(omega)
    width = 4.0 * mod * mod / omega.real
    return math.gamma(0.5 * (alpha + 1.0)) * width ** (0.5 * (alpha + 1.0)) / (
        2.0 * math.sqrt(math.pi * mod)
    )


def l1_norm(omega) -> float:
    return absolute_moment(omega, 0.0)
