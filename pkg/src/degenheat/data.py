"""Named bounded data functions for the initial datum and the source term."""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Any, Mapping, Sequence

import numpy as np

from .errors import DomainError

DATA_KINDS = ("zero", "const", "gaussian", "sine", "sech", "table")


@dataclass(frozen=True)
class DataFunction:
    """A bounded continuous function of x from the built-in registry.

    Tabulated data is linearly interpolated and extended by its end values.
    """

    kind: str
    params: Mapping[str, Any]

    def __post_init__(self):
        if self.kind not in DATA_KINDS:
            raise DomainError(f"unknown data kind {self.kind!r}")
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    @classmethod
    def zero(cls):
        return cls("zero", {})

    @classmethod
    def const(cls, value):
        return cls("const", {"value": complex(value)})

    @classmethod
    def gaussian(cls, a: float = 1.0):
        """exp(-a x^2)."""
        if not a > 0:
            raise DomainError("gaussian rate must be positive")
        return cls("gaussian", {"a": float(a)})

    @classmethod
    def sine(cls, k: float = 1.0):
        return cls("sine", {"k": float(k)})

    @classmethod
    def sech(cls):
        return cls("sech", {})

    @classmethod
    def table(cls, xs: Sequence[float], values: Sequence[complex]):
        xs = tuple(float(x) for x in xs)
        vs = tuple(complex(v) for v in values)
        if len(xs) != len(vs) or not xs:
            raise DomainError("table needs matching, nonempty knot lists")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("table knots must be strictly increasing")
        return cls("table", {"xs": xs, "values": vs})

    @property
    def is_zero(self) -> bool:
        return self.kind == "zero" or (self.kind == "const" and self.params["value"] == 0)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        kind, prm = self.kind, self.params
        if kind == "zero":
            return np.zeros(x.shape, dtype=complex)
        if kind == "const":
            return np.full(x.shape, prm["value"], dtype=complex)
        if kind == "gaussian":
            return np.exp(-prm["a"] * x * x).astype(complex)
        if kind == "sine":
            return np.sin(prm["k"] * x).astype(complex)
        if kind == "sech":
            return (1.0 / np.cosh(np.clip(x, -700.0, 700.0))).astype(complex)
        xs = np.asarray(prm["xs"])
        vs = np.asarray(prm["values"])
        return np.interp(x, xs, vs.real) + 1j * np.interp(x, xs, vs.imag)

    def breakpoints(self):
        return list(self.params["xs"]) if self.kind == "table" else []


@dataclass(frozen=True)
class SteadySource:
    """A source f(t, x) = g(x) that does not depend on time."""

    profile: DataFunction

    @property
    def is_zero(self) -> bool:
        return self.profile.is_zero

    def __call__(self, t, x):
        x = np.asarray(x, dtype=float)
        return self.profile(np.broadcast_to(x, np.broadcast(np.asarray(t), x).shape))

    def breakpoints(self):
        return self.profile.breakpoints()


ZERO_SOURCE = SteadySource(DataFunction.zero())
