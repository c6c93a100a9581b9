"""Problem-spec files: an INI-style key tree read with :mod:`configparser`.

Example::

    [coefficient]
    kind = phase_arc
    theta0 = 0.0
    theta1 = 0.7853981633974483
    ramp_start = 1.0
    ramp_end = 2.0

    [phi]
    kind = gaussian
    a = 1.0

    [source]
    kind = zero
    duhamel_form = corrected

    [grid]
    t = 0.1:1.0:5
    x = -4.0:4.0:41

Complex scalars are written ``re,im``; real lists are space separated;
knot lists are space separated ``position:re,im`` items. Sections
``[hoelder]`` (keys ``B``, ``alpha``), ``[grid]`` and ``[tolerances]`` are
optional.
"""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Optional

from .coefficients import CoefficientProfile
from .data import DataFunction, SteadySource
from .errors import DomainError, SpecParseError
from .solver import DUHAMEL_FORMS, GridSpec, ProblemSpec
from .verify import EXACT_FIELDS, ManufacturedInitial, ManufacturedSource

SECTIONS = ("coefficient", "phi", "source", "hoelder", "grid", "tolerances")
DEFAULT_GRID = GridSpec(0.1, 1.0, 5, -4.0, 4.0, 41)

_COEFF_KEYS = {
    "constant": ("value",),
    "phase_arc": ("theta0", "theta1", "ramp_start", "ramp_end"),
    "rational": ("numerator", "denominator"),
    "table": ("knots",),
}
_DATA_KEYS = {
    "zero": (),
    "const": ("value",),
    "gaussian": ("a",),
    "sine": ("k",),
    "sech": (),
    "table": ("knots",),
    "mms": ("field", "value"),
}
_TOL_KEYS = ("quad_tol", "rho_min", "tail_tol", "omega_tol", "eps_split")


# --------------------------------------------------------------------------
# scalar codecs


def fmt_float(v: float) -> str:
    return repr(float(v))


def fmt_complex(z: complex) -> str:
    z = complex(z)
    return f"{fmt_float(z.real)},{fmt_float(z.imag)}"


def _float(text: str, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SpecParseError(f"expected a real number, got {text!r}", key) from None


def _complex(text: str, key: str) -> complex:
    parts = text.split(",")
    if len(parts) == 1:
        return complex(_float(parts[0], key), 0.0)
    if len(parts) != 2:
        raise SpecParseError(f"expected 're,im', got {text!r}", key)
    return complex(_float(parts[0], key), _float(parts[1], key))


def _float_list(text: str, key: str) -> list[float]:
    items = text.split()
    if not items:
        raise SpecParseError("empty list", key)
    return [_float(s, key) for s in items]


def _knots(text: str, key: str) -> tuple[list[float], list[complex]]:
    pos, vals = [], []
    for item in text.split():
        if ":" not in item:
            raise SpecParseError(f"knot {item!r} is not 'position:re,im'", key)
        a, b = item.split(":", 1)
        pos.append(_float(a, key))
        vals.append(_complex(b, key))
    if not pos:
        raise SpecParseError("empty knot list", key)
    if any(q <= p for p, q in zip(pos, pos[1:])):
        raise SpecParseError("knots must be strictly increasing", key)
    return pos, vals


def _fmt_knots(pos, vals) -> str:
    return " ".join(f"{fmt_float(p)}:{fmt_complex(v)}" for p, v in zip(pos, vals))


def parse_range(text: str, key: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise SpecParseError(f"expected 'start:stop:count', got {text!r}", key)
    try:
        n = int(parts[2])
    except ValueError:
        raise SpecParseError(f"count must be an integer, got {parts[2]!r}", key) from None
    return _float(parts[0], key), _float(parts[1], key), n


# --------------------------------------------------------------------------
# parsing


def _section(cp, name, required):
    if not cp.has_section(name):
        if required:
            raise SpecParseError("missing section", name)
        return None
    return dict(cp.items(name))


def _check_keys(sec: dict, allowed, name: str, required=()):
    for k in sec:
        if k not in allowed:
            raise SpecParseError("unknown key", f"{name}.{k}")
    for k in required:
        if k not in sec:
            raise SpecParseError("missing required key", f"{name}.{k}")


def _parse_coefficient(sec: dict) -> CoefficientProfile:
    kind = sec.get("kind")
    if kind is None:
        raise SpecParseError("missing required key", "coefficient.kind")
    if kind not in _COEFF_KEYS:
        raise SpecParseError(f"unknown profile kind {kind!r}", "coefficient.kind")
    keys = _COEFF_KEYS[kind]
    _check_keys(sec, ("kind",) + keys, "coefficient", keys)
    k = lambda name: f"coefficient.{name}"  # noqa: E731
    try:
        if kind == "constant":
            return CoefficientProfile.constant(_complex(sec["value"], k("value")))
        if kind == "phase_arc":
            return CoefficientProfile.phase_arc(*(_float(sec[n], k(n)) for n in keys))
        if kind == "rational":
            return CoefficientProfile.rational(_float_list(sec["numerator"], k("numerator")),
                                               _float_list(sec["denominator"], k("denominator")))
        return CoefficientProfile.table(*_knots(sec["knots"], k("knots")))
    except DomainError as exc:
        raise SpecParseError(str(exc), "coefficient") from None


def _parse_data(sec: dict, name: str, extra=()):
    kind = sec.get("kind")
    if kind is None:
        raise SpecParseError("missing required key", f"{name}.kind")
    if kind not in _DATA_KEYS:
        raise SpecParseError(f"unknown data kind {kind!r}", f"{name}.kind")
    keys = _DATA_KEYS[kind]
    required = ("field",) if kind == "mms" else keys
    _check_keys(sec, ("kind",) + keys + tuple(extra), name, required)
    k = lambda key: f"{name}.{key}"  # noqa: E731
    try:
        if kind == "zero":
            return DataFunction.zero()
        if kind == "const":
            return DataFunction.const(_complex(sec["value"], k("value")))
        if kind == "gaussian":
            return DataFunction.gaussian(_float(sec["a"], k("a")))
        if kind == "sine":
            return DataFunction.sine(_float(sec["k"], k("k")))
        if kind == "sech":
            return DataFunction.sech()
        if kind == "table":
            return DataFunction.table(*_knots(sec["knots"], k("knots")))
    except DomainError as exc:
        raise SpecParseError(str(exc), name) from None
    field = sec["field"]
    if field not in EXACT_FIELDS:
        raise SpecParseError(f"unknown exact field {field!r}", k("field"))
    value = _complex(sec.get("value", "1.0,0.0"), k("value"))
    return ("mms", field, value)


def parse_spec_text(text: str) -> tuple[ProblemSpec, GridSpec]:
    cp = configparser.ConfigParser(interpolation=None, default_section="\x00unused",
                                   inline_comment_prefixes=(";",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecParseError(f"malformed spec file: {exc}") from None
    for name in cp.sections():
        if name not in SECTIONS:
            raise SpecParseError("unknown section", name)

    coefficient = _parse_coefficient(_section(cp, "coefficient", True))

    phi = _parse_data(_section(cp, "phi", True), "phi")
    if isinstance(phi, tuple):
        phi = ManufacturedInitial(phi[1], phi[2])

    src_sec = _section(cp, "source", False) or {"kind": "zero"}
    duhamel_form = src_sec.get("duhamel_form", "corrected")
    if duhamel_form not in DUHAMEL_FORMS:
        raise SpecParseError(f"must be one of {DUHAMEL_FORMS}", "source.duhamel_form")
    data = _parse_data(src_sec, "source", extra=("duhamel_form",))
    if isinstance(data, tuple):
        source = ManufacturedSource(data[1], coefficient, data[2])
    else:
        source = SteadySource(data)

    hoelder = None
    h_sec = _section(cp, "hoelder", False)
    if h_sec is not None:
        _check_keys(h_sec, ("B", "alpha"), "hoelder", ("B", "alpha"))
        coeff = _float(h_sec["B"], "hoelder.B")
        alpha = _float(h_sec["alpha"], "hoelder.alpha")
        if not 0 < alpha <= 1:
            raise SpecParseError(
                f"Hoelder exponent must satisfy 0 < alpha <= 1, got {alpha}",
                "hoelder.alpha")
        if not coeff >= 0:
            raise SpecParseError("Hoelder constant must be >= 0", "hoelder.B")
        hoelder = (coeff, alpha)

    tol = {}
    t_sec = _section(cp, "tolerances", False)
    if t_sec is not None:
        _check_keys(t_sec, _TOL_KEYS, "tolerances")
        tol = {key: _float(v, f"tolerances.{key}") for key, v in t_sec.items()}

    grid = DEFAULT_GRID
    g_sec = _section(cp, "grid", False)
    if g_sec is not None:
        _check_keys(g_sec, ("t", "x"), "grid", ("t", "x"))
        grid = make_grid(parse_range(g_sec["t"], "grid.t"), parse_range(g_sec["x"], "grid.x"))

    try:
        problem = ProblemSpec(coefficient, phi, source, hoelder=hoelder,
                              duhamel_form=duhamel_form, **tol)
    except DomainError as exc:
        raise SpecParseError(str(exc), "tolerances") from None
    return problem, grid


def make_grid(t_range, x_range) -> GridSpec:
    try:
        return GridSpec(t_range[0], t_range[1], t_range[2], x_range[0], x_range[1], x_range[2])
    except DomainError as exc:
        raise SpecParseError(str(exc), "grid") from None


def parse_spec(path) -> tuple[ProblemSpec, GridSpec]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecParseError(f"cannot read spec file: {exc.strerror}", str(path)) from None
    return parse_spec_text(text)


# --------------------------------------------------------------------------
# canonical serialization


def _coefficient_lines(c: CoefficientProfile) -> list[str]:
    prm = c.params
    lines = [f"kind = {c.kind}"]
    if c.kind == "constant":
        lines.append(f"value = {fmt_complex(prm['value'])}")
    elif c.kind == "phase_arc":
        lines += [f"{k} = {fmt_float(prm[k])}" for k in _COEFF_KEYS["phase_arc"]]
    elif c.kind == "rational":
        lines.append("numerator = " + " ".join(fmt_float(v) for v in prm["numerator"]))
        lines.append("denominator = " + " ".join(fmt_float(v) for v in prm["denominator"]))
    else:
        lines.append(f"knots = {_fmt_knots(prm['times'], prm['values'])}")
    return lines


def _data_lines(d) -> list[str]:
    if isinstance(d, (ManufacturedInitial, ManufacturedSource)):
        return ["kind = mms", f"field = {d.field_name}", f"value = {fmt_complex(d.c)}"]
    if isinstance(d, SteadySource):
        d = d.profile
    if not isinstance(d, DataFunction):
        raise TypeError(f"cannot serialize data of type {type(d).__name__}")
    prm = d.params
    lines = [f"kind = {d.kind}"]
    if d.kind == "const":
        lines.append(f"value = {fmt_complex(prm['value'])}")
    elif d.kind == "gaussian":
        lines.append(f"a = {fmt_float(prm['a'])}")
    elif d.kind == "sine":
        lines.append(f"k = {fmt_float(prm['k'])}")
    elif d.kind == "table":
        lines.append(f"knots = {_fmt_knots(prm['xs'], prm['values'])}")
    return lines


def fmt_range(start: float, stop: float, n: int) -> str:
    return f"{fmt_float(start)}:{fmt_float(stop)}:{int(n)}"


def serialize_spec(problem: ProblemSpec, grid: Optional[GridSpec] = None) -> str:
    """Canonical text of a problem; parsing it gives back an equal problem."""
    grid = grid or DEFAULT_GRID
    out = ["[coefficient]", *_coefficient_lines(problem.coefficient), ""]
    out += ["[phi]", *_data_lines(problem.phi), ""]
    out += ["[source]", *_data_lines(problem.source), f"duhamel_form = {problem.duhamel_form}", ""]
    if problem.hoelder is not None:
        out += ["[hoelder]", f"B = {fmt_float(problem.hoelder[0])}",
                f"alpha = {fmt_float(problem.hoelder[1])}", ""]
    out += ["[grid]", f"t = {fmt_range(grid.t0, grid.t1, grid.nt)}",
            f"x = {fmt_range(grid.x0, grid.x1, grid.nx)}", ""]
    out += ["[tolerances]"]
    for key in _TOL_KEYS:
        v = getattr(problem, key)
        if v is not None:
            out.append(f"{key} = {fmt_float(v)}")
    return "\n".join(out) + "\n"
