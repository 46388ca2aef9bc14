"""Error bounds and an exact Ekeland principle on finite spaces.

A :class:`ScalarField` is an extended-real function on a finite metric
space.  On such spaces every function is lower semicontinuous and every
infimum is attained, so the two classical tools implemented here are
exact rather than approximate: the slope-based error bound (the product
of the slope quantity and the distance to the sublevel set never exceeds
the function value) and the Ekeland variational principle, realised as a
finite descent whose three conclusions are re-verified by enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from .metric_core import (
    INF,
    Ext,
    MetricSpace,
    dist_point_set,
    ext_mul,
    load_space,
    parse_number,
    space_to_json,
)
from .report import (
    VERDICT_FAIL,
    VERDICT_PASS,
    AuditReport,
    jsonable,
)

__all__ = [
    "EvpCertificate",
    "ScalarField",
    "ekeland",
    "error_bound_audit",
    "field_to_json",
    "load_field",
    "slope_quantity",
    "sublevel_set",
]


def _is_pos_inf(v: Ext) -> bool:
    return isinstance(v, float) and v == INF


def _is_neg_inf(v: Ext) -> bool:
    return isinstance(v, float) and v == -INF


@dataclass(frozen=True)
class ScalarField:
    """An extended-real function on the points of a finite metric space."""

    space: MetricSpace
    values: tuple[Ext, ...]

    def __init__(self, space: MetricSpace, values: Sequence[Ext]):
        vals = tuple(values)
        if len(vals) != space.n:
            raise ValueError("value count does not match the space")
        for v in vals:
            if _is_pos_inf(v):
                continue
            if isinstance(v, (int, Fraction)) or isinstance(v, float):
                continue
            raise ValueError(f"not an extended real: {v!r}")
        if all(_is_pos_inf(v) for v in vals):
            raise ValueError("field is identically +inf")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "values", vals)

    def __call__(self, x: int) -> Ext:
        return self.values[x]

    def finite_points(self) -> list[int]:
        return [x for x in self.space.points() if not _is_pos_inf(self.values[x])]

    def min_value(self) -> Ext:
        return min(self.values[x] for x in self.finite_points())


def field_to_json(f: ScalarField, space_ref: Any | None = None) -> dict:
    """Serialize a field; the space is embedded unless a reference is given."""
    return {
        "space": space_ref if space_ref is not None else space_to_json(f.space),
        "values": [jsonable(v) for v in f.values],
    }


def load_field(obj: dict, space: MetricSpace | None = None) -> ScalarField:
    if space is None:
        space = load_space(obj["space"])
    values = [parse_number(v) for v in obj["values"]]
    return ScalarField(space, values)


def sublevel_set(f: ScalarField) -> frozenset[int]:
    """Points where the field is nonpositive."""
    return frozenset(x for x in f.space.points() if not _is_pos_inf(f(x)) and f(x) <= 0)


def _pos_part(v: Ext) -> Ext:
    if _is_pos_inf(v):
        return INF
    return v if v > 0 else 0


def _quotients(f: ScalarField, x: int, competitors: Sequence[int]) -> list[Ext]:
    """Difference quotients (f(x) - [f(u)]+) / d(x, u) over the competitors.

    A pair where both numerator terms are infinite has no defined
    quotient and is dropped; it can neither raise nor certify the sup.
    """
    space = f.space
    fx = f(x)
    out: list[Ext] = []
    for u in competitors:
        pu = _pos_part(f(u))
        if _is_pos_inf(fx) and _is_pos_inf(pu):
            continue
        if _is_pos_inf(fx):
            out.append(INF)
            continue
        if _is_pos_inf(pu):
            out.append(-INF)
            continue
        d = space.dist[x][u]
        num = fx - pu
        if isinstance(num, Fraction) or isinstance(d, Fraction):
            out.append(Fraction(num) / Fraction(d))
        elif isinstance(num, int) and isinstance(d, int):
            out.append(Fraction(num, d))
        else:
            out.append(num / d)
    return out


def _slope(f: ScalarField, xbar: int, literal_index: bool) -> tuple[Ext, dict]:
    fxbar = f(xbar)
    if not fxbar > 0:
        raise ValueError("slope quantity requires a positive value at the base point")
    space = f.space
    S = sublevel_set(f)
    dS = dist_point_set(space, xbar, S)
    candidates = [
        x
        for x in space.points()
        if space.dist[xbar][x] < dS and not (f(x) > fxbar)
    ]
    sups: list[Ext] = []
    ill_posed = 0
    for x in candidates:
        if literal_index:
            competitors = [u for u in space.points() if u != xbar and u != x]
        else:
            competitors = [u for u in space.points() if u != x]
        terms = _quotients(f, x, competitors)
        if not terms:
            ill_posed += 1
            continue
        sups.append(max(terms))
    value = min(sups) if sups else INF
    details = {
        "distance_to_sublevel": dS,
        "candidates": candidates,
        "ill_posed_candidates": ill_posed,
    }
    return value, details


def slope_quantity(f: ScalarField, xbar: int, literal_index: bool = False) -> Ext:
    """Slope-style infimum of difference-quotient suprema at ``xbar``.

    Competitors exclude the evaluation point itself by default, which
    keeps every quotient well defined; ``literal_index=True`` instead
    excludes the base point from the competitor set (the evaluation
    point is still skipped, since its quotient would divide by zero).
    A candidate whose competitor set comes up empty contributes no
    supremum and is left out of the infimum.
    """
    value, _ = _slope(f, xbar, literal_index)
    return value


def error_bound_audit(f: ScalarField, xbar: int) -> AuditReport:
    """Check slope * distance-to-sublevel <= value at ``xbar``.

    Both index readings of the slope are computed and reported; the
    verdict uses the default reading.  When every candidate was dropped
    as ill-posed (possible only on a single-point space) the supremum
    over an empty competitor set is -inf, the product is -inf, and the
    bound holds vacuously.
    """
    m_default, details = _slope(f, xbar, literal_index=False)
    m_literal, _ = _slope(f, xbar, literal_index=True)
    fxbar = f(xbar)
    dS = details["distance_to_sublevel"]
    all_ill_posed = (
        details["ill_posed_candidates"] > 0
        and details["ill_posed_candidates"] == len(details["candidates"])
    )
    effective_m = -INF if all_ill_posed else m_default
    lhs = ext_mul(effective_m, dS)
    passed = _is_neg_inf(lhs) or _is_pos_inf(fxbar) or lhs <= fxbar
    notes: list[str] = []
    if all_ill_posed:
        notes.append(
            "every candidate supremum ran over an empty competitor set; "
            "the bound holds with the empty-sup value -inf"
        )
    if m_default != m_literal:
        notes.append("the two index readings of the slope disagree")
    constants = {
        "m": m_default,
        "m_literal": m_literal,
        "distance_to_sublevel": dS,
        "lhs": lhs,
        "rhs": fxbar,
        "candidates": len(details["candidates"]),
        "ill_posed_candidates": details["ill_posed_candidates"],
    }
    return AuditReport(
        kind="error-bound",
        verdict=VERDICT_PASS if passed else VERDICT_FAIL,
        value=m_default,
        constants=constants,
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class EvpCertificate:
    """Descent outcome with the three re-verified conclusions.

    decrease_ok:     f(result) <= f(start)
    distance_ok:     d(start, result) <= s / rate
    stationarity_ok: f(result) <= f(x) + rate * d(result, x) for all x
    """

    start: int
    result: int
    s: Ext
    rate: Ext
    decrease_ok: bool
    distance_ok: bool
    stationarity_ok: bool
    iterations: int

    def valid(self) -> bool:
        return self.decrease_ok and self.distance_ok and self.stationarity_ok

    def to_json(self) -> dict:
        return {
            "start": self.start,
            "result": self.result,
            "s": jsonable(self.s),
            "rate": jsonable(self.rate),
            "decrease_ok": self.decrease_ok,
            "distance_ok": self.distance_ok,
            "stationarity_ok": self.stationarity_ok,
            "iterations": self.iterations,
        }


def _exact_div(num: Ext, den: Ext) -> Ext:
    if isinstance(num, (int, Fraction)) and isinstance(den, (int, Fraction)):
        return Fraction(num) / Fraction(den)
    return num / den


def ekeland(f: ScalarField, x0: int, s: Ext, rate: Ext) -> EvpCertificate:
    """Exact Ekeland principle by iterative strict descent.

    Requires f(x0) < min f + s.  From x0, repeatedly move to the first
    point (in index order) that strictly violates the stationarity
    inequality; each move strictly decreases f, so the loop ends after
    at most as many steps as there are distinct finite values.  The
    telescoped moves give d(x0, result) < s / rate directly, and all
    three conclusions are re-checked against every point before the
    certificate is issued.
    """
    if not s > 0:
        raise ValueError("inf-slack s must be positive")
    if not rate > 0:
        raise ValueError("rate must be positive")
    fx0 = f(x0)
    bottom = f.min_value()
    if _is_pos_inf(fx0) or not fx0 < bottom + s:
        raise ValueError("start value must be within s of the minimum")
    space = f.space
    u = x0
    iterations = 0
    limit = space.n * len(set(f.values))
    while True:
        fu = f(u)
        mover = None
        for x in space.points():
            fx = f(x)
            if _is_pos_inf(fx):
                continue
            if fx + ext_mul(rate, space.dist[u][x]) < fu:
                mover = x
                break
        if mover is None:
            break
        u = mover
        iterations += 1
        if iterations > limit:
            raise RuntimeError("descent failed to terminate within the value bound")
    fu = f(u)
    decrease_ok = not fu > fx0
    distance_ok = not space.dist[x0][u] > _exact_div(s, rate)
    stationarity_ok = all(
        _is_pos_inf(f(x)) or not fu > f(x) + ext_mul(rate, space.dist[u][x])
        for x in space.points()
    )
    return EvpCertificate(
        start=x0,
        result=u,
        s=s,
        rate=rate,
        decrease_ok=decrease_ok,
        distance_ok=distance_ok,
        stationarity_ok=stationarity_ok,
        iterations=iterations,
    )
