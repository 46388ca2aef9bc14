"""Regularity moduli at explicit neighborhood scales.

Every "around the point" notion is made finite by passing a
ScaleWindow: radii for the domain and codomain neighborhoods, the
openness scale eps, and optionally a parameter radius for the partial
(uniform-in-parameter) variants.  On a finite instance the value of a
modulus at a window is an exact max or min over finitely many ratios,
so it is computed by enumeration, in Fraction arithmetic whenever the
distances are rational.

Conventions for windows with nothing to compare:
- inf-type moduli (reg, lip) report 0 with flag "vacuous";
- sup-type moduli (lop) report +inf with flag "vacuous".
"""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from ..metric_core import (
    INF,
    Ext,
    MetricSpace,
    TAU_NUM,
    ball,
    dist_point_set,
    excess,
)
from ..report import (
    AuditReport,
    ModulusReport,
    VERDICT_FAIL,
    VERDICT_PASS,
)
from ..setmap import BiParamSetMap, SetMap

__all__ = [
    "HypothesisViolation",
    "Rho0Inputs",
    "ScaleWindow",
    "approx_eq",
    "approx_le",
    "exact_div",
    "link_audit",
    "lip_at_scale",
    "lop_at_scale",
    "partial_moduli",
    "reg_at_scale",
    "rho0",
    "rho_grid",
    "scale_sweep",
]


class HypothesisViolation(ValueError):
    """A theorem hypothesis fails on the given instance (not an audit fail)."""


@dataclass(frozen=True)
class ScaleWindow:
    """Explicit scales for an "around the basepoint" quantifier.

    r_dom and r_cod are open-ball radii around the base in domain and
    codomain; eps bounds the openness scale rho; r_param, when set,
    is the open-ball radius for the parameter of partial moduli
    (defaults to r_dom when omitted).
    """

    r_dom: Ext
    r_cod: Ext
    eps: Ext
    r_param: Ext | None = None

    def __post_init__(self):
        if not (self.r_dom > 0 and self.r_cod > 0 and self.eps > 0):
            raise ValueError("window radii and eps must be positive")
        if self.r_param is not None and not self.r_param > 0:
            raise ValueError("r_param must be positive when given")

    @property
    def param_radius(self) -> Ext:
        return self.r_dom if self.r_param is None else self.r_param

    def swapped(self) -> ScaleWindow:
        return ScaleWindow(r_dom=self.r_cod, r_cod=self.r_dom, eps=self.eps, r_param=self.r_param)

    def to_json(self) -> dict:
        from ..report import jsonable

        return {
            "r_dom": jsonable(self.r_dom),
            "r_cod": jsonable(self.r_cod),
            "eps": jsonable(self.eps),
            "r_param": jsonable(self.r_param),
        }


def _is_rational(v: Ext) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def exact_div(num: Ext, den: Ext) -> Ext:
    """num/den staying in Fractions when both operands are rational."""
    if isinstance(num, float) and math.isinf(num):
        return INF
    if _is_rational(num) and _is_rational(den):
        return Fraction(num, 1) / Fraction(den)
    return num / den


def approx_le(a: Ext, b: Ext, tol: float = TAU_NUM) -> bool:
    """a <= b up to relative tolerance; exact arithmetic on rationals."""
    if a == INF:
        return b == INF
    if b == INF:
        return True
    if _is_rational(a) and _is_rational(b):
        slack = Fraction(tol) * max(1, abs(Fraction(a)), abs(Fraction(b)))
        return Fraction(a) <= Fraction(b) + slack
    scale = max(1.0, abs(float(a)), abs(float(b)))
    return float(a) <= float(b) + tol * scale


def approx_eq(a: Ext, b: Ext, tol: float = TAU_NUM) -> bool:
    return approx_le(a, b, tol) and approx_le(b, a, tol)


def rho_grid(space: MetricSpace, eps: Ext) -> list[Ext]:
    """Openness scales: realized pairwise distances in (0, eps) plus midpoints.

    Open-ball contents only change at realized distances; the midpoints
    catch the strict-inequality edges of open balls.
    """
    realized = [d for d in space.realized_distances() if 0 < d < eps]
    grid: list[Ext] = list(realized)
    for a, b in zip(realized, realized[1:]):
        if _is_rational(a) and _is_rational(b):
            grid.append(Fraction(a + b, 2))
        else:
            grid.append((a + b) / 2)
    return sorted(set(grid))


def _fibers(F: SetMap) -> dict[int, frozenset[int]]:
    out: dict[int, set[int]] = {}
    for x, y in F.graph:
        out.setdefault(x, set()).add(y)
    return {x: frozenset(s) for x, s in out.items()}


def _reg_window(
    F: SetMap, U: Iterable[int], V: Iterable[int]
) -> tuple[Ext, list[tuple], bool]:
    """Core of reg: max of d(x, F^-1(y)) / d(y, F(x)) over the window.

    Pairs with d(y, F(x)) = 0 impose nothing; pairs with empty F(x)
    impose nothing (infinite right side).  An infinite numerator over
    a finite positive denominator forces the value +inf.
    """
    fibers = _fibers(F)
    inv_fibers = _fibers(F.inverse())
    best: Ext = 0
    witnesses: list[tuple] = []
    admissible = False
    for x in U:
        fx = fibers.get(x, frozenset())
        for y in V:
            den = dist_point_set(F.cod, y, fx)
            if den == 0 or den == INF:
                continue
            admissible = True
            num = dist_point_set(F.dom, x, inv_fibers.get(y, frozenset()))
            ratio = INF if num == INF else exact_div(num, den)
            if ratio > best:
                best = ratio
                witnesses = [(x, y, num, den)]
            elif ratio == best and len(witnesses) < 8:
                witnesses.append((x, y, num, den))
    return best, witnesses, admissible


def _lip_window(
    F: SetMap, U: Iterable[int], V: frozenset[int]
) -> tuple[Ext, list[tuple], bool]:
    """Core of lip: max of e(F(x) ∩ V, F(u)) / d(x, u) over x != u in U."""
    fibers = _fibers(F)
    pts = sorted(U)
    best: Ext = 0
    witnesses: list[tuple] = []
    admissible = False
    for x in pts:
        fx_v = fibers.get(x, frozenset()) & V
        for u in pts:
            if u == x:
                continue
            admissible = True
            e = excess(fx_v, fibers.get(u, frozenset()), space=F.cod)
            ratio = INF if e == INF else exact_div(e, F.dom.dist[x][u])
            if ratio > best:
                best = ratio
                witnesses = [(x, u, e, F.dom.dist[x][u])]
            elif ratio == best and ratio > 0 and len(witnesses) < 8:
                witnesses.append((x, u, e, F.dom.dist[x][u]))
    return best, witnesses, admissible


def _lop_window(
    F: SetMap, U: frozenset[int], V: frozenset[int], eps: Ext
) -> tuple[Ext, list[tuple], bool]:
    """Core of lop: largest rate L with B(y, rho L) ⊆ F(B(x, rho)).

    For a graph pair (x, y) and scale rho the largest admissible rate
    is m / rho, where m is the distance from y to the complement of
    F(B(x, rho)) in the codomain (no constraint when the image covers
    the codomain).  The open ball B(x, rho) is constant for rho between
    consecutive realized distances from x, so each ball pattern is
    tested once at its largest applicable rho.
    """
    grid = rho_grid(F.dom, eps)
    fibers = _fibers(F)
    graph_pts = [(x, y) for (x, y) in F.graph if x in U and y in V]
    best: Ext = INF
    witnesses: list[tuple] = []
    constrained = False
    if not grid or not graph_pts:
        return INF, [], False

    all_cod = frozenset(range(F.cod.n))
    by_x = sorted({x for (x, _) in graph_pts})
    for x in by_x:
        row = F.dom.dist[x]
        from_x = sorted({row[u] for u in range(F.dom.n)})
        # Representative rho per ball pattern: the largest rho in the
        # grid yielding that open ball (largest rho = tightest m/rho).
        reps: dict[int, Ext] = {}
        for rho in grid:
            key = bisect_left(from_x, rho)
            cur = reps.get(key)
            if cur is None or rho > cur:
                reps[key] = rho
        ys = [y for (xx, y) in graph_pts if xx == x]
        for rho in reps.values():
            bx = [u for u in range(F.dom.n) if row[u] < rho]
            img: set[int] = set()
            for u in bx:
                img |= fibers.get(u, frozenset())
            comp = all_cod - img
            if not comp:
                continue
            for y in ys:
                constrained = True
                m = dist_point_set(F.cod, y, comp)
                bound = exact_div(m, rho)
                if bound < best:
                    blocker = min(comp, key=lambda c: F.cod.dist[y][c])
                    best = bound
                    witnesses = [(x, y, rho, blocker, m)]
    if not constrained:
        return INF, [], False
    return best, witnesses, True


def _window_report(
    kind: str,
    value: Ext,
    base: tuple,
    w: ScaleWindow,
    witnesses: list[tuple],
    admissible: bool,
    constants: dict | None = None,
) -> ModulusReport:
    return ModulusReport(
        kind=kind,
        value=value,
        basepoint=base,
        window=w.to_json(),
        witnesses=tuple(witnesses),
        flags=() if admissible else ("vacuous",),
        constants=constants or {},
    )


def _require_on_graph(F: SetMap, base: tuple[int, int]) -> None:
    if tuple(base) not in F.graph:
        raise ValueError(f"basepoint {base} is not on the graph")


def reg_at_scale(F: SetMap, base: tuple[int, int], w: ScaleWindow) -> ModulusReport:
    """Exact regularity bound on the window: smallest L with
    d(x, F^-1(y)) <= L d(y, F(x)) for all (x, y) in U x V."""
    _require_on_graph(F, base)
    x0, y0 = base
    U = ball(F.dom, x0, w.r_dom).members
    V = ball(F.cod, y0, w.r_cod).members
    value, wit, admissible = _reg_window(F, sorted(U), sorted(V))
    return _window_report("reg", value, base, w, wit, admissible)


def lip_at_scale(F: SetMap, base: tuple[int, int], w: ScaleWindow) -> ModulusReport:
    """Exact Lipschitz (Aubin) bound on the window: smallest L with
    e(F(x) ∩ V, F(u)) <= L d(x, u) for all x, u in U."""
    _require_on_graph(F, base)
    x0, y0 = base
    U = ball(F.dom, x0, w.r_dom).members
    V = ball(F.cod, y0, w.r_cod).members
    value, wit, admissible = _lip_window(F, sorted(U), V)
    return _window_report("lip", value, base, w, wit, admissible)


def lop_at_scale(F: SetMap, base: tuple[int, int], w: ScaleWindow) -> ModulusReport:
    """Exact linear-openness bound on the window: largest L such that
    B(y, rho L) ⊆ F(B(x, rho)) for every grid scale rho in (0, eps) and
    every graph pair in U x V."""
    _require_on_graph(F, base)
    x0, y0 = base
    U = ball(F.dom, x0, w.r_dom).members
    V = ball(F.cod, y0, w.r_cod).members
    value, wit, admissible = _lop_window(F, U, V, w.eps)
    if not admissible and value == 0:
        value = INF
    return _window_report("lop", value, base, w, wit, admissible)


_PARTIAL_KINDS = {
    "reg-in-first": "reg_x_unif",
    "lip-in-second": "lip_x_unif",
    "lop-in-first": "lop_x_unif",
}


def partial_moduli(
    G: BiParamSetMap, base: tuple[int, int, int], w: ScaleWindow, which: str
) -> ModulusReport:
    """Partial modulus of a two-parameter map, uniform over a parameter ball.

    reg-in-first: regularity of y1 -> G(y1, p), the worst (max) value
    over parameters p near the base y2.  lip-in-second: Aubin property
    of y2 -> G(p, y2), max over p near the base y1.  lop-in-first:
    openness of y1 -> G(y1, p), the min over p (a rate must survive
    every parameter).  No per-slice basepoint membership is required;
    the window is fixed by the base triple.
    """
    if which not in _PARTIAL_KINDS:
        raise ValueError(f"unknown partial modulus selector {which!r}")
    if tuple(base) not in G.graph:
        raise ValueError(f"basepoint {base} is not on the graph")
    y1b, y2b, zb = base
    rp = w.param_radius
    witnesses: list[tuple] = []
    any_admissible = False

    if which == "lip-in-second":
        params = sorted(ball(G.dom1, y1b, rp).members)
        U = ball(G.dom2, y2b, w.r_dom).members
        V = ball(G.cod, zb, w.r_cod).members
        value: Ext = 0
        for p in params:
            v, wit, adm = _lip_window(G.slice_first(p), sorted(U), V)
            any_admissible = any_admissible or adm
            if adm and v >= value:
                if v > value:
                    witnesses = []
                value = v
                witnesses.extend((p,) + t for t in wit[:2])
    else:
        params = sorted(ball(G.dom2, y2b, rp).members)
        U = ball(G.dom1, y1b, w.r_dom).members
        V = ball(G.cod, zb, w.r_cod).members
        if which == "reg-in-first":
            value = 0
            for p in params:
                v, wit, adm = _reg_window(G.slice_second(p), sorted(U), sorted(V))
                any_admissible = any_admissible or adm
                if adm and v >= value:
                    if v > value:
                        witnesses = []
                    value = v
                    witnesses.extend((p,) + t for t in wit[:2])
        else:  # lop-in-first
            value = INF
            for p in params:
                v, wit, adm = _lop_window(G.slice_second(p), U, V, w.eps)
                any_admissible = any_admissible or adm
                if adm and v <= value:
                    if v < value:
                        witnesses = []
                    value = v
                    witnesses.extend((p,) + t for t in wit[:2])

    kind = _PARTIAL_KINDS[which]
    return _window_report(kind, value, base, w, witnesses[:8], any_admissible)


def _inverse_rate(value: Ext) -> Ext:
    if value == INF:
        return 0
    if value == 0:
        return INF
    return exact_div(1, value)


def link_audit(F: SetMap, base: tuple[int, int], w: ScaleWindow, tol: float = TAU_NUM) -> AuditReport:
    """Cross-check lop, reg and lip of the inverse at matched windows.

    The three quantities are computed by independent enumerations.  At
    a saturated window (whole domain and codomain covered, eps beyond
    the domain diameter, total and surjective relation) the identities
    reg = 1/lop = lip(F^-1) are asserted; at other windows the report
    carries all three values with a "scale-mismatch" note instead of a
    verdict, since at fixed finite scales they need not coincide.
    """
    x0, y0 = base
    rep_lop = lop_at_scale(F, base, w)
    rep_reg = reg_at_scale(F, base, w)
    rep_lip_inv = lip_at_scale(F.inverse(), (y0, x0), w.swapped())

    U = ball(F.dom, x0, w.r_dom).members
    V = ball(F.cod, y0, w.r_cod).members
    saturated = (
        U == frozenset(range(F.dom.n))
        and V == frozenset(range(F.cod.n))
        and w.eps > F.dom.diameter()
        and F.is_total()
        and F.is_surjective()
    )

    constants = {
        "lop": rep_lop.value,
        "reg": rep_reg.value,
        "lip_inv": rep_lip_inv.value,
        "lop_inverse_rate": _inverse_rate(rep_lop.value),
        "saturated": saturated,
    }
    notes: list[str] = []
    for rep in (rep_lop, rep_reg, rep_lip_inv):
        if rep.vacuous:
            notes.append(f"vacuous:{rep.kind}")

    if not saturated:
        notes.append("scale-mismatch")
        return AuditReport(
            kind="link_audit",
            verdict=VERDICT_PASS,
            value=rep_reg.value,
            constants=constants,
            window=w.to_json(),
            notes=tuple(notes),
        )

    ok_lop = approx_eq(_inverse_rate(rep_lop.value), rep_reg.value, tol)
    ok_lip = approx_eq(rep_lip_inv.value, rep_reg.value, tol)
    witnesses = tuple(rep_lop.witnesses) + tuple(rep_reg.witnesses)
    return AuditReport(
        kind="link_audit",
        verdict=VERDICT_PASS if (ok_lop and ok_lip) else VERDICT_FAIL,
        value=rep_reg.value,
        witnesses=() if (ok_lop and ok_lip) else witnesses,
        constants=constants,
        window=w.to_json(),
        notes=tuple(notes),
    )


@dataclass(frozen=True)
class Rho0Inputs:
    """Constants feeding the composed-regularity bound.

    m bounds reg of the first inner map, l bounds lip of the second,
    lam bounds the partial reg of the outer map in its first variable,
    eta bounds the partial lip in the second.  All must be finite and
    nonnegative with m*l*lam*eta < 1.  (Zero factors are legal: a
    constant inner map has l = 0 and the product collapses to 0.)
    """

    m: Ext
    l: Ext
    lam: Ext
    eta: Ext

    def __post_init__(self):
        vals = (self.m, self.l, self.lam, self.eta)
        if any(v == INF or v < 0 for v in vals):
            raise HypothesisViolation(f"factors must be finite and nonnegative: {vals}")
        if not self.product() < 1:
            raise HypothesisViolation(f"m*l*lam*eta = {self.product()} is not < 1")

    def product(self) -> Ext:
        return self.m * self.l * self.lam * self.eta


def rho0(inp: Rho0Inputs) -> Ext:
    """The composed bound m*lam / (1 - m*l*lam*eta)."""
    num = inp.m * inp.lam
    den = 1 - inp.product()
    return exact_div(num, den)


def scale_sweep(
    F: SetMap, base: tuple[int, int], windows: Iterable[ScaleWindow], kind: str = "reg"
) -> list[tuple[ScaleWindow, ModulusReport]]:
    """Evaluate one modulus over a list of windows (CSV-friendly)."""
    ops = {"reg": reg_at_scale, "lip": lip_at_scale, "lop": lop_at_scale}
    if kind not in ops:
        raise ValueError(f"unknown modulus kind {kind!r}")
    return [(w, ops[kind](F, base, w)) for w in windows]
