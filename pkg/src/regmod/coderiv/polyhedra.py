"""Polyhedral sets, cones, and graph maps with exact normal-cone calculus.

A Polyhedron is a finite list of halfspace rows <a, x> <= b over
rationals.  At a point of the set the regular normal cone is the conic
hull of the active row normals, and the tangent cone is its polar
{d : a_i.d <= 0 for active i}; both are computed exactly.  PolyMap
wraps a polyhedron living in a product space and treats it as the
graph of a set-valued map, which is where coderivatives come from.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from ..metric_core import BudgetError, default_budget, parse_number
from ..report import jsonable
from .linalg_exact import (
    Vec,
    dot,
    feasible_point,
    frac_vec,
    linprog_exact,
    min_norm_point,
    norm_sq,
    quadratic_min,
)

__all__ = [
    "Cone",
    "CoderivativeSlice",
    "FaceInfo",
    "PolyMap",
    "Polyhedron",
    "affine_polymap",
    "coderivative",
    "cone_to_json",
    "constant_polymap",
    "eps_normal_test",
    "faces_within",
    "frechet_normal_cone",
    "intersect_polyhedra",
    "linear_polymap",
    "load_cone",
    "load_polyhedron",
    "load_polymap",
    "polyhedron_to_json",
    "polymap_to_json",
    "tangential_part_sq",
]


@dataclass(frozen=True)
class Polyhedron:
    """Solution set of finitely many halfspace rows <a, x> <= b."""

    dim: int
    rows: tuple[tuple[Vec, Fraction], ...]

    def __init__(self, dim: int, rows: Iterable[tuple[Sequence, object]]):
        if dim < 1:
            raise ValueError("dimension must be at least 1")
        packed = []
        for a, b in rows:
            av = frac_vec(a)
            if len(av) != dim:
                raise ValueError("row width does not match the dimension")
            packed.append((av, frac_vec([b])[0]))
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rows", tuple(packed))

    def contains(self, x: Sequence) -> bool:
        xv = frac_vec(x)
        if len(xv) != self.dim:
            raise ValueError("point dimension mismatch")
        return all(dot(a, xv) <= b for a, b in self.rows)

    def active_rows(self, x: Sequence) -> tuple[int, ...]:
        xv = frac_vec(x)
        if not self.contains(xv):
            raise ValueError("point is not in the set")
        return tuple(i for i, (a, b) in enumerate(self.rows) if dot(a, xv) == b)

    def is_empty(self) -> bool:
        if not self.rows:
            return False
        A = [list(a) for a, _ in self.rows]
        b = [bb for _, bb in self.rows]
        return feasible_point(A, b, width=self.dim) is None

    def split_rows(self):
        """Rows regrouped as (equality pairs, strict inequality rows).

        A row whose exact negation is also present pins a hyperplane;
        solvers downstream treat those as equalities, which keeps the
        active-set enumeration away from mirrored row pairs.  Returns
        (eq_rows, strict) where strict carries (index, row) pairs.
        """
        seen = {(a, b) for a, b in self.rows}
        eq_rows: list[tuple[Vec, Fraction]] = []
        eq_seen: set[tuple[Vec, Fraction]] = set()
        strict: list[tuple[int, tuple[Vec, Fraction]]] = []
        for i, (a, b) in enumerate(self.rows):
            neg = (tuple(-x for x in a), -b)
            if neg in seen:
                if neg not in eq_seen:
                    eq_rows.append((a, b))
                    eq_seen.add((a, b))
                continue
            strict.append((i, (a, b)))
        return eq_rows, strict

    def project(self, point: Sequence, budget: int | None = None):
        """Euclidean projection: (closest point, squared distance) or None."""
        eq_rows, strict = self.split_rows()
        A_ub = [list(a) for _, (a, _) in strict] or None
        b_ub = [b for _, (_, b) in strict] or None
        A_eq = [list(a) for a, _ in eq_rows] or None
        b_eq = [b for _, b in eq_rows] or None
        return min_norm_point(
            frac_vec(point), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, budget=budget
        )

    def face(self, active: Sequence[int]) -> "Polyhedron":
        """The subset where the chosen rows hold with equality."""
        extra = []
        for i in active:
            a, b = self.rows[i]
            extra.append((tuple(-x for x in a), -b))
        return Polyhedron(self.dim, list(self.rows) + extra)


def intersect_polyhedra(sets: Sequence[Polyhedron]) -> Polyhedron:
    if not sets:
        raise ValueError("need at least one set")
    dim = sets[0].dim
    if any(s.dim != dim for s in sets):
        raise ValueError("all sets must share one dimension")
    rows: list[tuple[Vec, Fraction]] = []
    for s in sets:
        rows.extend(s.rows)
    return Polyhedron(dim, rows)


@dataclass(frozen=True)
class Cone:
    """Conic hull of generators plus a lineality span."""

    dim: int
    generators: tuple[Vec, ...]
    lineality: tuple[Vec, ...]

    def __init__(
        self,
        dim: int,
        generators: Iterable[Sequence] = (),
        lineality: Iterable[Sequence] = (),
    ):
        gens = tuple(frac_vec(g) for g in generators)
        lins = tuple(frac_vec(v) for v in lineality)
        for v in gens + lins:
            if len(v) != dim:
                raise ValueError("generator width does not match the dimension")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "lineality", lins)

    def is_trivial(self) -> bool:
        return all(all(x == 0 for x in v) for v in self.generators + self.lineality)

    def contains(self, v: Sequence) -> bool:
        vv = frac_vec(v)
        if len(vv) != self.dim:
            raise ValueError("vector dimension mismatch")
        cols = list(self.generators) + list(self.lineality)
        if not cols:
            return all(x == 0 for x in vv)
        A_eq = [[col[i] for col in cols] for i in range(self.dim)]
        signs = [True] * len(self.generators) + [False] * len(self.lineality)
        return (
            feasible_point(A_eq=A_eq, b_eq=list(vv), nonneg=signs, width=len(cols))
            is not None
        )

    def is_subspace(self) -> bool:
        return all(
            self.contains(tuple(-x for x in g)) for g in self.generators
        )


def polyhedron_to_json(S: Polyhedron) -> dict:
    return {
        "dim": S.dim,
        "rows": [
            {"a": [jsonable(x) for x in a], "b": jsonable(b)} for a, b in S.rows
        ],
    }


def load_polyhedron(obj: dict) -> Polyhedron:
    rows = [
        ([parse_number(x) for x in row["a"]], parse_number(row["b"]))
        for row in obj["rows"]
    ]
    return Polyhedron(int(obj["dim"]), rows)


def cone_to_json(C: Cone) -> dict:
    return {
        "dim": C.dim,
        "generators": [[jsonable(x) for x in g] for g in C.generators],
        "lineality": [[jsonable(x) for x in v] for v in C.lineality],
    }


def load_cone(obj: dict) -> Cone:
    return Cone(
        int(obj["dim"]),
        [[parse_number(x) for x in g] for g in obj.get("generators", [])],
        [[parse_number(x) for x in v] for v in obj.get("lineality", [])],
    )


def _active_split(S: Polyhedron, x: Sequence):
    """Active normals at x as (lineality normals, strict cone normals)."""
    active = set(S.active_rows(x))
    eq_rows, strict = S.split_rows()
    lin = [a for a, _ in eq_rows]
    gens = [a for i, (a, _) in strict if i in active]
    return lin, gens


def frechet_normal_cone(S: Polyhedron, x: Sequence) -> Cone:
    """Regular normal cone at a point: conic hull of active row normals.

    Normals of mirrored row pairs span in both directions and are
    reported as lineality.
    """
    lin, gens = _active_split(S, x)
    return Cone(S.dim, generators=gens, lineality=lin)


def tangential_part_sq(S: Polyhedron, x: Sequence, xstar: Sequence) -> Fraction:
    """Squared norm of the projection of xstar onto the tangent cone.

    The supremum of <xstar, d> over unit tangent directions equals the
    norm of this projection (Moreau), so this single exact number
    decides every eps-normal membership question at x.
    """
    xsv = frac_vec(xstar)
    if len(xsv) != S.dim:
        raise ValueError("vector dimension mismatch")
    lin, gens = _active_split(S, x)
    if not lin and not gens:
        return norm_sq(xsv)
    A_ub = [list(a) for a in gens] or None
    b_ub = [Fraction(0)] * len(gens) or None
    A_eq = [list(a) for a in lin] or None
    b_eq = [Fraction(0)] * len(lin) or None
    point, _ = min_norm_point(xsv, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq)
    return norm_sq(point)


def eps_normal_test(S: Polyhedron, x: Sequence, xstar: Sequence, eps) -> bool:
    """Is xstar an eps-normal to S at x?

    True exactly when the tangential component of xstar has norm at
    most eps, i.e. the worst directional quotient over the set stays
    below eps.
    """
    epsf = frac_vec([eps])[0]
    if epsf < 0:
        raise ValueError("eps must be nonnegative")
    return tangential_part_sq(S, x, xstar) <= epsf * epsf


@dataclass(frozen=True)
class FaceInfo:
    """One face of a polyhedron that meets a given ball."""

    active: tuple[int, ...]
    cone: Cone
    witness: Vec
    distance_sq: Fraction


def faces_within(
    S: Polyhedron, center: Sequence, radius, budget: int | None = None
) -> list[FaceInfo]:
    """Faces of S meeting the closed ball around center, with their cones.

    Every normal cone realized by a point of S in the ball appears as
    the cone of one of the returned faces, so unions and minimizations
    over the returned family are exact.  Cones are deduplicated by
    generator set.
    """
    cv = frac_vec(center)
    rad = frac_vec([radius])[0]
    if rad < 0:
        raise ValueError("radius must be nonnegative")
    cap = budget if budget is not None else default_budget()
    eq_rows, strict = S.split_rows()
    lin = [a for a, _ in eq_rows]
    m = len(strict)
    if 2**m > cap:
        raise BudgetError(f"face enumeration needs 2^{m} subsets, budget is {cap}")
    out: list[FaceInfo] = []
    seen: set[frozenset] = set()
    for size in range(m + 1):
        for pick in combinations(range(m), size):
            subset = tuple(strict[k][0] for k in pick)
            face = S.face(subset)
            proj = face.project(cv)
            if proj is None:
                continue
            point, dist_sq = proj
            if dist_sq > rad * rad:
                continue
            gens = frozenset(strict[k][1][0] for k in pick)
            if gens in seen:
                continue
            seen.add(gens)
            cone = Cone(
                S.dim,
                generators=[strict[k][1][0] for k in pick],
                lineality=lin,
            )
            out.append(FaceInfo(subset, cone, point, dist_sq))
    return out


@dataclass(frozen=True)
class PolyMap:
    """Set-valued map on R^n described by a polyhedral graph.

    The graph polyhedron lives in the product space with domain
    coordinates first, codomain coordinates after.
    """

    dim_dom: int
    dim_cod: int
    graph: Polyhedron

    def __init__(self, dim_dom: int, dim_cod: int, graph: Polyhedron):
        if graph.dim != dim_dom + dim_cod:
            raise ValueError("graph dimension must be dim_dom + dim_cod")
        object.__setattr__(self, "dim_dom", dim_dom)
        object.__setattr__(self, "dim_cod", dim_cod)
        object.__setattr__(self, "graph", graph)

    def holds(self, x: Sequence, y: Sequence) -> bool:
        return self.graph.contains(tuple(frac_vec(x)) + tuple(frac_vec(y)))


def linear_polymap(A: Sequence[Sequence]) -> PolyMap:
    """The single-valued map x -> Ax as a polyhedral graph."""
    return affine_polymap(A, [0] * len(A))


def affine_polymap(A: Sequence[Sequence], offset: Sequence) -> PolyMap:
    rows_in = [frac_vec(r) for r in A]
    off = frac_vec(offset)
    if len(rows_in) != len(off):
        raise ValueError("offset length must match the row count")
    dim_cod = len(rows_in)
    if dim_cod == 0:
        raise ValueError("need at least one codomain coordinate")
    dim_dom = len(rows_in[0])
    rows: list[tuple[list, object]] = []
    for i, r in enumerate(rows_in):
        fwd = list(r) + [Fraction(-1) if j == i else Fraction(0) for j in range(dim_cod)]
        rows.append((fwd, -off[i]))
        rows.append(([-x for x in fwd], off[i]))
    return PolyMap(dim_dom, dim_cod, Polyhedron(dim_dom + dim_cod, rows))


def constant_polymap(dim_dom: int, value: Sequence) -> PolyMap:
    val = frac_vec(value)
    dim_cod = len(val)
    rows: list[tuple[list, object]] = []
    for i in range(dim_cod):
        unit = [Fraction(0)] * (dim_dom + dim_cod)
        unit[dim_dom + i] = Fraction(1)
        rows.append((list(unit), val[i]))
        rows.append(([-x for x in unit], -val[i]))
    return PolyMap(dim_dom, dim_cod, Polyhedron(dim_dom + dim_cod, rows))


def polymap_to_json(F: PolyMap) -> dict:
    return {
        "dim_dom": F.dim_dom,
        "dim_cod": F.dim_cod,
        "graph": polyhedron_to_json(F.graph),
    }


def load_polymap(obj: dict) -> PolyMap:
    return PolyMap(
        int(obj["dim_dom"]), int(obj["dim_cod"]), load_polyhedron(obj["graph"])
    )


@dataclass(frozen=True)
class CoderivativeSlice:
    """The set {xstar : (xstar, -ystar) in N(graph, point)}.

    Polyhedral but kept implicit: membership, coordinate ranges, and
    singleton extraction run exact linear programs over the normal
    cone multipliers.
    """

    dim_dom: int
    dim_cod: int
    cone: Cone
    ystar: Vec

    def contains(self, xstar: Sequence) -> bool:
        xs = frac_vec(xstar)
        if len(xs) != self.dim_dom:
            raise ValueError("xstar dimension mismatch")
        return self.cone.contains(tuple(xs) + tuple(-y for y in self.ystar))

    def _program(self):
        cols = list(self.cone.generators) + list(self.cone.lineality)
        signs = [True] * len(self.cone.generators) + [False] * len(
            self.cone.lineality
        )
        A_eq = [
            [col[self.dim_dom + i] for col in cols] for i in range(self.dim_cod)
        ]
        b_eq = [-y for y in self.ystar]
        return cols, signs, A_eq, b_eq

    def is_empty(self) -> bool:
        cols, signs, A_eq, b_eq = self._program()
        if not cols:
            return any(y != 0 for y in self.ystar)
        return (
            feasible_point(A_eq=A_eq, b_eq=b_eq, nonneg=signs, width=len(cols))
            is None
        )

    def coordinate_range(self, i: int):
        """(min, max) of coordinate i over the slice; None marks unbounded."""
        cols, signs, A_eq, b_eq = self._program()
        if not cols:
            if any(y != 0 for y in self.ystar):
                raise ValueError("slice is empty")
            return Fraction(0), Fraction(0)
        cost = [col[i] for col in cols]
        lo_res = linprog_exact(cost, A_eq=A_eq, b_eq=b_eq, nonneg=signs)
        hi_res = linprog_exact(
            [-x for x in cost], A_eq=A_eq, b_eq=b_eq, nonneg=signs
        )
        if lo_res.status == "infeasible":
            raise ValueError("slice is empty")
        lo = lo_res.value if lo_res.status == "optimal" else None
        hi = -hi_res.value if hi_res.status == "optimal" else None
        return lo, hi

    def singleton(self) -> Vec | None:
        """The unique element when the slice is a single point."""
        if self.is_empty():
            return None
        point = []
        for i in range(self.dim_dom):
            lo, hi = self.coordinate_range(i)
            if lo is None or hi is None or lo != hi:
                return None
            point.append(lo)
        return tuple(point)

    def min_norm_sq(self) -> Fraction | None:
        """Squared norm of the least-norm element, None when empty."""
        cols, signs, A_eq, b_eq = self._program()
        if not cols:
            return None if any(y != 0 for y in self.ystar) else Fraction(0)
        n = len(cols)
        ext = self.dim_dom
        # Variables: multipliers then the assembled xstar coordinates.
        Q = [
            [Fraction(0)] * n + [Fraction(0)] * ext for _ in range(n)
        ] + [
            [Fraction(0)] * n
            + [Fraction(1) if i == j else Fraction(0) for j in range(ext)]
            for i in range(ext)
        ]
        q = [Fraction(0)] * (n + ext)
        eqs = [row + [Fraction(0)] * ext for row in A_eq]
        rhs = list(b_eq)
        for i in range(ext):
            row = [col[i] for col in cols] + [
                Fraction(-1) if j == i else Fraction(0) for j in range(ext)
            ]
            eqs.append(row)
            rhs.append(Fraction(0))
        ub_rows = []
        ub_rhs = []
        for k, nonneg_flag in enumerate(signs):
            if nonneg_flag:
                row = [Fraction(0)] * (n + ext)
                row[k] = Fraction(-1)
                ub_rows.append(row)
                ub_rhs.append(Fraction(0))
        res = quadratic_min(Q, q, ub_rows or None, ub_rhs or None, eqs, rhs)
        return None if res is None else res.value


def coderivative(F: PolyMap, x: Sequence, y: Sequence, ystar: Sequence) -> CoderivativeSlice:
    """Regular coderivative of F at a graph point, applied to ystar."""
    xv = frac_vec(x)
    yv = frac_vec(y)
    ysv = frac_vec(ystar)
    if len(ysv) != F.dim_cod:
        raise ValueError("ystar dimension mismatch")
    if not F.holds(xv, yv):
        raise ValueError("the pair is not on the graph")
    cone = frechet_normal_cone(F.graph, tuple(xv) + tuple(yv))
    return CoderivativeSlice(F.dim_dom, F.dim_cod, cone, ysv)
