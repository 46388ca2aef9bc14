"""Alliedness certificates and intersection audits for polyhedral sets.

Three views of the same geometry.  The certificate decides, exactly,
whether normal families drawn from faces near a point can cancel; when
they cannot, it quantifies the worst cancellation.  The metric
inequality audit checks the distance estimate for the intersection on
a grid.  The sum-rule audit verifies that normals of the intersection
decompose into normals of the pieces.  The soundness-critical parts
(cancellation gate, distance comparisons, cone memberships) run in
exact rational arithmetic; only the reported Euclidean minimum of the
certificate is refined numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

from ..metric_core import BudgetError, TAU_NUM, default_budget
from ..report import VERDICT_FAIL, VERDICT_PASS, AuditReport
from .linalg_exact import (
    Vec,
    dot,
    frac_vec,
    linprog_exact,
    norm_sq,
    quadratic_min,
)
from .polyhedra import (
    Cone,
    FaceInfo,
    Polyhedron,
    faces_within,
    frechet_normal_cone,
    intersect_polyhedra,
)

__all__ = [
    "AlliednessCertificate",
    "alliedness_certificate",
    "ball_grid",
    "box_grid",
    "intersection_rule_audit",
    "metric_inequality_audit",
]


def ball_grid(center: Sequence, radius, step) -> list[Vec]:
    """Grid points of spacing step inside the closed ball around center."""
    cv = frac_vec(center)
    rad = frac_vec([radius])[0]
    h = frac_vec([step])[0]
    if rad <= 0 or h <= 0:
        raise ValueError("radius and step must be positive")
    span = int(rad / h)
    axes = [range(-span, span + 1)] * len(cv)
    out = []
    for combo in product(*axes):
        offset = [k * h for k in combo]
        if sum(o * o for o in offset) <= rad * rad:
            out.append(tuple(c + o for c, o in zip(cv, offset)))
    return out


def box_grid(center: Sequence, radius, step) -> list[Vec]:
    """Grid points of spacing step in the coordinate box around center."""
    cv = frac_vec(center)
    rad = frac_vec([radius])[0]
    h = frac_vec([step])[0]
    if rad <= 0 or h <= 0:
        raise ValueError("radius and step must be positive")
    span = int(rad / h)
    axes = [range(-span, span + 1)] * len(cv)
    return [
        tuple(c + k * h for c, k in zip(cv, combo)) for combo in product(*axes)
    ]


def _check_common_point(sets: Sequence[Polyhedron], xbar) -> Vec:
    if not sets:
        raise ValueError("need at least one set")
    xv = frac_vec(xbar)
    for i, S in enumerate(sets):
        if not S.contains(xv):
            raise ValueError(f"base point is not in set {i}")
    return xv


def _cone_columns(cone: Cone):
    """Column vectors and nonnegativity flags parametrizing the cone."""
    cols = list(cone.generators) + list(cone.lineality)
    signs = [True] * len(cone.generators) + [False] * len(cone.lineality)
    return cols, signs


def _zero_sum_witness(cones: Sequence[Cone], dim: int):
    """A family x_i in the cones, not all zero, with sum zero; or None.

    Decided exactly: free multipliers are split into sign pairs and the
    whole family normalized to total multiplier mass one, then each
    coordinate of each member is pushed positive and negative in turn.
    """
    col_blocks = []
    for cone in cones:
        cols, signs = _cone_columns(cone)
        split_cols: list[Vec] = []
        for c, nonneg in zip(cols, signs):
            split_cols.append(c)
            if not nonneg:
                split_cols.append(tuple(-x for x in c))
        col_blocks.append(split_cols)
    total = sum(len(b) for b in col_blocks)
    if total == 0:
        return None
    # Equality rows: the family sums to zero coordinate by coordinate.
    zero_rows = []
    for coord in range(dim):
        row = []
        for block in col_blocks:
            row.extend(col[coord] for col in block)
        zero_rows.append(row)
    mass_row = [[Fraction(1)] * total]
    for i0, block in enumerate(col_blocks):
        for coord in range(dim):
            for sign in (1, -1):
                cost = []
                for j, other in enumerate(col_blocks):
                    if j == i0:
                        cost.extend(-sign * col[coord] for col in other)
                    else:
                        cost.extend(Fraction(0) for _ in other)
                res = linprog_exact(
                    cost,
                    A_eq=zero_rows + mass_row,
                    b_eq=[Fraction(0)] * dim + [Fraction(1)],
                    nonneg=True,
                )
                if res.status != "optimal" or -res.value <= 0:
                    continue
                family = []
                offset = 0
                for other in col_blocks:
                    member = [Fraction(0)] * dim
                    for col in other:
                        lam = res.x[offset]
                        offset += 1
                        for u in range(dim):
                            member[u] += lam * col[u]
                    family.append(tuple(member))
                return tuple(family)
    return None


def _min_sum_norm_numeric(cones: Sequence[Cone], dim: int) -> float | None:
    """Euclidean min of |sum| over families with max member norm one.

    Smooth local minimization from deterministic starts; the exact gate
    has already ruled out full cancellation, so the value is positive.
    """
    from scipy.optimize import minimize

    blocks = [_cone_columns(c) for c in cones]
    sizes = [len(cols) for cols, _ in blocks]
    offsets = [sum(sizes[:i]) for i in range(len(sizes))]
    n_var = sum(sizes)

    def member(i: int, v) -> list[float]:
        cols, _ = blocks[i]
        out = [0.0] * dim
        for j, col in enumerate(cols):
            lam = v[offsets[i] + j]
            for u in range(dim):
                out[u] += lam * float(col[u])
        return out

    def objective(v):
        total = [0.0] * dim
        for i in range(len(cones)):
            m = member(i, v)
            for u in range(dim):
                total[u] += m[u]
        return sum(t * t for t in total)

    best = None
    for i0 in range(len(cones)):
        bounds = []
        for cols, signs in blocks:
            bounds.extend([(0, None) if s else (None, None) for s in signs])

        cons = [
            {
                "type": "eq",
                "fun": (lambda v, i=i0: sum(x * x for x in member(i, v)) - 1.0),
            }
        ]
        for j in range(len(cones)):
            if j != i0:
                cons.append(
                    {
                        "type": "ineq",
                        "fun": (
                            lambda v, i=j: 1.0 - sum(x * x for x in member(i, v))
                        ),
                    }
                )

        starts = []
        cols0, signs0 = blocks[i0]
        for j, col in enumerate(cols0):
            nrm = math.sqrt(float(norm_sq(col)))
            if nrm == 0:
                continue
            # Free multipliers live on a disconnected sphere slice, so
            # both signed unit starts are needed.
            unit_signs = (1.0,) if signs0[j] else (1.0, -1.0)
            for sgn in unit_signs:
                for fill in (0.0, 0.5):
                    v0 = [fill] * n_var
                    v0[offsets[i0] + j] = sgn / nrm
                    starts.append(v0)
        for v0 in starts:
            res = minimize(
                objective,
                v0,
                method="SLSQP",
                bounds=bounds,
                constraints=cons,
                options={"maxiter": 200, "ftol": 1e-14},
            )
            if not res.success:
                continue
            # Re-verify feasibility before trusting the value.
            norms = [
                math.sqrt(sum(x * x for x in member(i, res.x)))
                for i in range(len(cones))
            ]
            if abs(max(norms) - 1.0) > 1e-7:
                continue
            val = math.sqrt(max(res.fun, 0.0))
            if best is None or val < best:
                best = val
    return best


def _certified_poly_min(cones: Sequence[Cone], dim: int) -> Fraction | None:
    """Exact min of |sum|_inf over families with max member |.|_inf one."""
    blocks = [_cone_columns(c) for c in cones]
    sizes = [len(cols) for cols, _ in blocks]
    n_var = sum(sizes) + 1  # multipliers then the epigraph variable
    best: Fraction | None = None
    for i0, cone in enumerate(cones):
        cols0, _ = blocks[i0]
        if not cols0:
            continue
        for coord in range(dim):
            for sign in (1, -1):
                A_eq = []
                b_eq = []
                row = [Fraction(0)] * n_var
                pos = 0
                for j, (cols, _) in enumerate(blocks):
                    for col in cols:
                        if j == i0:
                            row[pos] = sign * col[coord]
                        pos += 1
                A_eq.append(row)
                b_eq.append(Fraction(1))
                A_ub = []
                b_ub = []
                # Every member coordinate within [-1, 1].
                for j, (cols, _) in enumerate(blocks):
                    for u in range(dim):
                        base = [Fraction(0)] * n_var
                        pos = 0
                        for jj, (cc, _) in enumerate(blocks):
                            for col in cc:
                                if jj == j:
                                    base[pos] = col[u]
                                pos += 1
                        A_ub.append(base)
                        b_ub.append(Fraction(1))
                        A_ub.append([-x for x in base])
                        b_ub.append(Fraction(1))
                # Sum coordinates within [-t, t] for the epigraph t.
                for u in range(dim):
                    base = [Fraction(0)] * n_var
                    pos = 0
                    for cols, _ in blocks:
                        for col in cols:
                            base[pos] = col[u]
                            pos += 1
                    up = base[:]
                    up[-1] = Fraction(-1)
                    A_ub.append(up)
                    b_ub.append(Fraction(0))
                    down = [-x for x in base]
                    down[-1] = Fraction(-1)
                    A_ub.append(down)
                    b_ub.append(Fraction(0))
                nonneg = []
                for cols, signs in blocks:
                    nonneg.extend(signs)
                nonneg.append(True)
                cost = [Fraction(0)] * n_var
                cost[-1] = Fraction(1)
                res = linprog_exact(
                    cost, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, nonneg=nonneg
                )
                if res.status != "optimal":
                    continue
                if best is None or res.value < best:
                    best = res.value
    return best


@dataclass(frozen=True)
class AlliednessCertificate:
    """Outcome of the face-wise cancellation analysis at a point.

    When allied, ``a`` bounds the inverse cancellation: any normal
    family with max norm one has a sum of norm at least 1/a.  The
    Euclidean ``a`` is refined numerically; ``certified_a`` is an exact
    polyhedral bound valid on its own (weaker by at most sqrt(dim)).
    """

    allied: bool
    vacuous: bool
    a: float | None
    min_sum_norm: float | None
    certified_a: float | None
    counterexample: tuple[Vec, ...] | None
    cones_per_set: tuple[int, ...]
    combos_checked: int

    def to_json(self) -> dict:
        from ..report import jsonable

        return {
            "allied": self.allied,
            "vacuous": self.vacuous,
            "a": jsonable(self.a),
            "min_sum_norm": jsonable(self.min_sum_norm),
            "certified_a": jsonable(self.certified_a),
            "counterexample": jsonable(self.counterexample),
            "cones_per_set": list(self.cones_per_set),
            "combos_checked": self.combos_checked,
        }


def alliedness_certificate(
    sets: Sequence[Polyhedron],
    xbar: Sequence,
    r,
    budget: int | None = None,
) -> AlliednessCertificate:
    """Decide alliedness of the sets at xbar over faces within radius r.

    Exact gate: a nonzero normal family summing to zero is searched by
    linear programming over every face combination; finding one refutes
    alliedness and is returned as the counterexample.  Otherwise the
    minimal Euclidean sum norm over max-norm-one families is minimized
    numerically and inverted into a, alongside an exact polyhedral
    lower bound.
    """
    xv = _check_common_point(sets, xbar)
    dim = sets[0].dim
    if any(S.dim != dim for S in sets):
        raise ValueError("all sets must share one dimension")
    cap = budget if budget is not None else default_budget()
    face_lists: list[list[FaceInfo]] = [
        faces_within(S, xv, r, budget=cap) for S in sets
    ]
    combos = 1
    for fl in face_lists:
        combos *= len(fl)
    if combos > cap:
        raise BudgetError(f"{combos} face combinations exceed the budget {cap}")

    checked = 0
    for combo in product(*face_lists):
        checked += 1
        cones = [f.cone for f in combo]
        witness = _zero_sum_witness(cones, dim)
        if witness is not None:
            return AlliednessCertificate(
                allied=False,
                vacuous=False,
                a=None,
                min_sum_norm=None,
                certified_a=None,
                counterexample=witness,
                cones_per_set=tuple(len(fl) for fl in face_lists),
                combos_checked=checked,
            )

    best_numeric: float | None = None
    best_exact: Fraction | None = None
    for combo in product(*face_lists):
        cones = [f.cone for f in combo]
        if all(c.is_trivial() for c in cones):
            continue
        if len(cones) == 1:
            val = 1.0
        else:
            val = _min_sum_norm_numeric(cones, dim)
        if val is not None and (best_numeric is None or val < best_numeric):
            best_numeric = val
        exact = _certified_poly_min(cones, dim)
        if exact is not None and (best_exact is None or exact < best_exact):
            best_exact = exact

    if best_numeric is None:
        return AlliednessCertificate(
            allied=True,
            vacuous=True,
            a=None,
            min_sum_norm=None,
            certified_a=None,
            counterexample=None,
            cones_per_set=tuple(len(fl) for fl in face_lists),
            combos_checked=checked,
        )
    if best_exact is None or best_exact <= 0:
        raise RuntimeError(
            "cancellation gate passed but the polyhedral minimum degenerated"
        )
    certified_a = math.sqrt(dim) / float(best_exact)
    return AlliednessCertificate(
        allied=True,
        vacuous=False,
        a=1.0 / best_numeric,
        min_sum_norm=best_numeric,
        certified_a=certified_a,
        counterexample=None,
        cones_per_set=tuple(len(fl) for fl in face_lists),
        combos_checked=checked,
    )


def metric_inequality_audit(
    sets: Sequence[Polyhedron],
    xbar: Sequence,
    r,
    tau,
    grid_step,
    budget: int | None = None,
) -> AuditReport:
    """Check d(x, intersection) <= tau * sum d(x, S_i) on a grid.

    Distances are Euclidean, computed by exact quadratic projection;
    the comparison allows the standard numeric slack on the square
    roots.  The worst ratio and its grid point are reported.
    """
    xv = _check_common_point(sets, xbar)
    tau_f = float(frac_vec([tau])[0])
    if tau_f <= 0:
        raise ValueError("tau must be positive")
    cap = budget if budget is not None else default_budget()
    points = ball_grid(xv, r, grid_step)
    if len(points) > cap:
        raise BudgetError(f"grid of {len(points)} points exceeds the budget {cap}")
    inter = intersect_polyhedra(list(sets))
    worst_ratio = 0.0
    worst_point: Vec | None = None
    worst_parts: list[float] = []
    failures: list[tuple] = []
    for x in points:
        dists = []
        for S in sets:
            proj = S.project(x)
            if proj is None:
                raise RuntimeError("projection subproblem was infeasible")
            dists.append(math.sqrt(float(proj[1])))
        proj = inter.project(x)
        if proj is None:
            raise RuntimeError("projection subproblem was infeasible")
        lhs = math.sqrt(float(proj[1]))
        rhs_sum = sum(dists)
        if rhs_sum == 0.0:
            continue  # x lies in every set, hence in the intersection
        ratio = lhs / rhs_sum
        if ratio > worst_ratio:
            worst_ratio = ratio
            worst_point = x
            worst_parts = dists
        if lhs > tau_f * rhs_sum + TAU_NUM:
            failures.append((x, lhs, rhs_sum))
    verdict = VERDICT_PASS if not failures else VERDICT_FAIL
    witnesses = ()
    if failures:
        x, lhs, rhs_sum = failures[0]
        witnesses = (
            {
                "point": x,
                "distance_to_intersection": lhs,
                "sum_of_distances": rhs_sum,
            },
        )
    elif worst_point is not None:
        witnesses = ({"point": worst_point, "per_set_distances": worst_parts},)
    return AuditReport(
        kind="metric-inequality",
        verdict=verdict,
        value=worst_ratio,
        witnesses=witnesses,
        constants={
            "tau": tau_f,
            "radius": float(frac_vec([r])[0]),
            "grid_step": float(frac_vec([grid_step])[0]),
            "points_checked": len(points),
            "violations": len(failures),
        },
    )


def _distance_sq_to_cone_sum(g: Vec, cones: Sequence[Cone], dim: int) -> Fraction:
    """Exact squared distance from g to the Minkowski sum of the cones."""
    cols: list[Vec] = []
    signs: list[bool] = []
    for cone in cones:
        cc, ss = _cone_columns(cone)
        cols.extend(cc)
        signs.extend(ss)
    if not cols:
        return norm_sq(g)
    n = len(cols)
    # Variables: multipliers, then the assembled sum vector s.
    Q = [[Fraction(0)] * (n + dim) for _ in range(n)]
    for i in range(dim):
        row = [Fraction(0)] * (n + dim)
        row[n + i] = Fraction(1)
        Q.append(row)
    q = [Fraction(0)] * n + [-2 * x for x in g]
    A_eq = []
    b_eq = []
    for i in range(dim):
        row = [col[i] for col in cols] + [
            Fraction(-1) if j == i else Fraction(0) for j in range(dim)
        ]
        A_eq.append(row)
        b_eq.append(Fraction(0))
    A_ub = []
    b_ub = []
    for k, nonneg in enumerate(signs):
        if nonneg:
            row = [Fraction(0)] * (n + dim)
            row[k] = Fraction(-1)
            A_ub.append(row)
            b_ub.append(Fraction(0))
    res = quadratic_min(Q, q, A_ub or None, b_ub or None, A_eq, b_eq)
    if res is None:  # pragma: no cover - cones always contain zero
        raise RuntimeError("cone sum program infeasible")
    return res.value + norm_sq(g)


def _sum_cone_contains(g: Vec, cones: Sequence[Cone], dim: int) -> bool:
    cols: list[Vec] = []
    signs: list[bool] = []
    for cone in cones:
        cc, ss = _cone_columns(cone)
        cols.extend(cc)
        signs.extend(ss)
    if not cols:
        return all(x == 0 for x in g)
    A_eq = [[col[i] for col in cols] for i in range(dim)]
    res = linprog_exact(
        [Fraction(0)] * len(cols), A_eq=A_eq, b_eq=list(g), nonneg=signs
    )
    return res.status == "optimal"


def intersection_rule_audit(
    sets: Sequence[Polyhedron],
    xbar: Sequence,
    r,
    eps,
    grid_step=None,
    budget: int | None = None,
) -> AuditReport:
    """Audit the normal-cone sum rule for the intersection.

    At every grid point of the intersection near xbar, each generator
    of the intersection's normal cone must lie within eps (relative to
    its own norm) of the Minkowski sum of the sets' normal cones taken
    at points within eps.  Memberships and distances are exact.
    """
    xv = _check_common_point(sets, xbar)
    dim = sets[0].dim
    eps_f = frac_vec([eps])[0]
    if eps_f < 0:
        raise ValueError("eps must be nonnegative")
    step = grid_step if grid_step is not None else frac_vec([r])[0] / 2
    cap = budget if budget is not None else default_budget()
    inter = intersect_polyhedra(list(sets))
    points = [x for x in ball_grid(xv, r, step) if inter.contains(x)]
    if len(points) > cap:
        raise BudgetError(f"grid of {len(points)} points exceeds the budget {cap}")
    checked_generators = 0
    worst_rel = 0.0
    failing = None
    for x in points:
        cone = frechet_normal_cone(inter, x)
        candidates = list(cone.generators)
        for v in cone.lineality:
            candidates.append(v)
            candidates.append(tuple(-y for y in v))
        face_lists = [faces_within(S, x, eps_f, budget=cap) for S in sets]
        for g in candidates:
            gn = norm_sq(g)
            if gn == 0:
                continue
            checked_generators += 1
            best_sq: Fraction | None = None
            hit = False
            for combo in product(*face_lists):
                cones = [f.cone for f in combo]
                if _sum_cone_contains(g, cones, dim):
                    hit = True
                    best_sq = Fraction(0)
                    break
                d_sq = _distance_sq_to_cone_sum(g, cones, dim)
                if best_sq is None or d_sq < best_sq:
                    best_sq = d_sq
            if not hit and best_sq is not None and best_sq > eps_f * eps_f * gn:
                rel = math.sqrt(float(best_sq / gn))
                if failing is None:
                    failing = {"point": x, "generator": g, "relative_distance": rel}
            if best_sq is not None:
                rel = math.sqrt(float(best_sq / gn))
                worst_rel = max(worst_rel, rel)
    verdict = VERDICT_PASS if failing is None else VERDICT_FAIL
    return AuditReport(
        kind="intersection-rule",
        verdict=verdict,
        value=worst_rel,
        witnesses=(failing,) if failing else (),
        constants={
            "eps": float(eps_f),
            "radius": float(frac_vec([r])[0]),
            "grid_step": float(frac_vec([step])[0]),
            "points_checked": len(points),
            "generators_checked": checked_generators,
        },
    )
