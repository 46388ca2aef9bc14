"""Exact rational linear algebra, simplex, and convex QP by enumeration.

Everything here works over Fractions end to end: Gaussian elimination
with full solution sets, a two-phase simplex with Bland's rule (finite
on degenerate problems), and a convex quadratic minimizer that walks
linearly independent active sets and solves each KKT system exactly.
These are the primitives the polyhedral cone calculus is built on; no
floating point enters any verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from ..metric_core import BudgetError, default_budget

__all__ = [
    "LpResult",
    "QpResult",
    "dot",
    "feasible_point",
    "frac_mat",
    "frac_vec",
    "linprog_exact",
    "mat_vec",
    "min_norm_point",
    "norm_sq",
    "quadratic_min",
    "rank",
    "solve_affine",
]

Vec = tuple[Fraction, ...]
Mat = tuple[Vec, ...]


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ValueError("nonfinite value in exact arithmetic")
        return Fraction(x).limit_denominator(10**12)
    raise TypeError(f"cannot make a Fraction from {x!r}")


def frac_vec(seq: Iterable) -> Vec:
    return tuple(_frac(x) for x in seq)


def frac_mat(rows: Iterable[Iterable]) -> Mat:
    return tuple(frac_vec(r) for r in rows)


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def mat_vec(A: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vec:
    return tuple(dot(row, v) for row in A)


def norm_sq(v: Sequence[Fraction]) -> Fraction:
    return sum((x * x for x in v), Fraction(0))


def _rref(rows: list[list[Fraction]], width: int) -> tuple[list[list[Fraction]], list[int]]:
    pivots: list[int] = []
    r = 0
    for col in range(width):
        pivot_row = None
        for i in range(r, len(rows)):
            if rows[i][col] != 0:
                pivot_row = i
                break
        if pivot_row is None:
            continue
        rows[r], rows[pivot_row] = rows[pivot_row], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                factor = rows[i][col]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows, pivots


def rank(A: Sequence[Sequence[Fraction]]) -> int:
    if not A:
        return 0
    rows = [list(frac_vec(r)) for r in A]
    _, pivots = _rref(rows, len(rows[0]))
    return len(pivots)


def solve_affine(
    A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]
) -> tuple[Vec, list[Vec]] | None:
    """All solutions of Ax = b as particular point plus nullspace basis.

    Returns None when the system is inconsistent.
    """
    m = len(A)
    if m == 0:
        raise ValueError("empty system; width is undetermined")
    n = len(A[0])
    rows = [list(frac_vec(A[i])) + [_frac(b[i])] for i in range(m)]
    rows, pivots = _rref(rows, n)
    for row in rows:
        if all(x == 0 for x in row[:n]) and row[n] != 0:
            return None
    particular = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        particular[col] = rows[r][n]
    free = [j for j in range(n) if j not in pivots]
    basis: list[Vec] = []
    for j in free:
        vec = [Fraction(0)] * n
        vec[j] = Fraction(1)
        for r, col in enumerate(pivots):
            vec[col] = -rows[r][j]
        basis.append(tuple(vec))
    return tuple(particular), basis


@dataclass(frozen=True)
class LpResult:
    status: str
    x: Vec | None
    value: Fraction | None


def _simplex_core(c: list[Fraction], A: list[list[Fraction]], b: list[Fraction]):
    """min c.x st Ax = b, x >= 0, already with b >= 0.  Bland's rule."""
    m = len(A)
    n = len(c)
    # Tableau columns: n structural + m artificial + rhs.
    width = n + m
    T = [A[i][:] + [Fraction(1) if j == i else Fraction(0) for j in range(m)] + [b[i]] for i in range(m)]
    basis = [n + i for i in range(m)]

    def pivot(row: int, col: int) -> None:
        inv = 1 / T[row][col]
        T[row] = [x * inv for x in T[row]]
        for i in range(m):
            if i != row and T[i][col] != 0:
                f = T[i][col]
                T[i] = [a - f * bb for a, bb in zip(T[i], T[row])]
        basis[row] = col

    def run_phase(cost: list[Fraction], allowed: int) -> Fraction:
        while True:
            # Reduced costs relative to the current basis.
            y = [cost[basis[i]] for i in range(m)]
            entering = None
            for j in range(allowed):
                if j in basis:
                    continue
                red = cost[j] - sum(y[i] * T[i][j] for i in range(m))
                if red < 0:
                    entering = j
                    break
            if entering is None:
                return sum(y[i] * T[i][width] for i in range(m))
            leaving = None
            best = None
            for i in range(m):
                if T[i][entering] > 0:
                    ratio = T[i][width] / T[i][entering]
                    if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leaving]
                    ):
                        best = ratio
                        leaving = i
            if leaving is None:
                raise _Unbounded()
            pivot(leaving, entering)

    phase1_cost = [Fraction(0)] * n + [Fraction(1)] * m
    try:
        v1 = run_phase(phase1_cost, width)
    except _Unbounded:  # pragma: no cover - phase 1 is always bounded
        raise RuntimeError("phase 1 cannot be unbounded")
    if v1 > 0:
        return "infeasible", None, None
    # Drive leftover artificials out of the basis where possible.
    for i in range(m):
        if basis[i] >= n:
            for j in range(n):
                if T[i][j] != 0:
                    pivot(i, j)
                    break
    phase2_cost = c[:] + [Fraction(0)] * m
    try:
        value = run_phase(phase2_cost, n)
    except _Unbounded:
        return "unbounded", None, None
    x = [Fraction(0)] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = T[i][width]
    return "optimal", tuple(x), value


class _Unbounded(Exception):
    pass


def linprog_exact(
    c: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    nonneg: bool | Sequence[bool] = False,
) -> LpResult:
    """Exact LP: min c.x subject to A_ub x <= b_ub and A_eq x = b_eq.

    Variables are free unless flagged nonnegative (a single bool applies
    to all of them).  Free variables are split internally.
    """
    c = list(frac_vec(c))
    n = len(c)
    ub = [list(frac_vec(r)) for r in (A_ub or [])]
    bub = list(frac_vec(b_ub or []))
    eq = [list(frac_vec(r)) for r in (A_eq or [])]
    beq = list(frac_vec(b_eq or []))
    if isinstance(nonneg, bool):
        signs = [nonneg] * n
    else:
        signs = list(nonneg)
        if len(signs) != n:
            raise ValueError("nonneg flag count does not match variables")

    # Standard-form columns: for each variable one column (nonneg) or a
    # split pair (free); then one slack per inequality row.
    cols: list[tuple[int, Fraction]] = []
    std_c: list[Fraction] = []
    for j in range(n):
        cols.append((j, Fraction(1)))
        std_c.append(c[j])
        if not signs[j]:
            cols.append((j, Fraction(-1)))
            std_c.append(-c[j])
    n_slack = len(ub)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for i, row in enumerate(eq):
        std_row = [row[j] * s for (j, s) in cols] + [Fraction(0)] * n_slack
        rows.append(std_row)
        rhs.append(beq[i])
    for i, row in enumerate(ub):
        std_row = [row[j] * s for (j, s) in cols]
        std_row += [Fraction(1) if k == i else Fraction(0) for k in range(n_slack)]
        rows.append(std_row)
        rhs.append(bub[i])
    std_c += [Fraction(0)] * n_slack
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
    if not rows:
        # Unconstrained: bounded only when the cost is zero.
        if any(x != 0 for x in std_c):
            return LpResult("unbounded", None, None)
        return LpResult("optimal", tuple(Fraction(0) for _ in range(n)), Fraction(0))
    status, xs, value = _simplex_core(std_c, rows, rhs)
    if status != "optimal":
        return LpResult(status, None, None)
    x = [Fraction(0)] * n
    for k, (j, s) in enumerate(cols):
        x[j] += s * xs[k]
    return LpResult("optimal", tuple(x), value)


def feasible_point(
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    nonneg: bool | Sequence[bool] = False,
    width: int | None = None,
) -> Vec | None:
    """A point of the polyhedron, or None when it is empty."""
    if width is None:
        for block in (A_ub, A_eq):
            if block:
                width = len(block[0])
                break
        else:
            raise ValueError("cannot infer variable count")
    res = linprog_exact([0] * width, A_ub, b_ub, A_eq, b_eq, nonneg)
    return res.x if res.status == "optimal" else None


@dataclass(frozen=True)
class QpResult:
    value: Fraction
    point: Vec
    active: tuple[int, ...]


def quadratic_min(
    Q: Sequence[Sequence],
    q: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    budget: int | None = None,
) -> QpResult | None:
    """Exact minimum of v'Qv + q'v over a polyhedron (Q PSD).

    Walks the linearly independent active subsets of the inequality
    rows; each KKT system is solved exactly and the candidate checked
    for feasibility over its full solution set.  For convex objectives
    bounded below the true minimizer is always among the candidates.
    Returns None when the region is empty.
    """
    Qm = frac_mat(Q)
    qv = list(frac_vec(q))
    n = len(qv)
    ub = [list(frac_vec(r)) for r in (A_ub or [])]
    bub = list(frac_vec(b_ub or []))
    eq = [list(frac_vec(r)) for r in (A_eq or [])]
    beq = list(frac_vec(b_eq or []))
    cap = budget if budget is not None else default_budget()

    if feasible_point(ub or None, bub or None, eq or None, beq or None, width=n) is None:
        return None

    def objective(v: Sequence[Fraction]) -> Fraction:
        return dot(v, mat_vec(Qm, v)) + dot(qv, v)

    base_rank = rank(eq) if eq else 0
    m_ub = len(ub)
    n_eq = len(eq)
    best: QpResult | None = None
    examined = 0
    max_size = min(m_ub, n - base_rank)
    for size in range(max_size + 1):
        for subset in combinations(range(m_ub), size):
            examined += 1
            if examined > cap:
                raise BudgetError(
                    f"active-set enumeration exceeded the budget of {cap}"
                )
            stacked = eq + [ub[i] for i in subset]
            if stacked and rank(stacked) != base_rank + size:
                continue
            # KKT unknowns: v, then one multiplier per equality and
            # active row.  Stationarity: 2Qv + A'mu + S'nu = -q.
            n_all = n + n_eq + size
            kkt_rows: list[list[Fraction]] = []
            kkt_rhs: list[Fraction] = []
            for i in range(n):
                row = [2 * Qm[i][j] for j in range(n)]
                row += [eq[k][i] for k in range(n_eq)]
                row += [ub[subset[k]][i] for k in range(size)]
                kkt_rows.append(row)
                kkt_rhs.append(-qv[i])
            for k in range(n_eq):
                kkt_rows.append(eq[k] + [Fraction(0)] * (n_eq + size))
                kkt_rhs.append(beq[k])
            for k in range(size):
                kkt_rows.append(ub[subset[k]] + [Fraction(0)] * (n_eq + size))
                kkt_rhs.append(bub[subset[k]])
            sol = solve_affine(kkt_rows, kkt_rhs)
            if sol is None:
                continue
            part, null = sol
            v_part = part[:n]
            if not ub:
                v = v_part
            else:
                null_v = [np_vec[:n] for np_vec in null]
                if not null_v or all(all(x == 0 for x in nv) for nv in null_v):
                    if any(dot(ub[i], v_part) > bub[i] for i in range(m_ub)):
                        continue
                    v = v_part
                else:
                    shift_rows = [
                        [dot(ub[i], nv) for nv in null_v] for i in range(m_ub)
                    ]
                    shift_rhs = [bub[i] - dot(ub[i], v_part) for i in range(m_ub)]
                    t = feasible_point(shift_rows, shift_rhs, width=len(null_v))
                    if t is None:
                        continue
                    v = tuple(
                        v_part[i] + sum(t[k] * null_v[k][i] for k in range(len(null_v)))
                        for i in range(n)
                    )
            cand = QpResult(objective(v), v, subset)
            if best is None or cand.value < best.value:
                best = cand
    if best is None:
        raise RuntimeError("feasible region nonempty but no KKT candidate found")
    return best


def min_norm_point(
    center: Sequence,
    A_ub: Sequence[Sequence] | None = None,
    b_ub: Sequence | None = None,
    A_eq: Sequence[Sequence] | None = None,
    b_eq: Sequence | None = None,
    budget: int | None = None,
) -> tuple[Vec, Fraction] | None:
    """Euclidean projection of ``center`` onto a polyhedron.

    Returns the exact projection point and the squared distance, or
    None when the polyhedron is empty.
    """
    cv = frac_vec(center)
    n = len(cv)
    Q = [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    q = [-2 * x for x in cv]
    res = quadratic_min(Q, q, A_ub, b_ub, A_eq, b_eq, budget=budget)
    if res is None:
        return None
    return res.point, res.value + norm_sq(cv)
