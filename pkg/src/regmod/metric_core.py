"""Finite metric spaces and the point-set calculus built on them.

This module is the base layer of the package: explicit finite metric
spaces, distances from points to sets, excess between sets, open and
closed balls, and product metrics (weighted sum and weighted max).

NOTES:
- Points are identified by index into the label list.  Labels are
  opaque; only the distance matrix matters.
- Distances may be int, float or Fraction.  A float64 matrix is kept
  alongside the exact entries for vectorized scans; exact entries are
  the source of truth for rational re-checks.
- The distinguished infinity is math.inf, never a large sentinel.
- Spaces compare by identity.  Two structurally equal spaces are still
  different spaces, and mixing their points is a caller bug surfaced
  as SpaceMismatchError.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable, Sequence

import numpy as np

from .report import AuditReport, VERDICT_FAIL, VERDICT_PASS

__all__ = [
    "INF",
    "TAU_NUM",
    "DEFAULT_BUDGET",
    "Ext",
    "MetricSpace",
    "PointSet",
    "ProductMetric",
    "SpaceMismatchError",
    "BudgetError",
    "InvalidMetricError",
    "ball",
    "default_budget",
    "dist_point_set",
    "excess",
    "load_space",
    "parse_number",
    "product_space",
    "space_to_json",
    "validate_metric",
]

# Extended nonnegative reals: int, Fraction or float, with math.inf as
# the one infinity.  Addition absorbs inf and comparisons are total,
# which is all the callers rely on.
Ext = int | float | Fraction
INF: float = math.inf

# Absolute tolerance for comparisons of derived floating values.
# Distances read from input are taken exact.
TAU_NUM: float = 1e-9

DEFAULT_BUDGET: int = 4096


def ext_mul(a: Ext, b: Ext) -> Ext:
    """Product on extended reals with the conventions 0*inf = 0 and
    (negative)*inf = -inf used by the variational estimates."""
    a_inf = isinstance(a, float) and math.isinf(a)
    b_inf = isinstance(b, float) and math.isinf(b)
    if a_inf or b_inf:
        if a == 0 or b == 0:
            return 0
        sign = (1 if a > 0 else -1) * (1 if b > 0 else -1)
        return INF if sign > 0 else -INF
    return a * b


def default_budget() -> int:
    """Product-space point budget, overridable via REGMOD_BUDGET."""
    raw = os.environ.get("REGMOD_BUDGET")
    if raw is None:
        return DEFAULT_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"REGMOD_BUDGET must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError("REGMOD_BUDGET must be positive")
    return value


class SpaceMismatchError(ValueError):
    """Points or sets from different spaces were mixed."""


class BudgetError(RuntimeError):
    """A product enumeration would exceed the configured point budget."""


class InvalidMetricError(ValueError):
    """A distance matrix violates the metric axioms."""

    def __init__(self, report: AuditReport):
        super().__init__(f"invalid metric: {report.witnesses}")
        self.report = report


class MetricSpace:
    """A finite metric space given by labels and a full distance matrix."""

    __slots__ = ("labels", "dist", "mat", "_realized")

    def __init__(self, labels: Sequence[Any], dist: Sequence[Sequence[Ext]]):
        self.labels: tuple = tuple(labels)
        self.dist: tuple[tuple[Ext, ...], ...] = tuple(tuple(row) for row in dist)
        n = len(self.labels)
        if len(self.dist) != n or any(len(row) != n for row in self.dist):
            raise ValueError("distance matrix shape does not match label count")
        self.mat: np.ndarray = np.array(
            [[float(v) for v in row] for row in self.dist], dtype=np.float64
        )
        self.mat.setflags(write=False)
        self._realized: tuple[Ext, ...] | None = None

    @property
    def n(self) -> int:
        return len(self.labels)

    def points(self) -> range:
        return range(self.n)

    def d(self, i: int, j: int) -> Ext:
        return self.dist[i][j]

    def diameter(self) -> Ext:
        if self.n <= 1:
            return 0
        return max(max(row) for row in self.dist)

    def realized_distances(self) -> tuple[Ext, ...]:
        """Sorted distinct positive distances; the natural scale grid."""
        if self._realized is None:
            vals = {self.dist[i][j] for i in range(self.n) for j in range(i)}
            vals.discard(0)
            self._realized = tuple(sorted(vals))
        return self._realized

    def index_of(self, label: Any) -> int:
        return self.labels.index(label)

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"MetricSpace(n={self.n})"


@dataclass(frozen=True)
class PointSet:
    """A subset of a metric space's points."""

    space: MetricSpace
    members: frozenset[int]

    def __post_init__(self):
        for i in self.members:
            if not 0 <= i < self.space.n:
                raise IndexError(f"point index {i} out of range")

    def __iter__(self):
        return iter(sorted(self.members))

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, i: int) -> bool:
        return i in self.members

    @property
    def empty(self) -> bool:
        return not self.members


def _same_space(a: MetricSpace, b: MetricSpace, what: str) -> None:
    if a is not b:
        raise SpaceMismatchError(what)


def dist_point_set(space: MetricSpace, x: int, members: Iterable[int] | PointSet) -> Ext:
    """d(x, A) = min over a in A of d(x, a); +inf when A is empty."""
    if isinstance(members, PointSet):
        _same_space(space, members.space, "dist_point_set: point and set spaces differ")
        members = members.members
    if not 0 <= x < space.n:
        raise IndexError(f"point index {x} out of range")
    row = space.dist[x]
    best: Ext = INF
    for a in members:
        if row[a] < best:
            best = row[a]
    return best


def excess(A: PointSet | Iterable[int], B: PointSet | Iterable[int], space: MetricSpace | None = None) -> Ext:
    """e(A, B) = sup over a in A of d(a, B).

    Conventions: e(empty, B) = 0 and e(A, empty) = +inf for nonempty A.
    """
    if isinstance(A, PointSet):
        space = A.space if space is None else space
        _same_space(space, A.space, "excess: set A lives in a different space")
        A = A.members
    if isinstance(B, PointSet):
        space = B.space if space is None else space
        _same_space(space, B.space, "excess: set B lives in a different space")
        B = B.members
    if space is None:
        raise ValueError("excess needs a space when given raw index sets")
    A = frozenset(A)
    B = frozenset(B)
    if not A:
        return 0
    if not B:
        return INF
    return max(dist_point_set(space, a, B) for a in A)


def ball(space: MetricSpace, center: int, radius: Ext, closed: bool = False) -> PointSet:
    """Open ball {u : d(center,u) < r} or closed ball {u : <= r}.

    The center always belongs to the result, so degenerate radii still
    give {center} rather than the empty set.
    """
    if not 0 <= center < space.n:
        raise IndexError(f"point index {center} out of range")
    row = space.dist[center]
    if closed:
        members = {u for u in range(space.n) if row[u] <= radius}
    else:
        members = {u for u in range(space.n) if row[u] < radius}
    members.add(center)
    return PointSet(space, frozenset(members))


@dataclass(frozen=True)
class ProductMetric:
    """Recipe for a product metric: factors, positive weights, combiner.

    combiner "sum" gives sum_i w_i * d_i, the default additive metric;
    "weighted-max" gives max_i w_i * d_i.  Weights (1, m, 1/l) under
    weighted-max give the composition proof's metric on X x Y1 x Y2.
    """

    factors: tuple[MetricSpace, ...]
    weights: tuple[Ext, ...] | None = None
    combiner: str = "sum"

    def __post_init__(self):
        if self.combiner not in ("sum", "weighted-max"):
            raise ValueError(f"unknown combiner {self.combiner!r}")
        if self.weights is not None:
            if len(self.weights) != len(self.factors):
                raise ValueError("one weight per factor required")
            if any(w <= 0 or (isinstance(w, float) and math.isinf(w)) for w in self.weights):
                raise ValueError("weights must be positive and finite")

    @property
    def effective_weights(self) -> tuple[Ext, ...]:
        if self.weights is None:
            return tuple(1 for _ in self.factors)
        return self.weights

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(f.n for f in self.factors)

    def point_count(self) -> int:
        count = 1
        for f in self.factors:
            count *= f.n
        return count

    def flat(self, multi: Sequence[int]) -> int:
        """Row-major flat index of a tuple of per-factor indices."""
        k = 0
        for size, i in zip(self.sizes, multi):
            if not 0 <= i < size:
                raise IndexError(f"factor index {i} out of range")
            k = k * size + i
        return k

    def unflat(self, k: int) -> tuple[int, ...]:
        multi = []
        for size in reversed(self.sizes):
            multi.append(k % size)
            k //= size
        return tuple(reversed(multi))

    def dist_multi(self, a: Sequence[int], b: Sequence[int]) -> Ext:
        """Product distance between two tuples of factor indices."""
        parts = [
            w * f.dist[i][j]
            for f, w, i, j in zip(self.factors, self.effective_weights, a, b)
        ]
        if self.combiner == "sum":
            return sum(parts)
        return max(parts)


def product_space(pm: ProductMetric, budget: int | None = None) -> MetricSpace:
    """Materialize the product metric as an explicit MetricSpace.

    Labels are tuples of factor labels, ordered row-major so that
    pm.flat/pm.unflat translate between tuple and flat indices.  The
    result is a metric by construction (positive combinations of
    metrics), so it is not re-validated here.
    """
    if budget is None:
        budget = default_budget()
    count = pm.point_count()
    if count > budget:
        raise BudgetError(
            f"product space needs {count} points, budget is {budget}"
        )
    sizes = pm.sizes
    weights = pm.effective_weights
    labels = []
    multis = []
    for k in range(count):
        multi = pm.unflat(k)
        multis.append(multi)
        labels.append(tuple(pm.factors[t].labels[i] for t, i in enumerate(multi)))

    # Vectorized assembly: stack per-factor distance contributions.
    idx = np.array(multis, dtype=np.intp)
    acc = None
    exact_parts = []
    for t, (f, w) in enumerate(zip(pm.factors, weights)):
        sub = f.mat[np.ix_(idx[:, t], idx[:, t])] * float(w)
        acc = sub if acc is None else (acc + sub if pm.combiner == "sum" else np.maximum(acc, sub))
        exact_parts.append((f, w, idx[:, t]))

    # Exact entries, kept when every ingredient is exact (int/Fraction).
    all_exact = all(
        not isinstance(w, float) for w in weights
    ) and all(
        not any(isinstance(v, float) for row in f.dist for v in row) for f in pm.factors
    )
    if all_exact:
        dist_rows = []
        for a in range(count):
            row = []
            ma = multis[a]
            for b in range(count):
                row.append(pm.dist_multi(ma, multis[b]))
            dist_rows.append(row)
        return MetricSpace(labels, dist_rows)
    return MetricSpace(labels, acc.tolist())


def validate_metric(M: MetricSpace, tol: float = TAU_NUM) -> AuditReport:
    """Check the metric axioms, reporting a witness on failure.

    The scan runs on the float64 matrix with absolute tolerance tol;
    a candidate triangle violation is re-checked exactly when all
    three entries are rational, so exact inputs never false-positive.
    """
    mat = M.mat
    n = M.n
    witnesses: list[tuple] = []
    kind = "validate_metric"

    if n == 0:
        return AuditReport(kind=kind, verdict=VERDICT_PASS)

    if not np.all(np.isfinite(mat)):
        i, j = np.argwhere(~np.isfinite(mat))[0]
        witnesses.append(("nonfinite", int(i), int(j)))
    if witnesses:
        return AuditReport(kind=kind, verdict=VERDICT_FAIL, witnesses=tuple(witnesses))

    diag = np.abs(np.diag(mat))
    if np.any(diag > tol):
        i = int(np.argmax(diag))
        witnesses.append(("nonzero-diagonal", i, i))
    asym = np.abs(mat - mat.T)
    if np.any(asym > tol):
        i, j = np.argwhere(asym > tol)[0]
        witnesses.append(("asymmetry", int(i), int(j)))
    off = mat + np.eye(n)
    if np.any(off <= tol):
        i, j = np.argwhere(off <= tol)[0]
        witnesses.append(("zero-off-diagonal", int(i), int(j)))
    if witnesses:
        return AuditReport(kind=kind, verdict=VERDICT_FAIL, witnesses=tuple(witnesses))

    def entry_exact(i: int, j: int) -> Fraction | None:
        v = M.dist[i][j]
        if isinstance(v, float):
            return None
        return Fraction(v)

    for j in range(n):
        bound = mat[:, j][:, None] + mat[j, :][None, :]
        bad = mat > bound + tol
        if np.any(bad):
            i, k = np.argwhere(bad)[0]
            i, k = int(i), int(k)
            # Rational confirmation when possible, so tolerance never
            # manufactures a violation out of exact data.
            a, b, c = entry_exact(i, k), entry_exact(i, j), entry_exact(j, k)
            if a is not None and b is not None and c is not None:
                if a <= b + c:
                    continue
            witnesses.append(("triangle", i, j, k))
            return AuditReport(
                kind=kind,
                verdict=VERDICT_FAIL,
                witnesses=tuple(witnesses),
                constants={"lhs": M.dist[i][k], "rhs": M.dist[i][j] + M.dist[j][k]},
            )
    return AuditReport(kind=kind, verdict=VERDICT_PASS)


def parse_number(v: Any) -> Ext:
    """Accept JSON numbers plus "p/q" strings and "inf".

    Already-parsed values pass through, so the function is idempotent.
    """
    if isinstance(v, str):
        if v == "inf":
            return INF
        return Fraction(v)
    if isinstance(v, bool):
        raise ValueError("booleans are not distances")
    if isinstance(v, (int, float, Fraction)):
        return v
    raise ValueError(f"cannot parse number {v!r}")


def space_to_json(M: MetricSpace) -> dict:
    def emit(v: Ext) -> Any:
        if isinstance(v, Fraction):
            return f"{v.numerator}/{v.denominator}"
        return v

    return {
        "labels": [label if isinstance(label, (str, int, float)) else repr(label) for label in M.labels],
        "dist": [[emit(v) for v in row] for row in M.dist],
    }


def load_space(obj: dict | str, validate: bool = True, tol: float = TAU_NUM) -> MetricSpace:
    """Build a MetricSpace from the JSON form {"labels": [...], "dist": [[...]]}.

    Refuses matrices that fail validate_metric.
    """
    if isinstance(obj, str):
        obj = json.loads(obj)
    labels = obj["labels"]
    dist = [[parse_number(v) for v in row] for row in obj["dist"]]
    M = MetricSpace(labels, dist)
    if validate:
        report = validate_metric(M, tol=tol)
        if report.verdict != VERDICT_PASS:
            raise InvalidMetricError(report)
    return M
