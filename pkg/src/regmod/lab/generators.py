"""Seeded instance families.

Each family turns (seed, size parameters) into one instance that already
passes :func:`regmod.lab.instances.validate_instance`.  All randomness
flows through one ``random.Random(seed)`` per call and only integer
draws are used, so a seed pins the emitted file bit for bit.

Families whose geometry is known in closed form record that knowledge in
the instance's ``oracle`` section: the exact moduli of a scaled grid
map, the saturating window radii, the deltas under which a composition
instance satisfies the regularity hypotheses.  Oracles are family
knowledge written down at build time, never the output of the audits
they are later compared against.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from ..coderiv import Polyhedron, linear_polymap
from ..metric_core import BudgetError, MetricSpace, default_budget, parse_number
from ..report import jsonable
from ..setmap import BiParamSetMap, SetMap
from .instances import Instance, InstanceError, instance_to_json, validate_instance

__all__ = [
    "FAMILIES",
    "GeneratorSpec",
    "build_instance",
    "generate",
    "int_line",
    "shortest_path_metric",
]

MAX_SEED = 2**64


def int_line(values) -> MetricSpace:
    """Integer points on a line with the absolute-difference metric."""
    vs = tuple(values)
    dist = tuple(tuple(abs(a - b) for b in vs) for a in vs)
    return MetricSpace(vs, dist)


def shortest_path_metric(weights: list[list[int]]) -> list[list[int]]:
    """Repair a symmetric nonnegative weight matrix into a metric.

    Min-plus closure over all intermediate points: the result is the
    shortest-path distance in the complete weighted graph, which always
    satisfies the triangle inequality and stays integral on integer
    weights.
    """
    n = len(weights)
    d = [list(row) for row in weights]
    for k in range(n):
        dk = d[k]
        for i in range(n):
            dik = d[i][k]
            row = d[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < row[j]:
                    row[j] = alt
    return d


@dataclass(frozen=True)
class GeneratorSpec:
    """Family name, seed and size parameters for one instance."""

    family: str
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; choose from {sorted(FAMILIES)}"
            )
        if not (0 <= self.seed < MAX_SEED):
            raise ValueError("seed must fit in 64 bits")


def _param_int(params: dict, key: str, default: int, lo: int, hi: int) -> int:
    raw = params.get(key, default)
    try:
        v = int(raw)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"parameter {key} must be an integer") from exc
    if not (lo <= v <= hi):
        raise ValueError(f"parameter {key}={v} is outside [{lo}, {hi}]")
    return v


def _param_frac(params: dict, key: str, default) -> Fraction:
    raw = params.get(key, default)
    if isinstance(raw, Fraction):
        return raw
    return Fraction(parse_number(raw))


def _check_budget(points: int, budget: int | None) -> None:
    cap = budget if budget is not None else default_budget()
    if points * points > cap:
        raise BudgetError(
            f"instance needs a {points}x{points} table, budget is {cap}"
        )


def _reject_unknown(params: dict, allowed: set[str]) -> None:
    # A misspelled key would otherwise silently fall back to the seeded
    # default and change the experiment.
    unknown = sorted(set(params) - allowed)
    if unknown:
        raise ValueError(
            f"unknown parameters {unknown}; this family takes {sorted(allowed)}"
        )


# -- grid-linear -------------------------------------------------------

def _saturating_window(F: SetMap) -> dict:
    # Windows are open balls, so the radius must exceed the diameter to
    # cover the whole space.
    return {
        "r_dom": jsonable(F.dom.diameter() + 1),
        "r_cod": jsonable(F.cod.diameter() + 1),
        "eps": "inf",
    }


def _grid_linear_map(rng: random.Random, params: dict, budget: int | None) -> Instance:
    _reject_unknown(params, {"shape", "points", "a"})
    n = _param_int(params, "points", rng.randrange(4, 9), 2, 64)
    default_a = Fraction(rng.randrange(1, 5), rng.randrange(1, 3))
    a = _param_frac(params, "a", default_a)
    if a <= 0:
        raise ValueError("parameter a must be positive")
    _check_budget(n, budget)

    # Domain spacing clears the denominator, so a*x lands on integers and
    # the scaled map is exactly linear on its grid: lop = a everywhere.
    q, p = a.denominator, a.numerator
    X = int_line(i * q for i in range(n))
    Y = int_line(i * p for i in range(n))
    F = SetMap(X, Y, frozenset((i, i) for i in range(n)))
    return Instance(
        kind="setmap",
        family="grid-linear",
        params={"points": n, "a": str(a), "shape": "map"},
        spaces={"X": X, "Y": Y},
        maps={"F": F},
        base=(0, 0),
        oracle={
            "a": str(a),
            "lop": str(a),
            "reg": str(1 / a),
            "lip": str(a),
            "window": _saturating_window(F),
        },
    )


def _grid_linear_chain(rng: random.Random, params: dict, budget: int | None) -> Instance:
    """Composition instances that satisfy the regularity hypotheses.

    On exactly matched grids the measured moduli are the family slopes,
    so the product condition m*l*lam*eta < 1 forces l*eta = 0: either
    the outer map ignores its second argument ("first"), or the inner
    second map is constant ("shift" with a singleton parameter space,
    "gap" with a genuine parameter grid and eta = 1).  All three shapes
    keep lam = 1 and m = 1/a1, so the certified rate is 1/a1.
    """
    gshape = params.get("g", rng.choice(("first", "shift", "gap")))
    if gshape not in ("first", "shift", "gap"):
        raise ValueError('parameter g must be "first", "shift" or "gap"')
    if gshape == "gap":
        return _grid_linear_chain_gap(rng, params, budget)

    allowed = {"a2"} if gshape == "first" else {"shift"}
    _reject_unknown(params, {"shape", "g", "points", "a1"} | allowed)
    n = _param_int(params, "points", rng.randrange(3, 6), 2, 12)
    a1 = _param_frac(params, "a1", Fraction(rng.randrange(2, 4)))
    if a1 <= 0:
        raise ValueError("chain slope a1 must be positive")
    _check_budget(n, budget)

    if gshape == "first":
        a2 = _param_frac(params, "a2", Fraction(rng.randrange(1, 4)))
        if a2 <= 0:
            raise ValueError("chain slope a2 must be positive")
        Q = (a1.denominator * a2.denominator) // _gcd(a1.denominator, a2.denominator)
        xs = [i * Q for i in range(n)]
        y1s = sorted({_mul_int(a1, x) for x in xs})
        y2s = sorted({_mul_int(a2, x) for x in xs})
        X, Y1, Y2 = int_line(xs), int_line(y1s), int_line(y2s)
        F1 = SetMap(
            X, Y1, frozenset((i, y1s.index(_mul_int(a1, x))) for i, x in enumerate(xs))
        )
        F2 = SetMap(
            X, Y2, frozenset((i, y2s.index(_mul_int(a2, x))) for i, x in enumerate(xs))
        )
        # G drops its second argument, so eta = 0 and the product
        # condition holds for any slopes.
        Z = int_line(y1s)
        graph = frozenset((i, j, i) for i in range(n) for j in range(n))
        G = BiParamSetMap(Y1, Y2, Z, graph)
        l_oracle, eta_oracle = str(a2), "0"
        extra = {"a2": str(a2)}
    else:
        # F2 is constant at a shifted anchor; G translates by it.
        shift = _param_int(params, "shift", rng.randrange(0, 5), 0, 100)
        xs = [i * a1.denominator for i in range(n)]
        y1s = [_mul_int(a1, x) for x in xs]
        X, Y1 = int_line(xs), int_line(y1s)
        Y2 = int_line([shift])
        F1 = SetMap(X, Y1, frozenset((i, i) for i in range(n)))
        F2 = SetMap(X, Y2, frozenset((i, 0) for i in range(n)))
        Z = int_line([y + shift for y in y1s])
        G = BiParamSetMap(Y1, Y2, Z, frozenset((i, 0, i) for i in range(n)))
        l_oracle, eta_oracle = "0", "0"
        extra = {"shift": shift}

    deltas_sat = 10 * max(X.diameter(), Y1.diameter(), Y2.diameter(), Z.diameter(), 1)
    return Instance(
        kind="composition",
        family="grid-linear",
        params={"points": n, "a1": str(a1), "g": gshape, "shape": "chain", **extra},
        spaces={"X": X, "Y1": Y1, "Y2": Y2, "Z": Z},
        maps={"F1": F1, "F2": F2},
        bimaps={"G": G},
        base=(0, 0, 0, 0),
        oracle={
            "m": str(1 / a1),
            "l": l_oracle,
            "lam": "1",
            "eta": eta_oracle,
            "rho0": str(1 / a1),
            "window": _saturating_window(F1),
            "deltas": {
                "delta1": deltas_sat,
                "delta2": deltas_sat,
                "delta3": deltas_sat,
                "delta4": deltas_sat,
            },
        },
    )


def _grid_linear_chain_gap(rng: random.Random, params: dict, budget: int | None) -> Instance:
    """Identity F1, constant F2 into a coarse parameter grid, G = sum.

    The parameter grid is strictly coarser than the value grid, so the
    outer sum is measurably sensitive to its second argument (eta = 1)
    while the constant inner map keeps l = 0.  The value grids extend
    beyond the audit windows on both sides, so every slice fiber inside
    a window is nonempty and lam stays 1.
    """
    _reject_unknown(params, {"shape", "g", "coarse", "half"})
    coarse = _param_int(params, "coarse", rng.choice((2, 3)), 2, 8)
    half = _param_int(
        params, "half", rng.randrange(2 * coarse + 2, 13), 4, 16
    )
    if half // 2 <= coarse:
        # Windows are open balls, so the audit window must strictly
        # exceed the parameter spacing or no second point is visible.
        raise ValueError("gap chain needs half // 2 > coarse")
    _check_budget(2 * half + 1, budget)

    xs = list(range(-half, half + 1))
    X = int_line(xs)
    Y1 = int_line(xs)
    y2s = [coarse * j for j in range(-2, 3)]
    Y2 = int_line(y2s)
    zs = list(range(-half - 2 * coarse, half + 2 * coarse + 1))
    Z = int_line(zs)
    n = len(xs)
    zero_x = xs.index(0)
    zero_y2 = y2s.index(0)
    F1 = SetMap(X, Y1, frozenset((i, i) for i in range(n)))
    F2 = SetMap(X, Y2, frozenset((i, zero_y2) for i in range(n)))
    graph = frozenset(
        (i, j, zs.index(y + p))
        for i, y in enumerate(xs)
        for j, p in enumerate(y2s)
    )
    G = BiParamSetMap(Y1, Y2, Z, graph)

    d = half // 2
    return Instance(
        kind="composition",
        family="grid-linear",
        params={"half": half, "coarse": coarse, "g": "gap", "shape": "chain"},
        spaces={"X": X, "Y1": Y1, "Y2": Y2, "Z": Z},
        maps={"F1": F1, "F2": F2},
        bimaps={"G": G},
        base=(zero_x, zero_x, zero_y2, zs.index(0)),
        oracle={
            "m": "1",
            "l": "0",
            "lam": "1",
            "eta": "1",
            "rho0": "1",
            "window": _saturating_window(F1),
            "deltas": {"delta1": d, "delta2": d, "delta3": d, "delta4": d},
        },
    )


def _mul_int(a: Fraction, x: int) -> int:
    v = a * x
    assert v.denominator == 1
    return v.numerator


def _gcd(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a


def _grid_linear(rng: random.Random, params: dict, budget: int | None) -> Instance:
    shape = params.get("shape", "map")
    if shape == "map":
        return _grid_linear_map(rng, params, budget)
    if shape == "chain":
        return _grid_linear_chain(rng, params, budget)
    raise ValueError('grid-linear parameter shape must be "map" or "chain"')


# -- random-metric -----------------------------------------------------

def _random_metric_space(rng: random.Random, n: int, max_weight: int) -> MetricSpace:
    weights = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            w = rng.randrange(1, max_weight + 1)
            weights[i][j] = weights[j][i] = w
    dist = shortest_path_metric(weights)
    return MetricSpace(tuple(range(n)), tuple(tuple(row) for row in dist))


def _random_metric(rng: random.Random, params: dict, budget: int | None) -> Instance:
    _reject_unknown(params, {"n", "max_weight"})
    n = _param_int(params, "n", rng.randrange(4, 9), 2, 64)
    max_weight = _param_int(params, "max_weight", 9, 1, 10**6)
    _check_budget(n, budget)
    X = _random_metric_space(rng, n, max_weight)
    return Instance(
        kind="metric-space",
        family="random-metric",
        params={"n": n, "max_weight": max_weight},
        spaces={"X": X},
    )


# -- random-relation ---------------------------------------------------

def _random_relation(rng: random.Random, params: dict, budget: int | None) -> Instance:
    _reject_unknown(params, {"n_dom", "n_cod", "max_weight", "density_pct"})
    n_dom = _param_int(params, "n_dom", rng.randrange(3, 8), 1, 64)
    n_cod = _param_int(params, "n_cod", rng.randrange(3, 8), 1, 64)
    max_weight = _param_int(params, "max_weight", 9, 1, 10**6)
    density_pct = _param_int(params, "density_pct", 35, 1, 100)
    _check_budget(max(n_dom, n_cod), budget)

    X = _random_metric_space(rng, n_dom, max_weight)
    Y = _random_metric_space(rng, n_cod, max_weight)
    pairs = {
        (x, y)
        for x in range(n_dom)
        for y in range(n_cod)
        if rng.randrange(100) < density_pct
    }
    # Repair to a total and surjective relation so saturating windows
    # put the instance inside the link identity's hypotheses.
    for x in range(n_dom):
        if not any(p[0] == x for p in pairs):
            pairs.add((x, rng.randrange(n_cod)))
    for y in range(n_cod):
        if not any(p[1] == y for p in pairs):
            pairs.add((rng.randrange(n_dom), y))
    F = SetMap(X, Y, frozenset(pairs))
    base = sorted(pairs)[rng.randrange(len(pairs))]
    return Instance(
        kind="setmap",
        family="random-relation",
        params={
            "n_dom": n_dom,
            "n_cod": n_cod,
            "max_weight": max_weight,
            "density_pct": density_pct,
        },
        spaces={"X": X, "Y": Y},
        maps={"F": F},
        base=base,
        oracle={"window": _saturating_window(F)},
    )


# -- polyhedral-linear -------------------------------------------------

def _polyhedral_linear(rng: random.Random, params: dict, budget: int | None) -> Instance:
    shape = params.get("shape", "general")
    if shape == "chain":
        return _polyhedral_chain(rng, params)
    if shape not in ("general", "diagonal", "scaled-permutation"):
        raise ValueError(
            'polyhedral-linear parameter shape must be one of '
            '"general", "diagonal", "scaled-permutation", "chain"'
        )
    _reject_unknown(params, {"shape", "dim_dom", "dim_cod", "span"})
    n_dom = _param_int(params, "dim_dom", rng.randrange(1, 4), 1, 8)
    n_cod = _param_int(params, "dim_cod", n_dom, 1, 8)
    span = _param_int(params, "span", 3, 1, 100)
    oracle: dict = {}

    if shape == "general":
        rows = [
            [rng.randrange(-span, span + 1) for _ in range(n_dom)]
            for _ in range(n_cod)
        ]
    else:
        if n_cod != n_dom:
            raise ValueError("diagonal and scaled-permutation shapes need square matrices")
        diag = [rng.choice((-1, 1)) * rng.randrange(1, span + 1) for _ in range(n_dom)]
        perm = list(range(n_dom))
        if shape == "scaled-permutation":
            rng.shuffle(perm)
        rows = [[0] * n_dom for _ in range(n_dom)]
        for i, j in enumerate(perm):
            rows[i][j] = diag[i]
        # Signed scaled permutations have exact singular values |diag|.
        mags = sorted(abs(d) for d in diag)
        oracle = {"opnorm": str(mags[-1]), "conorm": str(mags[0])}

    F = linear_polymap(tuple(tuple(r) for r in rows))
    return Instance(
        kind="polyhedral-map",
        family="polyhedral-linear",
        params={"dim_dom": n_dom, "dim_cod": n_cod, "span": span, "shape": shape},
        polymaps={"F": F},
        base=tuple([0] * (n_dom + n_cod)),
        oracle={**oracle, "matrix": [[str(v) for v in row] for row in rows]},
    )


def _polyhedral_chain(rng: random.Random, params: dict) -> Instance:
    _reject_unknown(params, {"shape", "p", "q", "u", "v"})
    p = _param_frac(params, "p", Fraction(rng.choice((1, 2, 3))))
    q = _param_frac(params, "q", Fraction(rng.randrange(-2, 3)))
    u = _param_frac(params, "u", Fraction(rng.choice((1, 2))))
    v = _param_frac(params, "v", Fraction(rng.randrange(-2, 3)))
    if p == 0 or u == 0:
        raise ValueError("chain needs p != 0 and u != 0")
    F1 = linear_polymap(((p,),))
    F2 = linear_polymap(((q,),))
    G = linear_polymap(((u, v),))
    return Instance(
        kind="polyhedral-chain",
        family="polyhedral-linear",
        params={"p": str(p), "q": str(q), "u": str(u), "v": str(v), "shape": "chain"},
        polymaps={"F1": F1, "F2": F2, "G": G},
        base=(0, 0, 0, 0),
        oracle={
            "slope": str(p * u + q * v),
            "dual_weight": str(abs(p) + abs(q)),
        },
    )


# -- fixedpoint-pair ---------------------------------------------------

def _fixedpoint_pair(rng: random.Random, params: dict, budget: int | None) -> Instance:
    # half >= 28 keeps the derived certification radius above the unit
    # base gap, so the zero of the gap function is certified, not just
    # measured.
    _reject_unknown(params, {"half", "side", "offset"})
    half = _param_int(params, "half", rng.randrange(28, 32), 4, 31)
    side = _param_int(params, "side", rng.choice((-1, 1)), -1, 1)
    if side == 0:
        raise ValueError("parameter side must be -1 or 1")
    slack = max(0, half - 28)
    offset = _param_int(
        params, "offset", rng.randrange(-slack, slack + 1), -8, 8
    )
    n = 2 * half + 1
    _check_budget(n, budget)

    # Identity against the constant map pinned at the center: the
    # coincidence set is the center, the gap function is the distance to
    # it, and the distance estimate holds with factor rho = 2 because
    # the constant map is locally Lipschitz with rate zero.
    L = int_line(range(n))
    center = half + offset
    if not (4 <= center <= n - 5):
        raise ValueError("anchor offset pushes the crossing too close to the rim")
    F1 = SetMap(L, L, frozenset((i, i) for i in range(n)))
    F2 = SetMap(L, L, frozenset((i, center) for i in range(n)))
    xb = center + side
    d_wide = half - 2 - abs(offset)
    deltas = {
        "delta1": d_wide,
        "delta2": d_wide,
        "delta3": d_wide // 2,
        "delta4": d_wide,
    }
    return Instance(
        kind="map-pair",
        family="fixedpoint-pair",
        params={"half": half, "side": side, "offset": offset},
        spaces={"X": L},
        maps={"F1": F1, "F2": F2},
        base=(xb, xb, center),
        oracle={"deltas": deltas, "fix": [center], "rho": "2"},
    )


# -- tangency-adversarial ----------------------------------------------

def _tangency_adversarial(rng: random.Random, params: dict, budget: int | None) -> Instance:
    _reject_unknown(params, {"slope"})
    slope = _param_int(params, "slope", 20, 2, 10**4)
    S1 = Polyhedron(2, [((Fraction(0), Fraction(1)), Fraction(0))])
    S2 = Polyhedron(2, [((Fraction(1), Fraction(-slope)), Fraction(0))])
    return Instance(
        kind="polyhedral-sets",
        family="tangency-adversarial",
        params={"slope": slope},
        polyhedra={"S1": S1, "S2": S2},
        base=(0, 0),
        oracle={
            # The two boundary lines close a wedge so flat that reaching
            # the intersection costs about `slope` times the separation.
            "fails_tau_at_most": str(slope // 2),
            "passes_tau": str(slope + 1),
            "r": "1",
            "grid_step": "1/2",
        },
    )


FAMILIES = {
    "grid-linear": _grid_linear,
    "random-metric": _random_metric,
    "random-relation": _random_relation,
    "polyhedral-linear": _polyhedral_linear,
    "fixedpoint-pair": _fixedpoint_pair,
    "tangency-adversarial": _tangency_adversarial,
}


def build_instance(spec: GeneratorSpec, budget: int | None = None) -> Instance:
    """Materialize one instance; deterministic in (family, seed, params)."""
    rng = random.Random(spec.seed)
    builder = FAMILIES[spec.family]
    inst = builder(rng, dict(spec.params), budget)
    inst = Instance(
        kind=inst.kind,
        family=inst.family,
        seed=spec.seed,
        params=inst.params,
        spaces=inst.spaces,
        maps=inst.maps,
        bimaps=inst.bimaps,
        fields=inst.fields,
        polymaps=inst.polymaps,
        polyhedra=inst.polyhedra,
        base=inst.base,
        oracle=inst.oracle,
    )
    problems = validate_instance(inst)
    if problems:
        raise InstanceError(
            f"generated instance fails validation: {'; '.join(problems)}"
        )
    return inst


def generate(spec: GeneratorSpec, out_dir: str | Path, budget: int | None = None) -> Path:
    """Build, validate and write one instance file; return its path."""
    inst = build_instance(spec, budget)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{spec.family}-{spec.seed}.json"
    doc = instance_to_json(inst)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
