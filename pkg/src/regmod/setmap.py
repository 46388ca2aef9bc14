"""Multifunctions between finite metric spaces as explicit graphs.

A SetMap is an extensional relation: its graph is the set of pairs
(x, y) with y in F(x).  Nothing is lazy; every operation enumerates.
Finite graphs are automatically closed, so the closed-graph hypotheses
of the composition results hold for free.

Empty graphs are legal everywhere.  Operations propagate emptiness
(empty fibers, empty images) instead of raising.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

from .metric_core import (
    MetricSpace,
    PointSet,
    ProductMetric,
    SpaceMismatchError,
    product_space,
)

__all__ = [
    "SetMap",
    "BiParamSetMap",
    "image",
    "pair",
    "compose_H",
    "build_R",
    "setmap_to_json",
    "load_setmap",
    "bimap_to_json",
    "load_bimap",
]


@dataclass(frozen=True)
class SetMap:
    """Multifunction F: dom -> subsets of cod, given by its graph."""

    dom: MetricSpace
    cod: MetricSpace
    graph: frozenset[tuple[int, int]]

    def __post_init__(self):
        for x, y in self.graph:
            if not (0 <= x < self.dom.n and 0 <= y < self.cod.n):
                raise IndexError(f"graph pair {(x, y)} out of range")

    def fiber(self, x: int) -> frozenset[int]:
        """F(x) as a raw index set."""
        return frozenset(y for (u, y) in self.graph if u == x)

    def image_of(self, x: int) -> PointSet:
        return PointSet(self.cod, self.fiber(x))

    def inverse(self) -> SetMap:
        return SetMap(self.cod, self.dom, frozenset((y, x) for (x, y) in self.graph))

    def domain_points(self) -> frozenset[int]:
        """Points with nonempty fiber (the effective domain)."""
        return frozenset(x for (x, _) in self.graph)

    def range_points(self) -> frozenset[int]:
        return frozenset(y for (_, y) in self.graph)

    def is_total(self) -> bool:
        return self.domain_points() == frozenset(range(self.dom.n))

    def is_surjective(self) -> bool:
        return self.range_points() == frozenset(range(self.cod.n))

    def __contains__(self, xy: tuple[int, int]) -> bool:
        return xy in self.graph


@dataclass(frozen=True)
class BiParamSetMap:
    """Two-parameter multifunction G: dom1 x dom2 -> subsets of cod."""

    dom1: MetricSpace
    dom2: MetricSpace
    cod: MetricSpace
    graph: frozenset[tuple[int, int, int]]

    def __post_init__(self):
        for y1, y2, z in self.graph:
            ok = 0 <= y1 < self.dom1.n and 0 <= y2 < self.dom2.n and 0 <= z < self.cod.n
            if not ok:
                raise IndexError(f"graph triple {(y1, y2, z)} out of range")

    def fiber(self, y1: int, y2: int) -> frozenset[int]:
        return frozenset(z for (a, b, z) in self.graph if a == y1 and b == y2)

    def slice_first(self, y1: int) -> SetMap:
        """Fix the first parameter: a map dom2 -> cod."""
        if not 0 <= y1 < self.dom1.n:
            raise IndexError(f"point index {y1} out of range")
        pairs = frozenset((b, z) for (a, b, z) in self.graph if a == y1)
        return SetMap(self.dom2, self.cod, pairs)

    def slice_second(self, y2: int) -> SetMap:
        """Fix the second parameter: a map dom1 -> cod."""
        if not 0 <= y2 < self.dom2.n:
            raise IndexError(f"point index {y2} out of range")
        pairs = frozenset((a, z) for (a, b, z) in self.graph if b == y2)
        return SetMap(self.dom1, self.cod, pairs)

    def as_setmap(self, pm: ProductMetric, budget: int | None = None) -> tuple[SetMap, MetricSpace]:
        """View G as a one-parameter map on the product of dom1 and dom2."""
        if tuple(pm.factors) != (self.dom1, self.dom2):
            raise SpaceMismatchError("product recipe does not match G's domains")
        prod = product_space(pm, budget=budget)
        pairs = frozenset((pm.flat((a, b)), z) for (a, b, z) in self.graph)
        return SetMap(prod, self.cod, pairs), prod


def slice_map(G: BiParamSetMap, which: str, value: int) -> SetMap:
    """Dispatch form of the parametric slices; which is fix-first or fix-second."""
    if which == "fix-first":
        return G.slice_first(value)
    if which == "fix-second":
        return G.slice_second(value)
    raise ValueError(f"unknown slice selector {which!r}")


def image(F: SetMap, A: PointSet | Iterable[int]) -> PointSet:
    """F(A) = union of F(x) over x in A."""
    if isinstance(A, PointSet):
        if A.space is not F.dom:
            raise SpaceMismatchError("image: argument set lives in a different space")
        A = A.members
    members: set[int] = set()
    for x, y in F.graph:
        if x in A:
            members.add(y)
    return PointSet(F.cod, frozenset(members))


def pair(
    F1: SetMap,
    F2: SetMap,
    weights=None,
    combiner: str = "sum",
    budget: int | None = None,
) -> tuple[SetMap, ProductMetric]:
    """(F1,F2)(x) = F1(x) x F2(x), into the product of the codomains."""
    if F1.dom is not F2.dom:
        raise SpaceMismatchError("pair: the two maps must share a domain")
    pm = ProductMetric(factors=(F1.cod, F2.cod), weights=weights, combiner=combiner)
    prod = product_space(pm, budget=budget)
    by_x1: dict[int, set[int]] = {}
    for x, y in F1.graph:
        by_x1.setdefault(x, set()).add(y)
    by_x2: dict[int, set[int]] = {}
    for x, y in F2.graph:
        by_x2.setdefault(x, set()).add(y)
    pairs = set()
    for x in F1.dom.points():
        for y1 in by_x1.get(x, ()):
            for y2 in by_x2.get(x, ()):
                pairs.add((x, pm.flat((y1, y2))))
    return SetMap(F1.dom, prod, frozenset(pairs)), pm


def compose_H(F1: SetMap, F2: SetMap, G: BiParamSetMap) -> SetMap:
    """H(x) = G(F1(x), F2(x)), the set-valued composition."""
    if F1.dom is not F2.dom:
        raise SpaceMismatchError("compose_H: F1 and F2 must share a domain")
    if F1.cod is not G.dom1 or F2.cod is not G.dom2:
        raise SpaceMismatchError("compose_H: codomains must match G's parameters")
    by_x1: dict[int, set[int]] = {}
    for x, y in F1.graph:
        by_x1.setdefault(x, set()).add(y)
    by_x2: dict[int, set[int]] = {}
    for x, y in F2.graph:
        by_x2.setdefault(x, set()).add(y)
    by_params: dict[tuple[int, int], set[int]] = {}
    for y1, y2, z in G.graph:
        by_params.setdefault((y1, y2), set()).add(z)
    pairs = set()
    for x in F1.dom.points():
        for y1 in by_x1.get(x, ()):
            for y2 in by_x2.get(x, ()):
                for z in by_params.get((y1, y2), ()):
                    pairs.add((x, z))
    return SetMap(F1.dom, G.cod, frozenset(pairs))


def build_R(
    F1: SetMap,
    F2: SetMap,
    G: BiParamSetMap,
    weights=None,
    combiner: str = "sum",
    budget: int | None = None,
) -> tuple[SetMap, ProductMetric]:
    """Auxiliary map R on the product X x Y1 x Y2.

    The fiber of (x, y1, y2) is G(y1, y2) when y1 in F1(x) and
    y2 in F2(x), and empty otherwise.  The product metric on the
    domain is configurable; the additive combiner is the default and
    the composition audit overrides it with the weighted max.
    """
    if F1.dom is not F2.dom:
        raise SpaceMismatchError("build_R: F1 and F2 must share a domain")
    if F1.cod is not G.dom1 or F2.cod is not G.dom2:
        raise SpaceMismatchError("build_R: codomains must match G's parameters")
    pm = ProductMetric(factors=(F1.dom, F1.cod, F2.cod), weights=weights, combiner=combiner)
    prod = product_space(pm, budget=budget)
    by_params: dict[tuple[int, int], set[int]] = {}
    for y1, y2, z in G.graph:
        by_params.setdefault((y1, y2), set()).add(z)
    by_x1: dict[int, set[int]] = {}
    for x, y in F1.graph:
        by_x1.setdefault(x, set()).add(y)
    by_x2: dict[int, set[int]] = {}
    for x, y in F2.graph:
        by_x2.setdefault(x, set()).add(y)
    pairs = set()
    for x in F1.dom.points():
        for y1 in by_x1.get(x, ()):
            for y2 in by_x2.get(x, ()):
                for z in by_params.get((y1, y2), ()):
                    pairs.add((pm.flat((x, y1, y2)), z))
    return SetMap(prod, G.cod, frozenset(pairs)), pm


def setmap_to_json(F: SetMap, dom_id: str, cod_id: str) -> dict:
    return {
        "dom": dom_id,
        "cod": cod_id,
        "graph": sorted([x, y] for (x, y) in F.graph),
    }


def load_setmap(obj: dict | str, spaces: dict[str, MetricSpace]) -> SetMap:
    if isinstance(obj, str):
        obj = json.loads(obj)
    dom = spaces[obj["dom"]]
    cod = spaces[obj["cod"]]
    graph = frozenset((int(x), int(y)) for x, y in obj["graph"])
    return SetMap(dom, cod, graph)


def bimap_to_json(G: BiParamSetMap, dom1_id: str, dom2_id: str, cod_id: str) -> dict:
    return {
        "dom1": dom1_id,
        "dom2": dom2_id,
        "cod": cod_id,
        "graph": sorted([a, b, z] for (a, b, z) in G.graph),
    }


def load_bimap(obj: dict | str, spaces: dict[str, MetricSpace]) -> BiParamSetMap:
    if isinstance(obj, str):
        obj = json.loads(obj)
    dom1 = spaces[obj["dom1"]]
    dom2 = spaces[obj["dom2"]]
    cod = spaces[obj["cod"]]
    graph = frozenset((int(a), int(b), int(z)) for a, b, z in obj["graph"])
    return BiParamSetMap(dom1, dom2, cod, graph)
