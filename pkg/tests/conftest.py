from __future__ import annotations

import itertools

import pytest

from regmod.metric_core import MetricSpace


def int_line(values) -> MetricSpace:
    """Metric space on integer labels with |a - b| distances."""
    vals = list(values)
    dist = [[abs(a - b) for b in vals] for a in vals]
    return MetricSpace(vals, dist)


def euclid_space(points) -> MetricSpace:
    """Metric space from an explicit point embedding in R^k."""
    pts = [tuple(p) for p in points]
    def d(p, q):
        return sum((a - b) ** 2 for a, b in zip(p, q)) ** 0.5
    dist = [[d(p, q) for q in pts] for p in pts]
    return MetricSpace(pts, dist)


def all_subsets(indices):
    idx = list(indices)
    for r in range(len(idx) + 1):
        yield from (frozenset(c) for c in itertools.combinations(idx, r))


@pytest.fixture
def line5() -> MetricSpace:
    return int_line(range(5))
