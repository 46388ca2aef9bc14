from __future__ import annotations

import json
import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import all_subsets, euclid_space, int_line
from regmod.metric_core import (
    INF,
    BudgetError,
    InvalidMetricError,
    MetricSpace,
    PointSet,
    ProductMetric,
    SpaceMismatchError,
    ball,
    dist_point_set,
    excess,
    load_space,
    product_space,
    space_to_json,
    validate_metric,
)


class TestDistPointSet:
    def test_member_gives_zero(self):
        sp = int_line(range(8))
        assert dist_point_set(sp, 0, {0, 5}) == 0

    def test_empty_set_gives_inf(self):
        sp = int_line(range(8))
        assert dist_point_set(sp, 1, frozenset()) == INF

    def test_min_over_members(self):
        sp = int_line(range(8))
        assert dist_point_set(sp, 1, {3, 7}) == 2

    def test_zero_iff_member(self):
        sp = int_line(range(6))
        for x in sp.points():
            for members in ({2, 4}, {x}, {0, 5}):
                d = dist_point_set(sp, x, members)
                assert (d == 0) == (x in members)

    def test_space_mismatch_rejected(self):
        sp1 = int_line(range(3))
        sp2 = int_line(range(3))
        A = PointSet(sp2, frozenset({0}))
        with pytest.raises(SpaceMismatchError):
            dist_point_set(sp1, 0, A)


class TestExcess:
    def test_pair_example(self):
        sp = int_line(range(4))
        A = PointSet(sp, frozenset({0, 1}))
        B = PointSet(sp, frozenset({0}))
        assert excess(A, B) == 1

    def test_equal_sets_zero(self):
        sp = int_line(range(4))
        A = PointSet(sp, frozenset({1, 3}))
        assert excess(A, A) == 0

    def test_empty_target_inf(self):
        sp = int_line(range(4))
        A = PointSet(sp, frozenset({2}))
        B = PointSet(sp, frozenset())
        assert excess(A, B) == INF

    def test_empty_source_zero(self):
        sp = int_line(range(4))
        A = PointSet(sp, frozenset())
        B = PointSet(sp, frozenset({1}))
        assert excess(A, B) == 0
        assert excess(A, PointSet(sp, frozenset())) == 0

    def test_zero_iff_subset(self):
        sp = int_line(range(5))
        for A in all_subsets(range(5)):
            for B in all_subsets(range(3)):
                if not A or not B:
                    continue
                e = excess(PointSet(sp, A), PointSet(sp, B))
                assert (e == 0) == (A <= B)

    def test_triangle_over_subsets(self):
        sp = int_line(range(5))
        sets = [s for s in all_subsets(range(5)) if s]
        for A in sets[:10]:
            for B in sets[::3]:
                for C in sets[::4]:
                    eAC = excess(PointSet(sp, A), PointSet(sp, C))
                    eAB = excess(PointSet(sp, A), PointSet(sp, B))
                    eBC = excess(PointSet(sp, B), PointSet(sp, C))
                    assert eAC <= eAB + eBC


class TestBall:
    def test_open_ball(self):
        sp = int_line(range(3))
        assert ball(sp, 0, 1.5, closed=False).members == {0, 1}

    def test_closed_ball_boundary(self):
        sp = int_line(range(3))
        assert ball(sp, 0, 1, closed=True).members == {0, 1}
        assert ball(sp, 0, 1, closed=False).members == {0}

    def test_isolation_radius(self):
        sp = int_line(range(3))
        assert ball(sp, 2, 0.25, closed=True).members == {2}

    def test_center_always_included(self):
        sp = int_line(range(3))
        assert 1 in ball(sp, 1, 0, closed=False).members


class TestProductSpace:
    def test_singletons(self):
        one = MetricSpace(["a"], [[0]])
        other = MetricSpace(["b"], [[0]])
        pm = ProductMetric(factors=(one, other))
        prod = product_space(pm)
        assert prod.n == 1
        assert prod.dist[0][0] == 0

    def test_sum_combiner_hamming(self):
        two = int_line([0, 1])
        pm = ProductMetric(factors=(two, two), combiner="sum")
        prod = product_space(pm)
        assert prod.n == 4
        values = {prod.dist[i][j] for i in range(4) for j in range(4)}
        assert values == {0, 1, 2}
        # (0,0) vs (1,1) differs in both coordinates
        i = pm.flat((0, 0))
        j = pm.flat((1, 1))
        assert prod.dist[i][j] == 2

    def test_weighted_max_degenerate_factor(self):
        X = int_line([0, 1, 2])
        Y1 = int_line([0, 3])
        Y2 = MetricSpace(["only"], [[0]])
        pm = ProductMetric(
            factors=(X, Y1, Y2),
            weights=(1, 2, Fraction(1, 3)),
            combiner="weighted-max",
        )
        prod = product_space(pm)
        for a in range(prod.n):
            for b in range(prod.n):
                (xa, ya, _), (xb, yb, _) = pm.unflat(a), pm.unflat(b)
                expect = max(X.dist[xa][xb], 2 * Y1.dist[ya][yb])
                assert prod.dist[a][b] == expect

    def test_budget_error(self):
        sp = int_line(range(10))
        pm = ProductMetric(factors=(sp, sp, sp))
        with pytest.raises(BudgetError):
            product_space(pm, budget=100)

    def test_result_is_metric(self):
        X = int_line([0, 1, 4])
        pm = ProductMetric(factors=(X, X), weights=(1, Fraction(3, 2)), combiner="weighted-max")
        prod = product_space(pm)
        assert validate_metric(prod).ok()

    def test_sum_and_max_ball_nesting(self):
        # d_max <= d_sum <= k * d_max, so ball systems nest at scaled radii.
        X = int_line([0, 1, 3])
        summed = product_space(ProductMetric(factors=(X, X), combiner="sum"))
        maxed = product_space(ProductMetric(factors=(X, X), combiner="weighted-max"))
        for c in range(summed.n):
            for r in (1, 2, 4):
                b_sum = ball(summed, c, r).members
                b_max = ball(maxed, c, r).members
                b_max_scaled = ball(maxed, c, r / 2).members
                assert b_sum <= b_max
                assert ball(summed, c, 2 * r).members >= b_max_scaled


class TestValidateMetric:
    def test_indiscernibles_violation(self):
        M = MetricSpace(["a", "b"], [[0, 0], [0, 0]])
        report = validate_metric(M)
        assert report.verdict == "fail"
        assert ("zero-off-diagonal", 0, 1) in report.witnesses

    def test_euclidean_embedding_passes(self):
        M = euclid_space([(0, 0), (1, 0), (0.5, 2.0), (-1, 1)])
        assert validate_metric(M).ok()

    def test_triangle_violation_witness(self):
        M = MetricSpace(["a", "b", "c"], [[0, 1, 5], [1, 0, 1], [5, 1, 0]])
        report = validate_metric(M)
        assert report.verdict == "fail"
        kinds = {w[0] for w in report.witnesses}
        assert "triangle" in kinds
        w = [w for w in report.witnesses if w[0] == "triangle"][0]
        assert (w[1], w[3]) in {(0, 2), (2, 0)}

    def test_exact_entries_never_false_positive(self):
        # Tight triangle equalities with Fractions stay inside tolerance.
        third = Fraction(1, 3)
        M = MetricSpace(
            ["a", "b", "c"],
            [[0, third, 2 * third], [third, 0, third], [2 * third, third, 0]],
        )
        assert validate_metric(M).ok()

    @given(
        st.lists(
            st.tuples(
                st.integers(min_value=-50, max_value=50),
                st.integers(min_value=-50, max_value=50),
            ),
            min_size=1,
            max_size=8,
            unique=True,
        )
    )
    def test_embeddings_always_validate(self, pts):
        M = euclid_space(pts)
        assert validate_metric(M).ok()


class TestJson:
    def test_round_trip(self):
        M = int_line([0, 2, 5])
        obj = space_to_json(M)
        M2 = load_space(json.dumps(obj))
        assert M2.labels == M.labels
        assert M2.dist == M.dist

    def test_fraction_round_trip(self):
        M = MetricSpace(
            ["a", "b"], [[0, Fraction(3, 7)], [Fraction(3, 7), 0]]
        )
        M2 = load_space(space_to_json(M))
        assert M2.dist[0][1] == Fraction(3, 7)

    def test_loader_refuses_invalid(self):
        bad = {"labels": ["a", "b", "c"], "dist": [[0, 1, 5], [1, 0, 1], [5, 1, 0]]}
        with pytest.raises(InvalidMetricError):
            load_space(bad)


class TestSpaceHelpers:
    def test_realized_distances(self):
        M = int_line([0, 1, 3])
        assert M.realized_distances() == (1, 2, 3)

    def test_diameter(self):
        assert int_line([0, 1, 7]).diameter() == 7
        assert MetricSpace(["a"], [[0]]).diameter() == 0

    def test_infinite_entry_rejected(self):
        M = MetricSpace(["a", "b"], [[0, math.inf], [math.inf, 0]])
        report = validate_metric(M)
        assert report.verdict == "fail"
        assert report.witnesses[0][0] == "nonfinite"
