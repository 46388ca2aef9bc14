"""Exact linear algebra, simplex, and QP enumeration."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regmod.coderiv import (
    feasible_point,
    linprog_exact,
    min_norm_point,
    norm_sq,
    quadratic_min,
    rank,
    solve_affine,
)
from regmod.metric_core import BudgetError

F = Fraction


class TestSolveAffine:
    def test_unique_solution(self):
        part, null = solve_affine([[2, 1], [1, -1]], [5, 1])
        assert part == (F(2), F(1))
        assert null == []

    def test_underdetermined(self):
        part, null = solve_affine([[1, 1, 0]], [3])
        assert len(null) == 2
        assert sum(part) - part[2] == 3
        for vec in null:
            assert vec[0] + vec[1] == 0

    def test_inconsistent(self):
        assert solve_affine([[1, 1], [2, 2]], [1, 3]) is None

    def test_gap_between_pivot_columns(self):
        # A free column before later pivots must not shuffle the
        # particular solution away from the right-hand side.
        rows = [[1, 0, 0, -1], [0, 0, 1, 0], [0, 0, 0, 2]]
        part, null = solve_affine(rows, [0, 1, 4])
        assert part == (2, 0, 1, 2)
        assert len(null) == 1
        for row, b in zip(rows, [0, 1, 4]):
            for vec in null:
                assert sum(c * x for c, x in zip(row, vec)) == 0
            assert sum(c * x for c, x in zip(row, part)) == b

    def test_rank(self):
        assert rank([[1, 2], [2, 4]]) == 1
        assert rank([[1, 0], [0, 1]]) == 2
        assert rank([]) == 0


class TestSimplex:
    def test_basic_lp(self):
        res = linprog_exact(
            [-1, -1], A_ub=[[1, 1]], b_ub=[1], nonneg=True
        )
        assert res.status == "optimal"
        assert res.value == F(-1)

    def test_equality_lp(self):
        res = linprog_exact(
            [1, 2], A_eq=[[1, 1]], b_eq=[4], nonneg=True
        )
        assert res.status == "optimal"
        assert res.x == (F(4), F(0))
        assert res.value == F(4)

    def test_infeasible(self):
        res = linprog_exact([1], A_ub=[[1], [-1]], b_ub=[-1, -1], nonneg=False)
        assert res.status == "infeasible"

    def test_unbounded(self):
        res = linprog_exact([-1], A_ub=[[-1]], b_ub=[0])
        assert res.status == "unbounded"

    def test_free_variables(self):
        # min x + y subject to x + y >= -3 reaches the boundary.
        res = linprog_exact([1, 1], A_ub=[[-1, -1]], b_ub=[3])
        assert res.status == "optimal"
        assert res.value == F(-3)

    def test_degenerate_cycling_guard(self):
        # A classic degenerate instance; Bland's rule must terminate.
        res = linprog_exact(
            [-F(3, 4), 150, -F(1, 50), 6],
            A_ub=[
                [F(1, 4), -60, -F(1, 25), 9],
                [F(1, 2), -90, -F(1, 50), 3],
                [0, 0, 1, 0],
            ],
            b_ub=[0, 0, 1],
            nonneg=True,
        )
        assert res.status == "optimal"
        assert res.value == F(-1, 20)

    def test_fractional_data_stays_exact(self):
        res = linprog_exact(
            [F(1, 3)], A_ub=[[-1]], b_ub=[F(-2, 7)], nonneg=True
        )
        assert res.value == F(2, 21)

    def test_feasible_point_empty(self):
        assert feasible_point([[1], [-1]], [0, -1]) is None

    def test_feasible_point_found(self):
        x = feasible_point([[1, 0], [0, 1]], [2, 3], [[1, 1]], [1])
        assert x is not None
        assert x[0] + x[1] == 1
        assert x[0] <= 2 and x[1] <= 3


class TestQuadraticMin:
    def test_projection_onto_halfplane(self):
        point, dist_sq = min_norm_point([3, 0], A_ub=[[1, 0]], b_ub=[1])
        assert point == (F(1), F(0))
        assert dist_sq == F(4)

    def test_projection_interior(self):
        point, dist_sq = min_norm_point([0, 0], A_ub=[[1, 0]], b_ub=[1])
        assert point == (F(0), F(0))
        assert dist_sq == F(0)

    def test_projection_onto_corner(self):
        point, dist_sq = min_norm_point(
            [2, 3], A_ub=[[1, 0], [0, 1]], b_ub=[0, 0]
        )
        assert point == (F(0), F(0))
        assert dist_sq == F(13)

    def test_projection_onto_line(self):
        point, dist_sq = min_norm_point([1, 0], A_eq=[[1, -1]], b_eq=[0])
        assert point == (F(1, 2), F(1, 2))
        assert dist_sq == F(1, 2)

    def test_empty_region(self):
        assert min_norm_point([0], A_ub=[[1], [-1]], b_ub=[-2, 0]) is None

    def test_general_quadratic(self):
        # min (v1 - 1)^2 + (v2 - 2)^2 written as v'Qv + q'v + const.
        res = quadratic_min(
            [[1, 0], [0, 1]],
            [-2, -4],
            A_ub=[[0, 1]],
            b_ub=[1],
        )
        assert res.point == (F(1), F(1))
        assert res.value + 5 == F(1)

    def test_budget_guard(self):
        rows = [[1 if i == j else 0 for j in range(8)] for i in range(8)]
        rows += [[-1 if i == j else 0 for j in range(8)] for i in range(8)]
        bounds = [1] * 16
        with pytest.raises(BudgetError):
            quadratic_min(
                [[1 if i == j else 0 for j in range(8)] for i in range(8)],
                [0] * 8,
                A_ub=rows,
                b_ub=bounds,
                budget=10,
            )

    @settings(max_examples=60, deadline=None)
    @given(
        center=st.lists(st.integers(-6, 6), min_size=1, max_size=3),
        halfwidth=st.integers(1, 4),
    )
    def test_box_projection_is_clipping(self, center, halfwidth):
        n = len(center)
        rows = []
        rhs = []
        for i in range(n):
            rows.append([1 if j == i else 0 for j in range(n)])
            rhs.append(halfwidth)
            rows.append([-1 if j == i else 0 for j in range(n)])
            rhs.append(halfwidth)
        point, dist_sq = min_norm_point(center, A_ub=rows, b_ub=rhs)
        clipped = tuple(
            F(max(-halfwidth, min(halfwidth, c))) for c in center
        )
        assert point == clipped
        assert dist_sq == norm_sq(tuple(F(c) - p for c, p in zip(center, point)))
