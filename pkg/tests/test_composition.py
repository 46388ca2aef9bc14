"""Composition audits: stability, the implication chain, the main bound."""

from __future__ import annotations

from fractions import Fraction

import pytest

from regmod import (
    BiParamSetMap,
    HypothesisViolation,
    ScaleWindow,
    SetMap,
    build_R,
    composition_stability,
    fixedpoint_audit,
    mainresult_audit,
    proMT_audit,
    reg_at_scale,
    stability_sufficient_usc,
)
from regmod.metric_core import INF

from conftest import int_line

WIDE = ScaleWindow(r_dom=100, r_cod=100, eps=100)
WIDE_DELTAS = {"delta1": 100, "delta2": 100, "delta3": 100, "delta4": 100}


def identity_instance():
    """F1 = F2 = identity, G = first projection, all on one line."""
    L = int_line(range(5))
    F1 = SetMap(L, L, frozenset((i, i) for i in range(5)))
    F2 = SetMap(L, L, frozenset((i, i) for i in range(5)))
    G = BiParamSetMap(L, L, L, frozenset((i, j, i) for i in range(5) for j in range(5)))
    return F1, F2, G


def tripling_instance():
    """Doubling then sum: H triples, with the image grid as codomain."""
    X = int_line([0, 1, 2])
    Y1 = int_line([0, 2, 4])
    Y2 = int_line([0, 1, 2])
    Z = int_line([0, 3, 6])
    F1 = SetMap(X, Y1, frozenset((i, i) for i in range(3)))
    F2 = SetMap(X, Y2, frozenset((i, i) for i in range(3)))
    G = BiParamSetMap(Y1, Y2, Z, frozenset((i, i, i) for i in range(3)))
    return F1, F2, G


class TestCompositionStability:
    def test_identity_instance_largest_delta(self):
        F1, F2, G = identity_instance()
        rep = composition_stability(F1, F2, G, (2, 2, 2, 2), eps=Fraction(3, 2))
        assert rep.ok()
        assert rep.value == 2
        assert rep.constants["smallest_failing_delta"] == INF
        assert rep.constants["counterexample"] == (0, 0)

    def test_wide_eps_makes_every_level_work(self):
        F1, F2, G = identity_instance()
        rep = composition_stability(F1, F2, G, (2, 2, 2, 2), eps=100)
        assert rep.value == INF
        assert rep.constants["smallest_failing_delta"] is None

    def test_far_fiber_shrinks_delta_with_counterexample(self):
        X = int_line([0])
        Y1 = int_line([0, 10])
        Y2 = int_line([0])
        Z = int_line([0, 1])
        F1 = SetMap(X, Y1, frozenset({(0, 0), (0, 1)}))
        F2 = SetMap(X, Y2, frozenset({(0, 0)}))
        G = BiParamSetMap(Y1, Y2, Z, frozenset({(0, 0, 0), (1, 0, 1)}))
        rep = composition_stability(F1, F2, G, (0, 0, 0, 0), eps=5)
        assert rep.ok()
        assert rep.value == 1
        assert rep.constants["counterexample"] == (0, 1)

    def test_inconsistent_base_rejected(self):
        F1, F2, G = identity_instance()
        with pytest.raises(ValueError):
            composition_stability(F1, F2, G, (2, 2, 2, 3), eps=1)
        with pytest.raises(ValueError):
            composition_stability(F1, F2, G, (2, 2, 2, 2), eps=0)


class TestStabilitySufficientUsc:
    def test_constant_single_valued_passes_with_cross_check(self):
        X = int_line(range(3))
        Y = int_line([0, 1])
        Z = int_line([0])
        F1 = SetMap(X, Y, frozenset((i, 0) for i in range(3)))
        F2 = SetMap(X, Y, frozenset((i, 1) for i in range(3)))
        G = BiParamSetMap(Y, Y, Z, frozenset({(0, 1, 0)}))
        rep = stability_sufficient_usc(F1, F2, (1, 0, 1, 0), G=G, eps=5)
        assert rep.verdict == "pass"
        assert "cross-checked against composition_stability" in rep.notes

    def test_multivalued_base_is_not_applicable(self):
        X = int_line(range(3))
        Y = int_line([0, 1])
        F1 = SetMap(X, Y, frozenset({(0, 0), (1, 0), (1, 1), (2, 0)}))
        F2 = SetMap(X, Y, frozenset((i, 1) for i in range(3)))
        rep = stability_sufficient_usc(F1, F2, (1, 0, 1))
        assert rep.verdict == "not-applicable"


class TestProMT:
    def test_identity_tau_one_all_levels(self):
        F1, F2, G = identity_instance()
        rep = proMT_audit(F1, F2, G, (2, 2, 2, 2), ScaleWindow(10, 10, 10), tau=1)
        assert rep.verdict == "pass"
        assert rep.constants["level_i"] == "established"
        assert rep.constants["violations"] == 0

    def test_tripling_with_measured_reg_of_R(self):
        F1, F2, G = tripling_instance()
        R, pm = build_R(F1, F2, G, combiner="weighted-max")
        base_flat = pm.flat((1, 1, 1))
        tau = reg_at_scale(R, (base_flat, 1), WIDE).value
        assert tau == Fraction(2, 3)
        rep = proMT_audit(F1, F2, G, (1, 1, 1, 1), WIDE, tau=tau)
        assert rep.verdict == "pass"
        assert rep.constants["level_i"] == "established"
        assert rep.constants["violations"] == 0

    def test_tau_below_measured_skips_implications(self):
        F1, F2, G = tripling_instance()
        rep = proMT_audit(F1, F2, G, (1, 1, 1, 1), WIDE, tau=Fraction(1, 3))
        assert rep.verdict == "pass"
        assert rep.constants["level_i"] == "not-established"
        assert "antecedent fails: implication audit skipped" in rep.notes

    def test_bad_tau_rejected(self):
        F1, F2, G = identity_instance()
        with pytest.raises(ValueError):
            proMT_audit(F1, F2, G, (2, 2, 2, 2), WIDE, tau=0)


class TestMainresult:
    def test_identity_projection_instance(self):
        F1, F2, G = identity_instance()
        rep = mainresult_audit(F1, F2, G, (2, 2, 2, 2), WIDE_DELTAS)
        assert rep.verdict == "pass"
        assert rep.value == 1
        c = rep.constants
        assert (c["m"], c["l"], c["lam"], c["eta"]) == (1, 1, 1, 0)
        assert c["rho_certified"] == 1
        assert c["reg_H"] == 1
        assert c["reg_H_le_rho0"] is True

    def test_doubling_constant_projection_instance(self):
        X = int_line(range(5))
        Y1 = int_line(range(0, 9, 2))
        Y2 = int_line([7])
        Z = int_line(range(0, 9, 2))
        F1 = SetMap(X, Y1, frozenset((i, i) for i in range(5)))
        F2 = SetMap(X, Y2, frozenset((i, 0) for i in range(5)))
        G = BiParamSetMap(Y1, Y2, Z, frozenset((i, 0, i) for i in range(5)))
        rep = mainresult_audit(F1, F2, G, (2, 2, 0, 2), WIDE_DELTAS)
        assert rep.verdict == "pass"
        assert rep.value == Fraction(1, 2)
        c = rep.constants
        assert c["m"] == Fraction(1, 2)
        assert c["l"] == 0
        assert c["lam"] == 1
        assert c["eta"] == 0
        assert c["rho_certified"] == Fraction(1, 2)
        assert c["reg_H"] == Fraction(1, 2)
        assert c["reg_H_le_rho0"] is True

    def test_product_one_raises_hypothesis_violation(self):
        L = int_line(range(5))
        Zs = int_line(range(9))
        F1 = SetMap(L, L, frozenset((i, i) for i in range(5)))
        F2 = SetMap(L, L, frozenset((i, i) for i in range(5)))
        G = BiParamSetMap(
            L, L, Zs, frozenset((i, j, i + j) for i in range(5) for j in range(5))
        )
        deltas = {"delta1": 100, "delta2": 2, "delta3": 2, "delta4": 100}
        with pytest.raises(HypothesisViolation):
            mainresult_audit(F1, F2, G, (2, 2, 2, 4), deltas)

    def test_inconsistent_base_rejected(self):
        F1, F2, G = identity_instance()
        with pytest.raises(ValueError):
            mainresult_audit(F1, F2, G, (2, 2, 3, 2), WIDE_DELTAS)


class TestFixedpoint:
    def test_identity_against_constant_crossing(self):
        L = int_line(range(61))
        F1 = SetMap(L, L, frozenset((i, i) for i in range(61)))
        F2 = SetMap(L, L, frozenset((i, 30) for i in range(61)))
        deltas = {"delta1": 28, "delta2": 28, "delta3": 14, "delta4": 28}
        rep = fixedpoint_audit(F1, F2, (31, 31, 30), deltas)
        assert rep.verdict == "pass"
        assert rep.value == 1
        c = rep.constants
        assert (c["m"], c["l"], c["lam"], c["eta"]) == (1, 0, 1, 1)
        assert c["rho_certified"] == 2
        assert c["s"] == Fraction(7, 6)
        assert c["gap"] == 1
        assert c["zero_certified"] is True
        assert c["fix"] == [30]
        assert c["display_points_checked"] == 3
        assert c["display_violations"] == 0

    def test_equal_maps_make_everything_fixed(self):
        L = int_line(range(9))
        graph = frozenset((i, i) for i in range(9)) | frozenset(
            (i, i + 1) for i in range(8)
        )
        F = SetMap(L, L, graph)
        deltas = {"delta1": Fraction(1, 2), "delta2": 2, "delta3": 2, "delta4": 100}
        rep = fixedpoint_audit(F, F, (4, 4, 5), deltas)
        assert rep.verdict == "pass"
        assert rep.constants["fix"] == list(range(9))
        assert rep.constants["display_violations"] == 0
        assert rep.constants["l"] == 0

    def test_empty_coincidence_set_reported_not_failed(self):
        L = int_line(range(7))
        F1 = SetMap(L, L, frozenset((i, i) for i in range(7)))
        F2 = SetMap(L, L, frozenset((i, (i + 2) % 7) for i in range(7)))
        deltas = {"delta1": Fraction(1, 2), "delta2": 2, "delta3": 2, "delta4": 100}
        rep = fixedpoint_audit(F1, F2, (1, 1, 3), deltas)
        assert rep.verdict == "pass"
        assert rep.constants["fix"] == []
        assert rep.constants["zero_certified"] is False
        assert rep.constants["display_violations"] >= 1
        assert any("coincidence set is empty" in n for n in rep.notes)
        assert any("outside the certified window" in n for n in rep.notes)

    def test_equal_base_points_rejected(self):
        L = int_line(range(5))
        F = SetMap(L, L, frozenset((i, i) for i in range(5)))
        with pytest.raises(ValueError):
            fixedpoint_audit(F, F, (2, 2, 2), WIDE_DELTAS)

    def test_value_grid_budget_guard(self):
        L = int_line(range(61))
        F = SetMap(L, L, frozenset((i, i) for i in range(61)))
        with pytest.raises(ValueError):
            fixedpoint_audit(F, F, (2, 2, 3), WIDE_DELTAS, budget=100)
