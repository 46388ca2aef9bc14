"""Slope error bounds and the exact Ekeland descent."""

from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regmod.metric_core import INF
from regmod.varprinciples import (
    ScalarField,
    ekeland,
    error_bound_audit,
    field_to_json,
    load_field,
    slope_quantity,
    sublevel_set,
)

from conftest import int_line


@pytest.fixture
def ramp():
    """Values (0, 2, 3) on the unit-spaced three-point line."""
    return ScalarField(int_line(range(3)), (0, 2, 3))


class TestScalarField:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ScalarField(int_line(range(3)), (0, 1))

    def test_identically_infinite_rejected(self):
        with pytest.raises(ValueError):
            ScalarField(int_line(range(2)), (INF, INF))

    def test_json_round_trip(self):
        f = ScalarField(int_line(range(3)), (Fraction(1, 3), INF, 2))
        g = load_field(field_to_json(f))
        assert g.values == f.values
        assert g.space.dist == f.space.dist

    def test_json_with_shared_space(self):
        space = int_line(range(3))
        f = ScalarField(space, (0, 1, 2))
        obj = field_to_json(f, space_ref="line3")
        assert obj["space"] == "line3"
        g = load_field(obj, space=space)
        assert g.space is space


class TestSublevelSet:
    def test_positive_field_has_empty_sublevel(self):
        f = ScalarField(int_line(range(4)), (1, 1, 1, 1))
        assert sublevel_set(f) == frozenset()

    def test_distance_field_recovers_the_set(self):
        space = int_line(range(5))
        values = [min(abs(space.labels[x] - a) for a in (0, 3)) for x in range(5)]
        assert sublevel_set(ScalarField(space, values)) == {0, 3}

    def test_ramp(self, ramp):
        assert sublevel_set(ramp) == {0}


class TestSlopeQuantity:
    def test_ramp_at_far_end(self, ramp):
        assert slope_quantity(ramp, 2) == Fraction(3, 2)

    def test_ramp_at_middle(self, ramp):
        assert slope_quantity(ramp, 1) == 2

    def test_distance_function_has_unit_slope(self):
        space = int_line(range(5))
        f = ScalarField(space, tuple(range(5)))
        assert slope_quantity(f, 3) == 1

    def test_singleton_is_ill_posed(self):
        f = ScalarField(int_line([0]), (1,))
        assert slope_quantity(f, 0) == INF

    def test_nonpositive_base_rejected(self, ramp):
        with pytest.raises(ValueError):
            slope_quantity(ramp, 0)

    def test_index_readings_can_disagree(self):
        f = ScalarField(int_line(range(3)), (5, 3, 3))
        assert slope_quantity(f, 2) == 0
        assert slope_quantity(f, 2, literal_index=True) == -2


class TestErrorBoundAudit:
    def test_ramp_is_tight(self, ramp):
        rep = error_bound_audit(ramp, 2)
        assert rep.verdict == "pass"
        assert rep.constants["lhs"] == rep.constants["rhs"] == 3

    def test_ramp_middle_is_tight(self, ramp):
        rep = error_bound_audit(ramp, 1)
        assert rep.verdict == "pass"
        assert rep.constants["lhs"] == rep.constants["rhs"] == 2

    def test_scaling_multiplies_both_sides(self, ramp):
        scaled = ScalarField(ramp.space, tuple(10 * v for v in ramp.values))
        rep = error_bound_audit(scaled, 2)
        assert rep.verdict == "pass"
        assert rep.value == 10 * slope_quantity(ramp, 2)
        assert rep.constants["lhs"] == 30

    def test_empty_sublevel_uses_zero_times_inf(self):
        f = ScalarField(int_line(range(3)), (5, 3, 3))
        rep = error_bound_audit(f, 2)
        assert rep.verdict == "pass"
        assert rep.constants["distance_to_sublevel"] == INF
        assert rep.constants["m"] == 0
        assert rep.constants["lhs"] == 0
        assert rep.constants["m_literal"] == -2
        assert any("disagree" in n for n in rep.notes)

    def test_infinite_value_feeds_negative_terms(self):
        f = ScalarField(int_line(range(3)), (INF, 2, 3))
        rep = error_bound_audit(f, 2)
        assert rep.verdict == "pass"
        assert rep.constants["m"] == -1
        assert rep.constants["lhs"] == -INF

    def test_singleton_passes_with_note(self):
        f = ScalarField(int_line([0]), (1,))
        rep = error_bound_audit(f, 0)
        assert rep.verdict == "pass"
        assert rep.constants["ill_posed_candidates"] == 1
        assert any("empty competitor set" in n for n in rep.notes)

    @settings(max_examples=200, deadline=None)
    @given(
        values=st.lists(st.integers(-5, 10), min_size=2, max_size=7),
        seed=st.integers(0, 10**6),
    )
    def test_unconditional_on_random_fields(self, values, seed):
        space = int_line(range(len(values)))
        f = ScalarField(space, tuple(values))
        positives = [x for x in space.points() if f(x) > 0]
        if not positives:
            return
        xbar = positives[seed % len(positives)]
        assert error_bound_audit(f, xbar).verdict == "pass"


class TestEkeland:
    def test_ramp_descends_to_the_minimizer(self, ramp):
        cert = ekeland(ramp, 2, s=Fraction(7, 2), rate=1)
        assert cert.result == 0
        assert cert.iterations == 1
        assert cert.valid()

    def test_start_at_global_minimizer_stays(self, ramp):
        cert = ekeland(ramp, 0, s=1, rate=1)
        assert cert.result == 0
        assert cert.iterations == 0
        assert cert.valid()

    def test_huge_rate_pins_the_start(self, ramp):
        cert = ekeland(ramp, 1, s=3, rate=100)
        assert cert.result == 1
        assert cert.valid()

    def test_small_rate_travels_further(self):
        f = ScalarField(int_line(range(3)), (2, INF, 0))
        cert = ekeland(f, 0, s=3, rate=Fraction(1, 2))
        assert cert.result == 2
        assert cert.iterations == 1
        assert cert.valid()

    def test_infinite_points_never_attract(self):
        f = ScalarField(int_line(range(3)), (2, INF, 0))
        cert = ekeland(f, 0, s=3, rate=1)
        assert cert.result == 0
        assert cert.valid()

    def test_slack_precondition_is_strict(self, ramp):
        with pytest.raises(ValueError):
            ekeland(ramp, 2, s=3, rate=1)

    def test_bad_parameters_rejected(self, ramp):
        with pytest.raises(ValueError):
            ekeland(ramp, 2, s=0, rate=1)
        with pytest.raises(ValueError):
            ekeland(ramp, 2, s=4, rate=0)

    @settings(max_examples=200, deadline=None)
    @given(
        values=st.lists(st.integers(0, 6), min_size=2, max_size=8),
        start=st.integers(0, 7),
        num=st.integers(1, 4),
        den=st.integers(1, 4),
    )
    def test_certificates_always_verify(self, values, start, num, den):
        space = int_line(range(len(values)))
        f = ScalarField(space, tuple(values))
        x0 = start % space.n
        s = f(x0) - f.min_value() + 1
        cert = ekeland(f, x0, s=s, rate=Fraction(num, den))
        assert cert.valid()
        assert cert.iterations <= space.n * len(set(values))
