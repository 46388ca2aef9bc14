"""Seeded instance families: determinism, oracles, validation."""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regmod import (
    ScaleWindow,
    build_instance,
    GeneratorSpec,
    generate,
    lip_at_scale,
    load_instance,
    lop_at_scale,
    mainresult_audit,
    fixedpoint_audit,
    metric_inequality_audit,
    reg_at_scale,
    validate_instance,
)
from regmod.metric_core import BudgetError, parse_number
from regmod.lab.instances import instance_to_json

ALL_FAMILIES = (
    "grid-linear",
    "random-metric",
    "random-relation",
    "polyhedral-linear",
    "fixedpoint-pair",
    "tangency-adversarial",
)


def oracle_window(inst) -> ScaleWindow:
    w = inst.oracle["window"]
    return ScaleWindow(
        r_dom=parse_number(w["r_dom"]),
        r_cod=parse_number(w["r_cod"]),
        eps=parse_number(w["eps"]),
    )


def oracle_deltas(inst) -> dict:
    return {k: parse_number(v) for k, v in inst.oracle["deltas"].items()}


class TestDeterminism:
    @pytest.mark.parametrize("family", ALL_FAMILIES)
    def test_same_seed_same_document(self, family):
        spec = GeneratorSpec(family, seed=5)
        doc_a = instance_to_json(build_instance(spec))
        doc_b = instance_to_json(build_instance(spec))
        assert doc_a == doc_b

    def test_generate_writes_identical_bytes(self, tmp_path):
        spec = GeneratorSpec("random-metric", seed=1, params={"n": 6})
        p1 = generate(spec, tmp_path / "a")
        p2 = generate(spec, tmp_path / "b")
        assert p1.name == "random-metric-1.json" == p2.name
        assert p1.read_bytes() == p2.read_bytes()

    def test_seed_changes_the_instance(self):
        docs = {
            json.dumps(
                instance_to_json(build_instance(GeneratorSpec("random-metric", seed=s))),
                sort_keys=True,
            )
            for s in range(8)
        }
        assert len(docs) > 1

    def test_params_are_part_of_the_identity(self):
        small = build_instance(GeneratorSpec("grid-linear", 2, {"points": 4}))
        large = build_instance(GeneratorSpec("grid-linear", 2, {"points": 9}))
        assert small.spaces["X"].n == 4
        assert large.spaces["X"].n == 9


class TestValidation:
    @pytest.mark.parametrize("family", ALL_FAMILIES)
    @pytest.mark.parametrize("seed", [0, 3, 7])
    def test_every_instance_validates_and_round_trips(self, family, seed, tmp_path):
        inst = build_instance(GeneratorSpec(family, seed))
        assert validate_instance(inst) == []
        path = generate(GeneratorSpec(family, seed), tmp_path)
        again = load_instance(path)
        assert validate_instance(again) == []
        assert instance_to_json(again) == instance_to_json(inst)

    def test_unknown_parameter_is_rejected(self):
        with pytest.raises(ValueError, match="unknown parameters"):
            build_instance(GeneratorSpec("random-metric", 1, {"points": 9}))

    def test_unknown_family_is_rejected(self):
        with pytest.raises(ValueError, match="unknown family"):
            GeneratorSpec("mystery", 0)

    def test_budget_cap_trips(self):
        with pytest.raises(BudgetError):
            build_instance(GeneratorSpec("random-metric", 1, {"n": 9}), budget=16)

    def test_nonpositive_slope_is_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            build_instance(GeneratorSpec("grid-linear", 0, {"a": "-2"}))


class TestGridLinearOracle:
    def test_doubling_on_five_points(self):
        inst = build_instance(GeneratorSpec("grid-linear", 7, {"points": 5, "a": "2"}))
        F = inst.maps["F"]
        assert [F.dom.labels[i] for i in range(5)] == [0, 1, 2, 3, 4]
        assert [F.cod.labels[i] for i in range(5)] == [0, 2, 4, 6, 8]
        assert inst.oracle["lop"] == "2"
        assert inst.oracle["reg"] == "1/2"
        assert inst.oracle["lip"] == "2"

    @pytest.mark.parametrize("seed", range(6))
    def test_measured_moduli_match_the_oracle(self, seed):
        inst = build_instance(GeneratorSpec("grid-linear", seed))
        F, base = inst.maps["F"], inst.base
        win = oracle_window(inst)
        assert lop_at_scale(F, base, win).value == parse_number(inst.oracle["lop"])
        assert reg_at_scale(F, base, win).value == parse_number(inst.oracle["reg"])
        assert lip_at_scale(F, base, win).value == parse_number(inst.oracle["lip"])

    def test_fractional_slope_lands_on_integer_grids(self):
        inst = build_instance(GeneratorSpec("grid-linear", 1, {"a": "3/2", "points": 4}))
        F = inst.maps["F"]
        assert all(isinstance(F.dom.labels[i], int) for i in range(F.dom.n))
        win = oracle_window(inst)
        assert lop_at_scale(F, inst.base, win).value == Fraction(3, 2)


class TestChainOracle:
    @pytest.mark.parametrize("seed", range(8))
    def test_mainresult_passes_with_oracle_constants(self, seed):
        inst = build_instance(GeneratorSpec("grid-linear", seed, {"shape": "chain"}))
        rep = mainresult_audit(
            inst.maps["F1"],
            inst.maps["F2"],
            inst.bimaps["G"],
            inst.base,
            oracle_deltas(inst),
        )
        assert rep.ok(), rep.notes
        for key in ("m", "l", "lam", "eta", "rho0"):
            assert parse_number(rep.constants[key]) == parse_number(inst.oracle[key]), key

    def test_gap_shape_sees_the_parameter_grid(self):
        inst = build_instance(
            GeneratorSpec("grid-linear", 3, {"shape": "chain", "g": "gap"})
        )
        assert inst.oracle["eta"] == "1"
        assert inst.oracle["l"] == "0"
        rep = mainresult_audit(
            inst.maps["F1"],
            inst.maps["F2"],
            inst.bimaps["G"],
            inst.base,
            oracle_deltas(inst),
        )
        assert rep.ok()
        assert parse_number(rep.constants["eta"]) == 1

    def test_chain_shape_vocabulary(self):
        with pytest.raises(ValueError, match="first"):
            build_instance(
                GeneratorSpec("grid-linear", 0, {"shape": "chain", "g": "sideways"})
            )


class TestFixedpointOracle:
    @pytest.mark.parametrize("seed", range(6))
    def test_audit_passes_and_certifies(self, seed):
        inst = build_instance(GeneratorSpec("fixedpoint-pair", seed))
        rep = fixedpoint_audit(
            inst.maps["F1"], inst.maps["F2"], inst.base, oracle_deltas(inst)
        )
        assert rep.ok(), rep.notes
        assert rep.constants["zero_certified"] is True
        fix = [int(v) for v in inst.oracle["fix"]]
        xb, y1b, y2b = inst.base
        assert y2b in fix
        assert xb not in fix

    def test_base_points_disagree(self):
        inst = build_instance(GeneratorSpec("fixedpoint-pair", 2))
        xb, y1b, y2b = inst.base
        assert y1b != y2b


class TestPolyhedralOracle:
    @pytest.mark.parametrize("shape", ["diagonal", "scaled-permutation"])
    @pytest.mark.parametrize("seed", range(4))
    def test_operator_norms_match_svd(self, shape, seed):
        inst = build_instance(
            GeneratorSpec("polyhedral-linear", seed, {"shape": shape, "dim_dom": 3})
        )
        rows = [[Fraction(c) for c in row] for row in inst.oracle["matrix"]]
        sv = np.linalg.svd(np.array(rows, dtype=float), compute_uv=False)
        assert float(parse_number(inst.oracle["opnorm"])) == pytest.approx(sv.max())
        assert float(parse_number(inst.oracle["conorm"])) == pytest.approx(sv.min())

    def test_chain_oracle_matches_the_coefficients(self):
        inst = build_instance(
            GeneratorSpec(
                "polyhedral-linear",
                0,
                {"shape": "chain", "p": "2", "q": "-1", "u": "1", "v": "2"},
            )
        )
        assert inst.kind == "polyhedral-chain"
        assert parse_number(inst.oracle["slope"]) == 0
        assert parse_number(inst.oracle["dual_weight"]) == 3

    def test_square_shapes_reject_rectangles(self):
        with pytest.raises(ValueError, match="square"):
            build_instance(
                GeneratorSpec(
                    "polyhedral-linear",
                    0,
                    {"shape": "diagonal", "dim_dom": 2, "dim_cod": 3},
                )
            )


class TestTangencyOracle:
    def test_metric_inequality_threshold(self):
        inst = build_instance(GeneratorSpec("tangency-adversarial", 0, {"slope": 20}))
        sets = [inst.polyhedra[k] for k in sorted(inst.polyhedra)]
        r = parse_number(inst.oracle["r"])
        step = parse_number(inst.oracle["grid_step"])
        low = metric_inequality_audit(
            sets, inst.base, r, parse_number(inst.oracle["fails_tau_at_most"]), step
        )
        high = metric_inequality_audit(
            sets, inst.base, r, parse_number(inst.oracle["passes_tau"]), step
        )
        assert not low.ok()
        assert high.ok()


@settings(max_examples=20, deadline=None)
@given(
    family=st.sampled_from(ALL_FAMILIES),
    seed=st.integers(min_value=0, max_value=2**64 - 1),
)
def test_any_seed_builds_a_valid_instance(family, seed):
    inst = build_instance(GeneratorSpec(family, seed))
    assert validate_instance(inst) == []
    assert inst.seed == seed
    assert inst.family == family
