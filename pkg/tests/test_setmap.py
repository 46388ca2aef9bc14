from __future__ import annotations

import itertools

import pytest

from conftest import int_line
from regmod.metric_core import PointSet, SpaceMismatchError
from regmod.setmap import (
    BiParamSetMap,
    SetMap,
    build_R,
    compose_H,
    image,
    load_bimap,
    load_setmap,
    pair,
    setmap_to_json,
    slice_map,
)


def identity_map(sp) -> SetMap:
    return SetMap(sp, sp, frozenset((i, i) for i in sp.points()))


@pytest.fixture
def doubling_setup():
    """F1(x) = {2x}, F2 = identity, G(y1,y2) = {y1+y2} on integer grids."""
    X = int_line([0, 1, 2])
    Y1 = int_line([0, 2, 4])
    Y2 = int_line([0, 1, 2])
    Z = int_line(list(range(7)))
    f1 = frozenset((x, Y1.labels.index(2 * X.labels[x])) for x in X.points())
    F1 = SetMap(X, Y1, f1)
    F2 = SetMap(X, Y2, frozenset((i, i) for i in X.points()))
    triples = frozenset(
        (a, b, Z.labels.index(Y1.labels[a] + Y2.labels[b]))
        for a in Y1.points()
        for b in Y2.points()
    )
    G = BiParamSetMap(Y1, Y2, Z, triples)
    return X, Y1, Y2, Z, F1, F2, G


class TestImageInverse:
    def test_identity_image(self):
        sp = int_line(range(4))
        F = identity_map(sp)
        assert image(F, {1, 2}).members == {1, 2}

    def test_fiber_union(self):
        dom = int_line(range(2))
        cod = int_line(range(5))
        F = SetMap(dom, cod, frozenset({(0, 3), (1, 3), (1, 4)}))
        assert image(F, {0, 1}).members == {3, 4}

    def test_empty_argument(self):
        sp = int_line(range(3))
        F = identity_map(sp)
        assert image(F, frozenset()).members == frozenset()

    def test_inverse_identity(self):
        sp = int_line(range(3))
        F = identity_map(sp)
        assert F.inverse().graph == F.graph

    def test_inverse_transposes(self):
        dom = int_line(range(1))
        cod = int_line(range(4))
        F = SetMap(dom, cod, frozenset({(0, 3)}))
        assert F.inverse().graph == frozenset({(3, 0)})

    def test_doubling_inverse_fiber(self, doubling_setup):
        X, Y1, _, _, F1, _, _ = doubling_setup
        y = Y1.labels.index(2)
        assert F1.inverse().fiber(y) == {X.labels.index(1)}

    def test_involution(self, doubling_setup):
        _, _, _, _, F1, F2, _ = doubling_setup
        for F in (F1, F2):
            assert F.inverse().inverse().graph == F.graph

    def test_fiber_transpose_coherence(self, doubling_setup):
        _, _, _, _, F1, _, _ = doubling_setup
        inv = F1.inverse()
        for y in F1.cod.points():
            manual = frozenset(x for (x, yy) in F1.graph if yy == y)
            assert image(inv, {y}).members == manual

    def test_mismatch_rejected(self):
        sp1, sp2 = int_line(range(3)), int_line(range(3))
        F = identity_map(sp1)
        with pytest.raises(SpaceMismatchError):
            image(F, PointSet(sp2, frozenset({0})))


class TestPair:
    def test_identity_fiber(self):
        sp = int_line([0, 1])
        P, pm = pair(identity_map(sp), identity_map(sp))
        fiber = P.fiber(0)
        assert fiber == {pm.flat((0, 0))}

    def test_cartesian_fiber(self):
        X = int_line([0])
        Y1 = int_line([0, 1])
        Y2 = int_line([0, 1])
        F1 = SetMap(X, Y1, frozenset({(0, 0), (0, 1)}))
        F2 = SetMap(X, Y2, frozenset({(0, 0)}))
        P, pm = pair(F1, F2)
        assert P.fiber(0) == {pm.flat((0, 0)), pm.flat((1, 0))}

    def test_empty_factor_gives_empty_fiber(self):
        X = int_line([0])
        Y = int_line([0, 1])
        F1 = SetMap(X, Y, frozenset({(0, 0)}))
        F2 = SetMap(X, Y, frozenset())
        P, _ = pair(F1, F2)
        assert P.fiber(0) == frozenset()


class TestCompose:
    def test_projection_recovers_f1(self, doubling_setup):
        X, Y1, Y2, _, F1, F2, _ = doubling_setup
        proj = BiParamSetMap(
            Y1, Y2, Y1,
            frozenset((a, b, a) for a in Y1.points() for b in Y2.points()),
        )
        H = compose_H(F1, F2, proj)
        assert H.graph == F1.graph

    def test_doubling_sum(self, doubling_setup):
        X, _, _, Z, F1, F2, G = doubling_setup
        H = compose_H(F1, F2, G)
        for x in X.points():
            want = {Z.labels.index(3 * X.labels[x])}
            assert H.fiber(x) == want

    def test_empty_propagates(self, doubling_setup):
        X, Y1, Y2, Z, F1, F2, G = doubling_setup
        F1_gap = SetMap(X, Y1, frozenset(p for p in F1.graph if p[0] != 1))
        H = compose_H(F1_gap, F2, G)
        assert H.fiber(1) == frozenset()

    def test_brute_force_agreement(self, doubling_setup):
        X, Y1, Y2, Z, F1, F2, G = doubling_setup
        H = compose_H(F1, F2, G)
        for x in X.points():
            witnessed = set()
            for y1, y2 in itertools.product(Y1.points(), Y2.points()):
                if (x, y1) in F1.graph and (x, y2) in F2.graph:
                    witnessed |= G.fiber(y1, y2)
            assert H.fiber(x) == witnessed


class TestBuildR:
    def test_off_graph_fiber_empty(self, doubling_setup):
        X, Y1, Y2, _, F1, F2, G = doubling_setup
        R, pm = build_R(F1, F2, G)
        # y1 = 0 is not in F1(1) = {2}
        k = pm.flat((1, 0, 1))
        assert R.fiber(k) == frozenset()

    def test_identity_instance(self):
        sp = int_line([0, 1])
        F1 = identity_map(sp)
        F2 = identity_map(sp)
        G = BiParamSetMap(
            sp, sp, sp,
            frozenset((a, a, a) for a in sp.points()),
        )
        R, pm = build_R(F1, F2, G)
        for x in sp.points():
            assert R.fiber(pm.flat((x, x, x))) == {x}

    def test_doubling_evaluation(self, doubling_setup):
        X, Y1, Y2, Z, F1, F2, G = doubling_setup
        R, pm = build_R(F1, F2, G)
        k = pm.flat((X.labels.index(1), Y1.labels.index(2), Y2.labels.index(1)))
        assert R.fiber(k) == {Z.labels.index(3)}

    def test_projection_of_R_is_H(self, doubling_setup):
        X, _, _, _, F1, F2, G = doubling_setup
        H = compose_H(F1, F2, G)
        R, pm = build_R(F1, F2, G)
        projected = frozenset((pm.unflat(k)[0], z) for (k, z) in R.graph)
        assert projected == H.graph


class TestSlice:
    def test_fix_second(self, doubling_setup):
        _, Y1, Y2, Z, _, _, G = doubling_setup
        y2 = Y2.labels.index(1)
        S = slice_map(G, "fix-second", y2)
        for a in Y1.points():
            assert S.fiber(a) == {Z.labels.index(Y1.labels[a] + 1)}

    def test_fix_value_outside_triples(self):
        Y = int_line([0, 1])
        Z = int_line([0, 1])
        G = BiParamSetMap(Y, Y, Z, frozenset({(0, 0, 0)}))
        S = G.slice_first(1)
        assert S.graph == frozenset()

    def test_slices_partition_graph(self, doubling_setup):
        _, Y1, _, _, _, _, G = doubling_setup
        rebuilt = set()
        for a in Y1.points():
            for (b, z) in G.slice_first(a).graph:
                rebuilt.add((a, b, z))
        assert frozenset(rebuilt) == G.graph

    def test_bad_selector(self, doubling_setup):
        _, _, _, _, _, _, G = doubling_setup
        with pytest.raises(ValueError):
            slice_map(G, "fix-third", 0)


class TestSetMapJson:
    def test_round_trip(self, doubling_setup):
        X, Y1, _, _, F1, _, G = doubling_setup
        spaces = {"X": X, "Y1": Y1, "Y2": G.dom2, "Z": G.cod}
        obj = setmap_to_json(F1, "X", "Y1")
        F1b = load_setmap(obj, spaces)
        assert F1b.graph == F1.graph
        from regmod.setmap import bimap_to_json

        Gb = load_bimap(bimap_to_json(G, "Y1", "Y2", "Z"), spaces)
        assert Gb.graph == G.graph
