"""Audits for regularity of set-valued compositions.

The target statement: with H(x) = G(F1(x), F2(x)), inner maps that are
metrically regular (F1) and Lipschitz-like (F2), and an outer map G
partially regular in its first argument and partially Lipschitz in the
second, the composition is metrically regular with modulus at most

    rho0 = m * lam / (1 - m * l * lam * eta).

The audit measures the four moduli at caller-chosen scales, rebuilds
the proof constants (the product metric d0, the shrunken radii delta,
gamma, s), verifies the distance estimate for the auxiliary map on the
certified window, and, when local composition stability holds, checks
the measured regularity of H against the bound.

All window bookkeeping follows the proof, including the exact shrink
factors; nothing is asserted outside the derived windows.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

from ..metric_core import (
    INF,
    Ext,
    MetricSpace,
    ProductMetric,
    TAU_NUM,
    ball,
    default_budget,
    dist_point_set,
    ext_mul,
)
from ..report import (
    AuditReport,
    VERDICT_FAIL,
    VERDICT_NOT_APPLICABLE,
    VERDICT_PASS,
)
from ..setmap import BiParamSetMap, SetMap, compose_H
from .scales import (
    HypothesisViolation,
    Rho0Inputs,
    ScaleWindow,
    _lip_window,
    _lop_window,
    _reg_window,
    approx_le,
    exact_div,
    lip_at_scale,
    partial_moduli,
    reg_at_scale,
    rho0,
    rho_grid,
)

__all__ = [
    "composition_stability",
    "stability_sufficient_usc",
    "proMT_audit",
    "mainresult_audit",
    "fixedpoint_audit",
]


def _check_base(F1: SetMap, F2: SetMap, G: BiParamSetMap, base: tuple) -> None:
    xb, y1b, y2b, zb = base
    if (xb, y1b) not in F1.graph or (xb, y2b) not in F2.graph:
        raise ValueError("base is inconsistent: (x, y_i) not on the inner graphs")
    if (y1b, y2b, zb) not in G.graph:
        raise ValueError("base is inconsistent: (y1, y2, z) not on the outer graph")


def _feasible_triples(F1: SetMap, F2: SetMap) -> list[tuple[int, int, int]]:
    by_x2: dict[int, list[int]] = {}
    for x, y in F2.graph:
        by_x2.setdefault(x, []).append(y)
    out = []
    for (x, y1) in F1.graph:
        for y2 in by_x2.get(x, ()):
            out.append((x, y1, y2))
    return out


def _min_dist_to(pm: ProductMetric, point: tuple, pool: Iterable[tuple]) -> Ext:
    best: Ext = INF
    for q in pool:
        d = pm.dist_multi(point, q)
        if d < best:
            best = d
            if best == 0:
                break
    return best


def composition_stability(
    F1: SetMap,
    F2: SetMap,
    G: BiParamSetMap,
    base: tuple,
    eps: Ext,
) -> AuditReport:
    """Largest delta at which near-composition values have near witnesses.

    For the returned delta, every x in B(xb, delta) and every
    z in H(x) ∩ B(zb, delta) admit (y1, y2) in
    [F1(x) ∩ B(y1b, eps)] x [F2(x) ∩ B(y2b, eps)] with z in G(y1, y2).
    Scans delta descending over the realized grid, with an unbounded
    candidate first; reports the smallest failing level's
    counterexample alongside.
    """
    _check_base(F1, F2, G, base)
    if not eps > 0:
        raise ValueError("eps must be positive")
    xb, y1b, y2b, zb = base
    X, Y1, Y2, Z = F1.dom, F1.cod, F2.cod, G.cod
    H = compose_H(F1, F2, G)

    def witness_exists(x: int, z: int) -> bool:
        for y1 in F1.fiber(x):
            if Y1.dist[y1b][y1] >= eps:
                continue
            for y2 in F2.fiber(x):
                if Y2.dist[y2b][y2] >= eps:
                    continue
                if z in G.fiber(y1, y2):
                    return True
        return False

    def level_ok(delta: Ext) -> tuple[bool, tuple | None]:
        for x in range(X.n):
            if X.dist[xb][x] >= delta:
                continue
            for z in H.fiber(x):
                if Z.dist[zb][z] >= delta:
                    continue
                if not witness_exists(x, z):
                    return False, (x, z)
        return True, None

    candidates: list[Ext] = [INF]
    candidates += sorted(
        {X.dist[xb][i] for i in range(X.n)} | {Z.dist[zb][j] for j in range(Z.n)} - {0},
        reverse=True,
    )
    candidates = [c for c in candidates if c > 0]

    failing: tuple | None = None
    failing_delta: Ext | None = None
    for delta in candidates:
        ok, counter = level_ok(delta)
        if ok:
            return AuditReport(
                kind="composition_stability",
                verdict=VERDICT_PASS,
                value=delta,
                constants={
                    "eps": eps,
                    "smallest_failing_delta": failing_delta,
                    "counterexample": failing,
                },
            )
        failing, failing_delta = counter, delta
    return AuditReport(
        kind="composition_stability",
        verdict=VERDICT_FAIL,
        value=None,
        witnesses=(failing,) if failing else (),
        constants={"eps": eps, "smallest_failing_delta": failing_delta},
    )


def stability_sufficient_usc(
    F1: SetMap,
    F2: SetMap,
    base: tuple,
    G: BiParamSetMap | None = None,
    eps: Ext | None = None,
) -> AuditReport:
    """Single-valuedness plus upper semicontinuity at the base point.

    When F1(xb) and F2(xb) are the singletons {y1b}, {y2b} and both
    maps are upper semicontinuous at xb, composition stability follows.
    On a finite space usc always holds (balls shrink to the point), so
    the audit verifies it by scanning the realized scales; if G is
    supplied the implied composition_stability is cross-checked.
    Multivalued F_i(xb) makes the criterion not applicable, which is
    reported as such rather than failed.
    """
    xb, y1b, y2b = base[0], base[1], base[2]
    X = F1.dom
    f1b, f2b = F1.fiber(xb), F2.fiber(xb)
    if f1b != {y1b} or f2b != {y2b}:
        return AuditReport(
            kind="stability_sufficient_usc",
            verdict=VERDICT_NOT_APPLICABLE,
            notes=("base fibers are not the expected singletons",),
            constants={"F1_at_base": sorted(f1b), "F2_at_base": sorted(f2b)},
        )

    # usc scan: for each target scale there must be a ball radius whose
    # image stays inside the target ball.
    dom_deltas = sorted({X.dist[xb][i] for i in range(X.n)} - {0})
    small = exact_div(dom_deltas[0], 2) if dom_deltas else 1
    table = {}
    for F, yb, tag in ((F1, y1b, "F1"), (F2, y2b, "F2")):
        Y = F.cod
        for epsilon in Y.realized_distances():
            chosen = None
            for delta in [INF] + sorted(dom_deltas, reverse=True) + [small]:
                img = set()
                for u in range(X.n):
                    if X.dist[xb][u] < delta:
                        img |= F.fiber(u)
                if all(Y.dist[yb][v] < epsilon for v in img):
                    chosen = delta
                    break
            if chosen is None:
                return AuditReport(
                    kind="stability_sufficient_usc",
                    verdict=VERDICT_FAIL,
                    witnesses=((tag, epsilon),),
                    notes=("usc scan found no working delta; finite spaces should always admit one",),
                )
            table[(tag, float(epsilon))] = chosen

    notes = []
    if G is not None:
        zb = base[3] if len(base) > 3 else next(iter(G.fiber(y1b, y2b)))
        rep = composition_stability(F1, F2, G, (xb, y1b, y2b, zb), eps if eps is not None else INF)
        if not rep.ok():
            return AuditReport(
                kind="stability_sufficient_usc",
                verdict=VERDICT_FAIL,
                witnesses=rep.witnesses,
                notes=("usc criterion held but composition_stability failed",),
            )
        notes.append("cross-checked against composition_stability")

    return AuditReport(
        kind="stability_sufficient_usc",
        verdict=VERDICT_PASS,
        constants={"usc_table_size": len(table)},
        notes=tuple(notes),
    )


def _exact_le(a: Ext, b: Ext) -> bool:
    """Exact comparison, converting floats to their binary rationals."""
    if a == INF:
        return b == INF
    if b == INF:
        return True
    return Fraction(a) <= Fraction(b)


def proMT_audit(
    F1: SetMap,
    F2: SetMap,
    G: BiParamSetMap,
    base: tuple,
    w: ScaleWindow,
    tau: Ext,
    tol: float = TAU_NUM,
) -> AuditReport:
    """Distance estimate for the auxiliary map and its two consequences.

    Level (i): d((x,y1,y2), R^-1(z)) <= tau * phi at every feasible
    triple within r_dom of the base (max product metric) and every z
    within r_cod of zb, where phi is the exact envelope value
    d(z, G(y1, y2)).

    When (i) holds, level (ii) is checked on the derived window
    delta2 = min(r_dom, r_cod):
    d(x, H^-1(z)) <= tau * d(z, G(F1(x) ∩ B1, F2(x) ∩ B2)), and level
    (iii), the openness inclusion B(z, rho/tau) ⊆ H(B(x, rho)), on
    eps3 = delta2 * tau / (tau + 1).  A violation of (ii) or (iii)
    while (i) holds is an implication failure; candidate violations on
    float data are re-checked in exact arithmetic so tolerance noise is
    reported as such instead of failing the audit.
    """
    _check_base(F1, F2, G, base)
    if not tau > 0:
        raise ValueError("tau must be positive")
    xb, y1b, y2b, zb = base
    X, Y1, Y2, Z = F1.dom, F1.cod, F2.cod, G.cod
    pm = ProductMetric(factors=(X, Y1, Y2), combiner="weighted-max")
    base3 = (xb, y1b, y2b)

    triples = _feasible_triples(F1, F2)
    in_window = [t for t in triples if pm.dist_multi(t, base3) < w.r_dom]
    z_window = [z for z in range(Z.n) if Z.dist[zb][z] < w.r_cod]
    fiber_cache = {(y1, y2): G.fiber(y1, y2) for (_, y1, y2) in triples}

    def inv_pool(z: int) -> list[tuple]:
        return [t for t in triples if z in fiber_cache[(t[1], t[2])]]

    level_i_ok = True
    violations_i: list[tuple] = []
    for z in z_window:
        pool = inv_pool(z)
        for t in in_window:
            phi = dist_point_set(Z, z, fiber_cache[(t[1], t[2])])
            bound = ext_mul(tau, phi)
            lhs = _min_dist_to(pm, t, pool)
            if not approx_le(lhs, bound, tol) and not _exact_le(lhs, bound):
                level_i_ok = False
                if len(violations_i) < 4:
                    violations_i.append(("i", t, z, lhs, phi))

    constants: dict = {"tau": tau, "level_i": "established" if level_i_ok else "not-established"}
    notes: list[str] = []
    if not level_i_ok:
        notes.append("antecedent fails: implication audit skipped")
        return AuditReport(
            kind="proMT_audit",
            verdict=VERDICT_PASS,
            witnesses=tuple(violations_i),
            constants=constants,
            window=w.to_json(),
            notes=tuple(notes),
        )

    H = compose_H(F1, F2, G)
    inv_H = {z: frozenset(x for (x, zz) in H.graph if zz == z) for z in range(Z.n)}

    delta2 = min(w.r_dom, w.r_cod)
    violations: list[tuple] = []
    tolerance_notes = 0
    for x in range(X.n):
        if X.dist[xb][x] >= delta2:
            continue
        y1s = [y1 for y1 in F1.fiber(x) if Y1.dist[y1b][y1] < delta2]
        y2s = [y2 for y2 in F2.fiber(x) if Y2.dist[y2b][y2] < delta2]
        for z in range(Z.n):
            if Z.dist[zb][z] >= delta2:
                continue
            rhs_inner: Ext = INF
            for y1 in y1s:
                for y2 in y2s:
                    fib = fiber_cache.get((y1, y2))
                    if fib is None:
                        fib = G.fiber(y1, y2)
                        fiber_cache[(y1, y2)] = fib
                    rhs_inner = min(rhs_inner, dist_point_set(Z, z, fib))
            bound = ext_mul(tau, rhs_inner)
            lhs = dist_point_set(X, x, inv_H[z])
            if not approx_le(lhs, bound, tol):
                if _exact_le(lhs, bound):
                    tolerance_notes += 1
                else:
                    violations.append(("ii", x, z, lhs, rhs_inner))

    # Openness consequence on its derived scale.
    eps3 = exact_div(ext_mul(delta2, tau), tau + 1)
    grid = rho_grid(X, eps3)
    for (x, y1, y2) in triples:
        if X.dist[xb][x] >= eps3 or Y1.dist[y1b][y1] >= eps3 or Y2.dist[y2b][y2] >= eps3:
            continue
        for z in fiber_cache[(y1, y2)]:
            if Z.dist[zb][z] >= eps3:
                continue
            for rho in grid:
                radius = exact_div(rho, tau)
                target = {v for v in range(Z.n) if Z.dist[z][v] < radius}
                reached: set[int] = set()
                for u in range(X.n):
                    if X.dist[x][u] < rho:
                        reached |= H.fiber(u)
                missing = target - reached
                if missing:
                    violations.append(("iii", (x, y1, y2), z, rho, sorted(missing)[:3]))

    if tolerance_notes:
        notes.append(f"tolerance artifacts on level (ii): {tolerance_notes} (exact re-check passed)")
    constants["delta2"] = delta2
    constants["eps3"] = eps3
    constants["violations"] = len(violations)
    return AuditReport(
        kind="proMT_audit",
        verdict=VERDICT_FAIL if violations else VERDICT_PASS,
        witnesses=tuple(violations[:6]),
        constants=constants,
        window=w.to_json(),
        notes=tuple(notes),
    )


def _positive_ext(v: Ext) -> bool:
    return v > 0 and v != INF


def mainresult_audit(
    F1: SetMap,
    F2: SetMap,
    G: BiParamSetMap,
    base: tuple,
    deltas: dict,
    margin: Ext = 0,
    tol: float = TAU_NUM,
) -> AuditReport:
    """Measure the hypotheses, rebuild the proof constants, verify the
    conclusion of the composed-regularity theorem.

    deltas maps "delta1".."delta4" to the hypothesis window radii:
    delta1 for lip of F2, delta2 for the partial lip of G, delta3 for
    the partial reg of G, delta4 for reg of F1.  Raises
    HypothesisViolation when the measured moduli violate the product
    condition; that is a property of the instance, not an audit fail.

    The verdict covers only what the theorem asserts: the distance
    estimate for the auxiliary map on the derived window (with the
    certified rho built from the chosen constants), and the measured
    regularity of H against that certified rho at the window obtained
    through composition stability.  The comparison of reg H against
    rho0 itself is reported in the constants.
    """
    _check_base(F1, F2, G, base)
    xb, y1b, y2b, zb = base
    X, Y1, Y2, Z = F1.dom, F1.cod, F2.cod, G.cod
    d1, d2, d3, d4 = (deltas[k] for k in ("delta1", "delta2", "delta3", "delta4"))

    rep_l = lip_at_scale(F2, (xb, y2b), ScaleWindow(d1, d1, INF))
    rep_eta = partial_moduli(
        G, (y1b, y2b, zb), ScaleWindow(d2, d2, INF, r_param=d2), "lip-in-second"
    )
    rep_lam = partial_moduli(
        G, (y1b, y2b, zb), ScaleWindow(d3, d3, INF, r_param=d3), "reg-in-first"
    )
    rep_m = reg_at_scale(F1, (xb, y1b), ScaleWindow(d4, d4, INF))
    m, l, lam, eta = rep_m.value, rep_l.value, rep_lam.value, rep_eta.value

    if not (_positive_ext(m) and _positive_ext(lam)):
        raise HypothesisViolation(
            f"reg-type moduli must be finite and positive: m={m}, lam={lam}"
        )
    inputs = Rho0Inputs(m=m, l=l, lam=lam, eta=eta)  # validates the product
    rho_target = rho0(inputs)

    # Proof constants: the audit runs with chosen constants at least the
    # measured moduli.  margin = 0 keeps them exact, which suffices on
    # finite instances where the suprema are attained.
    m_c = m + margin
    lam_c = lam + margin
    eta_c = eta + margin
    if l > 0:
        l_c = l + margin
    elif eta_c > 0:
        l_c = min(1, exact_div(1, 2 * m_c * lam_c * eta_c))
    else:
        l_c = 1
    if not m_c * l_c * lam_c * eta_c < 1:
        raise HypothesisViolation("chosen constants violate the product condition")
    rho = exact_div(m_c * lam_c, 1 - m_c * l_c * lam_c * eta_c)

    delta = min(exact_div(d1, 2), exact_div(d2, 2), d3, exact_div(d4, 2))
    gamma = min(
        exact_div(delta, lam_c),
        exact_div(delta, m_c * lam_c),
        exact_div(delta, m_c * lam_c * l_c),
    )
    s = min(
        delta,
        exact_div(delta, 6 * rho),
        exact_div(ext_mul(delta, m_c), 6 * rho),
        exact_div(delta, 6 * l_c * rho),
        exact_div(gamma, 4),
    )

    pm = ProductMetric(
        factors=(X, Y1, Y2),
        weights=(1, m_c, exact_div(1, l_c)),
        combiner="weighted-max",
    )
    base3 = (xb, y1b, y2b)
    ball_radius = 2 * s * rho

    triples = _feasible_triples(F1, F2)
    fiber_cache = {(y1, y2): G.fiber(y1, y2) for (_, y1, y2) in triples}
    in_ball = [t for t in triples if pm.dist_multi(t, base3) < ball_radius]
    z_window = [z for z in range(Z.n) if Z.dist[zb][z] < s]

    aim_violations: list[tuple] = []
    for z in z_window:
        pool = [t for t in triples if z in fiber_cache[(t[1], t[2])]]
        for t in in_ball:
            phi = dist_point_set(Z, z, fiber_cache[(t[1], t[2])])
            lhs = _min_dist_to(pm, t, pool)
            if not approx_le(lhs, ext_mul(rho, phi), tol):
                aim_violations.append((t, z, lhs, phi))

    # Window transfer: the distance estimate projects onto the x
    # coordinate at radius delta_e, then composition stability converts
    # it into plain metric regularity of H near the base.
    weight_span = max(1, m_c, exact_div(1, l_c))
    delta_e = min(s, exact_div(ball_radius, weight_span))
    stab = composition_stability(F1, F2, G, base, eps=delta_e)
    constants = {
        "m": m,
        "l": l,
        "lam": lam,
        "eta": eta,
        "m_c": m_c,
        "l_c": l_c,
        "lam_c": lam_c,
        "eta_c": eta_c,
        "rho0": rho_target,
        "rho_certified": rho,
        "delta": delta,
        "gamma": gamma,
        "s": s,
        "tuple_ball_radius": ball_radius,
        "delta_e": delta_e,
        "tuples_checked": len(in_ball),
        "z_checked": len(z_window),
    }

    reg_H_value: Ext | None = None
    reg_ok = True
    rho0_ok: bool | None = None
    notes: list[str] = []
    if stab.ok():
        eta_m = min(stab.value, delta_e, exact_div(delta_e, rho))
        r_x = min(exact_div(eta_m, 2), exact_div(ext_mul(rho, eta_m), 4))
        r_z = exact_div(eta_m, 4)
        H = compose_H(F1, F2, G)
        U = sorted(ball(X, xb, r_x).members)
        V = sorted(ball(Z, zb, r_z).members)
        reg_H_value, reg_wit, _ = _reg_window(H, U, V)
        reg_ok = approx_le(reg_H_value, rho, tol)
        rho0_ok = approx_le(reg_H_value, rho_target, max(tol, 1e-7))
        constants.update(
            {
                "stability_delta": stab.value,
                "eta_m": eta_m,
                "r_x": r_x,
                "r_z": r_z,
                "reg_H": reg_H_value,
                "reg_H_le_rho0": rho0_ok,
            }
        )
        if not reg_ok:
            aim_violations.append(("reg_H", reg_H_value, rho, tuple(reg_wit)))
    else:
        notes.append("composition stability failed; reg H transfer skipped")
        constants["stability_delta"] = None

    verdict = VERDICT_PASS if (not aim_violations and reg_ok) else VERDICT_FAIL
    return AuditReport(
        kind="mainresult_audit",
        verdict=verdict,
        value=rho_target,
        witnesses=tuple(aim_violations[:6]),
        constants=constants,
        window={"deltas": {k: deltas[k] for k in ("delta1", "delta2", "delta3", "delta4")}},
        notes=tuple(notes),
    )


def fixedpoint_audit(
    F1: SetMap,
    F2: SetMap,
    base: tuple,
    deltas: dict,
    margin: Ext = 0,
    budget: int | None = None,
    tol: float = TAU_NUM,
) -> AuditReport:
    """Coincidence-point estimate for a pair of maps into one space.

    With G(y1, y2) = {d(y1, y2)} materialized over the realized distance
    values, H(x) collapses to the gap sizes between F1(x) and F2(x) and
    H^-1(0) is the coincidence set Fix = {x : F1(x) ∩ F2(x) nonempty}.
    The audit runs the composition audit at the given windows and then
    checks d(x, Fix) <= rho * d(F1(x) ∩ V1, F2(x) ∩ V2) on the derived
    x-window.  The estimate is certified by the theorem only when the
    value 0 lies inside the certified z-window (the base gap must be
    smaller than the derived radius); otherwise the inequality is still
    measured and reported, flagged as outside the certified window.
    """
    if F1.cod is not F2.cod:
        raise ValueError("fixed-point audit needs a shared codomain")
    if F1.dom is not F2.dom:
        raise ValueError("fixed-point audit needs a shared domain")
    cap = budget if budget is not None else default_budget()
    xb, y1b, y2b = base
    Y = F1.cod
    if y1b == y2b:
        raise ValueError("base points in the codomain must differ")
    if Y.n * Y.n > cap:
        raise ValueError(f"value grid needs {Y.n * Y.n} pairs, budget is {cap}")

    values = sorted({Y.dist[i][j] for i in range(Y.n) for j in range(Y.n)})
    Zv = MetricSpace(values, [[abs(a - b) for b in values] for a in values])
    z_index = {v: k for k, v in enumerate(values)}
    G = BiParamSetMap(
        Y,
        Y,
        Zv,
        frozenset((i, j, z_index[Y.dist[i][j]]) for i in range(Y.n) for j in range(Y.n)),
    )
    zb = z_index[Y.dist[y1b][y2b]]
    rep_main = mainresult_audit(F1, F2, G, (xb, y1b, y2b, zb), deltas, margin=margin, tol=tol)

    rho = rep_main.constants["rho_certified"]
    rho_target = rep_main.constants["rho0"]
    delta_e = rep_main.constants["delta_e"]
    gap = Y.dist[y1b][y2b]
    zero_certified = gap < delta_e

    X = F1.dom
    fix = frozenset(x for x in range(X.n) if F1.fiber(x) & F2.fiber(x))
    U = sorted(ball(X, xb, delta_e).members)
    V1 = ball(Y, y1b, delta_e).members
    V2 = ball(Y, y2b, delta_e).members

    display_violations: list[tuple] = []
    checked = 0
    for x in U:
        a = F1.fiber(x) & V1
        b = F2.fiber(x) & V2
        rhs_gap: Ext = INF
        for ya in a:
            for yb2 in b:
                rhs_gap = min(rhs_gap, Y.dist[ya][yb2])
        lhs = dist_point_set(X, x, fix)
        checked += 1
        if not approx_le(lhs, ext_mul(rho, rhs_gap), tol):
            display_violations.append((x, lhs, rhs_gap))

    notes = list(rep_main.notes)
    if not zero_certified:
        notes.append("z = 0 lies outside the certified window; display measured, not asserted")
    if not fix:
        notes.append("coincidence set is empty; display holds only with infinite right sides")

    fail = (
        rep_main.verdict == VERDICT_FAIL
        or (zero_certified and bool(display_violations))
    )
    constants = dict(rep_main.constants)
    constants.update(
        {
            "gap": gap,
            "zero_certified": zero_certified,
            "fix": sorted(fix),
            "display_points_checked": checked,
            "display_violations": len(display_violations),
        }
    )
    return AuditReport(
        kind="fixedpoint_audit",
        verdict=VERDICT_FAIL if fail else VERDICT_PASS,
        value=rho_target,
        witnesses=tuple(display_violations[:6]) + rep_main.witnesses,
        constants=constants,
        window=rep_main.window,
        notes=tuple(notes),
    )
