"""Scenario files, the audit registry, and the run/sweep engines.

A scenario is a JSON document naming one instance (a file or a seeded
generator spec) and a list of audits with parameters.  Running it
executes the audits in declaration order, writes one JSON report per
audit plus a summary CSV, and returns the exit-code contract: 0 when
every verdict matches its expectation, 1 when an audited inequality
unexpectedly fails, 2 (as :class:`ScenarioError`) for usage and input
problems.

Sweeps rerun the same audits over a list of values for one window
parameter and emit a CSV with one row per value carrying every reported
constant.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable

from ..coderiv import (
    alliedness_certificate,
    coderivative_estimate_audit,
    composite_openness_audit,
    dual_openness_floor,
    intersection_rule_audit,
    metric_inequality_audit,
)
from ..metric_core import INF, BudgetError, parse_number
from ..moduli import (
    HypothesisViolation,
    Rho0Inputs,
    ScaleWindow,
    composition_stability,
    envelope_zeroset_audit,
    fixedpoint_audit,
    link_audit,
    lip_at_scale,
    lop_at_scale,
    mainresult_audit,
    partial_moduli,
    proMT_audit,
    reg_at_scale,
    rho0,
)
from ..report import (
    VERDICT_FAIL,
    VERDICT_NOT_APPLICABLE,
    VERDICT_PASS,
    VERDICT_VACUOUS,
    AuditReport,
    jsonable,
)
from ..varprinciples import ekeland, error_bound_audit
from .generators import GeneratorSpec, build_instance
from .instances import Instance, InstanceError, load_instance, validate_instance

__all__ = [
    "AUDIT_REGISTRY",
    "AuditBinding",
    "AuditSpec",
    "RunResult",
    "SWEEP_PARAMETERS",
    "Scenario",
    "ScenarioError",
    "load_scenario",
    "run_scenario",
    "sweep_scenario",
]

SWEEP_PARAMETERS = ("r_dom", "r_cod", "eps", "delta")

_ID_SHAPE = re.compile(r"[A-Za-z0-9][A-Za-z0-9._-]*")

VERDICTS = (VERDICT_PASS, VERDICT_FAIL, VERDICT_VACUOUS, VERDICT_NOT_APPLICABLE)


class ScenarioError(ValueError):
    """Usage or input problem; the CLI maps this to exit code 2."""


# -- parameter helpers --------------------------------------------------

_REQUIRED = object()


def _num(params: dict, key: str, default: Any = _REQUIRED):
    if key in params:
        return parse_number(params[key])
    if default is _REQUIRED:
        raise ScenarioError(f"audit parameter {key!r} is required")
    return default


def _window_from(obj: Any, context: str) -> ScaleWindow:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{context}: window must be an object")
    try:
        r_dom = parse_number(obj["r_dom"])
        r_cod = parse_number(obj["r_cod"])
        eps = parse_number(obj["eps"])
    except KeyError as exc:
        raise ScenarioError(f"{context}: window needs r_dom, r_cod, eps") from exc
    r_param = parse_number(obj["r_param"]) if "r_param" in obj else None
    return ScaleWindow(r_dom, r_cod, eps, r_param=r_param)


def _get_window(params: dict, inst: Instance) -> ScaleWindow:
    if "window" in params:
        return _window_from(params["window"], "params")
    if "window" in inst.oracle:
        return _window_from(inst.oracle["window"], "oracle")
    raise ScenarioError('audit needs a "window" parameter (none in the oracle)')


def _get_base(params: dict, inst: Instance, length: int) -> tuple:
    base = params.get("base", inst.base)
    if base is None:
        raise ScenarioError('audit needs a "base" parameter (none in the instance)')
    base = tuple(base)
    if len(base) != length:
        raise ScenarioError(f"base must have length {length}")
    return base


def _get_deltas(params: dict, inst: Instance) -> dict:
    raw = params.get("deltas", inst.oracle.get("deltas"))
    if raw is None:
        raise ScenarioError('audit needs a "deltas" parameter (none in the oracle)')
    keys = ("delta1", "delta2", "delta3", "delta4")
    missing = [k for k in keys if k not in raw]
    if missing:
        raise ScenarioError(f"deltas is missing {missing}")
    return {k: parse_number(raw[k]) for k in keys}


def _from_modulus(name: str, rep) -> AuditReport:
    verdict = VERDICT_VACUOUS if rep.vacuous else VERDICT_PASS
    return AuditReport(
        kind=f"modulus-{name}",
        verdict=verdict,
        value=rep.value,
        witnesses=rep.witnesses,
        constants={"value": rep.value, **rep.constants},
        window=rep.window,
        notes=tuple(rep.flags),
    )


# -- audit runners -------------------------------------------------------

def _run_modulus(which: str):
    fn = {"lop": lop_at_scale, "reg": reg_at_scale, "lip": lip_at_scale}[which]

    def runner(inst: Instance, params: dict, budget: int | None) -> AuditReport:
        F = inst.maps["F"]
        base = _get_base(params, inst, 2)
        rep = fn(F, base, _get_window(params, inst))
        return _from_modulus(which, rep)

    return runner


def _run_link(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F = inst.maps["F"]
    base = _get_base(params, inst, 2)
    tol = float(_num(params, "tol", 1e-9))
    return link_audit(F, base, _get_window(params, inst), tol=tol)


def _run_error_bound(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    f = inst.fields["f"]
    xbar = int(_num(params, "xbar", 0))
    return error_bound_audit(f, xbar)


def _run_ekeland(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    f = inst.fields["f"]
    x0 = int(_num(params, "x0", 0))
    s = _num(params, "s")
    rate = _num(params, "rate")
    cert = ekeland(f, x0, s, rate)
    checks = {
        "decrease_ok": cert.decrease_ok,
        "distance_ok": cert.distance_ok,
        "stationarity_ok": cert.stationarity_ok,
    }
    verdict = VERDICT_PASS if all(checks.values()) else VERDICT_FAIL
    return AuditReport(
        kind="ekeland",
        verdict=verdict,
        value=cert.result,
        constants={
            "start": cert.start,
            "result": cert.result,
            "s": cert.s,
            "rate": cert.rate,
            "iterations": cert.iterations,
            **checks,
        },
    )


def _run_envelope_zeroset(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F = inst.maps["F"]
    target = params.get("y", "all")
    if target == "all":
        ys = list(range(F.cod.n))
    else:
        ys = [int(target)]
    for y in ys:
        rep = envelope_zeroset_audit(F, y)
        if not rep.ok():
            return AuditReport(
                kind=rep.kind,
                verdict=rep.verdict,
                value=rep.value,
                witnesses=rep.witnesses,
                constants={**rep.constants, "failed_at": y},
                window=rep.window,
                notes=rep.notes,
            )
    return AuditReport(
        kind="envelope-zeroset",
        verdict=VERDICT_PASS,
        value=len(ys),
        constants={"codomain_points_checked": len(ys)},
    )


def _composition_parts(inst: Instance):
    return inst.maps["F1"], inst.maps["F2"], inst.bimaps["G"]


def _run_promt(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F1, F2, G = _composition_parts(inst)
    base = _get_base(params, inst, 4)
    tau = _num(params, "tau")
    return proMT_audit(F1, F2, G, base, _get_window(params, inst), tau)


def _run_composition_stability(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F1, F2, G = _composition_parts(inst)
    base = _get_base(params, inst, 4)
    eps = _num(params, "eps")
    return composition_stability(F1, F2, G, base, eps)


def _run_mainresult(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F1, F2, G = _composition_parts(inst)
    base = _get_base(params, inst, 4)
    deltas = _get_deltas(params, inst)
    margin = _num(params, "margin", 0)
    tol = float(_num(params, "tol", 1e-9))
    return mainresult_audit(F1, F2, G, base, deltas, margin=margin, tol=tol)


def _run_rho0(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    """Measure the four hypothesis moduli and recompute the certified rate.

    This is the measurement half of the composed-regularity audit: the
    same windows, the same moduli, but no conclusion checking, so sweeps
    can chart how the certified rate moves with the window radii.
    """
    F1, F2, G = _composition_parts(inst)
    xb, y1b, y2b, zb = _get_base(params, inst, 4)
    d = _get_deltas(params, inst)
    rep_l = lip_at_scale(F2, (xb, y2b), ScaleWindow(d["delta1"], d["delta1"], INF))
    rep_eta = partial_moduli(
        G,
        (y1b, y2b, zb),
        ScaleWindow(d["delta2"], d["delta2"], INF, r_param=d["delta2"]),
        "lip-in-second",
    )
    rep_lam = partial_moduli(
        G,
        (y1b, y2b, zb),
        ScaleWindow(d["delta3"], d["delta3"], INF, r_param=d["delta3"]),
        "reg-in-first",
    )
    rep_m = reg_at_scale(F1, (xb, y1b), ScaleWindow(d["delta4"], d["delta4"], INF))
    constants: dict[str, Any] = {
        "m": rep_m.value,
        "l": rep_l.value,
        "lam": rep_lam.value,
        "eta": rep_eta.value,
        "deltas": d,
    }
    try:
        value = rho0(
            Rho0Inputs(m=rep_m.value, l=rep_l.value, lam=rep_lam.value, eta=rep_eta.value)
        )
    except (HypothesisViolation, ValueError) as exc:
        return AuditReport(
            kind="rho0",
            verdict=VERDICT_NOT_APPLICABLE,
            constants=constants,
            notes=(f"hypotheses fail at these windows: {exc}",),
        )
    constants["rho0"] = value
    return AuditReport(
        kind="rho0", verdict=VERDICT_PASS, value=value, constants=constants
    )


def _run_fixedpoint(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F1, F2 = inst.maps["F1"], inst.maps["F2"]
    base = _get_base(params, inst, 3)
    deltas = _get_deltas(params, inst)
    margin = _num(params, "margin", 0)
    return fixedpoint_audit(F1, F2, base, deltas, margin=margin, budget=budget)


def _sorted_sets(inst: Instance) -> list:
    return [S for _, S in sorted(inst.polyhedra.items())]


def _run_alliedness(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    sets = _sorted_sets(inst)
    base = _get_base(params, inst, sets[0].dim)
    r = _num(params, "r", inst.oracle_number("r", 1))
    cert = alliedness_certificate(sets, base, r, budget=budget)
    if cert.vacuous:
        verdict = VERDICT_VACUOUS
    else:
        verdict = VERDICT_PASS if cert.allied else VERDICT_FAIL
    witnesses = () if cert.counterexample is None else (cert.counterexample,)
    return AuditReport(
        kind="alliedness",
        verdict=verdict,
        value=cert.a,
        witnesses=witnesses,
        constants={
            "a": cert.a,
            "min_sum_norm": cert.min_sum_norm,
            "certified_a": cert.certified_a,
            "cones_per_set": cert.cones_per_set,
            "combos_checked": cert.combos_checked,
        },
    )


def _run_metric_inequality(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    sets = _sorted_sets(inst)
    base = _get_base(params, inst, sets[0].dim)
    tau = _num(params, "tau")
    r = _num(params, "r", inst.oracle_number("r", 1))
    step = _num(params, "grid_step", inst.oracle_number("grid_step", _REQUIRED))
    return metric_inequality_audit(sets, base, r, tau, step, budget=budget)


def _run_intersection_rule(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    sets = _sorted_sets(inst)
    base = _get_base(params, inst, sets[0].dim)
    eps = _num(params, "eps")
    r = _num(params, "r", inst.oracle_number("r", 1))
    step = params.get("grid_step", inst.oracle.get("grid_step"))
    step = parse_number(step) if step is not None else None
    return intersection_rule_audit(sets, base, r, eps, grid_step=step, budget=budget)


def _run_coderivative_estimate(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F = inst.polymaps["F"]
    base = _get_base(params, inst, F.dim_dom + F.dim_cod)
    which = params.get("which")
    if which is None:
        raise ScenarioError('audit parameter "which" is required')
    if "alpha" in params:
        alpha = parse_number(params["alpha"])
    else:
        key = "opnorm" if "aubin" in str(which) else "conorm"
        alpha = inst.oracle_number(key)
        if alpha is None:
            raise ScenarioError(
                f'audit needs "alpha" (no {key!r} recorded in the oracle)'
            )
    if "window" in params:
        window: Any = _window_from(params["window"], "params")
    else:
        window = _num(params, "radius", 1)
    split = params.get("split")
    split = int(split) if split is not None else None
    step = params.get("grid_step")
    step = parse_number(step) if step is not None else None
    return coderivative_estimate_audit(
        F, base, window, alpha, which, split=split, grid_step=step, budget=budget
    )


def _chain_parts(inst: Instance):
    return inst.polymaps["F1"], inst.polymaps["F2"], inst.polymaps["G"]


def _chain_base(inst: Instance, params: dict):
    F1, F2, G = _chain_parts(inst)
    length = F1.dim_dom + F1.dim_cod + F2.dim_cod + G.dim_cod
    return _get_base(params, inst, length)


def _run_dual_floor(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F1, F2, G = _chain_parts(inst)
    base = _chain_base(inst, params)
    r = _num(params, "r", 1)
    delta = _num(params, "delta")
    floor = dual_openness_floor(F1, F2, G, base, r, delta, budget=budget)
    if floor.value == INF:
        verdict = VERDICT_VACUOUS
    elif floor.value > 0:
        verdict = VERDICT_PASS
    else:
        verdict = VERDICT_FAIL
    notes = () if floor.diagnostic is None else (floor.diagnostic,)
    witnesses = () if floor.witness is None else (floor.witness,)
    return AuditReport(
        kind="dual-floor",
        verdict=verdict,
        value=floor.value,
        witnesses=witnesses,
        constants={
            "c": floor.value,
            "exact": floor.exact,
            "delta": floor.delta,
            "radius": floor.radius,
            "method": floor.method,
            "combos_checked": floor.combos_checked,
            "boundary_attained": floor.boundary_attained,
        },
        notes=notes,
    )


def _run_composite_openness(inst: Instance, params: dict, budget: int | None) -> AuditReport:
    F1, F2, G = _chain_parts(inst)
    base = _chain_base(inst, params)
    c = _num(params, "c")
    a = _num(params, "a")
    radius = _num(params, "radius")
    step = _num(params, "grid_step")
    return composite_openness_audit(
        F1, F2, G, base, c, a, radius, step, budget=budget
    )


# -- registry ------------------------------------------------------------

Runner = Callable[[Instance, dict, "int | None"], AuditReport]


@dataclass(frozen=True)
class AuditBinding:
    """One registry row: which kinds it accepts, what it can sweep."""

    name: str
    kinds: tuple[str, ...]
    runner: Runner
    sweep: tuple[str, ...] = ()


_WINDOW_SWEEP = ("r_dom", "r_cod", "eps")

AUDIT_REGISTRY: dict[str, AuditBinding] = {
    b.name: b
    for b in (
        AuditBinding("lop", ("setmap",), _run_modulus("lop"), _WINDOW_SWEEP),
        AuditBinding("reg", ("setmap",), _run_modulus("reg"), _WINDOW_SWEEP),
        AuditBinding("lip", ("setmap",), _run_modulus("lip"), _WINDOW_SWEEP),
        AuditBinding("link", ("setmap",), _run_link, _WINDOW_SWEEP),
        AuditBinding("error-bound", ("scalar-field",), _run_error_bound),
        AuditBinding("ekeland", ("scalar-field",), _run_ekeland),
        AuditBinding("envelope-zeroset", ("setmap",), _run_envelope_zeroset),
        AuditBinding("promt", ("composition",), _run_promt, _WINDOW_SWEEP),
        AuditBinding(
            "composition-stability", ("composition",), _run_composition_stability
        ),
        AuditBinding("mainresult", ("composition",), _run_mainresult, ("delta",)),
        AuditBinding("rho0", ("composition",), _run_rho0, ("delta",)),
        AuditBinding("fixedpoint", ("map-pair",), _run_fixedpoint, ("delta",)),
        AuditBinding("alliedness", ("polyhedral-sets",), _run_alliedness),
        AuditBinding(
            "metric-inequality", ("polyhedral-sets",), _run_metric_inequality
        ),
        AuditBinding(
            "intersection-rule", ("polyhedral-sets",), _run_intersection_rule
        ),
        AuditBinding(
            "coderivative-estimate",
            ("polyhedral-map",),
            _run_coderivative_estimate,
            ("r_dom", "r_cod"),
        ),
        AuditBinding("dual-floor", ("polyhedral-chain",), _run_dual_floor, ("delta",)),
        AuditBinding(
            "composite-openness", ("polyhedral-chain",), _run_composite_openness
        ),
    )
}


# -- scenario loading ----------------------------------------------------

@dataclass(frozen=True)
class AuditSpec:
    audit: str
    id: str
    params: dict = field(default_factory=dict)
    expect: str = VERDICT_PASS


@dataclass(frozen=True)
class Scenario:
    name: str
    instance: dict
    audits: tuple[AuditSpec, ...]
    root: Path


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ScenarioError('scenario needs a non-empty "name"')
    source = doc.get("instance")
    if not isinstance(source, dict) or ("file" in source) == ("generator" in source):
        raise ScenarioError(
            'scenario "instance" must carry exactly one of "file" or "generator"'
        )
    raw_audits = doc.get("audits")
    if not isinstance(raw_audits, list):
        raise ScenarioError('scenario needs an "audits" list')
    audits = []
    seen_ids = set()
    for i, entry in enumerate(raw_audits):
        if not isinstance(entry, dict) or "audit" not in entry:
            raise ScenarioError(f'audit #{i} must be an object with an "audit" name')
        audit = entry["audit"]
        if audit not in AUDIT_REGISTRY:
            raise ScenarioError(
                f"unknown audit {audit!r}; registry has {sorted(AUDIT_REGISTRY)}"
            )
        expect = entry.get("expect", VERDICT_PASS)
        if expect not in VERDICTS:
            raise ScenarioError(f"audit #{i}: unknown expected verdict {expect!r}")
        aid = entry.get("id", f"{i:02d}-{audit}")
        if not isinstance(aid, str) or not _ID_SHAPE.fullmatch(aid):
            # Ids name report files, so they must stay path-safe.
            raise ScenarioError(
                f"audit #{i}: id must match [A-Za-z0-9][A-Za-z0-9._-]*, got {aid!r}"
            )
        if aid in seen_ids:
            raise ScenarioError(f"duplicate audit id {aid!r}")
        seen_ids.add(aid)
        params = entry.get("params", {})
        if not isinstance(params, dict):
            raise ScenarioError(f"audit #{i}: params must be an object")
        audits.append(AuditSpec(audit=audit, id=aid, params=params, expect=expect))
    return Scenario(
        name=name, instance=source, audits=tuple(audits), root=p.resolve().parent
    )


def _resolve_instance(
    scenario: Scenario, budget: int | None, seed: int | None
) -> Instance:
    src = scenario.instance
    if "file" in src:
        path = Path(src["file"])
        if not path.is_absolute():
            path = scenario.root / path
        inst = load_instance(path)
        problems = validate_instance(inst)
        if problems:
            raise ScenarioError(f"invalid instance {path}: {'; '.join(problems)}")
        return inst
    gen = src["generator"]
    if not isinstance(gen, dict) or "family" not in gen:
        raise ScenarioError('generator spec needs a "family"')
    use_seed = seed if seed is not None else int(gen.get("seed", 0))
    try:
        spec = GeneratorSpec(
            family=gen["family"], seed=use_seed, params=gen.get("params", {})
        )
        return build_instance(spec, budget)
    except (ValueError, BudgetError) as exc:
        raise ScenarioError(f"cannot generate instance: {exc}") from exc


# -- run -----------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    exit_code: int
    summary: dict
    csv_text: str
    report_paths: tuple[Path, ...]


def _execute_audit(
    aspec: AuditSpec, inst: Instance, budget: int | None
) -> AuditReport:
    binding = AUDIT_REGISTRY[aspec.audit]
    if inst.kind not in binding.kinds:
        raise ScenarioError(
            f"audit {aspec.audit!r} applies to kinds {list(binding.kinds)}, "
            f"instance has kind {inst.kind!r}"
        )
    try:
        return binding.runner(inst, dict(aspec.params), budget)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, BudgetError, HypothesisViolation) as exc:
        raise ScenarioError(f"audit {aspec.id}: {exc}") from exc


SUMMARY_FIELDS = (
    "index",
    "id",
    "audit",
    "kind",
    "verdict",
    "expect",
    "matched",
    "value",
    "notes",
)


def _summary_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SUMMARY_FIELDS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row[k]) for k in SUMMARY_FIELDS})
    return buf.getvalue()


def _cell(value: Any) -> str:
    v = jsonable(value)
    if isinstance(v, (dict, list)):
        return json.dumps(v, sort_keys=True)
    if isinstance(v, bool):
        return str(v).lower()
    if v is None:
        return ""
    return str(v)


def run_scenario(
    scenario: Scenario,
    out_dir: str | Path | None = None,
    budget: int | None = None,
    seed: int | None = None,
) -> RunResult:
    """Execute every audit; write reports and a summary; return outcomes."""
    inst = _resolve_instance(scenario, budget, seed)
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)

    rows: list[dict] = []
    reports: list[tuple[AuditSpec, AuditReport]] = []
    paths: list[Path] = []
    for idx, aspec in enumerate(scenario.audits):
        report = _execute_audit(aspec, inst, budget)
        matched = report.verdict == aspec.expect
        rows.append(
            {
                "index": idx,
                "id": aspec.id,
                "audit": aspec.audit,
                "kind": report.kind,
                "verdict": report.verdict,
                "expect": aspec.expect,
                "matched": matched,
                "value": _cell(report.value),
                "notes": "; ".join(report.notes),
            }
        )
        reports.append((aspec, report))

    exit_code = 0 if all(r["matched"] for r in rows) else 1
    csv_text = _summary_csv(rows)
    summary = {
        "name": scenario.name,
        "instance": {
            "kind": inst.kind,
            "family": inst.family,
            "seed": inst.seed,
            "params": jsonable(inst.params),
        },
        "exit_code": exit_code,
        "audits": rows,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }

    if out is not None:
        for idx, (aspec, report) in enumerate(reports):
            doc = {
                "id": aspec.id,
                "audit": aspec.audit,
                "expect": aspec.expect,
                "matched": report.verdict == aspec.expect,
                "report": report.to_json(),
            }
            path = out / f"report-{idx:02d}-{aspec.id}.json"
            path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
            paths.append(path)
        (out / "summary.csv").write_text(csv_text)
        (out / "summary.json").write_text(
            json.dumps(summary, indent=2, sort_keys=True) + "\n"
        )
    return RunResult(
        exit_code=exit_code,
        summary=summary,
        csv_text=csv_text,
        report_paths=tuple(paths),
    )


# -- sweep ---------------------------------------------------------------

def _apply_sweep(aspec: AuditSpec, inst: Instance, parameter: str, value) -> AuditSpec:
    binding = AUDIT_REGISTRY[aspec.audit]
    if parameter not in binding.sweep:
        return aspec
    params = dict(aspec.params)
    if parameter == "delta":
        if aspec.audit == "dual-floor":
            params["delta"] = value
        else:
            params["deltas"] = {
                "delta1": value,
                "delta2": value,
                "delta3": value,
                "delta4": value,
            }
    else:
        # Start from the window the audit would otherwise use, then
        # override the single swept component.
        window = dict(params.get("window") or inst.oracle.get("window") or {})
        window.setdefault("r_dom", str(value))
        window.setdefault("r_cod", str(value))
        window.setdefault("eps", "inf")
        window[parameter] = str(value)
        params["window"] = window
    return AuditSpec(audit=aspec.audit, id=aspec.id, params=params, expect=aspec.expect)


def sweep_scenario(
    scenario: Scenario,
    parameter: str,
    values: list,
    out_dir: str | Path | None = None,
    budget: int | None = None,
    seed: int | None = None,
) -> tuple[int, str]:
    """Rerun the scenario once per value; emit one CSV row per value."""
    if parameter not in SWEEP_PARAMETERS:
        raise ScenarioError(
            f"sweep parameter must be one of {list(SWEEP_PARAMETERS)}"
        )
    applicable = [
        a for a in scenario.audits if parameter in AUDIT_REGISTRY[a.audit].sweep
    ]
    if scenario.audits and not applicable:
        raise ScenarioError(
            f"no audit in the scenario accepts the sweep parameter {parameter!r}"
        )
    inst = _resolve_instance(scenario, budget, seed)

    rows: list[dict[str, str]] = []
    all_matched = True
    columns: list[str] = ["parameter", "value"]
    seen = set(columns)
    for raw in values:
        value = parse_number(raw)
        row: dict[str, str] = {"parameter": parameter, "value": _cell(value)}
        for aspec in scenario.audits:
            swept = _apply_sweep(aspec, inst, parameter, value)
            report = _execute_audit(swept, inst, budget)
            if report.verdict != aspec.expect:
                all_matched = False
            prefix = aspec.id
            row[f"{prefix}.verdict"] = report.verdict
            row[f"{prefix}.value"] = _cell(report.value)
            for key in sorted(report.constants):
                row[f"{prefix}.{key}"] = _cell(report.constants[key])
        for key in row:
            if key not in seen:
                seen.add(key)
                columns.append(key)
        rows.append(row)

    buf = io.StringIO()
    writer = csv.DictWriter(
        buf, fieldnames=columns, lineterminator="\n", restval=""
    )
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    csv_text = buf.getvalue()
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.csv").write_text(csv_text)
    return (0 if all_matched else 1), csv_text
