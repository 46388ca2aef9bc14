"""Instance files: one self-describing JSON document per experiment input.

An instance bundles the objects an audit needs (metric spaces, set-valued
maps, scalar fields, polyhedra, polyhedral maps) together with a base
point, the generator provenance and optional oracle metadata.  The
``kind`` field tells the audit registry which bindings apply.

Numbers inside the JSON are written the way the report module writes
them: Fractions as "p/q" strings, infinities as "inf", so a round trip
through disk loses nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from ..coderiv import (
    PolyMap,
    Polyhedron,
    load_polyhedron,
    load_polymap,
    polyhedron_to_json,
    polymap_to_json,
)
from ..metric_core import (
    MetricSpace,
    load_space,
    parse_number,
    space_to_json,
    validate_metric,
)
from ..report import jsonable
from ..setmap import (
    BiParamSetMap,
    SetMap,
    bimap_to_json,
    load_bimap,
    load_setmap,
    setmap_to_json,
)
from ..varprinciples import ScalarField, field_to_json, load_field

__all__ = [
    "Instance",
    "InstanceError",
    "KINDS",
    "instance_to_json",
    "load_instance",
    "validate_instance",
]

FORMAT_TAG = "regmod-instance"

KINDS = (
    "metric-space",
    "setmap",
    "scalar-field",
    "composition",
    "map-pair",
    "polyhedral-map",
    "polyhedral-sets",
    "polyhedral-chain",
)


class InstanceError(ValueError):
    """Raised when an instance file is malformed or fails validation."""


@dataclass(frozen=True)
class Instance:
    """In-memory form of one instance file."""

    kind: str
    family: str = ""
    seed: int = 0
    params: dict = field(default_factory=dict)
    spaces: dict[str, MetricSpace] = field(default_factory=dict)
    maps: dict[str, SetMap] = field(default_factory=dict)
    bimaps: dict[str, BiParamSetMap] = field(default_factory=dict)
    fields: dict[str, ScalarField] = field(default_factory=dict)
    polymaps: dict[str, PolyMap] = field(default_factory=dict)
    polyhedra: dict[str, Polyhedron] = field(default_factory=dict)
    base: tuple | None = None
    oracle: dict = field(default_factory=dict)

    def oracle_number(self, key: str, default: Any = None) -> Any:
        if key not in self.oracle:
            return default
        return parse_number(self.oracle[key])


def instance_to_json(inst: Instance) -> dict:
    """Serialize, reusing the per-type writers so formats stay aligned."""
    doc: dict[str, Any] = {
        "format": FORMAT_TAG,
        "kind": inst.kind,
        "family": inst.family,
        "seed": inst.seed,
        "params": jsonable(inst.params),
    }
    if inst.spaces:
        doc["spaces"] = {k: space_to_json(v) for k, v in sorted(inst.spaces.items())}
    if inst.maps:
        doc["maps"] = {
            k: setmap_to_json(v, *_space_refs(inst, v.dom, v.cod))
            for k, v in sorted(inst.maps.items())
        }
    if inst.bimaps:
        doc["bimaps"] = {
            k: bimap_to_json(v, *_space_refs(inst, v.dom1, v.dom2, v.cod))
            for k, v in sorted(inst.bimaps.items())
        }
    if inst.fields:
        doc["fields"] = {
            k: {"space": _space_refs(inst, v.space)[0], "values": jsonable(list(v.values))}
            for k, v in sorted(inst.fields.items())
        }
    if inst.polymaps:
        doc["polymaps"] = {k: polymap_to_json(v) for k, v in sorted(inst.polymaps.items())}
    if inst.polyhedra:
        doc["polyhedra"] = {
            k: polyhedron_to_json(v) for k, v in sorted(inst.polyhedra.items())
        }
    if inst.base is not None:
        doc["base"] = jsonable(inst.base)
    if inst.oracle:
        doc["oracle"] = jsonable(inst.oracle)
    return doc


def _space_refs(inst: Instance, *spaces: MetricSpace) -> list[str]:
    refs = []
    for sp in spaces:
        for name, known in inst.spaces.items():
            if known is sp:
                refs.append(name)
                break
        else:
            raise InstanceError("map refers to a space missing from the instance")
    return refs


def _base_from_json(raw: Any) -> tuple:
    if not isinstance(raw, list):
        raise InstanceError("base must be a list")
    out = []
    for v in raw:
        out.append(v if isinstance(v, int) else parse_number(v))
    return tuple(out)


def load_instance(source: dict | str | Path) -> Instance:
    """Read an instance document from a path or an already-parsed dict."""
    if isinstance(source, (str, Path)):
        try:
            text = Path(source).read_text()
        except OSError as exc:
            raise InstanceError(f"cannot read instance file: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"instance file is not valid JSON: {exc}") from exc
    else:
        doc = source
    if not isinstance(doc, dict):
        raise InstanceError("instance document must be a JSON object")
    if doc.get("format") != FORMAT_TAG:
        raise InstanceError(f'missing or wrong "format" tag (want "{FORMAT_TAG}")')
    kind = doc.get("kind")
    if kind not in KINDS:
        raise InstanceError(f"unknown instance kind: {kind!r}")

    try:
        spaces = {
            name: load_space(sp) for name, sp in (doc.get("spaces") or {}).items()
        }
        maps = {
            name: load_setmap(obj, spaces)
            for name, obj in (doc.get("maps") or {}).items()
        }
        bimaps = {
            name: load_bimap(obj, spaces)
            for name, obj in (doc.get("bimaps") or {}).items()
        }
        fields = {}
        for name, obj in (doc.get("fields") or {}).items():
            ref = obj.get("space")
            space = spaces[ref] if isinstance(ref, str) else None
            payload = obj if space is None else {"values": obj["values"]}
            fields[name] = load_field(payload, space)
        polymaps = {
            name: load_polymap(obj)
            for name, obj in (doc.get("polymaps") or {}).items()
        }
        polyhedra = {
            name: load_polyhedron(obj)
            for name, obj in (doc.get("polyhedra") or {}).items()
        }
    except InstanceError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceError(f"bad instance payload: {exc}") from exc

    base = None
    if "base" in doc:
        base = _base_from_json(doc["base"])

    seed = doc.get("seed", 0)
    if not isinstance(seed, int):
        raise InstanceError("seed must be an integer")

    return Instance(
        kind=kind,
        family=doc.get("family", ""),
        seed=seed,
        params=doc.get("params") or {},
        spaces=spaces,
        maps=maps,
        bimaps=bimaps,
        fields=fields,
        polymaps=polymaps,
        polyhedra=polyhedra,
        base=base,
        oracle=doc.get("oracle") or {},
    )


def _check_setmap(name: str, F: SetMap, problems: list[str]) -> None:
    if not F.graph:
        problems.append(f"map {name} has an empty graph")
    for x, y in F.graph:
        if not (0 <= x < F.dom.n and 0 <= y < F.cod.n):
            problems.append(f"map {name} has out-of-range pair ({x}, {y})")
            return


def validate_instance(inst: Instance) -> list[str]:
    """Run every module validator that applies; return the problems found.

    An empty list means the instance is fit to audit.  Metric axioms are
    re-checked from scratch, so a corrupted distance matrix is reported
    here rather than deep inside an enumeration.
    """
    problems: list[str] = []
    for name, sp in sorted(inst.spaces.items()):
        rep = validate_metric(sp)
        if not rep.ok():
            problems.append(f"space {name}: {rep.verdict}: {rep.notes}")
    for name, F in sorted(inst.maps.items()):
        _check_setmap(name, F, problems)
    for name, G in sorted(inst.bimaps.items()):
        if not G.graph:
            problems.append(f"bimap {name} has an empty graph")
    for name, f in sorted(inst.fields.items()):
        if len(f.values) != f.space.n:
            problems.append(f"field {name} has {len(f.values)} values on {f.space.n} points")
    for name, S in sorted(inst.polyhedra.items()):
        if S.is_empty():
            problems.append(f"polyhedron {name} is empty")

    checker = _KIND_CHECKS.get(inst.kind)
    if checker is not None:
        checker(inst, problems)
    return problems


def _need(inst: Instance, problems: list[str], **sections: tuple[str, ...]) -> bool:
    ok = True
    for section, names in sections.items():
        have = getattr(inst, section)
        for name in names:
            if name not in have:
                problems.append(f'kind "{inst.kind}" needs {section}[{name!r}]')
                ok = False
    return ok


def _check_base_len(inst: Instance, problems: list[str], length: int) -> bool:
    if inst.base is None or len(inst.base) != length:
        problems.append(f'kind "{inst.kind}" needs a base of length {length}')
        return False
    return True


def _check_kind_setmap(inst: Instance, problems: list[str]) -> None:
    if not _need(inst, problems, maps=("F",)):
        return
    F = inst.maps["F"]
    if _check_base_len(inst, problems, 2):
        if tuple(inst.base) not in F.graph:
            problems.append("base pair is not on the graph of F")


def _check_kind_scalar_field(inst: Instance, problems: list[str]) -> None:
    _need(inst, problems, fields=("f",))


def _check_kind_composition(inst: Instance, problems: list[str]) -> None:
    if not _need(inst, problems, maps=("F1", "F2"), bimaps=("G",)):
        return
    F1, F2, G = inst.maps["F1"], inst.maps["F2"], inst.bimaps["G"]
    if F1.dom is not F2.dom:
        problems.append("F1 and F2 must share a domain space")
    if G.dom1 is not F1.cod or G.dom2 is not F2.cod:
        problems.append("G must consume the codomains of F1 and F2")
    if _check_base_len(inst, problems, 4):
        xb, y1b, y2b, zb = inst.base
        if (xb, y1b) not in F1.graph:
            problems.append("base (x, y1) is not on the graph of F1")
        if (xb, y2b) not in F2.graph:
            problems.append("base (x, y2) is not on the graph of F2")
        if (y1b, y2b, zb) not in G.graph:
            problems.append("base (y1, y2, z) is not on the graph of G")


def _check_kind_map_pair(inst: Instance, problems: list[str]) -> None:
    if not _need(inst, problems, maps=("F1", "F2")):
        return
    F1, F2 = inst.maps["F1"], inst.maps["F2"]
    if F1.dom is not F2.dom or F1.cod is not F2.cod:
        problems.append("a map pair must share both spaces")
    if _check_base_len(inst, problems, 3):
        xb, y1b, y2b = inst.base
        if (xb, y1b) not in F1.graph:
            problems.append("base (x, y1) is not on the graph of F1")
        if (xb, y2b) not in F2.graph:
            problems.append("base (x, y2) is not on the graph of F2")
        if y1b == y2b:
            problems.append("map-pair base needs distinct codomain points")


def _check_kind_polyhedral_map(inst: Instance, problems: list[str]) -> None:
    if not _need(inst, problems, polymaps=("F",)):
        return
    F = inst.polymaps["F"]
    if _check_base_len(inst, problems, F.dim_dom + F.dim_cod):
        if not F.graph.contains(inst.base):
            problems.append("base point is not on the polyhedral graph")


def _check_kind_polyhedral_sets(inst: Instance, problems: list[str]) -> None:
    if not inst.polyhedra:
        problems.append('kind "polyhedral-sets" needs at least one polyhedron')
        return
    dims = {S.dim for S in inst.polyhedra.values()}
    if len(dims) != 1:
        problems.append("all polyhedra must live in one ambient dimension")
        return
    (dim,) = dims
    if _check_base_len(inst, problems, dim):
        for name, S in sorted(inst.polyhedra.items()):
            if not S.contains(inst.base):
                problems.append(f"base point is outside polyhedron {name}")


def _check_kind_polyhedral_chain(inst: Instance, problems: list[str]) -> None:
    if not _need(inst, problems, polymaps=("F1", "F2", "G")):
        return
    F1, F2, G = inst.polymaps["F1"], inst.polymaps["F2"], inst.polymaps["G"]
    if F2.dim_dom != F1.dim_dom:
        problems.append("F1 and F2 must share a domain dimension")
    if G.dim_dom != F1.dim_cod + F2.dim_cod:
        problems.append("G must consume the concatenated codomains of F1 and F2")
    length = F1.dim_dom + F1.dim_cod + F2.dim_cod + G.dim_cod
    if _check_base_len(inst, problems, length):
        dx, d1, d2 = F1.dim_dom, F1.dim_cod, F2.dim_cod
        xb = inst.base[:dx]
        y1b = inst.base[dx : dx + d1]
        y2b = inst.base[dx + d1 : dx + d1 + d2]
        zb = inst.base[dx + d1 + d2 :]
        if not F1.graph.contains(xb + y1b):
            problems.append("base (x, y1) is not on the graph of F1")
        if not F2.graph.contains(xb + y2b):
            problems.append("base (x, y2) is not on the graph of F2")
        if not G.graph.contains(y1b + y2b + zb):
            problems.append("base (y1, y2, z) is not on the graph of G")


_KIND_CHECKS = {
    "setmap": _check_kind_setmap,
    "scalar-field": _check_kind_scalar_field,
    "composition": _check_kind_composition,
    "map-pair": _check_kind_map_pair,
    "polyhedral-map": _check_kind_polyhedral_map,
    "polyhedral-sets": _check_kind_polyhedral_sets,
    "polyhedral-chain": _check_kind_polyhedral_chain,
}
