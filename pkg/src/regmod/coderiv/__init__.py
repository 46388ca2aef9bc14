"""Polyhedral normal cones, coderivatives, and dual-space audits on R^n."""

from __future__ import annotations

from .linalg_exact import (
    LpResult,
    QpResult,
    dot,
    feasible_point,
    frac_mat,
    frac_vec,
    linprog_exact,
    mat_vec,
    min_norm_point,
    norm_sq,
    quadratic_min,
    rank,
    solve_affine,
)
from .conditions import (
    DualOpennessFloor,
    coderivative_estimate_audit,
    composite_openness_audit,
    dual_openness_floor,
    freeze_domain_coords,
)
from .intersections import (
    AlliednessCertificate,
    alliedness_certificate,
    ball_grid,
    box_grid,
    intersection_rule_audit,
    metric_inequality_audit,
)
from .polyhedra import (
    Cone,
    CoderivativeSlice,
    FaceInfo,
    PolyMap,
    Polyhedron,
    affine_polymap,
    coderivative,
    cone_to_json,
    constant_polymap,
    eps_normal_test,
    faces_within,
    frechet_normal_cone,
    intersect_polyhedra,
    linear_polymap,
    load_cone,
    load_polyhedron,
    load_polymap,
    polyhedron_to_json,
    polymap_to_json,
    tangential_part_sq,
)

__all__ = [
    "AlliednessCertificate",
    "CoderivativeSlice",
    "Cone",
    "DualOpennessFloor",
    "FaceInfo",
    "LpResult",
    "PolyMap",
    "Polyhedron",
    "QpResult",
    "affine_polymap",
    "alliedness_certificate",
    "ball_grid",
    "box_grid",
    "coderivative",
    "coderivative_estimate_audit",
    "composite_openness_audit",
    "cone_to_json",
    "constant_polymap",
    "dot",
    "dual_openness_floor",
    "eps_normal_test",
    "faces_within",
    "feasible_point",
    "frac_mat",
    "frac_vec",
    "frechet_normal_cone",
    "freeze_domain_coords",
    "intersect_polyhedra",
    "intersection_rule_audit",
    "linear_polymap",
    "linprog_exact",
    "load_cone",
    "load_polyhedron",
    "load_polymap",
    "mat_vec",
    "metric_inequality_audit",
    "min_norm_point",
    "norm_sq",
    "polyhedron_to_json",
    "polymap_to_json",
    "quadratic_min",
    "rank",
    "solve_affine",
    "tangential_part_sq",
]
