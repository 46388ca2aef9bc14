"""Desk-scale laboratory for metric regularity of set-valued compositions."""

from .metric_core import (
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
from .moduli import (
    HypothesisViolation,
    Rho0Inputs,
    ScaleWindow,
    composition_stability,
    fixedpoint_audit,
    link_audit,
    lip_at_scale,
    lop_at_scale,
    lsc_envelope,
    mainresult_audit,
    partial_moduli,
    phi_R,
    proMT_audit,
    reg_at_scale,
    rho0,
    scale_sweep,
    stability_sufficient_usc,
)
from .coderiv import (
    AlliednessCertificate,
    Cone,
    DualOpennessFloor,
    PolyMap,
    Polyhedron,
    alliedness_certificate,
    coderivative,
    coderivative_estimate_audit,
    composite_openness_audit,
    dual_openness_floor,
    frechet_normal_cone,
    intersection_rule_audit,
    metric_inequality_audit,
)
from .lab import (
    GeneratorSpec,
    Instance,
    Scenario,
    build_instance,
    generate,
    load_instance,
    load_scenario,
    run_scenario,
    sweep_scenario,
    validate_instance,
)
from .report import AuditReport, ModulusReport
from .setmap import (
    BiParamSetMap,
    SetMap,
    build_R,
    compose_H,
    image,
    load_bimap,
    load_setmap,
    pair,
)
from .varprinciples import (
    EvpCertificate,
    ScalarField,
    ekeland,
    error_bound_audit,
    slope_quantity,
    sublevel_set,
)

__version__ = "0.1.0"
