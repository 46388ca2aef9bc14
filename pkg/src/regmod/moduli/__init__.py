"""Regularity moduli at explicit scales, envelopes, composition audits."""

from __future__ import annotations

from .composition import (
    composition_stability,
    fixedpoint_audit,
    mainresult_audit,
    proMT_audit,
    stability_sufficient_usc,
)
from .envelopes import (
    EnvelopeQuery,
    envelope_zeroset_audit,
    isolation_scale,
    lsc_envelope,
    phi_R,
)
from .scales import (
    HypothesisViolation,
    Rho0Inputs,
    ScaleWindow,
    approx_eq,
    approx_le,
    exact_div,
    link_audit,
    lip_at_scale,
    lop_at_scale,
    partial_moduli,
    reg_at_scale,
    rho0,
    rho_grid,
    scale_sweep,
)

__all__ = [
    "HypothesisViolation",
    "Rho0Inputs",
    "ScaleWindow",
    "EnvelopeQuery",
    "approx_eq",
    "approx_le",
    "composition_stability",
    "envelope_zeroset_audit",
    "exact_div",
    "fixedpoint_audit",
    "isolation_scale",
    "link_audit",
    "lip_at_scale",
    "lop_at_scale",
    "lsc_envelope",
    "mainresult_audit",
    "partial_moduli",
    "phi_R",
    "proMT_audit",
    "reg_at_scale",
    "rho0",
    "rho_grid",
    "scale_sweep",
    "stability_sufficient_usc",
]
