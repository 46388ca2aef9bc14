"""Instance generators, scenario runner and report emission.

Everything the command line exposes lives here: seeded generator
families that emit instance files, the audit registry that binds every
checker in the package to a name, and the run/sweep engines that turn a
scenario file into JSON reports and CSV summaries.
"""

from __future__ import annotations

from .generators import (
    FAMILIES,
    GeneratorSpec,
    build_instance,
    generate,
)
from .instances import (
    Instance,
    InstanceError,
    instance_to_json,
    load_instance,
    validate_instance,
)
from .scenarios import (
    AUDIT_REGISTRY,
    AuditBinding,
    Scenario,
    ScenarioError,
    SWEEP_PARAMETERS,
    load_scenario,
    run_scenario,
    sweep_scenario,
)

__all__ = [
    "AUDIT_REGISTRY",
    "AuditBinding",
    "FAMILIES",
    "GeneratorSpec",
    "Instance",
    "InstanceError",
    "SWEEP_PARAMETERS",
    "Scenario",
    "ScenarioError",
    "build_instance",
    "generate",
    "instance_to_json",
    "load_instance",
    "load_scenario",
    "run_scenario",
    "sweep_scenario",
]
