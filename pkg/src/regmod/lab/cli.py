"""Command-line entry point.

Four verbs: ``generate`` writes a seeded instance file, ``validate``
re-checks instance files against the module validators, ``run``
executes a scenario and writes its reports, ``sweep`` charts one window
parameter across a list of values.  Exit codes follow the runner
contract: 0 all verdicts as expected, 1 an audited inequality failed
unexpectedly, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from ..metric_core import BudgetError
from .generators import FAMILIES, GeneratorSpec, generate
from .instances import InstanceError, load_instance, validate_instance
from .scenarios import (
    SWEEP_PARAMETERS,
    ScenarioError,
    load_scenario,
    run_scenario,
    sweep_scenario,
)

__all__ = ["main"]

USAGE_ERROR = 2


def _budget(args) -> int | None:
    """--budget beats the REGMOD_BUDGET environment cap."""
    if args.budget is not None:
        return args.budget
    raw = os.environ.get("REGMOD_BUDGET")
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError as exc:
        raise ScenarioError(f"REGMOD_BUDGET must be an integer, got {raw!r}") from exc


def _parse_params(pairs: list[str]) -> dict:
    params = {}
    for pair in pairs:
        if "=" not in pair:
            raise ScenarioError(f"--param needs KEY=VALUE, got {pair!r}")
        key, _, raw = pair.partition("=")
        try:
            params[key] = json.loads(raw)
        except json.JSONDecodeError:
            params[key] = raw
    return params


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regmod",
        description="Audit metric regularity of set-valued compositions.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    gen = sub.add_parser("generate", help="write one seeded instance file")
    gen.add_argument("--family", required=True, choices=sorted(FAMILIES))
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out-dir", default=".")
    gen.add_argument("--budget", type=int, default=None)
    gen.add_argument(
        "--param",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="family size parameter; repeatable",
    )

    val = sub.add_parser("validate", help="re-check instance files")
    val.add_argument("files", nargs="+")

    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("scenario")
    run.add_argument("--out-dir", default=None)
    run.add_argument("--budget", type=int, default=None)
    run.add_argument("--seed", type=int, default=None, help="override generator seed")
    run.add_argument("--format", choices=("json", "csv"), default="json")

    swp = sub.add_parser("sweep", help="rerun audits over a parameter range")
    swp.add_argument("scenario")
    swp.add_argument("--parameter", required=True, choices=SWEEP_PARAMETERS)
    swp.add_argument(
        "--values", required=True, help="comma-separated list, e.g. 1,1/2,1/4"
    )
    swp.add_argument("--out-dir", default=None)
    swp.add_argument("--budget", type=int, default=None)
    swp.add_argument("--seed", type=int, default=None, help="override generator seed")
    swp.add_argument("--format", choices=("json", "csv"), default="csv")

    return parser


def _cmd_generate(args) -> int:
    spec = GeneratorSpec(
        family=args.family, seed=args.seed, params=_parse_params(args.param)
    )
    path = generate(spec, args.out_dir, budget=_budget(args))
    print(path)
    return 0


def _cmd_validate(args) -> int:
    bad = 0
    for name in args.files:
        try:
            inst = load_instance(name)
            problems = validate_instance(inst)
        except InstanceError as exc:
            print(f"invalid {name}: {exc}")
            bad += 1
            continue
        if problems:
            print(f"invalid {name}: {'; '.join(problems)}")
            bad += 1
        else:
            print(f"ok {name} ({inst.kind})")
    return USAGE_ERROR if bad else 0


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    result = run_scenario(
        scenario, out_dir=args.out_dir, budget=_budget(args), seed=args.seed
    )
    if args.format == "json":
        print(json.dumps(result.summary, indent=2, sort_keys=True))
    else:
        sys.stdout.write(result.csv_text)
    return result.exit_code


def _cmd_sweep(args) -> int:
    scenario = load_scenario(args.scenario)
    values = [v for v in args.values.split(",") if v.strip()]
    code, csv_text = sweep_scenario(
        scenario,
        args.parameter,
        values,
        out_dir=args.out_dir,
        budget=_budget(args),
        seed=args.seed,
    )
    if args.format == "json":
        reader = csv.DictReader(io.StringIO(csv_text))
        print(json.dumps(list(reader), indent=2, sort_keys=True))
    else:
        sys.stdout.write(csv_text)
    return code


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handler = {
        "generate": _cmd_generate,
        "validate": _cmd_validate,
        "run": _cmd_run,
        "sweep": _cmd_sweep,
    }[args.verb]
    try:
        return handler(args)
    except (ScenarioError, InstanceError, BudgetError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
