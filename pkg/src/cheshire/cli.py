"""Command-line front end: run scenarios, sweep coupling, emit tables.

Output is CSV (RFC-4180-style quoting, fixed column order, header always
emitted) or a JSON array of the same records; the two encodings carry
identical values. Numbers are printed with 15 significant digits and every
row is self-describing. All randomness flows from ``--seed`` (default 0, not
entropy), so byte-identical reruns come for free.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .errors import CheshireError, ParseError, ValidationError
from .pointer import PointerGrid
from .scenario import (
    BUILTIN_SCENARIOS,
    Scenario,
    ScenarioResult,
    load_builtin,
    parse_scenario,
    run_scenario,
)

RUN_COLUMNS = (
    "scenario",
    "mode",
    "observable",
    "weak_value_re",
    "weak_value_im",
    "estimate",
    "std_error",
    "postselection_probability",
    "acceptance_rate",
    "g",
    "sigma",
    "grid_points",
    "seed",
    "samples",
)

SWEEP_COLUMNS = (
    "scenario",
    "observable",
    "g",
    "estimate",
    "abs_error",
    "sigma",
    "grid_points",
)


class UsageError(Exception):
    """Bad flag combination or unresolvable input; exits with status 2."""


def _normalize(value: float) -> float:
    """Round through 15 significant digits so CSV and JSON agree exactly."""
    return float(f"{value:.15g}")


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.15g}"
    return str(value)


def _emit(records: list[dict], columns: tuple[str, ...], fmt: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(records, indent=2) + "\n")
        return
    writer = csv.DictWriter(sys.stdout, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow({key: _cell(value) for key, value in record.items()})


def _resolve_scenario(ref: str) -> Scenario:
    if ref in BUILTIN_SCENARIOS:
        return load_builtin(ref)
    path = Path(ref)
    if not path.exists():
        raise UsageError(f"scenario {ref!r} is neither a built-in name nor an existing file")
    return parse_scenario(path.read_text(encoding="utf-8"), name=path.stem)


def _grid_from_args(scenario: Scenario, args) -> PointerGrid:
    base = scenario.pointer.grid
    sigma = args.sigma if args.sigma is not None else base.sigma
    points = args.grid_points if args.grid_points is not None else base.points
    half_width = max(base.half_width, 6.0 * sigma)
    return PointerGrid(half_width=half_width, points=points, sigma=sigma)


def _run_records(result: ScenarioResult, grid: PointerGrid) -> list[dict]:
    records = []
    for outcome in result.outcomes:
        pointerish = result.mode in ("pointer", "montecarlo")
        records.append(
            {
                "scenario": result.scenario,
                "mode": result.mode,
                "observable": outcome.name,
                "weak_value_re": _normalize(outcome.exact.real),
                "weak_value_im": _normalize(outcome.exact.imag),
                "estimate": None if outcome.estimate is None else _normalize(outcome.estimate),
                "std_error": None if outcome.std_error is None else _normalize(outcome.std_error),
                "postselection_probability": _normalize(
                    result.report.postselection_probability
                    if outcome.success_probability is None
                    else outcome.success_probability
                ),
                "acceptance_rate": (
                    None if outcome.acceptance_rate is None else _normalize(outcome.acceptance_rate)
                ),
                "g": _normalize(result.g) if pointerish else None,
                "sigma": _normalize(grid.sigma) if pointerish else None,
                "grid_points": grid.points if pointerish else None,
                "seed": result.seed,
                "samples": result.samples,
            }
        )
    return records


def cmd_run(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    if args.mode != "montecarlo":
        if args.samples is not None:
            raise UsageError("--samples only applies to --mode montecarlo")
        if args.seed is not None:
            raise UsageError("--seed only applies to --mode montecarlo")
    if args.mode == "exact" and (
        args.g is not None or args.sigma is not None or args.grid_points is not None
    ):
        raise UsageError("--g/--sigma/--grid-points do not apply to --mode exact")
    if args.mode == "montecarlo" and args.samples is None:
        raise UsageError("--mode montecarlo needs --samples")

    grid = _grid_from_args(scenario, args)
    result = run_scenario(
        scenario,
        mode=args.mode,
        g=args.g,
        seed=args.seed if args.seed is not None else 0,
        samples=args.samples,
        grid=grid if args.mode != "exact" else None,
    )
    _emit(_run_records(result, grid), RUN_COLUMNS, args.format)
    return 0


def cmd_sweep(args) -> int:
    scenario = _resolve_scenario(args.scenario)
    names = [name for name, _ in scenario.operator_items()]
    if args.observable not in names:
        raise UsageError(
            f"unknown observable {args.observable!r}; scenario has {', '.join(names)}"
        )
    g_values = [part for part in args.g.split(",") if part.strip()]
    if not g_values:
        raise UsageError("--g needs a nonempty comma-separated list of couplings")
    try:
        g_list = [float(part) for part in g_values]
    except ValueError as exc:
        raise UsageError(f"bad coupling list {args.g!r}: {exc}") from None

    grid = _grid_from_args(scenario, args)
    records = []
    for g in g_list:
        result = run_scenario(scenario, mode="pointer", g=g, grid=grid)
        outcome = result.outcome(args.observable)
        records.append(
            {
                "scenario": result.scenario,
                "observable": outcome.name,
                "g": _normalize(g),
                "estimate": _normalize(outcome.estimate),
                "abs_error": _normalize(abs(outcome.estimate - outcome.exact.real)),
                "sigma": _normalize(grid.sigma),
                "grid_points": grid.points,
            }
        )
    _emit(records, SWEEP_COLUMNS, args.format)
    return 0


def cmd_montecarlo(args) -> int:
    if args.samples < 1:
        raise UsageError("--samples must be at least 1")
    scenario = _resolve_scenario(args.scenario)
    grid = _grid_from_args(scenario, args)
    result = run_scenario(
        scenario,
        mode="montecarlo",
        g=args.g,
        seed=args.seed,
        samples=args.samples,
        grid=grid,
    )
    _emit(_run_records(result, grid), RUN_COLUMNS, args.format)
    return 0


def _add_common_flags(parser, include_seed=True):
    parser.add_argument("scenario", help="built-in name (single-cat, grin-swap) or .qcc path")
    parser.add_argument("--g", dest="g", default=None, help="coupling strength")
    parser.add_argument("--sigma", type=float, default=None, help="pointer spread")
    parser.add_argument("--grid-points", type=int, default=None, help="pointer grid points")
    parser.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="output encoding"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cheshire",
        description="Weak-value simulations for pre/postselected interferometers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="evaluate a scenario in one mode")
    _add_common_flags(run_p)
    run_p.add_argument("--mode", choices=("exact", "pointer", "montecarlo"), default="exact")
    run_p.add_argument("--seed", type=int, default=None, help="base seed (montecarlo)")
    run_p.add_argument("--samples", type=int, default=None, help="trial count (montecarlo)")
    run_p.set_defaults(func=cmd_run, g_is_float=True)

    sweep_p = sub.add_parser("sweep", help="pointer-mode error versus coupling strength")
    _add_common_flags(sweep_p)
    sweep_p.add_argument("--observable", required=True, help="observable name to sweep")
    sweep_p.set_defaults(func=cmd_sweep, g_is_float=False)

    mc_p = sub.add_parser("montecarlo", help="sampled weak-value estimates")
    _add_common_flags(mc_p)
    mc_p.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    mc_p.add_argument("--samples", type=int, required=True, help="trial count")
    mc_p.set_defaults(func=cmd_montecarlo, g_is_float=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "g_is_float", False) and args.g is not None:
        try:
            args.g = float(args.g)
        except ValueError:
            print(f"error: bad value for --g: {args.g!r}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (UsageError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CheshireError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def entry_point() -> None:
    raise SystemExit(main())
