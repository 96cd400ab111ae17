"""Command-line entry: ``python -m linswim <command>``.

Commands::

    run <config> [<config> ...] [--jobs N] [--output-dir DIR]
    verdict <path.csv> [--circle] [--base-point S] [--bound K]
    list-scenarios
    export-mesh <config> [--output PATH]

``<config>`` is a TOML file or the name of a built-in scenario. The output
directory defaults to the scenario's own and can be overridden with the
``LINSWIM_OUTPUT_DIR`` environment variable or ``--output-dir``.

Exit status: 0 success, 1 runtime error, 2 invalid configuration,
3 the run stopped on collision.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .cover import lift, read_path_csv, verdict
from .geometry import export_mesh
from .scenarios import (
    EXIT_COLLISION,
    EXIT_CONFIG,
    EXIT_ERROR,
    EXIT_OK,
    OUTPUT_ENV,
    ConfigError,
    list_scenarios,
    load_scenario,
    run,
    scenario_mesh,
)


def _output_dir(arg: str | None, fallback: str) -> Path:
    return Path(arg or os.environ.get(OUTPUT_ENV) or fallback)


def _run_one(config: str, output_dir: str | None) -> tuple[int, str]:
    try:
        sc = load_scenario(config)
    except ConfigError as exc:
        return EXIT_CONFIG, f"{config}: invalid configuration\n" + "".join(f"  {k}: {m}\n" for k, m in exc.errors)
    try:
        res = run(sc, _output_dir(output_dir, sc.output_dir))
    except Exception as exc:  # noqa: BLE001
        return EXIT_ERROR, f"{config}: {type(exc).__name__}: {exc}\n"
    lines = [f"{sc.name}: status {res.trajectory.status}, {res.summary['steps']} steps"]
    lines += [f"  {kind}: {path}" for kind, path in res.files.items()]
    return res.exit_code, "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    configs = args.configs
    if args.jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_run_one, configs, [args.output_dir] * len(configs)))
    else:
        results = [_run_one(s, args.output_dir) for s in configs]
    for status, text in results:
        (sys.stdout if status in (EXIT_OK, EXIT_COLLISION) else sys.stderr).write(text)
    codes = {status for status, _ in results}
    failures = codes & {EXIT_ERROR, EXIT_CONFIG}
    if failures:
        return max(failures)
    return EXIT_COLLISION if EXIT_COLLISION in codes else EXIT_OK


def cmd_verdict(args) -> int:
    try:
        t, s = read_path_csv(args.path)
        lp = lift(t, s, args.base_point, circle=args.circle)
    except (OSError, ValueError) as exc:
        sys.stderr.write(f"{args.path}: {exc}\n")
        return EXIT_ERROR
    sys.stdout.write(verdict(lp, args.bound, tol=args.tol).report())
    return EXIT_OK


def cmd_list(args) -> int:
    for name, description in list_scenarios():
        sys.stdout.write(f"{name}\t{description}\n")
    return EXIT_OK


def cmd_export_mesh(args) -> int:
    try:
        sc = load_scenario(args.config)
        mesh = scenario_mesh(sc)
    except ConfigError as exc:
        sys.stderr.write("invalid configuration\n" + "".join(f"  {k}: {m}\n" for k, m in exc.errors))
        return EXIT_CONFIG
    except ValueError as exc:
        sys.stderr.write(f"{args.config}: {exc}\n")
        return EXIT_ERROR
    path = Path(args.output) if args.output else _output_dir(None, sc.output_dir) / f"{sc.name}.mesh.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    sys.stdout.write(f"{export_mesh(mesh, path)}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="linswim", description="Shape-changing swimmer scenarios and analysis")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one or more scenarios")
    p.add_argument("configs", nargs="+", help="TOML file or built-in scenario name")
    p.add_argument("--jobs", type=int, default=1, help="scenarios run concurrently (default 1)")
    p.add_argument("--output-dir", default=None, help=f"overrides ${OUTPUT_ENV} and the scenario setting")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verdict", help="lift a (t, s) CSV path and report the boundedness verdict")
    p.add_argument("path")
    p.add_argument("--circle", action="store_true", help="samples live on the circle (period 2 pi)")
    p.add_argument("--base-point", type=float, default=None)
    p.add_argument("--bound", type=float, default=None, help="field constant K for the witness radius")
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_verdict)

    p = sub.add_parser("list-scenarios", help="print the built-in scenarios")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("export-mesh", help="write the panel mesh at t = 0 as CSV")
    p.add_argument("config")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_export_mesh)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)
