"""Command-line interface: run benchmarks, validate configs, list presets.

Exit code 0 means the run completed every iteration with a final design
feasible within 1e-3; configuration problems exit with 1, aborted or
infeasible runs with 2. Thread counts are taken from the usual BLAS
environment variables (e.g. OMP_NUM_THREADS); there is no flag for them.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import config as cfg
from . import io as hio
from .driver import run_optimization
from .errors import ConfigurationError, OptimizationAborted


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="heatopt",
        description="Topology optimization of steady-state heat conduction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an optimization")
    run.add_argument("config", nargs="?", help="configuration file (optional with --preset)")
    run.add_argument("--preset", help="start from a named preset")
    run.add_argument(
        "--override",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a configuration key (repeatable)",
    )
    run.add_argument("--out", help="output directory (overrides output.dir)")

    val = sub.add_parser("validate", help="parse and validate a configuration file")
    val.add_argument("config")

    pre = sub.add_parser("presets", help="list presets or show one")
    pre.add_argument("name", nargs="?", help="print this preset's configuration text")

    return parser


def _load_config(args) -> cfg.RunConfig:
    text = None
    if args.config is not None:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    if text is None and args.preset is None:
        raise ConfigurationError("provide a config file, a --preset, or both")
    return cfg.config_from_sources(
        preset=args.preset, text=text, overrides=args.override, out_dir=args.out
    )


def _cmd_run(args) -> int:
    try:
        run_cfg = _load_config(args)
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    out_dir = run_cfg.out_dir
    os.makedirs(out_dir, exist_ok=True)
    log_path = os.path.join(out_dir, "log.csv")
    if os.path.exists(log_path):
        os.remove(log_path)
    grid = run_cfg.make_grid()

    def sink(record):
        hio.append_log(record, log_path)

    def field_writer(name, values, iteration):
        hio.write_field(
            values, grid, os.path.join(out_dir, f"{name}_{iteration:06d}.vtk"), name=name
        )

    try:
        result = run_optimization(run_cfg, log_sink=sink, field_writer=field_writer)
    except OptimizationAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        with open(os.path.join(out_dir, "summary.txt"), "w", encoding="ascii") as fh:
            fh.write(f"aborted at iteration {exc.iteration}: {exc.cause}\n")
        return 2

    hio.write_field(result.rho, grid, os.path.join(out_dir, "rho.vtk"), name="rho")
    hio.write_field(
        result.rho_tilde, grid, os.path.join(out_dir, "rho_filtered.vtk"), name="rho_filtered"
    )
    hio.write_field(
        result.temperature, grid, os.path.join(out_dir, "temperature.vtk"), name="temperature"
    )
    hio.write_summary(
        result, run_cfg.label, run_cfg.strategy_name, os.path.join(out_dir, "summary.txt")
    )
    print(hio.format_summary(result, run_cfg.label, run_cfg.strategy_name), end="")
    return 0 if (result.completed and result.feasible) else 2


def _cmd_validate(args) -> int:
    try:
        with open(args.config, encoding="utf-8") as fh:
            parsed = cfg.parse_config(fh.read())
    except (ConfigurationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"ok: {parsed.label} ({parsed.strategy_name}, "
          f"{'x'.join(str(d) for d in parsed.dims)} cells)")
    return 0


def _cmd_presets(args) -> int:
    if args.name is not None:
        if args.name not in cfg.PRESETS:
            print(f"error: unknown preset {args.name!r}", file=sys.stderr)
            return 1
        print(cfg.PRESETS[args.name], end="")
        return 0
    for name, text in sorted(cfg.PRESETS.items()):
        summary = next(
            (line[1:].strip() for line in text.splitlines() if line.startswith("#")), ""
        )
        print(f"{name}: {summary}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "validate":
        return _cmd_validate(args)
    return _cmd_presets(args)


if __name__ == "__main__":
    sys.exit(main())
