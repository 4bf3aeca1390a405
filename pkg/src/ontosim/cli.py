"""Batch command-line front end.

Subcommands:
  run <config>       run one scenario and write its artifacts
  validate <config>  check a config and report every violation
  version            print the package version

Exit codes: 0 success, 2 validation failure, 3 runtime failure,
4 self-check failure (configs with ``self_check: true``).

Numerical modules are imported only after --threads is applied, because
thread-pool sizes are fixed when the numerics libraries load.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import __version__

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
)


def _apply_threads(n: int | None) -> None:
    if n is None:
        return
    for var in _THREAD_ENV_VARS:
        os.environ[var] = str(n)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ontosim",
        description="Run seeded scenario experiments and emit machine-readable results.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario from a config file")
    run_p.add_argument("config", help="path to the scenario config (YAML/JSON)")
    run_p.add_argument("--out", help="output directory (overrides the config)")
    run_p.add_argument("--seed", type=int, help="root seed (overrides the config)")
    run_p.add_argument("--threads", type=int, help="thread-pool size for numerics")
    run_p.add_argument(
        "--format", choices=["csv", "json"], help="artifact format flags (overrides the config)"
    )

    val_p = sub.add_parser("validate", help="validate a config file")
    val_p.add_argument("config", help="path to the scenario config (YAML/JSON)")

    sub.add_parser("version", help="print the package version")
    return parser


def _read_config_text(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "version":
        print(f"ontosim {__version__}")
        return 0

    try:
        config_text = _read_config_text(args.config)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3

    if args.command == "validate":
        from .scenarios import ConfigError, validate_config

        try:
            cfg = validate_config(config_text)
        except ConfigError as exc:
            for err in exc.errors:
                print(f"invalid: {err}", file=sys.stderr)
            return 2
        print(f"OK: {cfg.kind} scenario, seed {cfg.seed}, out {cfg.out_dir!r}")
        return 0

    # run: fix thread pools before the numerics stack loads
    threads = args.threads
    if threads is None:
        import yaml

        try:
            raw = yaml.safe_load(config_text)
        except yaml.YAMLError:
            raw = None
        if isinstance(raw, dict):
            declared = raw.get("threads")
            if isinstance(declared, int) and not isinstance(declared, bool):
                threads = declared
    _apply_threads(threads)

    from .scenarios import ConfigError, ScenarioRuntimeError, run_scenario, validate_config

    try:
        cfg = validate_config(
            config_text,
            seed_override=args.seed,
            out_override=args.out,
            format_override=args.format,
            threads_override=args.threads,
        )
    except ConfigError as exc:
        for err in exc.errors:
            print(f"invalid: {err}", file=sys.stderr)
        return 2

    try:
        manifest = run_scenario(cfg)
    except ConfigError as exc:  # nested configs (files referenced by the scenario)
        for err in exc.errors:
            print(f"invalid: {err}", file=sys.stderr)
        return 2
    except (OSError, ScenarioRuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3

    for check in manifest.checks:
        status = "pass" if check.passed else "FAIL"
        print(f"check {check.name}: {status} ({check.detail})")
    print(
        f"wrote {len(manifest.files)} files to {cfg.out_dir!r} "
        f"in {manifest.wall_time_s:.3f}s"
    )
    if cfg.self_check and not manifest.all_checks_passed:
        print("self-check failed", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
