"""Command-line interface.

Subcommands: generate | sweep-gamma3 | compare | verify.  Options may come
from a flat key=value config file (--config) and are overridable by flags of
the same name.  Exit codes: 0 ok, 1 usage error, 2 run failure, 3 monitor
violation in strict mode.
"""

from __future__ import annotations

import argparse
import json
import sys

from .harness import (
    ExperimentConfig,
    cmd_compare,
    cmd_generate,
    cmd_sweep_gamma3,
    cmd_verify,
    config_from_mapping,
    load_config_file,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUN_FAILURE = 2
EXIT_STRICT_VIOLATION = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ipgm",
        description="Gradient projection with feasible inexact projections: "
                    "benchmark instances, sweeps and verification.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("generate", "write a seeded problem instance to disk"),
            ("sweep-gamma3", "constant-step runs across gamma3 caps (CSV)"),
            ("compare", "inexact vs exact, constant vs Armijo grid (CSV)"),
            ("verify", "replay the inequality monitors (JSON)")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--algo", choices=("constant", "armijo"))
        p.add_argument("--proj", choices=("inexact", "exact"))
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--omega", type=int)
        p.add_argument("--density", type=float)
        p.add_argument("--beta", help="comma-separated starting mixes")
        p.add_argument("--gamma3", help="comma-separated gamma3 caps")
        p.add_argument("--schedule", choices=("logarithmic", "harmonic", "zero"))
        p.add_argument("--bbar", type=float)
        p.add_argument("--phi", choices=("phi1", "phi2", "phi3", "phi4", "phi5"))
        p.add_argument("--seed", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--strict", action="store_const", const=True)
        p.add_argument("--out", help="output path (base name for reports)")
    return parser


def _assemble_config(args: argparse.Namespace) -> ExperimentConfig:
    mapping: dict = {}
    if args.config:
        mapping.update(load_config_file(args.config))
    for key in ("algo", "proj", "n", "m", "omega", "density", "beta",
                "gamma3", "schedule", "bbar", "phi", "seed", "tol",
                "max_iter", "strict", "out"):
        value = getattr(args, key, None)
        if value is None:
            continue
        if key in ("beta", "gamma3") and isinstance(value, str):
            value = tuple(float(t) for t in value.split(",") if t != "")
        mapping[key] = value
    return config_from_mapping(mapping)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        config = _assemble_config(args)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "generate":
            path = cmd_generate(config)
            print(f"wrote {path}")
            return EXIT_OK
        if args.command in ("sweep-gamma3", "compare"):
            report = (cmd_sweep_gamma3 if args.command == "sweep-gamma3"
                      else cmd_compare)(config)
            if config.out:
                csv_path, json_path = report.write(config.out)
                print(f"wrote {csv_path} and {json_path}")
            else:
                sys.stdout.write(report.to_csv())
            if any(str(r.get("monitors", "")).startswith("error")
                   for r in report.rows):
                return EXIT_RUN_FAILURE
            if config.strict and report.monitor_failures:
                return EXIT_STRICT_VIOLATION
            return EXIT_OK
        if args.command == "verify":
            checks = cmd_verify(config)
            payload = json.dumps(checks, indent=2, sort_keys=True) + "\n"
            if config.out:
                with open(config.out, "w") as fh:
                    fh.write(payload)
                print(f"wrote {config.out}")
            else:
                sys.stdout.write(payload)
            failed = [k for k, v in checks.items() if not v.get("passed", False)]
            if failed:
                print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
                if config.strict:
                    return EXIT_STRICT_VIOLATION
            return EXIT_OK
        raise AssertionError(f"unhandled command {args.command}")
    except Exception as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_RUN_FAILURE


if __name__ == "__main__":
    sys.exit(main())
