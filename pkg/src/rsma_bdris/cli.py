"""Command-line front end."""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from . import bench, verify
from .config import parse_config, parse_sweep
from .errors import ConfigError, TrialFailure
from .sim import ExperimentSpec, run_sweep, write_csv


def build_parser():
    p = argparse.ArgumentParser(
        prog="rsma-bdris",
        description="Monte-Carlo robustness of RSMA and SDMA under adversarial BD-RIS reconfiguration.",
    )
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--attack", choices=("none", "random", "aligned"))
    p.add_argument("--arch", choices=("single", "group", "fully"))
    p.add_argument("--scheme", choices=("rsma", "sdma", "both"))
    p.add_argument("--mode", choices=("absorb", "reflect"), help="surface behavior during training")
    p.add_argument("--sweep", metavar="AXIS=V1,V2,...")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--safe-mode", choices=("static-ris", "no-ris"))
    p.add_argument("--out", help="CSV output path (default: stdout)")
    action = p.add_mutually_exclusive_group()
    action.add_argument("--verify", action="store_true", help="run the invariant suites")
    action.add_argument("--bench", action="store_true", help="time attack generation per architecture")
    return p


def _spec_from_args(args) -> ExperimentSpec:
    if args.config:
        scenario, spec = parse_config(args.config)
    else:
        spec = ExperimentSpec()
        scenario = spec.scenario
    if args.mode:
        scenario = replace(scenario, uplink_mode=args.mode)
    changes = {"scenario": scenario}
    if args.attack:
        changes["attack"] = args.attack
    if args.arch:
        changes["architecture"] = args.arch
    if args.scheme:
        changes["schemes"] = ("rsma", "sdma") if args.scheme == "both" else (args.scheme,)
    if args.trials is not None:
        changes["trials"] = args.trials
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.safe_mode:
        changes["safe_mode"] = args.safe_mode
    if args.sweep:
        changes["sweep_axis"], changes["sweep_values"] = parse_sweep(args.sweep)
    return replace(spec, **changes)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.verify:
        return 0 if verify.run_checks() else 1
    if args.bench:
        return 0 if bench.report(bench.time_attacks()) else 1
    try:
        spec = _spec_from_args(args)
        out = open(args.out, "w", newline="", encoding="utf-8") if args.out else None
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc.strerror}", file=sys.stderr)
        return 2
    try:
        rows = run_sweep(spec)
        write_csv(rows, out or sys.stdout)
    except TrialFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    finally:
        if out is not None:
            out.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
