"""Command-line interface.

Verbs:
    run <config>                         run the configured experiment
    replay <trace> <config>              run policies on a recorded trace
    bound <trace> <config>               upper-bound evaluation on a trace
    validate <config>                    parse + validate, print resolved config
    sweep <config> --param path=v1,v2    cross-product parameter sweep

Exit codes: 0 ok, 1 configuration error, 2 runtime error.
``COMCACHE_JOBS`` sets the default for --jobs.
"""

from __future__ import annotations

import argparse
import os
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from .config import ConfigError, canonical_json, load_config
from .harness import HarnessError, compute_bound, replay_trace, run_experiment, sweep
from .workload import TraceFormatError


def _add_common(p):
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--seeds", type=int, nargs="+", default=None,
                   help="override the config's seed list")
    p.add_argument("--overwrite", action="store_true",
                   help="replace existing results in --out")
    p.add_argument("--resume", default=None, metavar="DIR",
                   help="directory of checkpoints to restore learner state from")
    p.add_argument("--quiet", action="store_true", help="suppress progress lines")
    p.add_argument("--jobs", type=int,
                   default=int(os.environ.get("COMCACHE_JOBS", "1")),
                   help="parallel seed/sweep cells (default $COMCACHE_JOBS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comcache",
        description="cooperative edge-cache placement simulator")
    sub = parser.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    _add_common(p_run)

    p_replay = sub.add_parser("replay", help="replay a recorded trace")
    p_replay.add_argument("trace")
    p_replay.add_argument("config")
    _add_common(p_replay)

    p_bound = sub.add_parser("bound", help="upper-bound evaluation on a trace")
    p_bound.add_argument("trace")
    p_bound.add_argument("config")
    p_bound.add_argument("--out", default="results")
    p_bound.add_argument("--overwrite", action="store_true")

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")

    p_sweep = sub.add_parser("sweep", help="cross-product parameter sweep")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--param", action="append", required=True,
                         metavar="PATH=V1,V2,...",
                         help="dotted config path and comma-separated values")
    _add_common(p_sweep)
    return parser


def _parse_param(arg: str):
    if "=" not in arg:
        raise ConfigError(f"--param needs PATH=VALUES, got {arg!r}")
    path, _, values = arg.partition("=")
    parsed = []
    for chunk in values.split(","):
        try:
            parsed.append(tomllib.loads(f"v = {chunk}")["v"])
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"--param {path}: bad value {chunk!r}: {exc}") from exc
    return path.strip(), parsed


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except FileNotFoundError:
        print(f"config not found: {args.config}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1

    try:
        if args.verb == "validate":
            print(canonical_json(cfg.resolved))
            return 0
        if args.verb == "bound":
            value = compute_bound(args.trace, cfg, args.out, overwrite=args.overwrite)
            print(f"bound_hit_ratio={value if value is not None else 'NA'}")
            return 0
        common = dict(overwrite=args.overwrite, quiet=args.quiet, jobs=args.jobs)
        if args.verb == "run":
            run_experiment(cfg, args.out, seeds=args.seeds,
                           resume_dir=args.resume, **common)
            return 0
        if args.verb == "replay":
            replay_trace(args.trace, cfg, args.out, seeds=args.seeds,
                         resume_dir=args.resume, **common)
            return 0
        if args.verb == "sweep":
            params = {}
            for arg in args.param:
                path, values = _parse_param(arg)
                params[path] = values
            sweep(cfg, params, args.out, overwrite=args.overwrite,
                  quiet=args.quiet, jobs=args.jobs)
            return 0
        return 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (HarnessError, TraceFormatError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 -- CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
