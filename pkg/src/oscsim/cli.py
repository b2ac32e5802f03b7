"""Command line interface.

    oscsim simulate <config.json> [more configs...] [--out DIR] [--jobs N]
    oscsim sweep <config.json> --param NAME --values CSVLIST [--out DIR]
    oscsim validate <config.json>

Exit codes: 0 pass, 1 check failed, 2 config error, 3 internal error.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from .config import load_scenario
from .errors import ConfigInvalid, OscsimError
from .pipelines import run_scenario, sweep_scenario

EXIT_PASS = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3


def _run_one(args):
    path, out_dir, seed = args
    scenario = load_scenario(path)
    if seed is not None:
        scenario.seed = seed
    result = run_scenario(scenario, out_dir)
    return result


def _cmd_simulate(args):
    jobs = args.jobs or min(len(args.config), os.cpu_count() or 1)
    work = [(path, args.out, args.seed) for path in args.config]
    results = []
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_one, work))
    else:
        results = [_run_one(w) for w in work]
    status = EXIT_PASS
    for res in results:
        flag = "pass" if res.ok else "FAIL"
        print(f"{res.name}: {flag}")
        for f in res.files:
            print(f"  wrote {f}")
        if not res.ok:
            status = EXIT_CHECK_FAILED
    return status


def _cmd_sweep(args):
    scenario = load_scenario(args.config)
    if args.seed is not None:
        scenario.seed = args.seed
    try:
        values = [float(v) for v in args.values.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigInvalid(f"--values must be a comma-separated number list: {exc}")
    path, rows = sweep_scenario(scenario, args.param, values, args.out)
    print(f"{scenario.name}: wrote {path} ({len(rows)} rows)")
    return EXIT_PASS


def _cmd_validate(args):
    load_scenario(args.config)
    print(f"{args.config}: OK")
    return EXIT_PASS


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oscsim",
        description="Oscillator-to-Hermitian simulation workbench",
    )
    parser.add_argument("--seed", type=int, default=None,
                        help="seed for randomized spot checks (default 42)")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run scenario configs")
    p_sim.add_argument("config", nargs="+", help="scenario JSON file(s)")
    p_sim.add_argument("--out", default=None, help="output directory")
    p_sim.add_argument("--jobs", type=int, default=None,
                       help="parallel scenarios (default: one per core)")
    p_sim.set_defaults(func=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="sweep a pipeline parameter")
    p_sweep.add_argument("config", help="scenario JSON file")
    p_sweep.add_argument("--param", required=True,
                         choices=["eta", "k", "m_f", "gamma"])
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_val = sub.add_parser("validate", help="check a config without running")
    p_val.add_argument("config", help="scenario JSON file")
    p_val.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigInvalid as exc:
        print(f"ConfigInvalid: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OscsimError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception as exc:   # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
