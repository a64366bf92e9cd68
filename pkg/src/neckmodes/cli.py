"""Command-line driver: run, list, validate.

    neckmodes run <config>       run the experiment named in the config
    neckmodes list               show registered experiments
    neckmodes validate <config>  parse and validate without running

Configurations are plain-text key = value files ('#' comments); see the
repository README for the documented keys.  The exit status of `run` is
nonzero when any criterion of the experiment fails.  NECKMODES_THREADS
caps worker threads for the long sweeps (config key `threads` wins).
"""

from __future__ import annotations

import argparse
import sys

from .experiments import EXPERIMENTS, ConfigError, parse_config, run


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="neckmodes",
        description="verification experiments for harmonic modes on "
                    "stretched-neck model geometries")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    sub.add_parser("list", help="list registered experiments")
    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    args = parser.parse_args(argv)

    if args.command == "list":
        for name in sorted(EXPERIMENTS):
            print(name)
        return 0

    try:
        cfg = parse_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print(f"ok: {cfg.experiment}")
        return 0

    out = run(cfg)
    status = "PASS" if out["pass"] else "FAIL"
    print(f"[{status}] {cfg.experiment}: {out['csv']} {out['json']}")
    return 0 if out["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
