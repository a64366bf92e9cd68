"""Render figures for every experiment output found in a directory.

    neckplots render <results_dir> [-o <figures_dir>]
    neckplots check  <results_dir>     # slope cross-check only

Expects the experiment CLI's layout: <name>.csv next to
<name>_summary.json.  Re-running is idempotent (inputs are read-only).
"""

from __future__ import annotations

import argparse
import os
import sys

from .dispatch import FAMILIES, render_experiment, verify_slopes
from .spec import PlotError


def discover(results_dir: str):
    for name in sorted(FAMILIES):
        csv_path = os.path.join(results_dir, f"{name}.csv")
        if os.path.exists(csv_path):
            yield name, csv_path, os.path.join(results_dir, f"{name}_summary.json")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="neckplots")
    sub = parser.add_subparsers(dest="command", required=True)
    p_render = sub.add_parser("render", help="render figures for all outputs")
    p_render.add_argument("results_dir")
    p_render.add_argument("-o", "--out", default=None,
                          help="figure directory (default: results_dir)")
    p_check = sub.add_parser("check", help="cross-check fitted slopes")
    p_check.add_argument("results_dir")
    args = parser.parse_args(argv)

    found = list(discover(args.results_dir))
    if not found:
        print(f"no experiment outputs under {args.results_dir}", file=sys.stderr)
        return 2
    status = 0
    for name, csv_path, summary_path in found:
        try:
            if args.command == "render":
                out_dir = args.out or args.results_dir
                os.makedirs(out_dir, exist_ok=True)
                out = render_experiment(name, csv_path, summary_path,
                                        os.path.join(out_dir, f"{name}.png"))
                print(f"rendered {out}")
            else:
                checked = verify_slopes(name, csv_path, summary_path)
                for key, gap in checked.items():
                    print(f"{name}/{key}: slope agreement {gap:.2e}")
        except PlotError as exc:
            print(f"error: {exc}", file=sys.stderr)
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
