#!/usr/bin/env python3
"""Emit the CSV data behind every figure panel in one go.

Usage:
    python scripts/reproduce_figures.py [--out DIR] [--config PATH] [--grid N]

With no arguments this runs the bundled default parameter set at the
default grid resolutions (a few minutes of CPU). Pass --grid 41 or so for
a quick smoke run.
"""

import argparse
import time
from pathlib import Path

from optomech_bistab import __version__, figure_command, load_config
from optomech_bistab.harness import FIGURE_IDS
from optomech_bistab.params import default_params


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("out"))
    parser.add_argument("--config", type=Path, default=None)
    parser.add_argument("--grid", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--only", nargs="*", choices=FIGURE_IDS, default=None)
    args = parser.parse_args()

    physical = load_config(args.config) if args.config else default_params()
    targets = args.only or FIGURE_IDS
    for fig_id in targets:
        start = time.time()
        paths = figure_command(fig_id, physical, args.out, grid=args.grid,
                               threads=args.threads, version=__version__)
        names = ", ".join(p.name for p in paths)
        print(f"{fig_id}: {names} ({time.time() - start:.1f} s)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
