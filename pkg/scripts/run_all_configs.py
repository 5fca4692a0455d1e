#!/usr/bin/env python3
"""Run every config in configs/ through the CLI, writing CSV and SVG files to results/.

    python3 scripts/run_all_configs.py [--skip-slow] [--workers N]
"""

import argparse
import sys
import time
from pathlib import Path

from tamed_spde.cli import main

ROOT = Path(__file__).resolve().parents[1]
SLOW = {"example2_2d_spatial"}


def cli():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--skip-slow", action="store_true")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=str(ROOT / "results"))
    args = p.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    status = 0
    for cfg in sorted((ROOT / "configs").glob("*.ini")):
        if args.skip_slow and cfg.stem in SLOW:
            continue
        t0 = time.perf_counter()
        argv = ["run", str(cfg), "--csv", str(out / f"{cfg.stem}.csv"), "--svg", str(out / f"{cfg.stem}.svg")]
        if args.workers:
            argv += ["--workers", str(args.workers)]
        code = main(argv)
        print(f"{cfg.stem}: exit {code} in {time.perf_counter() - t0:.1f} s")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(cli())
