"""Case labels over the (tau, epsilon) plane for lambda_m = 15, plus the critical-time curves."""

import argparse
import sys
from pathlib import Path

from qubit_reset.cli import main as cli


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/case_diagram")
    ap.add_argument("--grid", default="50x50")
    ap.add_argument("--jobs", default="1")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sys.exit(cli([
        "case-diagram", "--lambda-max", "15", "--tau-min", "1", "--tau-max", "150",
        "--eps-min", "1e-6", "--eps-max", "1e-1", "--grid", args.grid, "--jobs", args.jobs,
        "--out", str(out / "cells.csv"), "--boundary-out", str(out / "boundaries.csv"),
    ]))


if __name__ == "__main__":
    main()
