"""Minimum extra work against the reset error and against the reset time.

Prints the log-log slope of W_ex(tau) for each error; the CSVs hold W_ex in
units of k_B T and also divided by ln 2.
"""

import argparse
import math
from pathlib import Path

import numpy as np

from qubit_reset.cli import sweep_point
from qubit_reset.formats import csv_text, write_text

HEADER = ("tau", "epsilon", "W_ex", "W_ex_over_ln2")


def rows(points):
    out = []
    for tau, eps in points:
        _, _, _, w, _ = sweep_point(float(tau), float(eps), None)
        out.append((tau, eps, w, None if w is None else w / math.log(2.0)))
    return out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/extra_work")
    ap.add_argument("--points", type=int, default=15)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    epss = np.geomspace(1e-8, 1e-1, args.points)
    for tau in (100.0, 300.0, 500.0):
        data = rows((tau, e) for e in epss)
        write_text(out / f"vs_epsilon_tau{tau:g}.csv", csv_text(HEADER, data))
        print(f"tau={tau:g}: W_ex(eps={epss[0]:.0e})={data[0][2]:.6g}, W_ex(eps={epss[-1]:.0e})={data[-1][2]:.6g}")

    taus = np.geomspace(30.0, 1000.0, args.points)
    for eps in (1e-1, 1e-3, 1e-5):
        data = rows((t, eps) for t in taus)
        write_text(out / f"vs_tau_eps{eps:g}.csv", csv_text(HEADER, data))
        slope = np.polyfit(np.log(taus), np.log([r[2] for r in data]), 1)[0]
        print(f"eps={eps:g}: slope of log W_ex vs log tau = {slope:.4f}")


if __name__ == "__main__":
    main()
