"""Extra work with and without the gap bound across the touched range.

Also compares the bounded extra work just above tau_c1 with the all-bound value.
"""

import argparse
from pathlib import Path

import numpy as np

from qubit_reset import ResetTask, max_extra_work, solve_bounded, solve_unbounded, work_breakdown
from qubit_reset.bounded import tau_c1, tau_c2
from qubit_reset.formats import csv_text, write_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lambda-max", type=float, default=15.0)
    ap.add_argument("--epsilon", type=float, default=1e-5)
    ap.add_argument("--points", type=int, default=20)
    ap.add_argument("--out", default="results/bounded_vs_unbounded.csv")
    args = ap.parse_args()
    lm, eps = args.lambda_max, args.epsilon
    t1, t2 = tau_c1(lm, eps), tau_c2(lm, eps, method="direct")
    taus = t1 + (t2 - t1) * np.geomspace(1e-4, 1.2, args.points)
    rows = []
    for tau in taus:
        b = solve_bounded(ResetTask(float(tau), eps, lm), samples=2)
        u, _ = solve_unbounded(ResetTask(float(tau), eps), samples=2)
        rows.append((tau, b.label.variant.value, b.t_star, b.work.w_ex, work_breakdown(u, eps).w_ex))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_text(args.out, csv_text(("tau", "case", "t_star", "W_ex_bounded", "W_ex_unbounded"), rows))
    print(f"tau_c1={t1:.10g} tau_c2={t2:.10g} all-bound extra work={max_extra_work(lm, eps):.10g}")
    for tau, case, t_star, wb, wu in rows:
        print(f"tau={tau:.6g} {case:9s} W_ex bounded={wb:.6g} unbounded={wu:.6g}")


if __name__ == "__main__":
    main()
