"""Bounded and unbounded optimal protocols at lambda_m = 15, epsilon = 1e-5.

Trajectory CSVs are written on absolute time; divide t by tau to overlay them.
"""

import argparse
from pathlib import Path

from qubit_reset import ResetTask, solve_bounded, solve_unbounded, work_breakdown
from qubit_reset.bounded import tau_c1, tau_c2
from qubit_reset.formats import trajectory_csv, write_text

LM, EPS = 15.0, 1e-5


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/bounded_protocols")
    ap.add_argument("--samples", type=int, default=1000)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print(f"tau_c1={tau_c1(LM, EPS):.10g} tau_c2={tau_c2(LM, EPS):.10g}")
    print("tau,case,t_star,W_ex_bounded,W_ex_unbounded")
    for tau in (20.0, 60.0, 100.0):
        b = solve_bounded(ResetTask(tau, EPS, LM), samples=args.samples)
        u, _ = solve_unbounded(ResetTask(tau, EPS), samples=args.samples)
        write_text(out / f"bounded_tau{tau:g}.csv", trajectory_csv(b.trajectory))
        write_text(out / f"unbounded_tau{tau:g}.csv", trajectory_csv(u))
        t_star = "" if b.t_star is None else f"{b.t_star:.10g}"
        print(f"{tau:g},{b.label.variant.value},{t_star},{b.work.w_ex:.10g},{work_breakdown(u, EPS).w_ex:.10g}")


if __name__ == "__main__":
    main()
