"""Optimal unbounded gap protocols for a few (tau, epsilon) pairs.

Writes one trajectory CSV per pair and prints the terminal gaps.
"""

import argparse
from pathlib import Path

from qubit_reset import ResetTask, solve_unbounded, work_breakdown
from qubit_reset.formats import trajectory_csv, write_text


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", default="results/unbounded_protocols")
    ap.add_argument("--samples", type=int, default=400)
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    print("tau,epsilon,lambda_tau,W_ex")
    for eps in (1e-3, 1e-5):
        for tau in (25.0, 75.0):
            traj, report = solve_unbounded(ResetTask(tau, eps), samples=args.samples)
            write_text(out / f"tau{tau:g}_eps{eps:g}.csv", trajectory_csv(traj))
            w = work_breakdown(traj, eps)
            print(f"{tau:g},{eps:g},{report.terminal_gap:.10g},{w.w_ex:.10g}")


if __name__ == "__main__":
    main()
