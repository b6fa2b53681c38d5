"""Command-line entry point: ``qubit-reset <command> ...``.

Exit codes: 0 success, 2 infeasible or inaccessible task, 1 numerical or
input failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Sequence

import numpy as np

from . import bounded, model, unbounded, verify
from .bounded import Case, InaccessibleError, InfeasibleError
from .formats import (
    BOUNDARY_HEADER,
    DIAGRAM_HEADER,
    SWEEP_HEADER,
    ProtocolFormatError,
    RunResult,
    csv_text,
    protocol_csv,
    read_protocol,
    trajectory_csv,
    write_text,
)
from .model import DomainError, ResetTask

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_UNREACHABLE = 2

UNITS_NOTE = """\
units: all values are dimensionless.  Times are gamma*t (gamma = bath
coupling rate), gaps are beta*lambda (beta = 1/(k_B T)), work is in units
of k_B T.  Example: a superconducting qubit with a gap bound of about
5 k_B T is run with --lambda-max 5 (an example, not a default).
"""


def _emit(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_text(path, text)


def _grid(lo: float, hi: float, n: int, log: bool) -> np.ndarray:
    if n < 1:
        raise ValueError("need at least one grid point")
    if not lo <= hi:
        raise ValueError(f"empty range [{lo!r}, {hi!r}]")
    if log:
        if not lo > 0:
            raise ValueError("log grids need a positive lower end")
        return np.geomspace(lo, hi, n)
    return np.linspace(lo, hi, n)


def _fill_work(result: RunResult, work: unbounded.WorkBreakdown) -> None:
    for name in ("j", "j1", "j2", "w_sc1", "w_qa2", "w_sc", "w_qs", "w_ex"):
        setattr(result, name, getattr(work, name))


def _unreachable(result: RunResult, exc: DomainError) -> int:
    if isinstance(exc, InaccessibleError):
        result.reason = "inaccessible"
        result.tau_c1 = exc.tau_c1
    else:
        result.reason = "infeasible"
        result.threshold = getattr(exc, "threshold", None)
    result.case = result.reason
    result.message = str(exc)
    sys.stdout.write(result.to_json())
    return EXIT_UNREACHABLE


# --------------------------------------------------------------------------
# solve


def cmd_solve(args: argparse.Namespace) -> int:
    result = RunResult(tau=args.tau, epsilon=args.epsilon, lambda_max=args.lambda_max)
    try:
        task = ResetTask(args.tau, args.epsilon, args.lambda_max)
        if task.bounded:
            sol = bounded.solve_bounded(task, samples=args.samples)
            traj, protocol, report = sol.trajectory, sol.protocol, sol.report
            result.case = sol.label.variant.value
            result.t_star = sol.label.t_star
            result.tau_c1, result.tau_c2 = sol.label.tau_c1, sol.label.tau_c2
            if sol.touch_residual is not None:
                result.residual = abs(sol.touch_residual)
            _fill_work(result, sol.work)
        else:
            traj, report = unbounded.solve_unbounded(task, samples=args.samples)
            protocol = verify.protocol_from_trajectory(traj)
            result.case = "unbounded"
            _fill_work(result, unbounded.work_breakdown(traj, task.epsilon))
    except (InaccessibleError, InfeasibleError) as exc:
        return _unreachable(result, exc)
    if report is not None:
        result.shooting_parameter = report.parameter
        result.terminal_gap = report.terminal_gap
        result.residual = report.residual
        result.iterations = report.iterations
    else:
        result.terminal_gap = float(traj.lambda_H[-1])
    result.reset_error = verify.reset_error(traj)
    result.work_direct = verify.work_direct(traj)
    if args.out:
        write_text(args.out, trajectory_csv(traj))
        result.artifacts.append(args.out)
    if args.protocol_out:
        write_text(args.protocol_out, protocol_csv(protocol))
        result.artifacts.append(args.protocol_out)
    if args.json:
        result.artifacts.append(args.json)
        write_text(args.json, result.to_json())
    sys.stdout.write(result.to_json())
    return EXIT_OK


# --------------------------------------------------------------------------
# critical-times


def cmd_critical_times(args: argparse.Namespace) -> int:
    try:
        t1 = bounded.tau_c1(args.lambda_max, args.epsilon)
    except InfeasibleError as exc:
        return _unreachable(RunResult(epsilon=args.epsilon, lambda_max=args.lambda_max), exc)
    t2 = bounded.tau_c2(args.lambda_max, args.epsilon, method=args.method)
    out = {
        "lambda_max": args.lambda_max,
        "epsilon": args.epsilon,
        "tau_c1": t1,
        "tau_c2": t2,
        "method": args.method,
    }
    sys.stdout.write(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------
# sweep


def sweep_point(tau: float, eps: float, lambda_max: float | None) -> tuple:
    """One sweep row ``(tau, epsilon, case, W_ex, J)``; failures carry empty work."""
    try:
        task = ResetTask(tau, eps, lambda_max)
        if lambda_max is None:
            traj, _ = unbounded.solve_unbounded(task, samples=2)
            work = unbounded.work_breakdown(traj, eps)
            return (tau, eps, "unbounded", work.w_ex, work.j)
        sol = bounded.solve_bounded(task, samples=2)
        return (tau, eps, sol.label.variant.value, sol.work.w_ex, sol.work.j)
    except InaccessibleError:
        return (tau, eps, Case.INACCESSIBLE.value, None, None)
    except InfeasibleError:
        return (tau, eps, "infeasible", None, None)
    except (ArithmeticError, RuntimeError, ValueError):
        return (tau, eps, "failed", None, None)


def _sweep_star(job):
    return sweep_point(*job)


def _map(fn: Callable, jobs: Sequence, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map keeps submission order, so concurrency never changes the output
        return list(pool.map(fn, jobs))


def cmd_sweep(args: argparse.Namespace) -> int:
    if args.epsilon is not None and args.tau is None:
        if args.tau_min is None or args.tau_max is None:
            raise ValueError("a tau sweep needs --tau-min and --tau-max")
        taus = _grid(args.tau_min, args.tau_max, args.points, args.log)
        jobs = [(float(t), args.epsilon, args.lambda_max) for t in taus]
    elif args.tau is not None and args.epsilon is None:
        if args.eps_min is None or args.eps_max is None:
            raise ValueError("an epsilon sweep needs --eps-min and --eps-max")
        epss = _grid(args.eps_min, args.eps_max, args.points, args.log)
        jobs = [(args.tau, float(e), args.lambda_max) for e in epss]
    else:
        raise ValueError("give exactly one of --epsilon (tau sweep) or --tau (epsilon sweep)")
    rows = _map(_sweep_star, jobs, args.jobs)
    _emit(csv_text(SWEEP_HEADER, rows), args.out)
    return EXIT_OK if any(r[3] is not None for r in rows) else EXIT_FAILURE


# --------------------------------------------------------------------------
# case-diagram


def critical_pair(lambda_m: float, eps: float) -> tuple[float | None, float | None]:
    """``(tau_c1, tau_c2)`` or ``(None, None)`` when ``eps`` is infeasible."""
    try:
        t1 = bounded.tau_c1(lambda_m, eps)
    except InfeasibleError:
        return None, None
    return t1, bounded.tau_c2(lambda_m, eps, method="direct")


def _critical_star(job):
    return critical_pair(*job)


def diagram_rows(
    lambda_m: float, taus: np.ndarray, epss: np.ndarray, workers: int = 1
) -> tuple[list[tuple], list[tuple]]:
    """Grid labels ``(tau, eps, case)`` (tau fastest) and boundary rows ``(eps, c1, c2)``."""
    pairs = _map(_critical_star, [(lambda_m, float(e)) for e in epss], workers)
    cells, curves = [], []
    for eps, (t1, t2) in zip(epss, pairs):
        curves.append((eps, t1, t2))
        for tau in taus:
            label = "infeasible" if t1 is None else bounded.case_for(float(tau), t1, t2).value
            cells.append((tau, eps, label))
    return cells, curves


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        n, m = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 50x50, got {text!r}") from None
    if n < 1 or m < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return n, m


def cmd_case_diagram(args: argparse.Namespace) -> int:
    n_tau, n_eps = args.grid
    taus = _grid(args.tau_min, args.tau_max, n_tau, args.tau_log)
    epss = _grid(args.eps_min, args.eps_max, n_eps, True)
    cells, curves = diagram_rows(args.lambda_max, taus, epss, args.jobs)
    _emit(csv_text(DIAGRAM_HEADER, cells), args.out)
    boundary = args.boundary_out
    if boundary is None and args.out:
        boundary = args.out[:-4] + "_boundaries.csv" if args.out.endswith(".csv") else args.out + ".boundaries.csv"
    if boundary:
        write_text(boundary, csv_text(BOUNDARY_HEADER, curves))
    return EXIT_OK


# --------------------------------------------------------------------------
# simulate


def cmd_simulate(args: argparse.Namespace) -> int:
    protocol = read_protocol(args.protocol)
    traj = verify.simulate(protocol, args.p0, samples=args.samples)
    eps = verify.reset_error(traj)
    result = RunResult(tau=protocol.total_duration, case="simulated", reset_error=eps)
    result.j = unbounded.objective(traj)
    result.work_direct = verify.work_direct(traj)
    if 0.0 < eps < 0.5:
        result.epsilon = eps
        result.w_qs = model.quasistatic_work(eps)
        result.w_ex = result.work_direct - result.w_qs
    if args.out:
        write_text(args.out, trajectory_csv(traj))
        result.artifacts.append(args.out)
    if args.json:
        result.artifacts.append(args.json)
        write_text(args.json, result.to_json())
    sys.stdout.write(result.to_json())
    return EXIT_OK


# --------------------------------------------------------------------------


def _positive(text: str) -> float:
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qubit-reset",
        description="Minimum-work finite-time qubit reset protocols.",
        epilog=UNITS_NOTE,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(
            name, help=help_text, description=help_text, epilog=UNITS_NOTE,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )

    p = add("solve", "Solve for the optimal protocol of one reset task.")
    p.add_argument("--tau", type=_positive, required=True, help="reset time gamma*tau")
    p.add_argument("--epsilon", type=_positive, required=True, help="target excited population")
    p.add_argument("--lambda-max", type=_positive, help="bound on the gap beta*lambda")
    p.add_argument("--samples", type=int, default=unbounded.DEFAULT_SAMPLES)
    p.add_argument("--out", help="trajectory CSV (t,p_e,lambda_H)")
    p.add_argument("--protocol-out", help="protocol CSV (t,lambda_H) for the simulate command")
    p.add_argument("--json", help="also write the result JSON here")
    p.set_defaults(func=cmd_solve)

    p = add("critical-times", "First and second critical reset times for a gap bound.")
    p.add_argument("--lambda-max", type=_positive, required=True)
    p.add_argument("--epsilon", type=_positive, required=True)
    p.add_argument(
        "--method", choices=("root", "direct"), default="root",
        help="root: bracket-and-solve on the unbounded terminal gap; direct: one backward arc",
    )
    p.set_defaults(func=cmd_critical_times)

    p = add("sweep", "Extra work over a grid of reset times or errors.")
    p.add_argument("--epsilon", type=_positive, help="fixed error for a tau sweep")
    p.add_argument("--tau-min", type=_positive)
    p.add_argument("--tau-max", type=_positive)
    p.add_argument("--tau", type=_positive, help="fixed reset time for an epsilon sweep")
    p.add_argument("--eps-min", type=_positive)
    p.add_argument("--eps-max", type=_positive)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--log", action="store_true", help="log-spaced grid")
    p.add_argument("--lambda-max", type=_positive)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_sweep)

    p = add("case-diagram", "Inaccessible/touched/untouched labels over a (tau, epsilon) grid.")
    p.add_argument("--lambda-max", type=_positive, required=True)
    p.add_argument("--tau-min", type=_positive, required=True)
    p.add_argument("--tau-max", type=_positive, required=True)
    p.add_argument("--eps-min", type=_positive, required=True)
    p.add_argument("--eps-max", type=_positive, required=True)
    p.add_argument("--grid", type=_parse_grid, default=(50, 50), help="NxM: tau points x epsilon points")
    p.add_argument("--tau-log", action="store_true", help="log-spaced tau axis (epsilon is always log)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="grid CSV (default stdout)")
    p.add_argument("--boundary-out", help="critical-time curves CSV (epsilon,tau_c1,tau_c2)")
    p.set_defaults(func=cmd_case_diagram)

    p = add("simulate", "Forward-simulate a protocol file and recompute its work.")
    p.add_argument("--protocol", required=True, help="protocol CSV (t,lambda_H), first t = 0")
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=unbounded.DEFAULT_SAMPLES)
    p.add_argument("--out", help="trajectory CSV")
    p.add_argument("--json", help="also write the result JSON here")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ProtocolFormatError as exc:
        print(f"error: {args.protocol}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except (InfeasibleError, InaccessibleError) as exc:
        return _unreachable(RunResult(), exc)
    except (ArithmeticError, RuntimeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
