"""Minimum-work reset with the gap restricted to ``[0, lambda_m]``.

Once the optimal gap reaches the bound it stays there, so a reset task falls
into one of three cases: *inaccessible* (even the bound held from ``t = 0``
is too slow), *touched* (an unconstrained arc up to a touch time ``t_star``,
then the bound), and *untouched* (the unbounded optimum already respects the
bound).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import model
from .model import DomainError, InaccessibleError, ResetTask
from .ode import EventNotFound, IntegratorConfig, find_root
from .unbounded import (
    DEFAULT_SAMPLES,
    RelaxationPiece,
    ShootingReport,
    Trajectory,
    WorkBreakdown,
    backward_arc,
    sample_pieces,
    solve_unbounded,
    terminal_gap,
    work_breakdown,
)
from .verify import ConstantGap, ControlProtocol, SampledGap, protocol_from_trajectory


class InfeasibleError(DomainError):
    """``epsilon`` lies at or below the fixed point of the bound: unreachable at any ``tau``."""

    def __init__(self, lambda_m: float, epsilon: float) -> None:
        self.lambda_m = lambda_m
        self.epsilon = epsilon
        self.threshold = model.lambda_for_error(epsilon)
        super().__init__(
            f"epsilon={epsilon!r} is not reachable with lambda_m={lambda_m!r}; "
            f"the bound must exceed ln((1-eps)/eps) = {self.threshold!r}"
        )


class Case(str, enum.Enum):
    INACCESSIBLE = "inaccessible"
    TOUCHED = "touched"
    UNTOUCHED = "untouched"


@dataclass(frozen=True)
class CaseLabel:
    variant: Case
    tau_c1: float
    tau_c2: float
    t_star: float | None = None


@dataclass
class BoundedSolution:
    protocol: ControlProtocol
    trajectory: Trajectory
    label: CaseLabel
    work: WorkBreakdown
    report: ShootingReport | None = None
    touch_residual: float | None = None

    @property
    def t_star(self) -> float | None:
        return self.label.t_star


def _check_feasible(lambda_m: float, epsilon: float) -> None:
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon!r}")
    if not epsilon > model.equilibrium_population(lambda_m):
        raise InfeasibleError(lambda_m, epsilon)


def tau_c1(lambda_m: float, epsilon: float) -> float:
    """Time to relax from 1/2 to ``epsilon`` with the gap held at the bound."""
    _check_feasible(lambda_m, epsilon)
    n = model.mean_phonon(lambda_m)
    rate = 2.0 * n + 1.0
    return -math.log(2.0 * (epsilon * rate - n)) / rate


def tau_c2(
    lambda_m: float,
    epsilon: float,
    method: str = "root",
    config: IntegratorConfig = IntegratorConfig(),
    tol: float = 1e-9,
) -> float:
    """Shortest ``tau`` whose unbounded optimum ends at a gap no larger than ``lambda_m``.

    ``method="root"`` solves ``terminal_gap(tau) = lambda_m`` by a geometric
    bracket scan from ``2 tau_c1`` and Brent's method.  ``method="direct"``
    integrates the optimal flow backwards from ``(epsilon, lambda_m)`` once;
    its duration is the same root without the outer search.
    """
    t1 = tau_c1(lambda_m, epsilon)
    if method == "direct":
        return backward_arc(epsilon, lambda_m, config, t_max=1e9).duration
    if method != "root":
        raise ValueError(f"unknown method {method!r}")

    def g(tau: float) -> float:
        return terminal_gap(ResetTask(tau, epsilon), config) - lambda_m

    lo, hi = t1, 2.0 * t1
    while g(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e9:
            raise RuntimeError(
                f"terminal gap stays above lambda_m={lambda_m!r} on [{2 * t1!r}, {hi!r}]"
            )
    if lo == t1:
        # The unbounded optimum becomes infinitely fast just below the speed
        # limit; start the bracket where it is still solvable.
        lo = max(t1, hi / 2.0)
        while g(lo) <= 0:
            lo = t1 + 0.5 * (lo - t1)
    return find_root(g, (lo, hi), tol=tol)


def case_for(tau: float, t1: float, t2: float) -> Case:
    """Case of a reset time given the two critical times."""
    if tau < t1:
        return Case.INACCESSIBLE
    if tau >= t2:
        return Case.UNTOUCHED
    return Case.TOUCHED


def classify(
    task: ResetTask,
    locate_touch: bool = True,
    config: IntegratorConfig = IntegratorConfig(),
) -> CaseLabel:
    """Case of a bounded task; ``locate_touch`` also solves for ``t_star``."""
    if task.lambda_max is None:
        raise ValueError("classify needs a task with lambda_max")
    lm, eps = task.lambda_max, task.epsilon
    t1 = tau_c1(lm, eps)
    t2 = tau_c2(lm, eps, method="direct", config=config)
    variant = case_for(task.tau, t1, t2)
    if variant is not Case.TOUCHED:
        return CaseLabel(variant, t1, t2)
    t_star = _touch_time(task, t1, t2, config)[0] if locate_touch else None
    return CaseLabel(Case.TOUCHED, t1, t2, t_star)


def _tail_population(task: ResetTask, t: float) -> float:
    return model.relaxation_solution(t, task.epsilon, task.tau, task.lambda_max)


def _touch_time(task, t1, t2, config, tol=1e-9):
    """Touch time and the residual ``arc duration - t_star`` there."""
    tau, lm = task.tau, task.lambda_max
    t_half = tau - t1  # the bound tail, anchored at p(tau) = eps, reaches 1/2 here
    if t_half <= 1e-12 * tau:
        return 0.0, 0.0

    def residual(t_star: float) -> float:
        p = _tail_population(task, t_star)
        if p >= 0.5:
            return -t_star
        t_max = 4.0 * tau + 10.0
        try:
            return backward_arc(p, lm, config, t_max=t_max).duration - t_star
        except EventNotFound:
            return t_max - t_star

    # Just past t_half the arc is a sliver of length ~2 (1/2 - p) << t_star.
    n = model.mean_phonon(lm)
    rate = 2.0 * n + 1.0
    p_inf = n / rate
    eta = min(1e-9, 1e-3 * t_half)
    t_lo = tau - math.log((0.5 - eta - p_inf) / (task.epsilon - p_inf)) / rate
    t_lo = max(t_lo, t_half)
    t_star = find_root(residual, (t_lo, tau), tol=tol)
    return t_star, residual(t_star)


def solve_touched(
    task: ResetTask,
    samples: int = DEFAULT_SAMPLES,
    config: IntegratorConfig = IntegratorConfig(),
    tol: float = 1e-9,
) -> BoundedSolution:
    """Optimal protocol for a touched task: free arc on ``[0, t*]``, bound on ``[t*, tau]``.

    The bound segment is fixed by ``p(tau) = epsilon``; integrating the free
    arc backwards from the bound segment's state at ``t*`` makes ``lambda_H``
    and ``p_dot`` continuous there by construction.  ``t*`` is the time at
    which that arc reaches 1/2 exactly at ``t = 0``.
    """
    lm, eps, tau = task.lambda_max, task.epsilon, task.tau
    if lm is None:
        raise ValueError("solve_touched needs a task with lambda_max")
    t1 = tau_c1(lm, eps)
    t2 = tau_c2(lm, eps, method="direct", config=config)
    if not t1 <= tau < t2:
        raise ValueError(f"tau={tau!r} is not in the touched range [{t1!r}, {t2!r})")
    t_star, res = _touch_time(task, t1, t2, config, tol)
    bound_piece = RelaxationPiece(t_star, tau, lm, eps, tau)
    if t_star > 0.0:
        p_star = _tail_population(task, t_star)
        arc = backward_arc(p_star, lm, config, t_max=4.0 * tau + 10.0)
        pieces = arc.pieces(t_star) + [bound_piece]
        j1 = arc.work()
    else:
        p_star = 0.5
        pieces = [bound_piece]
        j1 = 0.0
    traj = sample_pieces(pieces, tau, samples, extra=(t_star,))
    # the bound segment owns t_star itself; avoids roundoff just above lambda_m
    traj.lambda_H[traj.ts >= t_star] = lm
    j2 = lm * (p_star - eps)
    w = work_breakdown(traj, eps, j=j1 + j2)
    work = WorkBreakdown(**{**w.__dict__, "j1": j1, "j2": j2})
    head = traj.ts <= t_star
    segments = []
    if head.sum() >= 2:
        segments.append(SampledGap(traj.ts[head], traj.lambda_H[head], traj.gap))
    segments.append(ConstantGap(lm, tau - (float(traj.ts[head][-1]) if head.sum() >= 2 else 0.0)))
    label = CaseLabel(Case.TOUCHED, t1, t2, t_star)
    return BoundedSolution(ControlProtocol(segments), traj, label, work, touch_residual=res)


def solve_bounded(
    task: ResetTask,
    samples: int = DEFAULT_SAMPLES,
    config: IntegratorConfig = IntegratorConfig(),
) -> BoundedSolution:
    """Dispatch on the case; raises :class:`InaccessibleError` / :class:`InfeasibleError`."""
    if task.lambda_max is None:
        raise ValueError("solve_bounded needs a task with lambda_max")
    label = classify(task, locate_touch=False, config=config)
    if label.variant is Case.INACCESSIBLE:
        raise InaccessibleError(task.tau, label.tau_c1)
    if label.variant is Case.TOUCHED:
        return solve_touched(task, samples, config)
    traj, report = solve_unbounded(task, samples, config)
    work = work_breakdown(traj, task.epsilon)
    return BoundedSolution(protocol_from_trajectory(traj), traj, label, work, report=report)


def bounded_objective(sol: BoundedSolution) -> tuple[float, float, float]:
    """``(J1, J2, J)``: free-arc work, bound-segment work and their sum."""
    w = sol.work
    if w.j1 is None:
        return w.j, 0.0, w.j
    return w.j1, w.j2, w.j


def max_extra_work(lambda_m: float, epsilon: float) -> float:
    """Extra work of the all-bound protocol ``lambda_m (1/2 - eps) - W_qs``."""
    _check_feasible(lambda_m, epsilon)
    return lambda_m * (0.5 - epsilon) - model.quasistatic_work(epsilon)
