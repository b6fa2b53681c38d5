"""Minimum-work finite-time reset of a qubit coupled to a thermal bath."""

from .bounded import (
    BoundedSolution,
    Case,
    CaseLabel,
    InaccessibleError,
    InfeasibleError,
    classify,
    max_extra_work,
    solve_bounded,
    solve_touched,
    tau_c1,
    tau_c2,
)
from .model import DomainError, ResetTask
from .ode import IntegratorConfig
from .unbounded import Trajectory, WorkBreakdown, objective, solve_unbounded, work_breakdown
from .verify import ConstantGap, ControlProtocol, SampledGap, simulate, work_direct

__all__ = [
    "BoundedSolution",
    "Case",
    "CaseLabel",
    "ConstantGap",
    "ControlProtocol",
    "DomainError",
    "InaccessibleError",
    "InfeasibleError",
    "IntegratorConfig",
    "ResetTask",
    "SampledGap",
    "Trajectory",
    "WorkBreakdown",
    "classify",
    "max_extra_work",
    "objective",
    "simulate",
    "solve_bounded",
    "solve_touched",
    "solve_unbounded",
    "tau_c1",
    "tau_c2",
    "work_breakdown",
    "work_direct",
]
