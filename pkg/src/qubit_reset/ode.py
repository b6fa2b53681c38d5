"""Initial-value integration with dense output and events, plus bracketed roots.

Thin, contract-checking wrappers around :func:`scipy.integrate.solve_ivp`
(an embedded Runge-Kutta pair) and :func:`scipy.optimize.brentq`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

Rhs = Callable[[float, np.ndarray], Sequence[float]]


class IntegrationError(RuntimeError):
    """The integrator failed (step budget exhausted, non-finite derivative, ...)."""


class EventNotFound(IntegrationError):
    """Integration finished without the requested event firing."""

    def __init__(self, message: str, curve: "SampledCurve") -> None:
        super().__init__(message)
        self.curve = curve


class BracketError(ValueError):
    """The root-finding bracket does not enclose a sign change."""


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 200_000
    method: str = "DOP853"

    def __post_init__(self) -> None:
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass
class SampledCurve:
    """Accepted integrator steps plus the continuous extension between them.

    ``ts`` is ordered in the direction of integration; ``ys`` has shape
    ``(len(ts), dim)``.
    """

    ts: np.ndarray
    ys: np.ndarray
    dense: Callable[[float], np.ndarray]
    event_time: float | None = None
    event_state: np.ndarray | None = None
    nfev: int = 0

    def __call__(self, t: float) -> np.ndarray:
        return self.dense(t)

    @property
    def t_final(self) -> float:
        return float(self.ts[-1])

    @property
    def y_final(self) -> np.ndarray:
        return self.ys[-1]


class _BudgetExhausted(Exception):
    pass


def _wrapped(rhs: Rhs, guard: bool, max_calls: int) -> Callable[[float, np.ndarray], np.ndarray]:
    calls = [0]

    def f(t: float, y: np.ndarray) -> np.ndarray:
        calls[0] += 1
        if calls[0] > max_calls:
            raise _BudgetExhausted(t)
        dy = np.asarray(rhs(t, y), dtype=float)
        if guard and not np.all(np.isfinite(dy)):
            raise IntegrationError(f"non-finite derivative {dy} at t={t!r}, y={y}")
        return dy

    return f


# Right-hand-side evaluations per accepted step, with slack for rejections.
_CALLS_PER_STEP = 16


def _run(rhs, y0, t_span, config, events, guard):
    t0, t1 = t_span
    if t0 == t1:
        raise ValueError("empty time span")
    budget = config.max_steps
    fun = _wrapped(rhs, guard, budget * _CALLS_PER_STEP)
    try:
        sol = solve_ivp(
            fun,
            (t0, t1),
            np.asarray(y0, dtype=float),
            method=config.method,
            rtol=config.rel_tol,
            atol=config.abs_tol,
            max_step=config.max_step,
            dense_output=True,
            events=list(events) or None,
        )
    except _BudgetExhausted as exc:
        raise IntegrationError(f"step budget of {budget} steps exhausted near t={exc.args[0]!r}") from None
    if sol.status == -1:
        raise IntegrationError(sol.message)
    return sol


def _curve(sol) -> SampledCurve:
    return SampledCurve(ts=sol.t, ys=sol.y.T, dense=sol.sol, nfev=sol.nfev)


def integrate(
    rhs: Rhs,
    y0: Sequence[float],
    t_span: tuple[float, float],
    config: IntegratorConfig = IntegratorConfig(),
) -> SampledCurve:
    """Integrate ``y' = rhs(t, y)`` over ``t_span`` (either direction)."""
    return _curve(_run(rhs, y0, t_span, config, (), guard=True))


def integrate_to_event(
    rhs: Rhs,
    y0: Sequence[float],
    t0: float,
    event: Callable[[float, np.ndarray], float],
    direction: float = 0.0,
    config: IntegratorConfig = IntegratorConfig(),
    t_max: float = math.inf,
    guard: bool = True,
) -> SampledCurve:
    """Integrate from ``t0`` towards ``t_max`` until ``event`` crosses zero.

    ``direction`` selects crossings as in :func:`scipy.integrate.solve_ivp`
    (sign of the event's derivative along the solution; 0 means any).  The
    crossing is polished by bisection on the dense output so that
    ``|event| < 1e-12``.  Raises :class:`EventNotFound` if ``t_max`` is reached
    first.  With ``guard=False`` non-finite derivatives are passed to the
    stepper, which rejects the step; use this when trial stages can leave the
    domain of ``rhs`` near the event.
    """
    y0 = np.asarray(y0, dtype=float)
    g0 = event(t0, y0)
    if g0 == 0.0:
        dense = lambda t: y0.copy()  # noqa: E731
        return SampledCurve(
            ts=np.array([t0, t0]), ys=np.vstack([y0, y0]), dense=dense,
            event_time=t0, event_state=y0.copy(),
        )
    if not math.isfinite(t_max):
        raise ValueError("t_max must be finite")

    def ev(t, y):
        return event(t, y)

    ev.terminal = True
    ev.direction = direction
    sol = _run(rhs, y0, (t0, t_max), config, (ev,), guard)
    curve = _curve(sol)
    if not sol.t_events[0].size:
        raise EventNotFound(f"event did not fire on [{t0!r}, {t_max!r}]", curve)
    te = float(sol.t_events[0][0])
    # Tighten the crossing on the dense output.
    g = lambda t: event(t, sol.sol(t))  # noqa: E731
    t_prev = float(sol.t[-2]) if sol.t.size > 1 else t0
    if abs(g(te)) > 1e-12 and g(t_prev) * g(te) < 0:
        te = find_root(g, (t_prev, te), tol=1e-15)
    curve.event_time = te
    curve.event_state = np.asarray(sol.sol(te))
    return curve


def find_root(
    f: Callable[[float], float],
    bracket: tuple[float, float],
    tol: float = 1e-12,
    max_iter: int = 200,
) -> float:
    """Root of ``f`` inside ``bracket`` by Brent's safeguarded method.

    Deterministic; the iterate never leaves the bracket.
    """
    a, b = bracket
    fa, fb = f(a), f(b)
    if not (math.isfinite(fa) and math.isfinite(fb)):
        raise ValueError(f"non-finite value at bracket end: f({a!r})={fa!r}, f({b!r})={fb!r}")
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0:
        raise BracketError(f"f has the same sign at {a!r} ({fa!r}) and {b!r} ({fb!r})")

    def checked(x):
        v = f(x)
        if not math.isfinite(v):
            raise ValueError(f"non-finite value f({x!r}) = {v!r}")
        return v

    return brentq(checked, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=max_iter)
