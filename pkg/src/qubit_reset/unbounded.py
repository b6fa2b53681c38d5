"""Minimum-work reset without a bound on the gap.

The optimal population obeys the Euler-Lagrange equation :func:`el_rhs` with
``p_e(0) = 1/2`` and ``p_e(tau) = epsilon``.  The equation is singular at
``p_e = 1/2``, so the boundary-value problem is shot *backwards*: start at
``(epsilon, p_dot(tau))``, integrate towards decreasing time until the
population climbs back to 1/2, and adjust the terminal slope until the
elapsed time equals ``tau``.

Two numerical details keep this accurate:

* The flow is integrated in the shifted coordinate ``w = p_dot + p_e``
  (the distance to the infinite-gap speed limit), whose derivative carries
  an explicit factor ``w``.  This removes the cancellation in ``p_dot + p_e``
  that otherwise spoils the recovered gap when it is large.
* The last ``SWITCH_GAP`` of population below 1/2 is closed with the
  Beltrami first integral instead of the stepper; there the flow has an
  integrable ``1/sqrt`` singularity that costs thousands of tiny steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.integrate import quad, simpson
from scipy.interpolate import CubicHermiteSpline

from . import model
from .model import DomainError, InaccessibleError, ResetTask
from .ode import (
    BracketError,
    EventNotFound,
    IntegratorConfig,
    SampledCurve,
    find_root,
    integrate_to_event,
)

SWITCH_GAP = 1e-3
DEFAULT_SAMPLES = 1000
_QUAD = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


class ShootingError(RuntimeError):
    """The shooting residual could not be bracketed or driven to zero."""


# --------------------------------------------------------------------------
# Euler-Lagrange flow


def el_rhs(p_e: float, p_dot: float) -> float:
    """Second derivative of the optimal population (Euler-Lagrange equation)."""
    d = (1.0 - 2.0 * p_e) * (2.0 * p_e * (1.0 - p_e) + p_dot)
    if d == 0.0:
        raise DomainError(f"Euler-Lagrange equation is singular at p_e={p_e!r}, p_dot={p_dot!r}")
    v2 = p_dot * p_dot
    num = (1.0 - 2.0 * p_e + 2.0 * p_e * p_e) * v2 + 2.0 * v2 * p_dot + 2.0 * v2 * v2
    return num / d


def lagrangian(p_e: float, p_dot: float) -> float:
    """Work rate ``-p_dot * lambda_H`` with the gap eliminated."""
    return p_dot * math.log((p_dot + p_e) / (p_dot + 1.0 - p_e))


def beltrami_constant(p_e: float, p_dot: float) -> float:
    """First integral ``p_dot * dL/dp_dot - L`` of the autonomous Lagrangian.

    With ``dL/dp_dot = ln(w/(w+x)) + p_dot (1/w - 1/(w+x))``, where
    ``w = p_dot + p_e`` and ``x = 1 - 2 p_e``, the logarithms cancel and the
    constant reduces to ``p_dot^2 x / (w (w + x))``.
    """
    w = p_dot + p_e
    x = 1.0 - 2.0 * p_e
    if not w > 0 or not 0.0 < p_e < 1.0:
        raise DomainError(f"inadmissible state p_e={p_e!r}, p_dot={p_dot!r}")
    return p_dot * p_dot * x / (w * (w + x))


def _level(p: float, w: float) -> float:
    # beltrami_constant in (p, w) coordinates, free of the cancellation in w - p + p
    x = 1.0 - 2.0 * p
    v = w - p
    return v * v * x / (w * (w + x))


def _flow(t: float, y: np.ndarray) -> list[float]:
    # Euler-Lagrange flow in (p, w = p_dot + p); NaN outside the domain
    # makes the stepper reject trial stages that overshoot p = 1/2.
    p, w = y[0], y[1]
    x = 1.0 - 2.0 * p
    if not (x > 0.0 and 0.0 < w < p):
        return [math.nan, math.nan]
    q = x * x + w * (1.0 - 3.0 * p + w)
    return [w - p, -2.0 * w * (p - w) * q / (x * (p * x + w))]


def _w_terminal(p: float, lam: float) -> float:
    # p_dot + p at gap lam, free of cancellation: e^-lam (1 - 2p) / (1 - e^-lam)
    return (1.0 - 2.0 * p) / math.expm1(lam)


def _w_on_level(p: float, c: float) -> float:
    # Solve beltrami_constant(p, w - p) = c for w (the admissible root).
    x = 1.0 - 2.0 * p
    if x <= 0.0:
        return 0.0
    b = x * (c + 2.0 * p)
    disc = x * c * (x * c + 4.0 * x * p + 4.0 * p * p)
    return 2.0 * x * p * p / (b + math.sqrt(disc))


def _gap(p: float, w: float) -> float:
    x = 1.0 - 2.0 * p
    if x <= 0.0:
        return 0.0
    return math.log1p(x / w)


# --------------------------------------------------------------------------
# Trajectory pieces


class _Piece:
    t0: float
    t1: float

    def state(self, t: float) -> tuple[float, float]:
        raise NotImplementedError

    def gap(self, t: float) -> float:
        p, v = self.state(t)
        return _gap(p, v + p)

    def work(self) -> float:
        """``-integral p_dot * lambda dt`` over the piece."""
        raise NotImplementedError


@dataclass
class _FirstIntegralPiece(_Piece):
    """Arc segment next to ``p = 1/2`` reconstructed from the Beltrami level ``c``.

    With ``u = sqrt(1 - 2p)`` the elapsed time behaves like ``u^2`` times a
    smooth function, so ``u`` is a smooth function of ``sqrt(elapsed)``.  That
    map is tabulated once (quadrature between graded nodes) and inverted with
    a cubic Hermite spline.
    """

    t0: float
    t1: float
    c: float
    p_far: float  # population at t1
    _table: CubicHermiteSpline | None = field(default=None, init=False, repr=False)
    _s_far: float = field(default=0.0, init=False, repr=False)

    def elapsed(self, p: float) -> float:
        """Time needed to fall from 1/2 to ``p``."""
        if p >= 0.5:
            return 0.0
        c = self.c
        return quad(lambda q: 1.0 / (q - _w_on_level(q, c)), p, 0.5, **_QUAD)[0]

    def _dt_du(self, u: float) -> float:
        if u == 0.0:
            return 0.0
        q = 0.5 * (1.0 - u * u)
        return u / (q - _w_on_level(q, self.c))

    def _build(self) -> None:
        u_far = math.sqrt(max(1.0 - 2.0 * self.p_far, 0.0))
        if u_far == 0.0:
            self._s_far = 0.0
            return
        us = np.unique(np.concatenate([
            [0.0], u_far * np.geomspace(1e-9, 1.0, 160), np.linspace(0.0, u_far, 120),
        ]))
        dt = [quad(self._dt_du, a, b, **_QUAD)[0] for a, b in zip(us[:-1], us[1:])]
        ss = np.sqrt(np.concatenate([[0.0], np.cumsum(dt)]))
        # du/ds = 2 s / (dt/du); equals 1 at u = 0 where dt/du ~ 2u.
        slopes = np.array([1.0] + [2.0 * s / self._dt_du(u) for s, u in zip(ss[1:], us[1:])])
        self._table = CubicHermiteSpline(ss, us, slopes)
        self._s_far = float(ss[-1])

    def state(self, t):
        s = t - self.t0
        if s <= 0.0:
            return 0.5, -0.5
        if t >= self.t1:
            p = self.p_far
        else:
            if self._table is None:
                self._build()
            r = math.sqrt(s)
            if self._table is None or r >= self._s_far:
                p = self.p_far
            else:
                u = float(self._table(r))
                p = 0.5 * (1.0 - u * u)
        w = _w_on_level(p, self.c)
        return p, w - p

    def gap(self, t):
        p, v = self.state(t)
        return _gap(p, v + p)

    def work(self):
        c = self.c
        return quad(lambda q: _gap(q, _w_on_level(q, c)), self.p_far, 0.5, **_QUAD)[0]


@dataclass
class _ShotPiece(_Piece):
    """Stepper output; ``curve`` runs on local time ``t - shift``."""

    t0: float
    t1: float
    curve: SampledCurve
    shift: float

    def state(self, t):
        p, w = self.curve(t - self.shift)
        return float(p), float(w - p)

    def states(self, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        y = self.curve(np.asarray(ts) - self.shift)
        return y[0], y[1] - y[0]

    def work(self):
        def rate(t):
            p, w = self.curve(t - self.shift)
            return (p - w) * _gap(p, w)

        return quad(rate, self.t0, self.t1, **_QUAD)[0]


@dataclass
class RelaxationPiece(_Piece):
    """Constant gap ``lam``, anchored at ``p(t_anchor) = p_anchor``."""

    t0: float
    t1: float
    lam: float
    p_anchor: float
    t_anchor: float

    def state(self, t):
        p = model.relaxation_solution(t, self.p_anchor, self.t_anchor, self.lam)
        return p, model.master_rhs(p, self.lam)

    def gap(self, t):
        return self.lam

    def work(self):
        return quad(lambda t: -self.state(t)[1] * self.lam, self.t0, self.t1, **_QUAD)[0]


# --------------------------------------------------------------------------
# Backward arcs


@dataclass
class Arc:
    """Solved Euler-Lagrange arc from ``p = 1/2`` to ``(p_end, lambda_end)``.

    Times are local: the arc ends at 0 and starts at ``-duration``.
    """

    p_end: float
    lambda_end: float
    duration: float
    c: float
    curve: SampledCurve | None
    t_switch: float  # local time where the stepper handed over (<= 0)
    p_switch: float

    def pieces(self, t_end: float) -> list[_Piece]:
        """Pieces placed so that the arc ends at ``t_end``."""
        start = t_end - self.duration
        sw = t_end + self.t_switch
        out: list[_Piece] = [_FirstIntegralPiece(start, sw, self.c, self.p_switch)]
        if self.curve is not None:
            out.append(_ShotPiece(sw, t_end, self.curve, t_end))
        return out

    def work(self) -> float:
        return sum(piece.work() for piece in self.pieces(0.0))


def _arc_config(config: IntegratorConfig, p_end: float) -> IntegratorConfig:
    return replace(config, abs_tol=min(config.abs_tol, 1e-2 * config.rel_tol * p_end))


def backward_arc(
    p_end: float,
    lambda_end: float,
    config: IntegratorConfig = IntegratorConfig(),
    t_max: float = 1e4,
) -> Arc:
    """Integrate the optimal flow backwards from ``(p_end, lambda_end)`` to ``p = 1/2``.

    Raises :class:`EventNotFound` when 1/2 is not reached within ``t_max``.
    """
    if not 0.0 < p_end < 0.5:
        raise DomainError(f"p_end must lie in (0, 1/2), got {p_end!r}")
    if not lambda_end > model.lambda_for_error(p_end):
        raise DomainError("terminal gap must exceed the equilibrium gap of p_end")
    w_end = _w_terminal(p_end, lambda_end)
    c = _level(p_end, w_end)
    if p_end >= 0.5 - SWITCH_GAP:
        arc = Arc(p_end, lambda_end, 0.0, c, None, 0.0, p_end)
    else:
        curve = integrate_to_event(
            _flow,
            [p_end, w_end],
            0.0,
            lambda t, y: y[0] - (0.5 - SWITCH_GAP),
            direction=1.0,
            config=_arc_config(config, p_end),
            t_max=-t_max,
            guard=False,
        )
        p_sw, w_sw = curve.event_state
        arc = Arc(
            p_end, lambda_end, 0.0, _level(p_sw, w_sw), curve,
            curve.event_time, float(p_sw),
        )
    tail = _FirstIntegralPiece(0.0, 0.0, arc.c, arc.p_switch).elapsed(arc.p_switch)
    arc.duration = -arc.t_switch + tail
    return arc


# --------------------------------------------------------------------------
# Trajectories and reports


@dataclass
class Trajectory:
    """Samples of ``(t, p_e, p_dot, lambda_H)`` plus the dense pieces behind them.

    ``lambda_H[0]`` is 0 by convention: the gap leaves 0 continuously.
    """

    ts: np.ndarray
    p_e: np.ndarray
    p_dot: np.ndarray
    lambda_H: np.ndarray
    pieces: Sequence[_Piece] = field(default=(), repr=False)

    @property
    def tau(self) -> float:
        return float(self.ts[-1])

    def state(self, t: float) -> tuple[float, float]:
        for piece in self.pieces:
            if t <= piece.t1:
                return piece.state(t)
        return self.pieces[-1].state(t)

    def gap(self, t: float) -> float:
        for piece in self.pieces:
            if t <= piece.t1:
                return piece.gap(t)
        return self.pieces[-1].gap(t)


@dataclass(frozen=True)
class ShootingReport:
    parameter: float  # p_dot(tau)
    terminal_gap: float
    residual: float
    iterations: int
    rel_tol: float
    abs_tol: float
    root_tol: float


@dataclass(frozen=True)
class WorkBreakdown:
    """Work terms in units of ``1/beta``; ``j1``/``j2`` only for bounded solutions."""

    j: float
    w_sc1: float
    w_qa2: float
    w_sc: float
    w_qs: float
    w_ex: float
    j1: float | None = None
    j2: float | None = None


def sample_pieces(
    pieces: Sequence[_Piece], tau: float, samples: int, extra: Sequence[float] = ()
) -> Trajectory:
    """Sample dense pieces on a uniform grid over ``[0, tau]`` (plus ``extra`` times)."""
    if samples < 2:
        raise ValueError("need at least 2 samples")
    ts = np.linspace(0.0, tau, samples)
    extra = np.unique([t for t in extra if 0.0 < t < tau])
    if extra.size:
        # extra times replace grid points they (nearly) coincide with
        tol = 1e-9 * tau
        near = np.abs(ts[1:-1, None] - extra[None, :]).min(axis=1) <= tol
        ts = np.concatenate([ts[:1], ts[1:-1][~near], ts[-1:]])
        ts = np.unique(np.concatenate([ts, extra[np.abs(extra - tau) > tol]]))
    p = np.empty_like(ts)
    v = np.empty_like(ts)
    lam = np.empty_like(ts)
    lo = 0
    for k, piece in enumerate(pieces):
        last = k == len(pieces) - 1
        hi = ts.size if last else int(np.searchsorted(ts, piece.t1, side="right"))
        idx = slice(lo, hi)
        if hi > lo:
            if isinstance(piece, _ShotPiece):
                p[idx], v[idx] = piece.states(ts[idx])
                lam[idx] = [_gap(a, b + a) for a, b in zip(p[idx], v[idx])]
            else:
                for i in range(lo, hi):
                    p[i], v[i] = piece.state(ts[i])
                    lam[i] = piece.gap(ts[i])
        lo = hi
    lam[0] = 0.0
    return Trajectory(ts, p, v, lam, tuple(pieces))


def _gap_for_slope(eps: float, s: float) -> float:
    return math.log((s + 1.0 - eps) / (s + eps))


def solve_unbounded(
    task: ResetTask,
    samples: int = DEFAULT_SAMPLES,
    config: IntegratorConfig = IntegratorConfig(),
    root_tol: float = 1e-14,
) -> tuple[Trajectory, ShootingReport]:
    """Optimal reset protocol for ``task`` ignoring any gap bound."""
    tau, eps = task.tau, task.epsilon
    t_min = model.fastest_reset_time(eps)
    if tau <= t_min:
        raise InaccessibleError(tau, t_min)
    lam_eq = model.lambda_for_error(eps)
    t_max = 3.0 * tau + 10.0
    calls = [0]

    # Shoot in m = log(lambda_f - lambda_eq): monotone and well scaled.
    def residual(m: float) -> float:
        calls[0] += 1
        try:
            arc = backward_arc(eps, lam_eq + math.exp(m), config, t_max)
        except EventNotFound:
            return t_max - tau
        return arc.duration - tau

    def m_of_slope(s: float) -> float:
        return math.log(_gap_for_slope(eps, s) - lam_eq)

    k_fast, k_slow = 3, 6
    m_fast, m_slow = m_of_slope(-0.999 * eps), m_of_slope(-1e-6 * eps)
    r_fast = residual(m_fast)
    while r_fast > 0:
        k_fast += 1
        if k_fast > 14:
            raise ShootingError(
                f"tau={tau!r} is below the reachable time for epsilon={eps!r} "
                f"(scanned p_dot(tau) down to {-eps * (1 - 10.0**-14)!r})"
            )
        m_fast = m_of_slope(-eps * (1.0 - 10.0**-k_fast))
        r_fast = residual(m_fast)
    r_slow = residual(m_slow)
    while r_slow < 0:
        k_slow += 2
        if k_slow > 16:
            raise ShootingError(f"could not bracket the shooting residual for tau={tau!r}")
        m_slow = m_of_slope(-eps * 10.0**-k_slow)
        r_slow = residual(m_slow)
    try:
        m = find_root(residual, (m_slow, m_fast), tol=root_tol)
    except BracketError as exc:  # pragma: no cover - guarded by the scan above
        raise ShootingError(str(exc)) from exc

    lam_f = lam_eq + math.exp(m)
    arc = backward_arc(eps, lam_f, config, t_max)
    traj = sample_pieces(arc.pieces(tau), tau, samples)
    report = ShootingReport(
        parameter=model.master_rhs(eps, lam_f),
        terminal_gap=lam_f,
        residual=abs(arc.duration - tau),
        iterations=calls[0],
        rel_tol=config.rel_tol,
        abs_tol=config.abs_tol,
        root_tol=root_tol,
    )
    return traj, report


def terminal_gap(task: ResetTask, config: IntegratorConfig = IntegratorConfig()) -> float:
    """``lambda_H(tau)`` of the unbounded optimum."""
    _, report = solve_unbounded(task, samples=2, config=config)
    return report.terminal_gap


# --------------------------------------------------------------------------
# Work accounting


def objective(traj: Trajectory) -> float:
    """``J = -integral p_dot * lambda_H dt`` over ``[0, tau]``.

    Uses adaptive quadrature on the dense pieces when present, otherwise
    Simpson's rule on the samples.
    """
    if traj.pieces:
        return float(sum(piece.work() for piece in traj.pieces))
    return float(simpson(-traj.p_dot * traj.lambda_H, x=traj.ts))


def beltrami_drift(traj: Trajectory) -> float:
    """Largest relative deviation of the first integral from its median over the samples."""
    cs = np.array([beltrami_constant(p, v) for p, v in zip(traj.p_e[1:], traj.p_dot[1:])])
    ref = np.median(cs)
    return float(np.max(np.abs(cs - ref)) / ref)


def extra_work(j: float, epsilon: float) -> float:
    return j - model.quasistatic_work(epsilon)


def work_breakdown(traj: Trajectory, epsilon: float, j: float | None = None) -> WorkBreakdown:
    if j is None:
        j = objective(traj)
    lam_tau = float(traj.lambda_H[-1])
    w_qa2 = -lam_tau * (epsilon - 0.5)
    w_sc1 = j - w_qa2
    w_qs = model.quasistatic_work(epsilon)
    return WorkBreakdown(
        j=j, w_sc1=w_sc1, w_qa2=w_qa2, w_sc=w_sc1 + w_qa2, w_qs=w_qs, w_ex=j - w_qs
    )
