"""Forward simulation of gap protocols and a second, independent work estimate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np
from scipy.interpolate import CubicSpline

from . import model
from .model import DomainError
from .ode import IntegrationError, IntegratorConfig, SampledCurve, find_root, integrate
from .unbounded import DEFAULT_SAMPLES, Trajectory, _Piece, objective, sample_pieces


@dataclass(frozen=True)
class SampledGap:
    """Gap samples on absolute times ``ts``, linear in between.

    ``exact`` optionally supplies the continuous curve the samples came from;
    :func:`simulate` prefers it when present.
    """

    ts: np.ndarray
    values: np.ndarray
    exact: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        ts = np.asarray(self.ts, dtype=float)
        vs = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "ts", ts)
        object.__setattr__(self, "values", vs)
        if ts.ndim != 1 or ts.size < 2 or ts.size != vs.size:
            raise ValueError("SampledGap needs at least two aligned (t, value) samples")
        if np.any(np.diff(ts) <= 0):
            raise ValueError("SampledGap times must be strictly increasing")
        if np.any(vs < 0) or not np.all(np.isfinite(vs)):
            raise ValueError("gap values must be finite and non-negative")

    @property
    def duration(self) -> float:
        return float(self.ts[-1] - self.ts[0])

    def __call__(self, t: float) -> float:
        if self.exact is not None:
            return self.exact(t)
        return float(np.interp(t, self.ts, self.values))


@dataclass(frozen=True)
class ConstantGap:
    value: float
    duration: float

    def __post_init__(self) -> None:
        if not self.value > 0:
            raise ValueError("constant gap must be positive")
        if not self.duration >= 0:
            raise ValueError("duration must be non-negative")


Segment = Union[SampledGap, ConstantGap]


@dataclass
class ControlProtocol:
    """Contiguous gap segments on ``[0, total_duration]``.

    With ``quench_endpoints`` the gap is 0 just before ``t = 0`` and just after
    ``t = tau``; the final quench only adds the work ``-lambda(tau) (p - 1/2)``.
    """

    segments: list[Segment]
    quench_endpoints: bool = True
    starts: list[float] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.segments:
            raise ValueError("protocol has no segments")
        starts, t = [], 0.0
        for seg in self.segments:
            if isinstance(seg, SampledGap) and abs(seg.ts[0] - t) > 1e-9 * max(1.0, t):
                raise ValueError(f"segment starting at {seg.ts[0]!r} does not follow {t!r}")
            starts.append(t)
            t += seg.duration
        self.starts = starts

    @property
    def total_duration(self) -> float:
        return self.starts[-1] + self.segments[-1].duration

    def gap(self, t: float) -> float:
        for start, seg in zip(reversed(self.starts), reversed(self.segments)):
            if t >= start:
                return seg.value if isinstance(seg, ConstantGap) else seg(t)
        seg = self.segments[0]
        return seg.value if isinstance(seg, ConstantGap) else seg(t)

    def samples(self, n_constant: int = 2) -> tuple[np.ndarray, np.ndarray]:
        """``(t, lambda)`` samples suitable for the protocol CSV."""
        ts, vs = [], []
        for start, seg in zip(self.starts, self.segments):
            if isinstance(seg, ConstantGap):
                if seg.duration == 0:
                    continue
                t = np.linspace(start, start + seg.duration, n_constant)
                v = np.full_like(t, seg.value)
            else:
                t, v = seg.ts, seg.values
            if ts and t[0] <= ts[-1][-1]:
                t, v = t[1:], v[1:]
            ts.append(t)
            vs.append(v)
        return np.concatenate(ts), np.concatenate(vs)

    @classmethod
    def from_samples(cls, ts: Sequence[float], values: Sequence[float]) -> "ControlProtocol":
        ts = np.asarray(ts, dtype=float)
        if ts.size < 2 or ts[0] != 0.0:
            raise ValueError("protocol samples must start at t = 0")
        return cls([SampledGap(ts, values)])


def protocol_from_trajectory(traj: Trajectory, exact: bool = True) -> ControlProtocol:
    """Protocol reproducing ``traj``'s gap; ``exact`` keeps the dense curve attached."""
    return ControlProtocol([SampledGap(traj.ts, traj.lambda_H, traj.gap if exact else None)])


def _rate(p: float, lam: float) -> float:
    if lam <= 0.0:
        if abs(1.0 - 2.0 * p) < 1e-12:
            return -0.5
        raise IntegrationError(f"zero gap at population {p!r} != 1/2 (instantaneous relaxation)")
    # Linear in p; evaluated off the physical domain too so that the
    # stepper can reject overshooting trial stages instead of failing.
    return model.mean_phonon(lam) * (1.0 - 2.0 * p) - p


@dataclass
class _SimulatedPiece(_Piece):
    """Simulated segment; ``curve`` carries ``(p_e, accumulated work)``."""

    t0: float
    t1: float
    curve: SampledCurve
    gap_fn: Callable[[float], float]

    def state(self, t):
        p = float(self.curve(t)[0])
        lam = self.gap_fn(t)
        return p, _rate(p, lam)

    def gap(self, t):
        return self.gap_fn(t)

    def work(self):
        return float(self.curve.y_final[1] - self.curve.ys[0][1])


def _driven(t, y, gap_fn):
    lam = gap_fn(t)
    v = _rate(y[0], lam)
    return [v, -v * lam]


def simulate(
    protocol: ControlProtocol,
    p0: float,
    samples: int = DEFAULT_SAMPLES,
    config: IntegratorConfig = IntegratorConfig(),
    nodes_in_output: bool = True,
) -> Trajectory:
    """Integrate the population dynamics under ``protocol`` from ``p0``.

    The output holds ``samples`` uniform times plus, with ``nodes_in_output``,
    every sampled-gap node (where a piecewise-linear gap has its kinks).
    """
    if not 0.0 < p0 < 1.0:
        raise DomainError(f"p0 must lie in (0, 1), got {p0!r}")
    tau = protocol.total_duration
    if tau == 0.0:
        return Trajectory(
            np.array([0.0]), np.array([p0]), np.array([0.0]),
            np.array([protocol.gap(0.0)]),
        )
    pieces: list[_Piece] = []
    p = p0
    for start, seg in zip(protocol.starts, protocol.segments):
        if seg.duration == 0:
            continue
        end = start + seg.duration
        if isinstance(seg, ConstantGap):
            gap_fn = (lambda v: lambda t: v)(seg.value)
        else:
            gap_fn = seg
        curve = integrate(lambda t, y, g=gap_fn: _driven(t, y, g), [p, 0.0], (start, end), config)
        pieces.append(_SimulatedPiece(start, end, curve, gap_fn))
        p = float(curve.y_final[0])
    nodes = [t for seg in protocol.segments if isinstance(seg, SampledGap) for t in seg.ts]
    traj = sample_pieces(pieces, tau, samples, extra=nodes if nodes_in_output else ())
    traj.lambda_H[0] = protocol.gap(0.0)
    return traj


def _stieltjes(y: np.ndarray, x: np.ndarray) -> float:
    """``integral y dx`` along the sampled path, split into monotone runs of ``x``.

    On each run ``y`` is interpolated as a cubic spline in ``x``; runs of
    constant ``x`` contribute nothing.  Nodes closer than ``1e-9`` of the
    run's span (e.g. a gap arriving at a bound) are merged before fitting.
    """
    dx = np.diff(x)
    sign = np.sign(dx)
    total = 0.0
    i = 0
    n = dx.size
    while i < n:
        if sign[i] == 0:
            i += 1
            continue
        j = i
        while j + 1 < n and sign[j + 1] == sign[i]:
            j += 1
        xs, ys = x[i : j + 2], y[i : j + 2]
        if sign[i] < 0:
            xs, ys = xs[::-1], ys[::-1]
        part = _run_integral(xs, ys)
        total += part if sign[i] > 0 else -part
        i = j + 1
    return float(total)


def _run_integral(xs: np.ndarray, ys: np.ndarray) -> float:
    span = xs[-1] - xs[0]
    keep = [0]
    for k in range(1, xs.size):
        if xs[k] - xs[keep[-1]] > 1e-9 * span:
            keep.append(k)
    keep[-1] = xs.size - 1
    xs, ys = xs[keep], ys[keep]
    if xs.size >= 4:
        return float(CubicSpline(xs, ys).integrate(xs[0], xs[-1]))
    return float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))


def _refine_start(traj: Trajectory, points: int = 80) -> tuple[np.ndarray, np.ndarray]:
    # The gap leaves 0 through a thin boundary layer; resolve it geometrically
    # from the dense pieces when they are available.
    p, lam = traj.p_e, traj.lambda_H
    if not traj.pieces or traj.ts.size < 3:
        return p, lam
    t1 = float(traj.ts[1])
    ts = t1 * np.logspace(-9, 0, points)[:-1]
    p_in = np.array([traj.state(t)[0] for t in ts])
    lam_in = np.array([traj.gap(t) for t in ts])
    return (
        np.concatenate([p[:1], p_in, p[1:]]),
        np.concatenate([lam[:1], lam_in, lam[1:]]),
    )


def step_one_work(traj: Trajectory) -> float:
    """``integral (p_e - 1/2) d lambda_H`` over the driven step."""
    p, lam = _refine_start(traj)
    return _stieltjes(p - 0.5, lam)


def work_direct(traj: Trajectory) -> float:
    """Total work of driven step plus final quench, without using ``J``.

    Assumes the gap starts from 0 (the initial quench from ``lambda = 0`` is
    free at ``p_e = 1/2``).
    """
    w1 = step_one_work(traj)
    w_quench = -float(traj.lambda_H[-1]) * (float(traj.p_e[-1]) - 0.5)
    return w1 + w_quench


def bump(t: float, center: float, width: float) -> float:
    """Smooth, compactly supported bump of height 1 on ``|t - center| < width``."""
    u = (t - center) / width
    if abs(u) >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - u * u))


def perturbed_extra_work(
    traj: Trajectory,
    epsilon: float,
    center: float,
    width: float,
    amplitude: float,
    config: IntegratorConfig = IntegratorConfig(),
) -> tuple[float, float]:
    """Extra work of ``traj``'s gap times ``1 + amplitude * bump``, endpoint restored.

    A second bump over the last fifth of ``[0, tau]`` is rescaled by root
    finding so the perturbed protocol still ends at ``epsilon``.  Returns
    ``(W_ex, correction amplitude)``.
    """
    tau = traj.tau
    c2, w2 = 0.9 * tau, 0.1 * tau

    def run(b: float) -> Trajectory:
        def gap(t):
            return traj.gap(t) * (1.0 + amplitude * bump(t, center, width) + b * bump(t, c2, w2))

        protocol = ControlProtocol([SampledGap(traj.ts, traj.lambda_H, gap)])
        return simulate(protocol, 0.5, samples=2, config=config, nodes_in_output=False)

    b = find_root(lambda b: reset_error(run(b)) - epsilon, (-0.5, 0.5), tol=1e-14)
    sim = run(b)
    return objective(sim) - model.quasistatic_work(epsilon), b


def reset_error(traj: Trajectory) -> float:
    return float(traj.p_e[-1])


def second_law_margin(traj: Trajectory) -> float:
    """``work_direct - W_qs(p_final)``; non-negative for any protocol from 1/2."""
    eps = reset_error(traj)
    return work_direct(traj) - model.quasistatic_work(eps)


__all__ = [
    "ConstantGap",
    "ControlProtocol",
    "SampledGap",
    "bump",
    "perturbed_extra_work",
    "protocol_from_trajectory",
    "reset_error",
    "second_law_margin",
    "simulate",
    "step_one_work",
    "work_direct",
]
