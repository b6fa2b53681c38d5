"""Closed-form physics of a driven two-level system in a thermal bath.

Units: energies are dimensionless gaps ``beta * lambda``, times are ``gamma * t``
and work is measured in multiples of ``1/beta``.  Nothing here accepts SI values.

The system is described by the excited-state population ``p_e`` alone (the
ground-state population is ``1 - p_e``); the control is the effective gap
``lambda_H`` of the total Hamiltonian.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

LN2 = math.log(2.0)

# Beyond this gap e^{-lambda} is below double rounding of O(1) quantities.
LARGE_GAP = 30.0


class DomainError(ValueError):
    """An argument lies outside the domain of a closed-form relation."""


class InaccessibleError(DomainError):
    """``tau`` is shorter than the fastest possible reset (the first critical time)."""

    def __init__(self, tau: float, tau_c1: float) -> None:
        self.tau = tau
        self.tau_c1 = tau_c1
        super().__init__(f"tau={tau!r} is below the first critical time tau_c1={tau_c1!r}")


@dataclass(frozen=True)
class ResetTask:
    """Reset ``p_e`` from 1/2 to ``epsilon`` in time ``tau``.

    Attributes:
        tau: Dimensionless reset time ``gamma * tau``.
        epsilon: Target excited-state population at ``t = tau``.
        lambda_max: Optional bound on the effective gap, ``beta * lambda_m``.
    """

    tau: float
    epsilon: float
    lambda_max: float | None = None

    def __post_init__(self) -> None:
        if not (self.tau > 0 and math.isfinite(self.tau)):
            raise DomainError(f"tau must be positive and finite, got {self.tau!r}")
        if not 0.0 < self.epsilon < 0.5:
            raise DomainError(f"epsilon must lie in (0, 1/2), got {self.epsilon!r}")
        if self.lambda_max is not None and not self.lambda_max > 0:
            raise DomainError(f"lambda_max must be positive, got {self.lambda_max!r}")

    @property
    def bounded(self) -> bool:
        return self.lambda_max is not None

    @property
    def feasible(self) -> bool:
        """False when the bound's fixed point already lies above ``epsilon``."""
        if self.lambda_max is None:
            return True
        return self.epsilon > equilibrium_population(self.lambda_max)


@dataclass(frozen=True)
class PopulationState:
    p_e: float
    p_dot: float

    @property
    def admissible(self) -> bool:
        return 0.0 < self.p_e <= 0.5 and self.p_dot > -self.p_e


def _check_gap(lam: float) -> None:
    if not lam > 0:
        raise DomainError(f"gap must be positive, got {lam!r}")


def mean_phonon(lam: float) -> float:
    """Bose occupation ``1/(e^lam - 1)`` of the bath mode at gap ``lam``."""
    _check_gap(lam)
    if lam > LARGE_GAP:
        return math.exp(-lam)
    return 1.0 / math.expm1(lam)


def equilibrium_population(lam: float) -> float:
    """Thermal excited population ``e^-lam / (1 + e^-lam)``."""
    _check_gap(lam)
    e = math.exp(-lam)
    return e / (1.0 + e)


def lambda_for_error(epsilon: float) -> float:
    """Gap whose equilibrium population is ``epsilon``."""
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon!r}")
    return math.log1p(-epsilon) - math.log(epsilon)


def relaxation_rate(lam: float) -> float:
    """Total relaxation rate ``2 n + 1`` at fixed gap."""
    _check_gap(lam)
    if lam > LARGE_GAP:
        return 1.0 + 2.0 * math.exp(-lam)
    return 1.0 / math.tanh(0.5 * lam)


def master_rhs(p_e: float, lam: float) -> float:
    """Rate ``dp_e/dt`` of the excited population at gap ``lam``.

    Evaluated as ``n (1 - 2 p_e) - p_e``, which equals
    ``(e^-lam (1 - p_e) - p_e) / (1 - e^-lam)`` but stays accurate at small gaps.
    """
    _check_gap(lam)
    if not 0.0 < p_e < 1.0:
        raise DomainError(f"population must lie in (0, 1), got {p_e!r}")
    return mean_phonon(lam) * (1.0 - 2.0 * p_e) - p_e


def invert_control(p_e: float, p_dot: float) -> float:
    """Gap that produces the rate ``p_dot`` at population ``p_e``.

    Solves ``master_rhs(p_e, lam) = p_dot`` for ``lam``:
    ``lam = ln((p_dot + 1 - p_e) / (p_dot + p_e))``.
    """
    if not 0.0 < p_e < 0.5:
        raise DomainError(f"population must lie in (0, 1/2), got {p_e!r}")
    w = p_dot + p_e
    if not w > 0:
        raise DomainError(
            f"rate {p_dot!r} is at or beyond the infinite-gap limit -p_e = {-p_e!r}"
        )
    return math.log1p((1.0 - 2.0 * p_e) / w)


def control_rate(p_e: float, lam: float) -> float:
    """Time derivative of the gap along an optimal (Euler-Lagrange) trajectory."""
    _check_gap(lam)
    if not 0.0 < p_e < 0.5:
        raise DomainError(f"population must lie in (0, 1/2), got {p_e!r}")
    e = math.exp(-lam)
    one_minus_e = -math.expm1(-lam)
    num = 2.0 * (1.0 - p_e * (1.0 + e)) * (p_e - e * (1.0 - p_e))
    den = (1.0 - 2.0 * p_e) * (p_e * one_minus_e + e) * one_minus_e
    return num / den


def relaxation_solution(t: float, p_start: float, t_start: float, lambda_m: float) -> float:
    """Population at ``t`` under a constant gap ``lambda_m``, given ``p(t_start)``.

    Also valid for ``t < t_start`` (backward anchoring, e.g. from ``p(tau) = epsilon``).
    """
    n = mean_phonon(lambda_m)
    rate = 2.0 * n + 1.0
    p_inf = n / rate
    return p_inf + (p_start - p_inf) * math.exp(-rate * (t - t_start))


def fastest_reset_time(epsilon: float) -> float:
    """Time for pure decay (infinite gap) to bring ``p_e`` from 1/2 to ``epsilon``."""
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon!r}")
    return -math.log(2.0 * epsilon)


def shannon_entropy(epsilon: float) -> float:
    """Binary Shannon entropy in nats; 0 at the endpoints."""
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"probability must lie in [0, 1], got {epsilon!r}")
    s = 0.0
    if epsilon > 0.0:
        s -= epsilon * math.log(epsilon)
    if epsilon < 1.0:
        s -= (1.0 - epsilon) * math.log1p(-epsilon)
    return s


def quasistatic_work(epsilon: float) -> float:
    """Free-energy cost ``ln 2 - S(epsilon)`` of an infinitely slow reset."""
    if not 0.0 < epsilon < 0.5:
        raise DomainError(f"epsilon must lie in (0, 1/2), got {epsilon!r}")
    return LN2 - shannon_entropy(epsilon)
