import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qubit_reset import model
from qubit_reset.model import DomainError, ResetTask

# 1/(e^15 - 1) and binary entropies evaluated with mpmath at 30 digits
MEAN_PHONON_15 = 3.0590241407808410197e-7
ENTROPY_0_1 = 0.32508297339144822687
W_QS_1E_5 = 0.6930220513552957738

gaps = st.floats(0.1, 30.0)
populations = st.floats(1e-8, 0.499)


def test_mean_phonon_values():
    assert model.mean_phonon(math.log(2.0)) == pytest.approx(1.0, rel=1e-15)
    assert model.mean_phonon(15.0) == pytest.approx(MEAN_PHONON_15, rel=1e-14)
    assert model.mean_phonon(60.0) == pytest.approx(math.exp(-60.0), rel=1e-15)


def test_mean_phonon_rejects_non_positive_gap():
    with pytest.raises(DomainError):
        model.mean_phonon(0.0)


def test_equilibrium_population_values():
    assert model.equilibrium_population(1e-12) == pytest.approx(0.5, abs=1e-12)
    assert model.equilibrium_population(math.log(99999.0)) == pytest.approx(1e-5, rel=1e-12)
    assert model.equilibrium_population(15.0) == pytest.approx(3.0590e-7, rel=1e-4)


def test_lambda_for_error_values():
    assert model.lambda_for_error(1e-3) == pytest.approx(math.log(999.0), rel=1e-15)
    assert model.lambda_for_error(1e-5) == pytest.approx(11.5129, abs=1e-4)
    assert model.lambda_for_error(0.5 - 1e-12) < 1e-11
    for bad in (0.0, 0.5, -1.0):
        with pytest.raises(DomainError):
            model.lambda_for_error(bad)


def test_master_rhs_values():
    assert model.master_rhs(0.5, 3.0) == pytest.approx(-0.5, rel=1e-14)
    assert model.master_rhs(0.3, 700.0) == pytest.approx(-0.3, rel=1e-14)
    with pytest.raises(DomainError):
        model.master_rhs(1.2, 1.0)


def test_invert_control_values():
    assert model.invert_control(1e-5, 0.0) == pytest.approx(math.log(99999.0), rel=1e-13)
    lam = model.invert_control(0.3, -0.2)
    assert lam == pytest.approx(math.log(5.0), rel=1e-14)
    assert model.master_rhs(0.3, lam) == pytest.approx(-0.2, rel=1e-13)
    with pytest.raises(DomainError):
        model.invert_control(0.5, -0.1)
    with pytest.raises(DomainError):
        model.invert_control(0.2, -0.2)


def test_control_rate_values():
    lam = 2.0
    assert model.control_rate(model.equilibrium_population(lam), lam) == pytest.approx(0.0, abs=1e-15)
    assert model.control_rate(0.3, 2.0) > 0


def test_relaxation_solution_limits():
    assert model.relaxation_solution(3.0, 0.4, 3.0, 2.0) == 0.4
    n = model.mean_phonon(2.0)
    assert model.relaxation_solution(1e3, 0.4, 0.0, 2.0) == pytest.approx(n / (2 * n + 1), rel=1e-14)


def test_entropy_and_quasistatic_work():
    assert model.shannon_entropy(0.5) == pytest.approx(math.log(2.0), rel=1e-15)
    assert model.shannon_entropy(0.0) == 0.0
    assert model.shannon_entropy(0.1) == pytest.approx(ENTROPY_0_1, rel=1e-14)
    assert model.quasistatic_work(1e-5) == pytest.approx(W_QS_1E_5, rel=1e-14)
    assert model.quasistatic_work(0.5 - 1e-9) < 1e-15
    assert model.quasistatic_work(1e-300) == pytest.approx(model.LN2, rel=1e-15)


def test_reset_task_validation():
    assert ResetTask(1.0, 0.1).feasible
    assert not ResetTask(1.0, 1e-6, 11.0).feasible
    for args in [(0.0, 0.1), (1.0, 0.5), (1.0, 0.1, -2.0), (math.inf, 0.1)]:
        with pytest.raises(DomainError):
            ResetTask(*args)


@given(populations, st.floats(0.0, 1.0))
def test_round_trip_rate_to_gap(p, frac):
    # admissible rates lie in (-p, +inf); sample a broad slice of them
    p_dot = -p * (1.0 - frac) + frac * 2.0 * (0.5 - p)
    if p_dot + p <= 0:
        return
    lam = model.invert_control(p, p_dot)
    assert model.master_rhs(p, lam) == pytest.approx(p_dot, rel=1e-10, abs=1e-15)


@given(gaps)
def test_fixed_point(lam):
    assert abs(model.master_rhs(model.equilibrium_population(lam), lam)) < 1e-14


@given(st.floats(1e-8, 0.499))
def test_error_gap_inverse(eps):
    assert model.equilibrium_population(model.lambda_for_error(eps)) == pytest.approx(eps, rel=1e-10)


@given(st.floats(0.5, 20.0), st.floats(0.01, 0.49))
def test_relaxation_solution_obeys_dynamics(lam, p0):
    h = 1e-5
    for t in np.linspace(0.0, 3.0, 7):
        fd = (
            model.relaxation_solution(t + h, p0, 0.0, lam)
            - model.relaxation_solution(t - h, p0, 0.0, lam)
        ) / (2 * h)
        p = model.relaxation_solution(t, p0, 0.0, lam)
        assert fd == pytest.approx(model.master_rhs(p, lam), abs=1e-8)


@given(gaps, st.floats(0.0, 1.0))
def test_control_rate_positive_above_equilibrium(lam, frac):
    peq = model.equilibrium_population(lam)
    p = peq + frac * (0.5 - peq)
    if not peq < p < 0.5:
        return
    assert model.control_rate(p, lam) > 0
