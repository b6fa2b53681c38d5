import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qubit_reset import model
from qubit_reset.bounded import tau_c1
from qubit_reset.unbounded import Trajectory, objective, work_breakdown
from qubit_reset.verify import (
    ConstantGap,
    ControlProtocol,
    SampledGap,
    _stieltjes,
    perturbed_extra_work,
    protocol_from_trajectory,
    reset_error,
    second_law_margin,
    simulate,
    work_direct,
)


def test_constant_gap_matches_relaxation():
    sim = simulate(ControlProtocol([ConstantGap(15.0, 12.0)]), 0.5)
    exact = np.array([model.relaxation_solution(t, 0.5, 0.0, 15.0) for t in sim.ts])
    assert np.max(np.abs(sim.p_e - exact)) < 1e-9


def test_equilibrium_gap_holds_population():
    p0 = 0.07
    sim = simulate(ControlProtocol([ConstantGap(model.lambda_for_error(p0), 9.0)]), p0)
    assert np.max(np.abs(sim.p_e - p0)) < 1e-11


def test_zero_duration_protocol_keeps_p0():
    sim = simulate(ControlProtocol([ConstantGap(3.0, 0.0)]), 0.3)
    assert reset_error(sim) == 0.3


def test_all_boundary_protocol_reaches_target():
    t1 = tau_c1(15.0, 1e-5)
    sim = simulate(ControlProtocol([ConstantGap(15.0, t1)]), 0.5)
    assert reset_error(sim) == pytest.approx(1e-5, rel=1e-8)
    # d lambda = 0 on the segment: only the final quench contributes
    assert work_direct(sim) == pytest.approx(15.0 * (0.5 - 1e-5), rel=1e-12)
    assert objective(sim) == pytest.approx(15.0 * (0.5 - 1e-5), rel=1e-8)


def test_static_protocol_costs_nothing():
    ts = np.linspace(0.0, 3.0, 7)
    traj = Trajectory(ts, np.full_like(ts, 0.5), np.zeros_like(ts), np.zeros_like(ts))
    assert work_direct(traj) == 0.0


@pytest.mark.parametrize("fixture", ["unbounded_25", "unbounded_100"])
def test_simulating_the_optimum_reproduces_it(fixture, request):
    traj, _ = request.getfixturevalue(fixture)
    sim = simulate(protocol_from_trajectory(traj), 0.5)
    replay = np.array([sim.state(t)[0] for t in traj.ts])
    assert np.max(np.abs(replay - traj.p_e)) < 1e-7
    assert reset_error(sim) == pytest.approx(1e-3, rel=1e-3)
    assert work_direct(sim) == pytest.approx(objective(sim), rel=1e-6)


def test_two_work_routes_agree_on_optimum(unbounded_100, touched_20):
    traj, _ = unbounded_100
    assert work_direct(traj) == pytest.approx(objective(traj), rel=1e-6)
    assert work_direct(touched_20.trajectory) == pytest.approx(touched_20.work.j, rel=1e-6)


def test_touched_protocol_closure(touched_20):
    sim = simulate(touched_20.protocol, 0.5)
    assert reset_error(sim) == pytest.approx(1e-5, rel=1e-3)
    assert work_direct(sim) == pytest.approx(objective(sim), rel=1e-6)


def test_sampled_protocol_closure(unbounded_25):
    traj, _ = unbounded_25
    sim = simulate(protocol_from_trajectory(traj, exact=False), 0.5)
    assert reset_error(sim) == pytest.approx(1e-3, rel=1e-3)
    assert work_direct(sim) == pytest.approx(objective(sim), rel=1e-4)


def test_bump_perturbations_cost_more(unbounded_25):
    traj, _ = unbounded_25
    best = work_breakdown(traj, 1e-3).w_ex
    for center, width, amp in [(8.0, 3.0, 0.01), (14.0, 2.0, -0.01)]:
        w_ex, _ = perturbed_extra_work(traj, 1e-3, center, width, amp)
        assert w_ex > best


def test_protocol_validation():
    with pytest.raises(ValueError):
        ControlProtocol([])
    with pytest.raises(ValueError):
        SampledGap([0.0, 1.0, 1.0], [0.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        SampledGap([0.0, 1.0], [0.0, -1.0])
    with pytest.raises(ValueError):
        ControlProtocol([ConstantGap(2.0, 1.0), SampledGap([5.0, 6.0], [1.0, 1.0])])
    with pytest.raises(ValueError):
        ControlProtocol.from_samples([1.0, 2.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        ConstantGap(0.0, 1.0)


def test_protocol_lookup_and_samples():
    proto = ControlProtocol([SampledGap([0.0, 2.0], [0.0, 4.0]), ConstantGap(4.0, 3.0)])
    assert proto.total_duration == 5.0
    assert proto.gap(1.0) == 2.0
    assert proto.gap(4.0) == 4.0
    ts, vs = proto.samples()
    assert list(ts) == [0.0, 2.0, 5.0]
    assert list(vs) == [0.0, 4.0, 4.0]


def test_stieltjes_polynomial_and_closed_path():
    x = np.sort(np.random.default_rng(3).uniform(0.0, 2.0, 40))
    x = np.concatenate([[0.0], x, [2.0]])
    assert _stieltjes(x**2, x) == pytest.approx(8.0 / 3.0, rel=1e-10)
    loop = np.concatenate([x, x[::-1][1:]])
    assert _stieltjes(loop**2, loop) == pytest.approx(0.0, abs=1e-12)
    flat = np.array([0.0, 1.0, 1.0, 1.0, 2.0])
    assert _stieltjes(np.ones(5), flat) == pytest.approx(2.0)


@settings(max_examples=25)
@given(
    st.lists(st.floats(0.05, 12.0), min_size=2, max_size=6),
    st.floats(0.5, 20.0),
)
def test_second_law(levels, tau):
    ts = np.linspace(0.0, tau, len(levels) + 1)
    sim = simulate(ControlProtocol.from_samples(ts, [0.0] + levels), 0.5, samples=300)
    if reset_error(sim) >= 0.5:
        return
    assert second_law_margin(sim) >= -1e-9
