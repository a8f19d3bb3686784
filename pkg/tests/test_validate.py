import math

import numpy as np
import pytest

from csintercept import Pose, ScenarioConfig, load_scenario, time_breakdown, validate
from csintercept.geometry import InvalidInputError, propagate_arc
from csintercept.solver import PathSolution
from csintercept.model import TurnPattern
from csintercept.validate import (
    CONTINUOUS,
    ControlSchedule,
    ControlSegment,
    default_dt,
    integrate,
    segment_times,
)
from conftest import planned

REF_1A = [2.97, 0, 10.28, 0, 2.74, 10.13, 4.35]
REF_1B = [0, 1.24, 12.96, 0, 6.30, 10.55, 10.35]
REF_REALWORLD = [0, 12.82, 61.05, 0, 16.13, 55.03, 0, 5.36, 89.98, 120.18]


def free_config(speed=6.0, theta=0.0):
    return ScenarioConfig(Pose(0, 0, theta), speed, 1.0, Pose(50, 50, 0), 1.0, ())


def test_straight_endpoint_exact():
    c = free_config(theta=0.7)
    traj = integrate(c, ControlSchedule((ControlSegment(0.0, 1.0),)), 0.01)
    x, y, th = traj.pursuer[-1]
    assert (x, y) == pytest.approx((6 * math.cos(0.7), 6 * math.sin(0.7)), abs=1e-9)


def test_arc_endpoint_matches_closed_form():
    c = free_config()
    dur = (math.pi / 2) / 6.0
    traj = integrate(c, ControlSchedule((ControlSegment(1.0, dur),)), 1e-4)
    p = propagate_arc(Pose(0, 0, 0), 1.0, math.pi / 2)
    assert traj.pursuer[-1, :2] == pytest.approx((p.x, p.y), abs=1e-8)


def _arc_error(dt):
    c = free_config(speed=2.0)
    traj = integrate(c, ControlSchedule((ControlSegment(0.3, 10.0),)), dt)
    p = propagate_arc(Pose(0, 0, 0), 0.3, 20.0)
    return math.hypot(traj.pursuer[-1, 0] - p.x, traj.pursuer[-1, 1] - p.y)


def test_fourth_order_convergence():
    errors = [_arc_error(dt) for dt in (1.0, 0.5, 0.25)]
    assert errors[0] > 0.0
    assert errors[0] / errors[1] >= 8.0 and errors[1] / errors[2] >= 8.0


def test_reference_1a_solution_replays():
    sol = planned("table1a_corrected")[0].best
    # the solver's full-precision version of the tabulated row
    assert np.allclose(sol.lengths, REF_1A, atol=0.05)
    c = load_scenario("table1a_corrected")
    traj = integrate(c, ControlSchedule.from_lengths(c, sol.lengths), 1e-4)
    tx, ty = 20 - 4.35, 12.0
    assert math.hypot(traj.pursuer[-1, 0] - tx, traj.pursuer[-1, 1] - ty) <= 0.05
    rep = validate(c, sol)
    assert rep.miss_distance <= 0.05
    assert abs(rep.final_time - 4.35) <= 0.01


def test_zero_solution_miss_is_initial_gap():
    c = load_scenario("table1b")
    sol = PathSolution.from_lengths(c, TurnPattern.parse("LL"), np.zeros(c.size))
    rep = validate(c, sol, mode=CONTINUOUS)
    assert rep.miss_distance == pytest.approx(c.pursuer.distance_to(c.target), abs=1e-12)


def test_realworld_speed_ratio():
    pursuer = math.fsum(REF_REALWORLD[:-1])
    assert pursuer == pytest.approx(240.37, abs=0.005)
    # 240.37 / 120.18 = 2.00008: the lengths encode a 2:1 speed ratio
    assert pursuer / REF_REALWORLD[-1] == pytest.approx(2.0, abs=2e-4)
    times, total = segment_times(REF_REALWORLD, 800.0, 400.0)
    assert total == pytest.approx(times[-1], rel=1e-3)


def test_time_breakdown_examples():
    times, total = segment_times(REF_1A, 6.0, 1.0)
    # tabulated to two decimals; 10.13 / 6 = 1.688 is printed as 1.67
    assert np.allclose(times, [0.50, 0, 1.72, 0, 0.46, 1.67, 4.35], atol=0.02)
    assert total == pytest.approx(4.35, abs=0.01)
    times, total = segment_times(REF_1B, 6.0, 2.0)
    assert np.allclose(times[:-1], [0, 0.21, 2.16, 0, 1.05, 1.76], atol=0.01)
    assert total == pytest.approx(5.18, abs=0.01)
    assert segment_times(np.zeros(7), 6.0, 1.0) == ((0.0,) * 7, 0.0)


def test_static_target_time_rules():
    times, total = segment_times([1, 0, 2, 0], 2.0, 0.0)
    assert times[-1] == total == 1.5
    with pytest.raises(InvalidInputError):
        segment_times([1, 0, 2, 1], 2.0, 0.0)


def test_invalid_dt():
    c = free_config()
    sched = ControlSchedule((ControlSegment(0.0, 1.0),))
    for dt in (0.0, -1.0, float("nan"), 0.5):
        with pytest.raises(InvalidInputError):
            integrate(c, sched, dt)


def test_default_dt():
    sched = ControlSchedule((ControlSegment(0.0, 2.0), ControlSegment(1.0, 0.5)))
    assert default_dt(sched) == pytest.approx(0.5 / 1000)
    assert default_dt(ControlSchedule((ControlSegment(0.0, 0.0),))) > 0.0


@pytest.mark.parametrize("name", ["table1b", "table4b"])
def test_speed_constancy_and_straight_headings(name):
    c = load_scenario(name)
    sol = planned(name)[0].best
    sched = ControlSchedule.from_lengths(c, sol.lengths)
    traj = integrate(c, sched, default_dt(sched), mode=CONTINUOUS)
    step = np.hypot(np.diff(traj.pursuer[:, 0]), np.diff(traj.pursuer[:, 1]))
    dts = np.diff(traj.t)
    moving = dts > 0
    # chord of one step vs speed x dt differs by (w dt)^2 / 24 on arcs
    assert np.allclose(step[moving], c.pursuer_speed * dts[moving], rtol=1e-6)
    tstep = np.hypot(np.diff(traj.target[:, 0]), np.diff(traj.target[:, 1]))
    assert np.allclose(tstep[moving], c.target_speed * dts[moving], rtol=1e-6)
    for i, (lo, hi) in enumerate(traj.segment_slices):
        if i % 3 == 2 and hi > lo:
            th = traj.pursuer[lo:hi, 2]
            assert np.max(np.abs(th - th[0])) <= 1e-12


@pytest.mark.parametrize("name", ["table1a_corrected", "table1b", "table4b", "table4c"])
def test_interception_of_solver_output(name):
    c = load_scenario(name)
    sol = planned(name)[0].best
    rep = validate(c, sol)
    bound = 10 * 1e-10 * c.length_scale + 1e-7 * c.length_scale
    assert rep.miss_distance <= bound
    assert rep.time_error <= 1e-9
    assert rep.length_error <= 1e-6 * c.length_scale
    assert len(rep.pin_jumps) == len(rep.tangency_gap) == c.n
