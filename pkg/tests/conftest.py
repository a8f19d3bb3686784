"""Shared fixtures, transforms and strategies for the test suite."""
from __future__ import annotations

import functools
import math
import time
from typing import Dict, Tuple

import numpy as np
import pytest
from hypothesis import strategies as st

from csintercept import ObstacleSpec, Pose, ScenarioConfig, load_scenario, plan
from csintercept.geometry import SegmentSpec, compose
from csintercept.model import alpha_coefficients
from csintercept.solver import PlanReport

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE: Dict[int, Tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@functools.lru_cache(maxsize=None)
def planned(name: str) -> Tuple[PlanReport, float]:
    """Plan a bundled fixture once per session; returns (report, wall seconds)."""
    config = load_scenario(name)
    t0 = time.perf_counter()
    report = plan(config)
    return report, time.perf_counter() - t0


def pursuer_endpoint(config: ScenarioConfig, lengths) -> tuple:
    """Compose arcs and straights block by block, jumping to each entry pin."""
    alpha = alpha_coefficients(config)
    pose = config.pursuer
    for i in range(config.size - 1):
        pose = compose(pose, [SegmentSpec(float(alpha[i]), float(lengths[i]))])
        j = i // 3
        if i % 3 == 2 and j < config.n:
            ob = config.obstacles[j]
            pose = Pose(ob.x - ob.radius * math.cos(pose.theta),
                        ob.y + ob.radius * math.sin(pose.theta), pose.theta)
    return pose.x, pose.y


@pytest.fixture(scope="session")
def plan_fixture():
    return planned


def transform_config(config: ScenarioConfig, phi: float = 0.0, shift=(0.0, 0.0),
                     scale: float = 1.0) -> ScenarioConfig:
    """Rotate by ``phi`` about the origin, then scale, then translate."""
    c, s = math.cos(phi), math.sin(phi)

    def pt(x, y):
        return (scale * (c * x - s * y) + shift[0], scale * (s * x + c * y) + shift[1])

    def pose(p: Pose) -> Pose:
        return Pose(*pt(p.x, p.y), p.theta + phi)

    obstacles = tuple(ObstacleSpec(*pt(ob.x, ob.y), ob.radius * scale) for ob in config.obstacles)
    return ScenarioConfig(pose(config.pursuer), config.pursuer_speed * scale,
                          config.turn_radius * scale, pose(config.target),
                          config.target_speed * scale, obstacles)


coord = st.floats(-20.0, 20.0, allow_nan=False, allow_infinity=False)
angle = st.floats(0.0, 2.0 * math.pi, allow_nan=False)


@st.composite
def configs(draw, max_obstacles: int = 3) -> ScenarioConfig:
    n = draw(st.integers(0, max_obstacles))
    vt = draw(st.floats(0.1, 5.0))
    ratio = draw(st.floats(1.2, 6.0))
    obstacles = [ObstacleSpec(draw(coord), draw(coord), draw(st.floats(0.5, 5.0)))
                 for _ in range(n)]
    return ScenarioConfig(Pose(draw(coord), draw(coord), draw(angle)), ratio * vt,
                          draw(st.floats(0.5, 5.0)), Pose(draw(coord), draw(coord), draw(angle)),
                          vt, tuple(obstacles))


@st.composite
def configs_with_lengths(draw, max_obstacles: int = 3):
    """A config plus a nonnegative length vector respecting the arc caps."""
    config = draw(configs(max_obstacles))
    radii = config.circle_radii
    ell = []
    for k in range(config.n + 1):
        cap = 2.0 * math.pi * radii[k] * 0.95
        ell += [draw(st.floats(0.0, cap)), draw(st.floats(0.0, cap)), draw(st.floats(0.0, 30.0))]
    ell.append(draw(st.floats(0.0, 30.0)))
    return config, np.array(ell)
