"""Acceptance criteria 1-8, one test each, at the required tolerances.

Every test records its verdict in ``conftest.ACCEPTANCE`` (printed in the
terminal summary) and prints one line per sub-check.
"""
import math
import time
from typing import List, Tuple

import numpy as np
import pytest

from csintercept import (
    ObstacleSpec,
    Pose,
    ScenarioConfig,
    jacobian,
    load_scenario,
    plan,
    residuals,
    time_breakdown,
    validate,
)
from csintercept.geo import GeoPoint, project
from csintercept.geometry import propagate_arc, propagate_straight
from csintercept.model import target_position
from csintercept.oracle import grid_oracle
from csintercept.validate import ControlSchedule, ControlSegment, integrate
from conftest import ACCEPTANCE, planned, pursuer_endpoint, transform_config

Check = Tuple[str, bool, str]

REF_LENGTHS = {
    "table1a_corrected": ([2.97, 0, 10.28, 0, 2.74, 10.13, 4.35], 30.47),
    "table1b": ([0, 1.24, 12.96, 0, 6.30, 10.55, 10.35], 41.40),
    "table1c_corrected": ([0, 2.59, 11.56, 0, 2.60, 10.71, 13.73], 41.19),
}
REF_TIMES = {
    "table1a_corrected": ([0.50, 0, 1.72, 0, 0.46, 1.67, 4.35], 4.35),
    "table1b": ([0, 0.21, 2.16, 0, 1.05, 1.76, 5.18], 5.18),
    "table1c_corrected": ([0, 0.43, 1.93, 0, 0.43, 1.78, 4.57], 4.57),
}
REF_TWO_OBSTACLES = {
    "table4a": (76.45, (31.9, 25.0), "RS+RS+RS+S_T"),
    "table4b": (62.62, (25.0, 25.85), "RS+RS+RS+S_T"),
    "table4c": (45.39, (25.0, 14.8), "RS+RS+LS+S_T"),
    "table4d": (50.30, (29.38, 14.73), "RS+RS+LS+S_T"),
}
REF_CITIES = [
    ("Satkhira", "22°44'15.66\"N", "89°3'25.65\"E", 9133.10, 2528.32),
    ("Narail", "23°11'44.15\"N", "89°29'49.47\"E", 9147.19, 2579.23),
    ("Narayanganj", "23°38'35.46\"N", "90°28'55.86\"E", 9216.63, 2629.00),
    ("Feni", "23°1'34.54\"N", "91°22'43.76\"E", 9351.30, 2560.40),
]


def finish(number: int, checks: List[Check]) -> None:
    failed = [c for c in checks if not c[1]]
    for name, ok, detail in checks:
        print(f"  [{'pass' if ok else 'FAIL'}] {name}: {detail}")
    summary = f"{len(checks) - len(failed)}/{len(checks)} checks"
    if failed:
        summary += "; failing: " + ", ".join(c[0] for c in failed)
    ACCEPTANCE[number] = (not failed, summary)
    print(f"criterion {number}: {'PASS' if not failed else 'FAIL'}  {summary}")
    assert not failed, "; ".join(f"{n}: {d}" for n, _, d in failed)


def rel_check(name: str, got: float, want: float, rtol: float) -> Check:
    err = abs(got - want) / abs(want)
    return (name, err <= rtol, f"{got:.4f} vs {want} ({100 * err:.2f}%, limit {100 * rtol:g}%)")


def test_criterion_1_single_obstacle_lengths():
    checks: List[Check] = []
    for name, (row, f) in REF_LENGTHS.items():
        config = load_scenario(name)
        t0 = time.perf_counter()
        best = plan(config).best
        wall = time.perf_counter() - t0
        checks.append(rel_check(f"{name} f", best.objective, f, 0.01))
        nz = [i for i, v in enumerate(row) if v != 0.0]
        dev = max(abs(best.lengths[i] - row[i]) for i in nz)
        checks.append((f"{name} lengths", dev <= 0.05, f"max |dl| on nonzero entries {dev:.4f} (limit 0.05)"))
        checks.append((f"{name} runtime", wall < 1.0, f"{wall:.3f} s (limit 1 s)"))
    # informational: the obstacle placement as printed has a different optimum
    raw = planned("table1a")[0].best
    print(f"  [info] table1a as printed (obstacle (4,0)): f={raw.objective:.4f} {raw.pattern}")
    finish(1, checks)


def test_criterion_2_time_breakdown():
    checks: List[Check] = []
    for name, (row, total) in REF_TIMES.items():
        times, t = time_breakdown(planned(name)[0].best)
        dev = max(abs(a - b) for a, b in zip(times, row))
        checks.append((f"{name} segment times", dev <= 0.02, f"max |dt| {dev:.4f} (limit 0.02)"))
        checks.append((f"{name} total", abs(t - total) <= 0.02, f"{t:.4f} vs {total} (limit 0.02)"))
    finish(2, checks)


def test_criterion_3_two_obstacles():
    checks: List[Check] = []
    for name, (f, point, pattern) in REF_TWO_OBSTACLES.items():
        config = load_scenario(name)
        t0 = time.perf_counter()
        best = plan(config).best
        wall = time.perf_counter() - t0
        checks.append(rel_check(f"{name} f", best.objective, f, 0.01))
        d = math.dist(best.intercept, point)
        checks.append((f"{name} intercept", d <= 0.2,
                       f"({best.intercept[0]:.3f}, {best.intercept[1]:.3f}) is {d:.3f} from {point} (limit 0.2)"))
        checks.append((f"{name} pattern", str(best.pattern) == pattern, f"{best.pattern} vs {pattern}"))
        checks.append((f"{name} runtime", wall < 5.0, f"{wall:.3f} s (limit 5 s)"))
    finish(3, checks)


def test_criterion_4_real_world():
    best = planned("realworld")[0].best
    d = math.dist(best.intercept, (9291.3, 2664.32))
    checks = [
        rel_check("f", best.objective, 360.55, 0.01),
        ("intercept", d <= 2.0, f"({best.intercept[0]:.2f}, {best.intercept[1]:.2f}) is {d:.3f} km away (limit 2)"),
        rel_check("pursuer distance", best.pursuer_length, 240.37, 0.01),
        rel_check("target distance", best.target_length, 120.18, 0.01),
    ]
    finish(4, checks)


def test_criterion_5_projection():
    checks: List[Check] = []
    for city, lat, lon, x, y in REF_CITIES:
        px, py = project(GeoPoint(lat, lon))
        dx, dy = abs(px - x), abs(py - y)
        checks.append((city, dx <= 0.5 and dy <= 0.5,
                       f"({px:.3f}, {py:.3f}); |dx|={dx:.3f}, |dy|={dy:.3f} km (limit 0.5)"))
    finish(5, checks)


def random_single_obstacle(rng: np.random.Generator) -> ScenarioConfig:
    P, T, O = rng.uniform(-20, 20, (3, 2))
    ra, rb = rng.uniform(1, 5, 2)
    thp, tht = rng.uniform(0, 2 * math.pi, 2)
    vt = rng.uniform(0.5, 2.0)
    ratio = rng.uniform(1.5, 6.0)
    return ScenarioConfig(Pose(*P, thp), ratio * vt, ra, Pose(*T, tht), vt,
                          (ObstacleSpec(*O, rb),))


def test_criterion_6_oracle_equivalence():
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    compared, skipped, worse = 0, 0, []
    for i in range(100):
        config = random_single_obstacle(rng)
        oracle = grid_oracle(config, 128)
        if oracle is None:
            skipped += 1
            continue
        compared += 1
        best = plan(config).best
        if best is None or best.objective > oracle.objective * 1.005:
            worse.append((i, oracle.objective, best and best.objective))
    wall = time.perf_counter() - t0
    checks = [
        ("dominance", not worse,
         f"{compared} compared, {skipped} without an oracle point, {len(worse)} worse than oracle + 0.5%"
         + (f": {worse[:5]}" if worse else "")),
        ("runtime", wall < 120.0, f"{wall:.1f} s for 100 scenarios (limit 120 s)"),
    ]
    finish(6, checks)


def _random_case(rng, n):
    vt = rng.uniform(0.1, 5.0)
    config = ScenarioConfig(
        Pose(*rng.uniform(-20, 20, 2), rng.uniform(0, 2 * math.pi)), vt * rng.uniform(1.2, 6.0),
        rng.uniform(0.5, 5.0), Pose(*rng.uniform(-20, 20, 2), rng.uniform(0, 2 * math.pi)), vt,
        tuple(ObstacleSpec(*rng.uniform(-20, 20, 2), rng.uniform(0.5, 5.0)) for _ in range(n)))
    ell = []
    for r in config.circle_radii:
        ell += [rng.uniform(0, 0.95 * 2 * math.pi * r), rng.uniform(0, 0.95 * 2 * math.pi * r),
                rng.uniform(0, 30)]
    ell.append(rng.uniform(0, 30))
    return config, np.array(ell)


def test_criterion_7_property_suite():
    rng = np.random.default_rng(7)
    cases = [_random_case(rng, n) for n in (0, 1, 2, 3) for _ in range(25)]
    checks: List[Check] = []

    worst = 0.0
    for c, ell in cases:
        J = jacobian(c, ell)
        fd = np.empty_like(J)
        for i in range(c.size):
            e = np.zeros(c.size)
            e[i] = 1e-6
            fd[:, i] = (residuals(c, ell + e) - residuals(c, ell - e)) / 2e-6
        worst = max(worst, float(np.max(np.abs(J - fd) / np.maximum(1.0, np.abs(J)))))
    checks.append(("jacobian vs central differences", worst <= 1e-4, f"max rel. error {worst:.2e} (limit 1e-4)"))

    worst = 0.0
    for c, ell in cases:
        r0 = residuals(c, ell)
        r1 = residuals(transform_config(c, shift=(13.0, -29.0)), ell)
        worst = max(worst, float(np.max(np.abs(r1 - r0))) / max(1.0, float(np.max(np.abs(r0)))))
    checks.append(("translation equivariance", worst <= 1e-12, f"max rel. change {worst:.2e} (limit 1e-12)"))

    # each (x, y) residual pair must rotate with the scene and timing stay put;
    # this is stronger than invariance of the max-norm, which no rotation keeps
    phi = 0.7
    rot = np.array([[math.cos(phi), -math.sin(phi)], [math.sin(phi), math.cos(phi)]])
    worst_free, worst_obst = 0.0, 0.0
    for c, ell in cases:
        r0 = residuals(c, ell)
        r1 = residuals(transform_config(c, phi=phi), ell)
        pairs0 = r0[:-1].reshape(-1, 2) @ rot.T
        err = max(float(np.max(np.abs(r1[:-1].reshape(-1, 2) - pairs0))), abs(r1[-1] - r0[-1]))
        err /= max(1.0, float(np.max(np.abs(r0))))
        if c.n == 0:
            worst_free = max(worst_free, err)
        else:
            worst_obst = max(worst_obst, err)
    worst = max(worst_free, worst_obst)
    checks.append(("rotation equivariance", worst <= 1e-9,
                   f"max rel. error {worst_free:.2e} without obstacles, {worst_obst:.2e} with (limit 1e-9)"))

    worst = 0.0
    for c, ell in cases:
        s = 3.7
        r0 = residuals(c, ell)
        r1 = residuals(transform_config(c, scale=s), s * ell)
        expect = np.concatenate([s * r0[:-1], [s * s * r0[-1]]])
        worst = max(worst, float(np.max(np.abs(r1 - expect) / np.maximum(1.0, np.abs(expect)))))
    checks.append(("scale covariance", worst <= 1e-9, f"max rel. error {worst:.2e} (limit 1e-9)"))

    timing, endpoint = 0.0, 0.0
    names = list(REF_LENGTHS) + list(REF_TWO_OBSTACLES) + ["realworld"]
    for name in names:
        c = load_scenario(name)
        for sol in planned(name)[0].all_feasible:
            times, total = time_breakdown(sol)
            timing = max(timing, abs(total - times[-1]))
            ex, ey = pursuer_endpoint(c, sol.lengths)
            tx, ty = target_position(c, sol.lengths[-1])
            endpoint = max(endpoint, math.hypot(ex - tx, ey - ty))
    checks.append(("timing identity", timing <= 1e-6, f"max |sum t_P - t_T| {timing:.2e} (limit 1e-6)"))
    checks.append(("endpoint coincidence", endpoint <= 1e-6, f"max gap {endpoint:.2e} (limit 1e-6)"))

    start = Pose(1.5, -2.0, 0.9)
    zero_ok = propagate_arc(start, 0.7, 0.0) == start and propagate_straight(start, 0.0) == start
    checks.append(("zero-length identity", zero_ok, "arc and straight of length 0 return the start pose"))
    radius_err = 0.0
    for k in (0.2, -1.0, 3.0):
        for frac in (0.1, 0.5, 0.9):
            length = frac * 2 * math.pi / abs(k)
            mid, end = propagate_arc(start, k, length / 2), propagate_arc(start, k, length)
            chord = math.hypot(end.x - start.x, end.y - start.y)
            sag = math.hypot(mid.x - 0.5 * (start.x + end.x), mid.y - 0.5 * (start.y + end.y))
            # circle through start, end and mid-arc: r = (c^2/4 + sag^2) / (2 sag)
            r = (chord * chord / 4 + sag * sag) / (2 * sag)
            radius_err = max(radius_err, abs(r - 1 / abs(k)) * abs(k))
    checks.append(("arc radius", radius_err <= 1e-9, f"max rel. radius error {radius_err:.2e} (limit 1e-9)"))

    free = ScenarioConfig(Pose(0, 0, 0), 2.0, 1.0, Pose(50, 50, 0), 1.0, ())
    errs = []
    for dt in (1.0, 0.5, 0.25):
        traj = integrate(free, ControlSchedule((ControlSegment(0.3, 10.0),)), dt)
        p = propagate_arc(Pose(0, 0, 0), 0.3, 20.0)
        errs.append(math.hypot(traj.pursuer[-1, 0] - p.x, traj.pursuer[-1, 1] - p.y))
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    checks.append(("integrator order", min(ratios) >= 8.0,
                   f"error ratios per halving {ratios[0]:.1f}, {ratios[1]:.1f} (need >= 8)"))
    finish(7, checks)


def test_criterion_8_replay():
    checks: List[Check] = []
    names = list(REF_LENGTHS) + list(REF_TWO_OBSTACLES) + ["realworld"]
    for name in names:
        c = load_scenario(name)
        limit = 2.0 if name == "realworld" else 0.05
        rep = validate(c, planned(name)[0].best)
        checks.append((f"{name} miss", rep.miss_distance <= limit,
                       f"{rep.miss_distance:.2e} (limit {limit})"))
        depth = ", ".join(f"obstacle {j} by {d:.4f} (R_b={c.obstacles[j].radius:g})"
                          for j, d in rep.clearance_violations)
        checks.append((f"{name} clearance", rep.clear,
                       "no interior penetration" if rep.clear else f"penetrates {depth}"))
    finish(8, checks)
