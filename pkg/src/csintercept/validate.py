"""Kinematic replay of planned paths.

The pursuer's unicycle model and the target's constant-velocity model are
integrated with fixed-step RK4 under the piecewise-constant curvature
schedule implied by a solution, and the outcome is compared with the plan.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .geometry import InvalidInputError, ObstacleSpec, obstacle_entry_point
from .model import ScenarioConfig, alpha_coefficients

PINNED = "pinned"
CONTINUOUS = "continuous"


def segment_times(lengths: Sequence[float], pursuer_speed: float,
                  target_speed: float) -> Tuple[Tuple[float, ...], float]:
    """Per-segment durations and the total interception time.

    Pursuer segments take ``length / pursuer_speed``; the last entry is the
    target's travel time. A static target (speed 0) must have zero travel
    length and is then assigned the pursuer's total time.
    """
    ell = [float(v) for v in lengths]
    pursuer = [v / pursuer_speed for v in ell[:-1]]
    total = math.fsum(pursuer)
    if target_speed == 0.0:
        if ell[-1] != 0.0:
            raise InvalidInputError("a static target cannot travel a nonzero distance")
        target = total
    else:
        target = ell[-1] / target_speed
    return tuple(pursuer) + (target,), total


def time_breakdown(solution) -> Tuple[Tuple[float, ...], float]:
    """Durations for every segment of ``solution`` plus the total time."""
    return segment_times(solution.lengths, solution.pursuer_speed, solution.target_speed)


@dataclass(frozen=True)
class ControlSegment:
    curvature: float
    duration: float
    # obstacle whose entry point the pursuer is pinned to when this segment ends
    pin: Optional[ObstacleSpec] = None

    def __post_init__(self) -> None:
        if self.duration < 0.0:
            raise InvalidInputError(f"durations must be >= 0, got {self.duration}")


@dataclass(frozen=True)
class ControlSchedule:
    segments: Tuple[ControlSegment, ...]

    @classmethod
    def from_lengths(cls, config: ScenarioConfig, lengths: Sequence[float]) -> "ControlSchedule":
        alpha = alpha_coefficients(config)
        segs = []
        for i, a in enumerate(alpha):
            pin = None
            if i % 3 == 2 and i // 3 < config.n:
                pin = config.obstacles[i // 3]
            segs.append(ControlSegment(float(a), float(lengths[i]) / config.pursuer_speed, pin))
        return cls(tuple(segs))

    @property
    def duration(self) -> float:
        return math.fsum(s.duration for s in self.segments)

    def min_duration(self) -> float:
        nonzero = [s.duration for s in self.segments if s.duration > 0.0]
        return min(nonzero) if nonzero else 0.0


@dataclass
class Trajectory:
    """Time-stamped samples; ``pursuer`` rows are (x, y, theta) with theta unwrapped."""

    t: np.ndarray
    pursuer: np.ndarray
    target: np.ndarray
    dt: float
    # (segment index, jump distance) for every pin applied
    pin_jumps: List[Tuple[int, float]] = field(default_factory=list)
    # sample index range [start, stop) covered by each schedule segment
    segment_slices: List[Tuple[int, int]] = field(default_factory=list)
    # distance actually driven, excluding pin jumps
    path_length: float = 0.0


def _rk4_segment(x: float, y: float, th: float, speed: float, u: float, h: float,
                 steps: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``steps`` classical RK4 steps of the unicycle under constant curvature ``u``.

    Heading is linear in time, so all stages are closed-form and the steps
    can be evaluated at once; stages 2 and 3 coincide. Returns the sample
    arrays after each step (x, y, theta).
    """
    w = speed * u
    k = np.arange(steps)
    th0 = th + w * h * k
    th_mid = th0 + 0.5 * h * w
    th1 = th + w * h * (k + 1)
    dx = h / 6.0 * speed * (np.cos(th0) + 4.0 * np.cos(th_mid) + np.cos(th1))
    dy = h / 6.0 * speed * (np.sin(th0) + 4.0 * np.sin(th_mid) + np.sin(th1))
    return x + np.cumsum(dx), y + np.cumsum(dy), th1


def integrate(config: ScenarioConfig, schedule: ControlSchedule, dt: float,
              mode: str = PINNED) -> Trajectory:
    """RK4 replay of both agents; steps are shortened to land on segment ends.

    In ``pinned`` mode the pursuer is moved onto the obstacle entry point at
    the end of every pinned straight, and the jump size is recorded.
    """
    if not (dt > 0.0 and math.isfinite(dt)):
        raise InvalidInputError(f"dt must be positive, got {dt}")
    shortest = schedule.min_duration()
    if shortest > 0.0 and dt > shortest / 10.0 * (1.0 + 1e-12):
        raise InvalidInputError(
            f"dt={dt} exceeds a tenth of the shortest segment duration ({shortest})")
    if mode not in (PINNED, CONTINUOUS):
        raise InvalidInputError(f"unknown replay mode {mode!r}")

    vp, vt = config.pursuer_speed, config.target_speed
    tvx, tvy = vt * math.cos(config.target.theta), vt * math.sin(config.target.theta)
    x, y, th = config.pursuer.x, config.pursuer.y, config.pursuer.theta
    t = 0.0
    ts = [np.array([0.0])]
    ps = [np.array([[x, y, th]])]
    jumps: List[Tuple[int, float]] = []
    slices: List[Tuple[int, int]] = []
    driven = []
    count = 1
    for idx, seg in enumerate(schedule.segments):
        first = count - 1
        steps = math.ceil(seg.duration / dt - 1e-9) if seg.duration > 0.0 else 0
        if steps:
            h = seg.duration / steps
            xs, ys, ths = _rk4_segment(x, y, th, vp, seg.curvature, h, steps)
            chord = np.hypot(np.diff(xs, prepend=x), np.diff(ys, prepend=y))
            half = 0.5 * abs(vp * seg.curvature * h)
            # chord of a circular step -> arc length
            driven.append(chord * (half / math.sin(half)) if half > 0.0 else chord)
            ts.append(t + h * np.arange(1, steps + 1))
            ps.append(np.column_stack([xs, ys, ths]))
            t += seg.duration
            x, y, th = float(xs[-1]), float(ys[-1]), float(ths[-1])
            count += steps
        if seg.pin is not None and mode == PINNED:
            ex, ey = obstacle_entry_point(seg.pin, th)
            jumps.append((idx, math.hypot(ex - x, ey - y)))
            x, y = ex, ey
            ps[-1] = ps[-1].copy()
            ps[-1][-1, :2] = (x, y)
        slices.append((first, count))
    tt = np.concatenate(ts)
    # constant velocity: every RK4 stage of the target is identical
    target = np.column_stack([config.target.x + tvx * tt, config.target.y + tvy * tt])
    length = math.fsum(np.concatenate(driven)) if driven else 0.0
    return Trajectory(tt, np.vstack(ps), target, dt, jumps, slices, length)


@dataclass(frozen=True)
class ValidationReport:
    miss_distance: float
    # (obstacle index, deepest penetration) for every obstacle entered
    clearance_violations: Tuple[Tuple[int, float], ...]
    # |distance(approach line, obstacle centre) - R_b| per junction
    tangency_gap: Tuple[float, ...]
    # pin jump per junction (pinned mode) or residual junction gap (continuous)
    pin_jumps: Tuple[float, ...]
    length_error: float
    time_error: float
    final_time: float

    @property
    def clear(self) -> bool:
        return not self.clearance_violations


def default_dt(schedule: ControlSchedule) -> float:
    """Shortest nonzero duration / 1000, never above a tenth of it.

    The step is floored at 1e-6 time units and at 1e-5 of the whole schedule
    so a sliver segment cannot blow up the step count.
    """
    shortest = schedule.min_duration()
    if shortest == 0.0:
        return 1e-3
    floor = max(1e-6, 1e-5 * schedule.duration)
    return min(max(shortest / 1000.0, floor), shortest / 10.0)


def _line_center_distance(px: float, py: float, heading: float, ob: ObstacleSpec) -> float:
    return abs(math.cos(heading) * (ob.y - py) - math.sin(heading) * (ob.x - px))


def validate(config: ScenarioConfig, solution, dt: Optional[float] = None,
             mode: str = PINNED) -> ValidationReport:
    """Replay ``solution`` and measure interception, clearance and timing."""
    lengths = np.asarray(solution.lengths, dtype=float)
    schedule = ControlSchedule.from_lengths(config, lengths)
    if dt is None:
        dt = default_dt(schedule)
    traj = integrate(config, schedule, dt, mode=mode)

    px, py = traj.pursuer[-1, 0], traj.pursuer[-1, 1]
    qx, qy = traj.target[-1]
    miss = math.hypot(px - qx, py - qy)

    violations = []
    for j, ob in enumerate(config.obstacles):
        depth = float(np.max(ob.radius - np.hypot(traj.pursuer[:, 0] - ob.x,
                                                  traj.pursuer[:, 1] - ob.y)))
        if depth > 1e-6 * ob.radius:
            violations.append((j, depth))

    # Approach straight of junction j is schedule segment 3j+2.
    gaps = []
    jumps = []
    for j, ob in enumerate(config.obstacles):
        start, stop = traj.segment_slices[3 * j + 2]
        sx, sy, sth = traj.pursuer[start]
        gaps.append(abs(_line_center_distance(sx, sy, sth, ob) - ob.radius))
        if mode == PINNED:
            jumps.append(next(d for i, d in traj.pin_jumps if i == 3 * j + 2))
        else:
            ex, ey = obstacle_entry_point(ob, traj.pursuer[stop - 1, 2])
            jumps.append(math.hypot(ex - traj.pursuer[stop - 1, 0],
                                    ey - traj.pursuer[stop - 1, 1]))

    length_error = abs(traj.path_length - float(np.sum(lengths[:-1])))

    _, total = segment_times(lengths, config.pursuer_speed, config.target_speed)
    time_error = abs(float(traj.t[-1]) - total)
    return ValidationReport(miss, tuple(violations), tuple(gaps), tuple(jumps),
                            length_error, time_error, float(traj.t[-1]))
