"""Planar poses, arc/straight propagation and obstacle entry points.

Headings are measured counterclockwise from the +x axis. Positive curvature
turns left, negative curvature turns right.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple

TWO_PI = 2.0 * math.pi


class InvalidInputError(ValueError):
    """Raised when an operation receives arguments outside its domain."""


def normalize_angle(theta: float) -> float:
    """Wrap an angle into [0, 2*pi)."""
    wrapped = math.fmod(theta, TWO_PI)
    if wrapped < 0.0:
        wrapped += TWO_PI
    # fmod of a tiny negative number can round up to exactly 2*pi
    if wrapped >= TWO_PI:
        wrapped = 0.0
    return wrapped


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise InvalidInputError(f"non-finite value {v!r}")


@dataclass(frozen=True)
class Pose:
    """Position plus heading; ``theta`` is always stored in [0, 2*pi)."""

    x: float
    y: float
    theta: float

    def __post_init__(self) -> None:
        _check_finite(self.x, self.y, self.theta)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @property
    def xy(self) -> Tuple[float, float]:
        return (self.x, self.y)

    def distance_to(self, other: "Pose") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class ObstacleSpec:
    """Static circular obstacle. ``curvature`` is derived as ``1/radius``."""

    x: float
    y: float
    radius: float

    def __post_init__(self) -> None:
        _check_finite(self.x, self.y, self.radius)
        if self.radius <= 0.0:
            raise InvalidInputError(f"obstacle radius must be positive, got {self.radius}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def center(self) -> Tuple[float, float]:
        return (self.x, self.y)

    @property
    def curvature(self) -> float:
        return 1.0 / self.radius


@dataclass(frozen=True)
class SegmentSpec:
    """One constant-curvature piece of a path (``curvature == 0`` is straight)."""

    curvature: float
    length: float

    def __post_init__(self) -> None:
        _check_finite(self.curvature, self.length)
        if self.length < 0.0:
            raise InvalidInputError(f"segment length must be >= 0, got {self.length}")
        if self.curvature != 0.0 and self.length * abs(self.curvature) >= TWO_PI:
            raise InvalidInputError("arc segments must turn through less than one revolution")

    @property
    def is_straight(self) -> bool:
        return self.curvature == 0.0


def arc_endpoint(x: float, y: float, theta: float, curvature: float,
                 arc_length: float) -> Tuple[float, float, float]:
    """Closed-form arc propagation on raw floats.

    Returns the end position and the *unnormalized* end heading, which the
    model code needs for smooth derivatives.
    """
    theta_end = theta + curvature * arc_length
    x_end = x + (math.sin(theta_end) - math.sin(theta)) / curvature
    y_end = y - (math.cos(theta_end) - math.cos(theta)) / curvature
    return x_end, y_end, theta_end


def propagate_arc(start: Pose, curvature: float, arc_length: float) -> Pose:
    """Pose reached after driving ``arc_length`` along a circle of signed ``curvature``."""
    _check_finite(curvature, arc_length)
    if curvature == 0.0:
        raise InvalidInputError("propagate_arc needs a nonzero curvature")
    if arc_length < 0.0:
        raise InvalidInputError(f"arc length must be >= 0, got {arc_length}")
    if arc_length == 0.0:
        return start
    x, y, th = arc_endpoint(start.x, start.y, start.theta, curvature, arc_length)
    return Pose(x, y, th)


def propagate_straight(start: Pose, length: float) -> Pose:
    _check_finite(length)
    if length < 0.0:
        raise InvalidInputError(f"straight length must be >= 0, got {length}")
    if length == 0.0:
        return start
    return Pose(start.x + length * math.cos(start.theta),
                start.y + length * math.sin(start.theta),
                start.theta)


def propagate(start: Pose, segment: SegmentSpec) -> Pose:
    if segment.is_straight:
        return propagate_straight(start, segment.length)
    return propagate_arc(start, segment.curvature, segment.length)


def turning_center(pose: Pose, curvature: float) -> Tuple[float, float]:
    """Centre of the circle a pose would follow with the given signed curvature."""
    if curvature == 0.0:
        raise InvalidInputError("straight motion has no turning centre")
    r = 1.0 / curvature
    return (pose.x - r * math.sin(pose.theta), pose.y + r * math.cos(pose.theta))


def obstacle_entry_point(obstacle: ObstacleSpec, heading: float) -> Tuple[float, float]:
    """Junction point where the pursuer is placed on an obstacle's turning circle.

    This is ``(x_b - R cos(heading), y_b + R sin(heading))``. It always lies on
    the obstacle boundary but is generally *not* the tangency point of a line
    with that heading; :mod:`csintercept.validate` measures the difference.
    """
    _check_finite(heading)
    return (obstacle.x - obstacle.radius * math.cos(heading),
            obstacle.y + obstacle.radius * math.sin(heading))


def compose(start: Pose, segments: Iterable[SegmentSpec]) -> Pose:
    pose = start
    for seg in segments:
        pose = propagate(pose, seg)
    return pose


def sample_path(start: Pose, segments: Sequence[SegmentSpec], step: float) -> List[Pose]:
    """Sample a segment chain at arc-length spacing of at most ``step``.

    The first sample is ``start`` and the last is the exact composed endpoint;
    every segment boundary is also included.
    """
    _check_finite(step)
    if step <= 0.0:
        raise InvalidInputError(f"step must be positive, got {step}")
    poses = [start]
    seg_start = start
    for seg in segments:
        count = max(1, math.ceil(seg.length / step - 1e-12))
        for i in range(1, count):
            s = seg.length * i / count
            poses.append(propagate(seg_start, SegmentSpec(seg.curvature, s)))
        seg_end = propagate(seg_start, seg)
        if seg.length > 0.0:
            poses.append(seg_end)
        seg_start = seg_end
    return poses
