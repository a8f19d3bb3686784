"""Brute-force reference solver built only on the geometry primitives.

For a fixed turn pattern the path is determined circle by circle: once the
arc on circle k is chosen, the straight that follows must end where the next
circle's entry point lies along the current heading (or, on the last circle,
where the target will be when the pursuer arrives). Each of those conditions
is a scalar equation in the arc length, so a grid scan of the arc followed by
bracketed root refinement enumerates every solution the grid can resolve.
None of the model residual code is used here.
"""
from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from .geometry import (
    TWO_PI,
    InvalidInputError,
    Pose,
    obstacle_entry_point,
    propagate_arc,
)
from .model import ScenarioConfig, TurnPattern, apply_pattern
from .solver import PathSolution, enumerate_patterns, select_best

# accepted scaled residual of a refined oracle point
ORACLE_TOL = 1e-8

# (arc, straight) per finished block, plus pose and pursuer length so far
_Prefix = Tuple[Tuple[Tuple[float, float], ...], Pose, float]


def _cross(ax: float, ay: float, bx: float, by: float) -> float:
    return ax * by - ay * bx


def _after_arc(start: Pose, curvature: float, arc: float) -> Pose:
    return propagate_arc(start, curvature, arc) if arc > 0.0 else start


def _junction_gap(start: Pose, curvature: float, obstacle, arc: float) -> Tuple[float, float]:
    """(cross, dot) of the heading with the vector from arc end to the entry point."""
    p = _after_arc(start, curvature, arc)
    ex, ey = obstacle_entry_point(obstacle, p.theta)
    dx, dy = math.cos(p.theta), math.sin(p.theta)
    return _cross(dx, dy, ex - p.x, ey - p.y), dx * (ex - p.x) + dy * (ey - p.y)


def _final_gap(config: ScenarioConfig, start: Pose, curvature: float, travelled: float,
               arc: float) -> Tuple[float, float]:
    """Interception condition on the last circle.

    With k = V_T/V_P the target moves k units per pursuer unit, so the
    straight s must satisfy ``s (d - k v) = T0 - A + k (C + arc) v``.
    Returns (cross, s).
    """
    p = _after_arc(start, curvature, arc)
    k = config.target_speed / config.pursuer_speed
    vx, vy = math.cos(config.target.theta), math.sin(config.target.theta)
    ux, uy = math.cos(p.theta) - k * vx, math.sin(p.theta) - k * vy
    c = travelled + arc
    wx = config.target.x - p.x + k * c * vx
    wy = config.target.y - p.y + k * c * vy
    s = (ux * wx + uy * wy) / (ux * ux + uy * uy)
    return _cross(ux, uy, wx, wy), s


def _roots(g, cap: float, resolution: int) -> List[float]:
    """Sign changes of ``g`` on a uniform grid over [0, cap), refined by brentq."""
    grid = np.linspace(0.0, cap, resolution, endpoint=False)
    vals = [g(a) for a in grid]
    out = []
    for i, (a, va) in enumerate(zip(grid, vals)):
        if va == 0.0:
            out.append(float(a))
            continue
        b = grid[i + 1] if i + 1 < len(grid) else cap * (1.0 - 1e-12)
        vb = vals[i + 1] if i + 1 < len(vals) else g(b)
        if va * vb < 0.0:
            out.append(brentq(g, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    return out


def pattern_roots(config: ScenarioConfig, pattern: TurnPattern,
                  resolution: int = 128) -> List[np.ndarray]:
    """Every full length vector for ``pattern`` resolved by the arc grids."""
    if resolution < 8:
        raise InvalidInputError(f"resolution must be >= 8, got {resolution}")
    if len(pattern) != config.n + 1:
        raise InvalidInputError(
            f"pattern has {len(pattern)} circles, scenario needs {config.n + 1}")
    radii = config.circle_radii
    prefixes: List[_Prefix] = [((), config.pursuer, 0.0)]
    for k, turn in enumerate(pattern.signs):
        curv = turn.sign / radii[k]
        cap = TWO_PI * radii[k]
        grown: List[_Prefix] = []
        for blocks, start, travelled in prefixes:
            if k < config.n:
                ob = config.obstacles[k]
                for arc in _roots(lambda a: _junction_gap(start, curv, ob, a)[0], cap, resolution):
                    _, s = _junction_gap(start, curv, ob, arc)
                    if s < 0.0:
                        continue
                    heading = _after_arc(start, curv, arc).theta
                    # the next block starts at the pinned entry point
                    ex, ey = obstacle_entry_point(ob, heading)
                    grown.append((blocks + ((arc, s),), Pose(ex, ey, heading),
                                  travelled + arc + s))
            else:
                g = lambda a: _final_gap(config, start, curv, travelled, a)[0]
                for arc in _roots(g, cap, resolution):
                    _, s = _final_gap(config, start, curv, travelled, arc)
                    if s < 0.0:
                        continue
                    grown.append((blocks + ((arc, s),), start, travelled + arc + s))
        prefixes = grown
    ratio = config.target_speed / config.pursuer_speed
    out = []
    for blocks, _, travelled in prefixes:
        arcs = [b[0] for b in blocks]
        straights = [b[1] for b in blocks]
        out.append(apply_pattern(pattern, arcs, straights, ratio * travelled))
    return out


def grid_oracle(config: ScenarioConfig, resolution: int = 128) -> Optional[PathSolution]:
    """Shortest path over all patterns found by grid scan; None if nothing is found."""
    cands = []
    for pattern in enumerate_patterns(config.n):
        for ell in pattern_roots(config, pattern, resolution):
            sol = PathSolution.from_lengths(config, pattern, ell)
            if sol.residual_norm <= ORACLE_TOL:
                cands.append(sol)
    return select_best(cands)
