"""Objective and equality constraints of the CS-touring interception model.

Length vector layout for ``n`` obstacles (0-based indices, ``3n+4`` entries)::

    for circle k = 0..n:   [3k]   left-arc length on turning circle k
                           [3k+1] right-arc length on turning circle k
                           [3k+2] straight length leaving circle k
    [3n+3]                 distance travelled by the target

Circle 0 is the pursuer's own minimum-radius circle; circle k >= 1 is the
boundary of obstacle k. After each of the first ``n`` straights the pursuer is
pinned to :func:`~csintercept.geometry.obstacle_entry_point` of the next
obstacle, evaluated at the current heading.

Residual layout (``2n+3`` entries): x/y closure of junction j at rows
``2j, 2j+1`` (j = 0..n-1), x/y interception at rows ``2n, 2n+1``, timing at
row ``2n+2``.
"""
from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Tuple

import numpy as np

from .geometry import InvalidInputError, ObstacleSpec, Pose, TWO_PI

#: max-norm residual accepted when checking values rounded to two decimals
TABULATED_TOL = 0.05
#: max-norm (scaled) residual accepted for solver output
FEASIBILITY_TOL = 1e-8


class Turn(enum.Enum):
    LEFT = "L"
    RIGHT = "R"

    def __str__(self) -> str:
        return self.value

    @property
    def sign(self) -> int:
        return 1 if self is Turn.LEFT else -1


@functools.total_ordering
@dataclass(frozen=True)
class TurnPattern:
    """One turn direction per turning circle (pursuer circle first)."""

    signs: Tuple[Turn, ...]

    def __post_init__(self) -> None:
        signs = tuple(s if isinstance(s, Turn) else Turn(str(s).upper()) for s in self.signs)
        if not signs:
            raise InvalidInputError("a turn pattern needs at least one entry")
        object.__setattr__(self, "signs", signs)

    @classmethod
    def parse(cls, text: str) -> "TurnPattern":
        """Accept ``"LR"``, ``"L,R"`` or ``"LS+RS+S_T"``."""
        body = text.replace("S_T", "").replace("S", "")
        return cls(tuple(Turn(ch) for ch in body.upper() if ch in "LR"))

    def __len__(self) -> int:
        return len(self.signs)

    def __iter__(self) -> Iterator[Turn]:
        return iter(self.signs)

    def __str__(self) -> str:
        return "+".join(f"{s}S" for s in self.signs) + "+S_T"

    @property
    def compact(self) -> str:
        return "".join(s.value for s in self.signs)

    def active_index(self, k: int) -> int:
        """Index (in the full length vector) of circle k's active arc slot."""
        return 3 * k + (0 if self.signs[k] is Turn.LEFT else 1)

    def __lt__(self, other: "TurnPattern") -> bool:
        # lexicographic with L < R
        return self.compact < other.compact


@dataclass(frozen=True)
class ScenarioConfig:
    """A complete interception problem.

    ``pursuer_speed`` must exceed ``target_speed``; obstacles are toured in
    list order.
    """

    pursuer: Pose
    pursuer_speed: float
    turn_radius: float
    target: Pose
    target_speed: float
    obstacles: Tuple[ObstacleSpec, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        for name in ("pursuer_speed", "turn_radius", "target_speed"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidInputError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))
        if self.turn_radius <= 0.0:
            raise InvalidInputError(f"turn_radius must be positive, got {self.turn_radius}")
        if self.pursuer_speed <= 0.0:
            raise InvalidInputError(f"pursuer_speed must be positive, got {self.pursuer_speed}")
        if self.target_speed < 0.0:
            raise InvalidInputError(f"target_speed must be >= 0, got {self.target_speed}")
        if not self.pursuer_speed > self.target_speed:
            raise InvalidInputError(
                "pursuer_speed must exceed target_speed for interception "
                f"(got {self.pursuer_speed} <= {self.target_speed})")

    @property
    def n(self) -> int:
        return len(self.obstacles)

    @property
    def size(self) -> int:
        """Dimension of the full length vector."""
        return 3 * self.n + 4

    @functools.cached_property
    def circle_radii(self) -> np.ndarray:
        """Radius of every turning circle, pursuer circle first (read-only)."""
        radii = np.array([self.turn_radius] + [ob.radius for ob in self.obstacles])
        radii.setflags(write=False)
        return radii

    @functools.cached_property
    def _alpha(self) -> np.ndarray:
        curv = 1.0 / self.circle_radii
        alpha = np.stack([curv, -curv, np.zeros_like(curv)], axis=1).ravel()
        alpha.setflags(write=False)
        return alpha

    @property
    def length_scale(self) -> float:
        """Characteristic length used to make residuals dimensionless."""
        px, py = self.pursuer.x, self.pursuer.y
        cands = [self.turn_radius, math.hypot(self.target.x - px, self.target.y - py)]
        for ob in self.obstacles:
            cands.append(ob.radius)
            cands.append(math.hypot(ob.x - px, ob.y - py))
        return max(cands)


def alpha_coefficients(config: ScenarioConfig) -> np.ndarray:
    """Signed heading rate per unit length for each pursuer segment.

    The pattern ``(+a_k, -a_k, 0)`` repeats once per turning circle, with
    ``a_k`` the curvature of circle k.
    """
    return config._alpha.copy()


def _lengths(config: ScenarioConfig, lengths) -> np.ndarray:
    arr = np.asarray(lengths, dtype=float)
    if arr.shape != (config.size,):
        raise InvalidInputError(
            f"expected {config.size} lengths for {config.n} obstacles, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise InvalidInputError("lengths must be finite")
    return arr


def junction_headings(config: ScenarioConfig, lengths, normalized: bool = False) -> np.ndarray:
    """Headings at t_0 .. t_{3n+3}.

    Cumulative (unwrapped) by default; pass ``normalized=True`` for the
    [0, 2*pi) view.
    """
    ell = _lengths(config, lengths)
    alpha = config._alpha
    theta = np.empty(config.size)
    theta[0] = config.pursuer.theta
    theta[1:] = config.pursuer.theta + np.cumsum(alpha * ell[:-1])
    if normalized:
        theta = np.mod(theta, TWO_PI)
        theta[theta >= TWO_PI] = 0.0
    return theta


def objective(lengths) -> float:
    return float(np.sum(np.asarray(lengths, dtype=float)))


def target_position(config: ScenarioConfig, target_length: float) -> Tuple[float, float]:
    if target_length < 0.0:
        raise InvalidInputError(f"target length must be >= 0, got {target_length}")
    th = config.target.theta
    return (config.target.x + target_length * math.cos(th),
            config.target.y + target_length * math.sin(th))


def pinned_points(config: ScenarioConfig, theta: np.ndarray) -> np.ndarray:
    """Start of each CS block: the pursuer start, then each obstacle entry point."""
    pts = np.empty((config.n + 1, 2))
    pts[0] = config.pursuer.xy
    for j, ob in enumerate(config.obstacles, start=1):
        h = theta[3 * j]
        pts[j] = (ob.x - ob.radius * math.cos(h), ob.y + ob.radius * math.sin(h))
    return pts


def residuals(config: ScenarioConfig, lengths) -> np.ndarray:
    """Equality-constraint residuals in scenario units (see module docstring)."""
    ell = _lengths(config, lengths)
    n = config.n
    # scalar math: the vectors are short and this sits in every solver loop
    ls = ell.tolist()
    alpha = config._alpha.tolist()
    th = config.pursuer.theta
    sin, cos = [math.sin(th)], [math.cos(th)]
    for a, l in zip(alpha, ls[:-1]):
        th += a * l
        sin.append(math.sin(th))
        cos.append(math.cos(th))
    radii = config.circle_radii.tolist()
    res = np.empty(2 * n + 3)
    px, py = config.pursuer.x, config.pursuer.y
    for j in range(n + 1):
        i0, i1, i2, i3 = 3 * j, 3 * j + 1, 3 * j + 2, 3 * j + 3
        r = radii[j]
        s = ls[i2]
        if j < n:
            ob = config.obstacles[j]
            end_x = ob.x - ob.radius * cos[i3]
            end_y = ob.y + ob.radius * sin[i3]
        else:
            end_x = config.target.x + ls[-1] * math.cos(config.target.theta)
            end_y = config.target.y + ls[-1] * math.sin(config.target.theta)
        res[2 * j] = px - end_x + r * (-sin[i0] + 2.0 * sin[i1] - sin[i2]) + s * cos[i3]
        res[2 * j + 1] = py - end_y + r * (cos[i0] - 2.0 * cos[i1] + cos[i2]) + s * sin[i3]
        px, py = end_x, end_y
    res[-1] = config.target_speed * math.fsum(ls[:-1]) - config.pursuer_speed * ls[-1]
    return res


def jacobian(config: ScenarioConfig, lengths) -> np.ndarray:
    """Analytic derivative of :func:`residuals`, shape ``(2n+3, 3n+4)``.

    Residuals depend on lengths directly (straights, target length) and
    through the headings; since d theta[k] / d ell[i] = alpha[i] for i < k,
    the heading part of column i is ``alpha[i]`` times the sum of heading
    sensitivities over k > i.
    """
    ell = _lengths(config, lengths)
    n, m = config.n, config.size
    theta = junction_headings(config, ell)
    sin, cos = np.sin(theta).tolist(), np.cos(theta).tolist()
    radii = config.circle_radii.tolist()
    alpha = config._alpha
    ls = ell.tolist()

    # Residual sensitivities w.r.t. headings (g) and direct length terms (d).
    g = np.zeros((2 * n + 3, m))
    d = np.zeros((2 * n + 3, m))
    for j in range(n + 1):
        i0, i1, i2, i3 = 3 * j, 3 * j + 1, 3 * j + 2, 3 * j + 3
        r = radii[j]
        rx, ry = 2 * j, 2 * j + 1
        g[rx, i0] = -r * cos[i0]
        g[rx, i1] = 2.0 * r * cos[i1]
        g[rx, i2] = -r * cos[i2]
        g[ry, i0] = -r * sin[i0]
        g[ry, i1] = 2.0 * r * sin[i1]
        g[ry, i2] = -r * sin[i2]
        s = ls[i2]
        g[rx, i3] = -s * sin[i3]
        g[ry, i3] = s * cos[i3]
        d[rx, i2] = cos[i3]
        d[ry, i2] = sin[i3]
        if j > 0:
            # start pin of this block: (xc - R cos th, yc + R sin th) at th = theta[3j]
            g[rx, i0] += r * sin[i0]
            g[ry, i0] += r * cos[i0]
        if j < n:
            # end pin (subtracted) at th = theta[3j+3]
            rb = radii[j + 1]
            g[rx, i3] -= rb * sin[i3]
            g[ry, i3] -= rb * cos[i3]
        else:
            d[rx, m - 1] = -math.cos(config.target.theta)
            d[ry, m - 1] = -math.sin(config.target.theta)
    d[-1, :-1] = config.target_speed
    d[-1, -1] = -config.pursuer_speed
    # suffix[:, i] = sum of g[:, k] for k > i
    suffix = np.zeros_like(g)
    suffix[:, :-1] = np.cumsum(g[:, :0:-1], axis=1)[:, ::-1]
    d[:, :-1] += alpha * suffix[:, :-1]
    return d


def residual_scale(config: ScenarioConfig) -> np.ndarray:
    """Per-row divisors that make :func:`residuals` dimensionless."""
    L = config.length_scale
    scale = np.full(2 * config.n + 3, L)
    scale[-1] = config.pursuer_speed * L
    return scale


def scaled_residuals(config: ScenarioConfig, lengths) -> np.ndarray:
    return residuals(config, lengths) / residual_scale(config)


def is_model_feasible(config: ScenarioConfig, lengths, tol: float = FEASIBILITY_TOL,
                      scaled: bool = True) -> bool:
    """Residual max-norm within ``tol`` and every length nonnegative.

    With ``scaled=True`` the tolerance is relative to the scenario's length
    scale; with ``scaled=False`` it is in scenario units (use
    :data:`TABULATED_TOL` for two-decimal tabulated values).
    """
    ell = _lengths(config, lengths)
    r = scaled_residuals(config, ell) if scaled else residuals(config, ell)
    return bool(np.max(np.abs(r)) <= tol and np.all(ell >= 0.0))


def apply_pattern(pattern: TurnPattern, arcs: Sequence[float], straights: Sequence[float],
                  target_length: float) -> np.ndarray:
    """Expand per-circle arc/straight lengths into the full length vector.

    Each arc goes into the left or right slot named by ``pattern``; the other
    slot is zero.
    """
    n1 = len(pattern)
    if len(arcs) != n1 or len(straights) != n1:
        raise InvalidInputError(
            f"pattern has {n1} circles but got {len(arcs)} arcs and {len(straights)} straights")
    values = list(arcs) + list(straights) + [target_length]
    if any(v < 0.0 for v in values):
        raise InvalidInputError("lengths must be nonnegative")
    out = np.zeros(3 * n1 + 1)
    for k in range(n1):
        out[pattern.active_index(k)] = arcs[k]
        out[3 * k + 2] = straights[k]
    out[-1] = target_length
    return out


def selection_matrix(pattern: TurnPattern) -> np.ndarray:
    """Linear map from reduced unknowns to the full length vector.

    Reduced layout: ``[arc_0, straight_0, arc_1, straight_1, ..., target]``.
    """
    n1 = len(pattern)
    P = np.zeros((3 * n1 + 1, 2 * n1 + 1))
    for k in range(n1):
        P[pattern.active_index(k), 2 * k] = 1.0
        P[3 * k + 2, 2 * k + 1] = 1.0
    P[-1, -1] = 1.0
    return P


def reduce_lengths(pattern: TurnPattern, lengths) -> np.ndarray:
    """Inverse of the selection map (inactive arc slots are dropped)."""
    return selection_matrix(pattern).T @ np.asarray(lengths, dtype=float)
