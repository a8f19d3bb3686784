"""Turn-pattern enumeration and the multistart Newton planner.

Fixing a turn pattern zeroes one arc slot per turning circle and leaves a
square system (``2n+3`` unknowns, ``2n+3`` residuals), solved here by damped
Newton with an analytic Jacobian from many low-discrepancy starts.
"""
from __future__ import annotations

import enum
import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from .geometry import InvalidInputError, TWO_PI
from .model import (
    ScenarioConfig,
    Turn,
    TurnPattern,
    jacobian,
    junction_headings,
    residual_scale,
    residuals,
    selection_matrix,
    target_position,
)
from .validate import segment_times

TIE_TOL = 1e-9
# converged lengths down to -NEG_TOL * length_scale are treated as zero
NEG_TOL = 1e-9
# relative improvement an NLP solution needs to displace a pattern root
NLP_REPLACE_RTOL = 1e-4
# Newton gives up when the residual has not halved over this many iterations
STALL_WINDOW = 20


class Mode(str, enum.Enum):
    PATTERN = "pattern"
    NLP = "nlp"
    BOTH = "both"


@dataclass(frozen=True)
class SolverSettings:
    newton_max_iter: int = 100
    newton_damping: float = 0.5
    residual_tol: float = 1e-10
    multistart_count: int = 32
    seed: int = 0
    mode: Mode = Mode.BOTH
    nlp_multistart_count: int = 4
    # pattern roots (shortest first) handed to the full NLP as extra starts
    nlp_seed_count: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.residual_tol > 0.0:
            raise InvalidInputError("residual_tol must be positive")
        if self.multistart_count < 1 or self.nlp_multistart_count < 1:
            raise InvalidInputError("multistart counts must be >= 1")
        if self.nlp_seed_count < 0:
            raise InvalidInputError("nlp_seed_count must be >= 0")
        if not 0.0 < self.newton_damping < 1.0:
            raise InvalidInputError("newton_damping must lie in (0, 1)")
        if self.newton_max_iter < 1:
            raise InvalidInputError("newton_max_iter must be >= 1")


@dataclass(frozen=True)
class PathSolution:
    """A feasible length vector together with everything derived from it."""

    pattern: TurnPattern
    lengths: Tuple[float, ...]
    headings: Tuple[float, ...]
    intercept: Tuple[float, float]
    segment_times: Tuple[float, ...]
    pursuer_speed: float
    target_speed: float
    residual_norm: float

    @classmethod
    def from_lengths(cls, config: ScenarioConfig, pattern: TurnPattern,
                     lengths: Sequence[float]) -> "PathSolution":
        ell = np.asarray(lengths, dtype=float)
        times, _ = segment_times(ell, config.pursuer_speed, config.target_speed)
        res = np.max(np.abs(residuals(config, ell) / residual_scale(config)))
        return cls(pattern=pattern,
                   lengths=tuple(float(v) for v in ell),
                   headings=tuple(float(v) for v in junction_headings(config, ell)),
                   intercept=target_position(config, float(ell[-1])),
                   segment_times=times,
                   pursuer_speed=config.pursuer_speed,
                   target_speed=config.target_speed,
                   residual_norm=float(res))

    @property
    def objective(self) -> float:
        return math.fsum(self.lengths)

    @property
    def total_time(self) -> float:
        return math.fsum(self.segment_times[:-1])

    @property
    def pursuer_length(self) -> float:
        return math.fsum(self.lengths[:-1])

    @property
    def target_length(self) -> float:
        return self.lengths[-1]

    @property
    def arc_total(self) -> float:
        return math.fsum(v for i, v in enumerate(self.lengths[:-1]) if i % 3 != 2)

    def sort_key(self) -> Tuple[float, str, float]:
        return (self.objective, self.pattern.compact, self.arc_total)


@dataclass(frozen=True)
class PatternOutcome:
    """Result of solving one pattern; ``solution`` is None when infeasible."""

    pattern: TurnPattern
    solution: Optional[PathSolution]
    starts: int
    converged: int
    distinct_roots: int
    iterations: int
    best_residual: float
    wall_time: float = field(compare=False, default=0.0)

    @property
    def feasible(self) -> bool:
        return self.solution is not None

    @property
    def status(self) -> str:
        return "converged" if self.feasible else "infeasible"


@dataclass(frozen=True)
class PlanReport:
    best: Optional[PathSolution]
    all_feasible: Tuple[PathSolution, ...]
    diagnostics: Tuple[PatternOutcome, ...]
    nlp: Optional[PatternOutcome] = None
    config: Optional[ScenarioConfig] = None
    wall_time: float = field(compare=False, default=0.0)

    @property
    def feasible(self) -> bool:
        return self.best is not None


def enumerate_patterns(n: int) -> List[TurnPattern]:
    """All ``2**(n+1)`` turn patterns in lexicographic order (L before R)."""
    if n < 0:
        raise InvalidInputError("obstacle count must be >= 0")
    return [TurnPattern(p) for p in itertools.product((Turn.LEFT, Turn.RIGHT), repeat=n + 1)]


def select_best(solutions: Sequence[PathSolution]) -> Optional[PathSolution]:
    """Minimum objective; ties within ``TIE_TOL`` go to the earlier pattern, then fewer arcs."""
    best = None
    for sol in solutions:
        if best is None:
            best = sol
            continue
        d = sol.objective - best.objective
        if d < -TIE_TOL:
            best = sol
        elif abs(d) <= TIE_TOL and (sol.pattern.compact, sol.arc_total) < (
                best.pattern.compact, best.arc_total):
            best = sol
    return best


def newton(fun, jac, z0: np.ndarray, settings: SolverSettings) -> Tuple[np.ndarray, bool, int, float]:
    """Damped Newton with backtracking on the residual norm.

    Iterates are not clipped to the feasible orthant. Returns
    ``(z, converged, iterations, max_abs_residual)``.
    """
    z = np.array(z0, dtype=float)
    r = fun(z)
    norm = float(np.max(np.abs(r)))
    history = [norm]
    for it in range(1, settings.newton_max_iter + 1):
        if norm <= settings.residual_tol:
            return z, True, it - 1, norm
        J = jac(z)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, -r, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        merit = float(r @ r)
        t = 1.0
        while True:
            z_new = z + t * step
            r_new = fun(z_new)
            merit_new = float(r_new @ r_new)
            if merit_new <= (1.0 - 1e-4 * t) * merit or t < 1e-8:
                break
            t *= settings.newton_damping
        if merit_new >= merit and t < 1e-8:
            break
        z, r = z_new, r_new
        norm = float(np.max(np.abs(r)))
        history.append(norm)
        if np.max(np.abs(z)) > 1e3:
            break
        # stalled on a nonzero local minimum of the residual norm
        if len(history) > STALL_WINDOW and norm > 0.5 * history[-STALL_WINDOW - 1]:
            break
    return z, norm <= settings.residual_tol, len(history) - 1, norm


def _initial_points(config: ScenarioConfig, settings: SolverSettings) -> np.ndarray:
    """Multistart points in normalized reduced coordinates.

    Arc lengths span (0, one revolution) of their circle; straights scale the
    distance between consecutive circle centres; the target length starts
    on the timing constraint.
    """
    L = config.length_scale
    n1 = config.n + 1
    radii = config.circle_radii
    waypoints = [config.pursuer.xy] + [ob.center for ob in config.obstacles] + [config.target.xy]
    dist = [max(math.dist(waypoints[k], waypoints[k + 1]), radii[k]) for k in range(n1)]
    sampler = qmc.Halton(d=2 * n1, scramble=True, seed=settings.seed)
    u = sampler.random(settings.multistart_count)
    starts = np.empty((settings.multistart_count, 2 * n1 + 1))
    for k in range(n1):
        starts[:, 2 * k] = u[:, 2 * k] * TWO_PI * radii[k] / L
        starts[:, 2 * k + 1] = (0.25 + 1.5 * u[:, 2 * k + 1]) * dist[k] / L
    ratio = config.target_speed / config.pursuer_speed
    starts[:, -1] = ratio * starts[:, :-1].sum(axis=1)
    return starts


def _arc_caps(config: ScenarioConfig) -> np.ndarray:
    return TWO_PI * config.circle_radii


def _blocks(n: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """(reduced columns, residual rows) of each CS block.

    Junction j only involves lengths of blocks 0..j, so the reduced system is
    block lower-triangular; the last block also owns the target length and
    the timing row.
    """
    out = []
    for k in range(n + 1):
        if k < n:
            out.append((np.array([2 * k, 2 * k + 1]), np.array([2 * k, 2 * k + 1])))
        else:
            out.append((np.array([2 * n, 2 * n + 1, 2 * n + 2]),
                        np.array([2 * n, 2 * n + 1, 2 * n + 2])))
    return out


def solve_pattern(config: ScenarioConfig, pattern: TurnPattern,
                  settings: SolverSettings = SolverSettings()) -> PatternOutcome:
    """Solve the pattern-reduced square system from every multistart point.

    The system is solved block by block: each start supplies initial values
    for one block at a time, every admissible root of that block (lengths
    >= 0, arcs under one revolution) becomes a prefix for the next, and each
    complete root is polished by Newton on the full system. Among the
    resulting roots the shortest path is kept.
    """
    if len(pattern) != config.n + 1:
        raise InvalidInputError(
            f"pattern has {len(pattern)} circles, scenario needs {config.n + 1}")
    t0 = time.perf_counter()
    L = config.length_scale
    P = selection_matrix(pattern)
    scale = residual_scale(config)
    caps = _arc_caps(config) / L
    ratio = config.target_speed / config.pursuer_speed

    def fun(z):
        return residuals(config, P @ (z * L)) / scale

    def jac(z):
        return (jacobian(config, P @ (z * L)) @ P) * (L / scale[:, None])

    def admissible(z, cols) -> bool:
        if np.any(z[cols] < -NEG_TOL):
            return False
        return all(z[c] < caps[c // 2] for c in cols if c % 2 == 0 and c < z.size - 1)

    starts = _initial_points(config, settings)
    blocks = _blocks(config.n)
    iters = 0
    converged = 0
    best_res = math.inf

    def descend(prefix: np.ndarray, level: int) -> List[np.ndarray]:
        nonlocal iters, converged, best_res
        cols, rows = blocks[level]
        found: List[np.ndarray] = []
        for z0 in starts:
            z = prefix.copy()
            z[cols] = z0[cols]
            if level == len(blocks) - 1:
                z[-1] = ratio * np.sum(z[:-1])

            def f_b(w, z=z):
                z[cols] = w
                return fun(z)[rows]

            def j_b(w, z=z):
                z[cols] = w
                return jac(z)[np.ix_(rows, cols)]

            w, ok, it, _ = newton(f_b, j_b, z[cols], settings)
            iters += it
            z[cols] = w
            # full-system norm, so failed patterns still report how close they got
            best_res = min(best_res, float(np.max(np.abs(fun(z)))))
            if not ok:
                continue
            if not admissible(z, cols):
                continue
            z[cols] = np.where(z[cols] < 0.0, 0.0, z[cols])
            if any(np.allclose(z[cols], f[cols], rtol=0.0, atol=1e-7) for f in found):
                continue
            found.append(z.copy())
        if level == len(blocks) - 1:
            converged += len(found)
            return found
        leaves = []
        for z in found:
            leaves.extend(descend(z, level + 1))
        return leaves

    roots: List[np.ndarray] = []
    for z in descend(np.zeros(P.shape[1]), 0):
        # polish on the full system; blocks were solved with earlier ones frozen
        z, ok, it, norm = newton(fun, jac, z, settings)
        iters += it
        best_res = min(best_res, norm)
        if not ok or np.any(z < -NEG_TOL):
            continue
        z = np.where(z < 0.0, 0.0, z)
        if np.any(z[0:-1:2] >= caps) or np.max(np.abs(fun(z))) > settings.residual_tol:
            continue
        ell = P @ (z * L)
        if not any(np.allclose(ell, r, rtol=0.0, atol=1e-7 * L) for r in roots):
            roots.append(ell)

    solution = None
    if roots:
        cands = [PathSolution.from_lengths(config, pattern, r) for r in roots]
        solution = select_best(cands)
    return PatternOutcome(pattern, solution, settings.multistart_count, converged,
                          len(roots), iters, best_res, time.perf_counter() - t0)


def plan(config: ScenarioConfig, settings: SolverSettings = SolverSettings(),
         workers: int = 1) -> PlanReport:
    """Solve every turn pattern (and/or the full NLP) and keep the shortest path."""
    t0 = time.perf_counter()
    patterns = enumerate_patterns(config.n)
    outcomes: List[PatternOutcome] = []
    if settings.mode in (Mode.PATTERN, Mode.BOTH):
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(lambda p: solve_pattern(config, p, settings), patterns))
        else:
            outcomes = [solve_pattern(config, p, settings) for p in patterns]

    nlp_outcome = None
    if settings.mode in (Mode.NLP, Mode.BOTH):
        from .nlp import solve_full_nlp
        roots = sorted((o.solution for o in outcomes if o.solution is not None),
                       key=PathSolution.sort_key)
        seeds = [r.lengths for r in roots[:settings.nlp_seed_count]]
        nlp_outcome = solve_full_nlp(config, settings, seeds)

    # One solution per pattern. A both-arc NLP result replaces a pattern root
    # only when it is clearly shorter; marginal gains are not worth giving up
    # an exact single-arc-per-circle path.
    by_pattern = {o.pattern.compact: o.solution for o in outcomes if o.solution is not None}
    if nlp_outcome is not None and nlp_outcome.solution is not None:
        sol = nlp_outcome.solution
        prev = by_pattern.get(sol.pattern.compact)
        if prev is None or sol.objective < prev.objective * (1.0 - NLP_REPLACE_RTOL):
            by_pattern[sol.pattern.compact] = sol
    feasible = sorted(by_pattern.values(), key=PathSolution.sort_key)
    return PlanReport(best=select_best(feasible), all_feasible=tuple(feasible),
                      diagnostics=tuple(outcomes), nlp=nlp_outcome, config=config,
                      wall_time=time.perf_counter() - t0)
