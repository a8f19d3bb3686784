"""Full both-arc model solved as a bound-constrained augmented Lagrangian.

Here both arc variables of every turning circle are free, so no turn pattern
is fixed in advance. The equality residuals are handled by multipliers plus
a quadratic penalty, and nonnegativity by simple bounds on the inner
quasi-Newton solve. Each local minimizer is then polished to full residual
tolerance, either as its dominant turn pattern or on the constraint manifold.
"""
from __future__ import annotations

import math
import time
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .geometry import TWO_PI
from .model import (
    ScenarioConfig,
    Turn,
    TurnPattern,
    jacobian,
    residual_scale,
    residuals,
    selection_matrix,
)
from .solver import NEG_TOL, PathSolution, PatternOutcome, SolverSettings, newton, select_best

MU0 = 100.0
MU_MAX = 1e10
OUTER_MAX = 30
# stop the outer loop once the scaled constraint violation is this small;
# the manifold polish takes the point the rest of the way
AL_TOL = 1e-7
# normalized lengths below this after the AL solve are treated as active bounds
ACTIVE_TOL = 1e-6


def _starts(config: ScenarioConfig, settings: SolverSettings) -> np.ndarray:
    L = config.length_scale
    n1 = config.n + 1
    radii = config.circle_radii
    pts = [config.pursuer.xy] + [ob.center for ob in config.obstacles] + [config.target.xy]
    dist = [max(math.dist(pts[k], pts[k + 1]), radii[k]) for k in range(n1)]
    u = qmc.Halton(d=3 * n1, scramble=True, seed=settings.seed).random(
        settings.nlp_multistart_count)
    z = np.empty((u.shape[0], 3 * n1 + 1))
    for k in range(n1):
        # only part of a revolution per arc: two long opposite arcs mostly cancel
        z[:, 3 * k] = 0.5 * u[:, 3 * k] * TWO_PI * radii[k] / L
        z[:, 3 * k + 1] = 0.5 * u[:, 3 * k + 1] * TWO_PI * radii[k] / L
        z[:, 3 * k + 2] = (0.25 + 1.5 * u[:, 3 * k + 2]) * dist[k] / L
    z[:, -1] = config.target_speed / config.pursuer_speed * z[:, :-1].sum(axis=1)
    return z


def _bounds(config: ScenarioConfig) -> List[Tuple[float, Optional[float]]]:
    L = config.length_scale
    bounds: List[Tuple[float, Optional[float]]] = []
    for r in config.circle_radii:
        cap = TWO_PI * r / L * (1.0 - 1e-9)
        bounds += [(0.0, cap), (0.0, cap), (0.0, None)]
    bounds.append((0.0, None))
    return bounds


def augmented_lagrangian(config: ScenarioConfig, z0: np.ndarray) -> Tuple[np.ndarray, float, int]:
    """Local minimizer of total length from ``z0`` (normalized lengths).

    Returns ``(z, max_abs_scaled_residual, inner_iterations)``.
    """
    L = config.length_scale
    scale = residual_scale(config)
    bounds = _bounds(config)

    def cons(z):
        return residuals(config, z * L) / scale

    def cjac(z):
        return jacobian(config, z * L) * (L / scale[:, None])

    lam = np.zeros(2 * config.n + 3)
    mu = MU0
    z = np.array(z0, dtype=float)
    viol_prev = math.inf
    inner = 0
    for _ in range(OUTER_MAX):
        def phi(x, lam=lam, mu=mu):
            c = cons(x)
            w = lam + mu * c
            val = x.sum() + lam @ c + 0.5 * mu * (c @ c)
            return val, 1.0 + cjac(x).T @ w

        res = minimize(phi, z, jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": 500, "ftol": 1e-15, "gtol": 1e-10})
        inner += res.nit
        z = res.x
        c = cons(z)
        viol = float(np.max(np.abs(c)))
        if viol <= AL_TOL:
            break
        lam = lam + mu * c
        if viol > 0.25 * viol_prev:
            mu = min(mu * 10.0, MU_MAX)
        viol_prev = viol
    return z, float(np.max(np.abs(cons(z)))), inner


def dominant_pattern(config: ScenarioConfig, lengths) -> TurnPattern:
    """Per circle, the direction whose arc is longer (left on ties)."""
    ell = np.asarray(lengths, dtype=float)
    return TurnPattern(tuple(Turn.LEFT if ell[3 * k] >= ell[3 * k + 1] else Turn.RIGHT
                             for k in range(config.n + 1)))


def _feasible(config: ScenarioConfig, ell: np.ndarray, tol: float) -> bool:
    L = config.length_scale
    if np.any(ell < -NEG_TOL * L):
        return False
    caps = TWO_PI * config.circle_radii
    arcs = ell[:-1].reshape(-1, 3)[:, :2]
    if np.any(arcs >= caps[:, None]):
        return False
    r = residuals(config, np.maximum(ell, 0.0)) / residual_scale(config)
    return float(np.max(np.abs(r))) <= tol


def _polish_pattern(config: ScenarioConfig, pattern: TurnPattern, z: np.ndarray,
                    settings: SolverSettings) -> Optional[np.ndarray]:
    L = config.length_scale
    P = selection_matrix(pattern)
    scale = residual_scale(config)
    # fold the inactive arc into the active one with the net heading change
    red = P.T @ z
    for k, s in enumerate(pattern.signs):
        net = z[3 * k] - z[3 * k + 1]
        red[2 * k] = max(net if s is Turn.LEFT else -net, 0.0)

    def fun(y):
        return residuals(config, P @ (y * L)) / scale

    def jac(y):
        return (jacobian(config, P @ (y * L)) @ P) * (L / scale[:, None])

    y, ok, _, _ = newton(fun, jac, red, settings)
    if not ok:
        return None
    ell = P @ (np.where(y < 0.0, 0.0, y) * L)
    if np.any(y < -NEG_TOL) or not _feasible(config, ell, settings.residual_tol):
        return None
    return ell


def _polish_manifold(config: ScenarioConfig, z: np.ndarray,
                     settings: SolverSettings) -> Optional[np.ndarray]:
    """Minimum-norm Gauss-Newton onto the constraint set.

    Lengths the inner solve left (numerically) at their bound are set to
    exactly zero and held there, so the path has no sliver segments.
    """
    L = config.length_scale
    scale = residual_scale(config)
    free = z > ACTIVE_TOL
    z = np.where(free, z, 0.0)
    for _ in range(settings.newton_max_iter):
        c = residuals(config, z * L) / scale
        if float(np.max(np.abs(c))) <= settings.residual_tol:
            ell = np.where(z < 0.0, 0.0, z) * L
            if np.any(z < -NEG_TOL) or not _feasible(config, ell, settings.residual_tol):
                return None
            return ell
        J = (jacobian(config, z * L) * (L / scale[:, None]))[:, free]
        step = np.linalg.lstsq(J, -c, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            return None
        z[free] += step
    return None


def solve_full_nlp(config: ScenarioConfig,
                   settings: SolverSettings = SolverSettings(),
                   seeds: Sequence[Sequence[float]] = ()) -> PatternOutcome:
    """Best local solution of the both-arc model.

    Starts are ``nlp_multistart_count`` low-discrepancy points followed by
    any ``seeds`` (full length vectors, e.g. pattern-solver roots). The
    outcome is labelled with the dominant turn pattern of the chosen
    solution.
    """
    t0 = time.perf_counter()
    starts = _starts(config, settings)
    if len(seeds):
        seeded = np.asarray(seeds, dtype=float).reshape(len(seeds), config.size)
        starts = np.vstack([starts, seeded / config.length_scale])
    cands: List[PathSolution] = []
    best_res = math.inf
    iters = 0
    converged = 0
    for z0 in starts:
        z, viol, it = augmented_lagrangian(config, z0)
        iters += it
        best_res = min(best_res, viol)
        if viol > 1e-6:
            continue
        converged += 1
        pattern = dominant_pattern(config, z)
        for ell in (_polish_pattern(config, pattern, z, settings),
                    _polish_manifold(config, z, settings)):
            if ell is not None:
                cands.append(PathSolution.from_lengths(config, dominant_pattern(config, ell), ell))
    best = select_best(cands)
    pattern = best.pattern if best is not None else TurnPattern((Turn.LEFT,) * (config.n + 1))
    distinct: List[Tuple[float, ...]] = []
    for c in cands:
        if not any(np.allclose(c.lengths, d, rtol=0.0, atol=1e-7 * config.length_scale)
                   for d in distinct):
            distinct.append(c.lengths)
    return PatternOutcome(pattern, best, len(starts), converged,
                          len(distinct), iters, best_res, time.perf_counter() - t0)
