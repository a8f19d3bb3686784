"""CSV, SVG and text output for a planning run."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .geometry import (
    InvalidInputError,
    Pose,
    SegmentSpec,
    obstacle_entry_point,
    propagate,
    sample_path,
)
from .model import ScenarioConfig, alpha_coefficients, junction_headings
from .solver import PathSolution, PlanReport
from .validate import ValidationReport, segment_times

SEGMENT_COLUMNS = ("index", "kind", "signed_curvature", "length", "duration",
                   "start_x", "start_y", "start_theta")
SUMMARY_COLUMNS = ("status", "pattern", "f", "intercept_x", "intercept_y", "total_time")


def fmt(value: float) -> str:
    """Fixed-point with six decimals, the precision used in every CSV."""
    out = f"{value:.6f}"
    return "0.000000" if out == "-0.000000" else out


@dataclass(frozen=True)
class SegmentRow:
    index: int
    kind: str
    signed_curvature: float
    length: float
    duration: float
    start: Pose


def segment_rows(config: ScenarioConfig, solution: PathSolution) -> List[SegmentRow]:
    """One row per entry of the length vector, target last."""
    ell = np.asarray(solution.lengths, dtype=float)
    alpha = alpha_coefficients(config)
    theta = junction_headings(config, ell)
    times, _ = segment_times(ell, config.pursuer_speed, config.target_speed)
    rows = []
    pose = config.pursuer
    for i, a in enumerate(alpha):
        k = i // 3
        if i % 3 == 0 and k > 0:
            # each block after the first starts on its obstacle's entry point
            ex, ey = obstacle_entry_point(config.obstacles[k - 1], theta[i])
            pose = Pose(ex, ey, theta[i])
        kind = "L" if i % 3 == 0 else "R" if i % 3 == 1 else "S"
        rows.append(SegmentRow(i, kind, float(a), float(ell[i]), times[i], pose))
        pose = propagate(pose, SegmentSpec(float(a), float(ell[i])))
    rows.append(SegmentRow(len(alpha), "Target", 0.0, float(ell[-1]), times[-1], config.target))
    return rows


def write_segments_csv(rows: Sequence[SegmentRow], path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SEGMENT_COLUMNS)
    for r in rows:
        w.writerow([r.index, r.kind, fmt(r.signed_curvature), fmt(r.length), fmt(r.duration),
                    fmt(r.start.x), fmt(r.start.y), fmt(r.start.theta)])
    _write(path, buf.getvalue())


def summary_values(rows: Sequence[SegmentRow]) -> Tuple[float, float]:
    """(f, total time) summed from the rounded CSV columns, so the files agree exactly."""
    f = math.fsum(float(fmt(r.length)) for r in rows)
    t = math.fsum(float(fmt(r.duration)) for r in rows if r.kind != "Target")
    return f, t


def write_summary_csv(solution: Optional[PathSolution], rows: Sequence[SegmentRow],
                      path: Path) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_COLUMNS)
    if solution is None:
        w.writerow(["INFEASIBLE", "", "", "", "", ""])
    else:
        f, t = summary_values(rows)
        w.writerow(["OK", str(solution.pattern), fmt(f), fmt(solution.intercept[0]),
                    fmt(solution.intercept[1]), fmt(t)])
    _write(path, buf.getvalue())


def read_segments_csv(path) -> np.ndarray:
    """Length vector from a ``segments.csv`` file (rows ordered by index)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInputError(f"{path}: {exc.strerror}") from None
    rows = list(csv.DictReader(io.StringIO(text)))
    if not rows:
        raise InvalidInputError(f"{path}: no segment rows")
    missing = {"index", "length"} - set(rows[0])
    if missing:
        raise InvalidInputError(f"{path}: missing column(s) {sorted(missing)}")
    try:
        pairs = sorted((int(r["index"]), float(r["length"])) for r in rows)
    except ValueError as exc:
        raise InvalidInputError(f"{path}: {exc}") from None
    if [i for i, _ in pairs] != list(range(len(pairs))):
        raise InvalidInputError(f"{path}: segment indices must be 0..{len(pairs) - 1}")
    return np.array([v for _, v in pairs])


# ---------------------------------------------------------------- SVG

_STYLE = {
    "obstacle": 'fill="#f2c4c4" stroke="#b03030"',
    "turning": 'fill="none" stroke="#8888aa" stroke-dasharray="{d} {d}"',
    "pursuer": 'fill="none" stroke="#1f4fb4"',
    "target": 'fill="none" stroke="#c07000" stroke-dasharray="{d} {d}"',
    "entry": 'fill="#2a8a2a"',
    "exit": 'fill="#ffffff" stroke="#2a8a2a"',
}


def _path_points(config: ScenarioConfig, solution: PathSolution, step: float) -> List[List[Pose]]:
    """Sampled pursuer path, one polyline per CS block."""
    rows = segment_rows(config, solution)[:-1]
    out = []
    for k in range(config.n + 1):
        block = rows[3 * k:3 * k + 3]
        segs = [SegmentSpec(r.signed_curvature, r.length) for r in block]
        out.append(sample_path(block[0].start, segs, step))
    return out


def render_svg(config: ScenarioConfig, solution: Optional[PathSolution]) -> str:
    """Overhead view with y up; one SVG unit per scenario length unit."""
    pts: List[Tuple[float, float]] = [config.pursuer.xy, config.target.xy]
    for ob in config.obstacles:
        pts += [(ob.x - ob.radius, ob.y - ob.radius), (ob.x + ob.radius, ob.y + ob.radius)]
    polylines: List[List[Pose]] = []
    if solution is not None:
        span0 = max(config.length_scale, 1e-9)
        polylines = _path_points(config, solution, span0 / 400.0)
        for line in polylines:
            pts += [p.xy for p in line]
        pts.append(solution.intercept)
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    w = max(max(xs) - min(xs), 1e-9)
    h = max(max(ys) - min(ys), 1e-9)
    span = max(w, h)
    mx, my = 0.1 * w if w > 1e-9 else 0.1 * span, 0.1 * h if h > 1e-9 else 0.1 * span
    x0, y0 = min(xs) - mx, -(max(ys) + my)
    vw, vh = w + 2 * mx, h + 2 * my
    lw = span / 300.0
    dash = fmt(4 * lw)

    def P(x, y):
        return f"{fmt(x)},{fmt(-y)}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{fmt(x0)} {fmt(y0)} {fmt(vw)} {fmt(vh)}" '
           f'width="{fmt(vw)}" height="{fmt(vh)}">']
    for ob in config.obstacles:
        out.append(f'<circle cx="{fmt(ob.x)}" cy="{fmt(-ob.y)}" r="{fmt(ob.radius)}" '
                   f'{_STYLE["obstacle"]} stroke-width="{fmt(lw)}"/>')
    # initial turning circles of the pursuer
    for sign in (1.0, -1.0):
        cx = config.pursuer.x - sign * config.turn_radius * math.sin(config.pursuer.theta)
        cy = config.pursuer.y + sign * config.turn_radius * math.cos(config.pursuer.theta)
        out.append(f'<circle cx="{fmt(cx)}" cy="{fmt(-cy)}" r="{fmt(config.turn_radius)}" '
                   f'{_STYLE["turning"].format(d=dash)} stroke-width="{fmt(lw / 2)}"/>')
    if solution is not None:
        ix, iy = solution.intercept
        out.append(f'<polyline points="{P(config.target.x, config.target.y)} {P(ix, iy)}" '
                   f'{_STYLE["target"].format(d=dash)} stroke-width="{fmt(lw)}"/>')
        for line in polylines:
            coords = " ".join(P(p.x, p.y) for p in line)
            out.append(f'<polyline points="{coords}" {_STYLE["pursuer"]} stroke-width="{fmt(lw)}"/>')
        rows = segment_rows(config, solution)[:-1]
        for k in range(config.n + 1):
            entry = rows[3 * k].start
            exit_ = rows[3 * k + 2].start
            out.append(f'<circle cx="{fmt(entry.x)}" cy="{fmt(-entry.y)}" r="{fmt(2 * lw)}" '
                       f'{_STYLE["entry"]}/>')
            out.append(f'<circle cx="{fmt(exit_.x)}" cy="{fmt(-exit_.y)}" r="{fmt(2 * lw)}" '
                       f'{_STYLE["exit"]} stroke-width="{fmt(lw / 2)}"/>')
        out.append(f'<circle cx="{fmt(ix)}" cy="{fmt(-iy)}" r="{fmt(3 * lw)}" fill="#c07000"/>')
    out.append(f'<circle cx="{fmt(config.pursuer.x)}" cy="{fmt(-config.pursuer.y)}" '
               f'r="{fmt(3 * lw)}" fill="#1f4fb4"/>')
    out.append(f'<circle cx="{fmt(config.target.x)}" cy="{fmt(-config.target.y)}" '
               f'r="{fmt(3 * lw)}" fill="none" stroke="#c07000" stroke-width="{fmt(lw)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------- text

def render_text(report: PlanReport, validation: Optional[ValidationReport]) -> str:
    lines = []
    best = report.best
    if best is None:
        lines.append("status: INFEASIBLE")
    else:
        lines += [
            "status: OK",
            f"pattern: {best.pattern}",
            f"objective f: {best.objective:.6f}",
            f"pursuer length: {best.pursuer_length:.6f}",
            f"target length: {best.target_length:.6f}",
            f"intercept: ({best.intercept[0]:.6f}, {best.intercept[1]:.6f})",
            f"total time: {best.total_time:.6f}",
            f"residual max-norm (scaled): {best.residual_norm:.3e}",
        ]
    lines.append("")
    lines.append("feasible alternatives:")
    for sol in report.all_feasible:
        lines.append(f"  {sol.pattern}  f={sol.objective:.6f}  "
                     f"intercept=({sol.intercept[0]:.4f}, {sol.intercept[1]:.4f})")
    outcomes = list(report.diagnostics) + ([report.nlp] if report.nlp is not None else [])
    if outcomes:
        lines += ["", "pattern diagnostics:",
                  "  pattern  status      starts  roots  iterations  best_residual  wall_s"]
    for o in outcomes:
        label = o.pattern.compact if o is not report.nlp else "NLP"
        lines.append(f"  {label:<8} {o.status:<11} {o.starts:>6} {o.distinct_roots:>6} "
                     f"{o.iterations:>11} {o.best_residual:>14.3e} {o.wall_time:>7.3f}")
    if validation is not None:
        v = validation
        lines += [
            "",
            "kinematic replay:",
            f"  miss distance: {v.miss_distance:.3e}",
            f"  final time: {v.final_time:.6f}",
            f"  length error: {v.length_error:.3e}",
            f"  time error: {v.time_error:.3e}",
            "  pin jumps: " + ", ".join(f"{d:.3e}" for d in v.pin_jumps),
            "  tangency gap: " + ", ".join(f"{g:.6f}" for g in v.tangency_gap),
            "  clearance: " + ("clear" if v.clear else ", ".join(
                f"obstacle {i} penetrated by {d:.6f}" for i, d in v.clearance_violations)),
        ]
    return "\n".join(lines) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def emit_report(report: PlanReport, validation: Optional[ValidationReport], out_dir,
                config: Optional[ScenarioConfig] = None) -> Dict[str, Path]:
    """Write segments.csv, summary.csv, path.svg and report.txt into ``out_dir``."""
    config = config if config is not None else report.config
    if config is None:
        raise InvalidInputError("emit_report needs the scenario config")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror}") from None
    rows = segment_rows(config, report.best) if report.best is not None else []
    files = {name: out / name for name in ("segments.csv", "summary.csv", "path.svg", "report.txt")}
    write_segments_csv(rows, files["segments.csv"])
    write_summary_csv(report.best, rows, files["summary.csv"])
    _write(files["path.svg"], render_svg(config, report.best))
    _write(files["report.txt"], render_text(report, validation))
    return files
