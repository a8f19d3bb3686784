"""Minimum-length curvature-straight interception paths touring circular obstacles."""
from .geometry import (
    InvalidInputError,
    ObstacleSpec,
    Pose,
    SegmentSpec,
    obstacle_entry_point,
    propagate_arc,
    propagate_straight,
    sample_path,
)
from .model import (
    ScenarioConfig,
    Turn,
    TurnPattern,
    alpha_coefficients,
    apply_pattern,
    is_model_feasible,
    jacobian,
    junction_headings,
    objective,
    residuals,
    target_position,
)
from .solver import (
    Mode,
    PathSolution,
    PatternOutcome,
    PlanReport,
    SolverSettings,
    enumerate_patterns,
    plan,
    solve_pattern,
)
from .validate import ValidationReport, integrate, time_breakdown, validate
from .nlp import solve_full_nlp
from .oracle import grid_oracle, pattern_roots
from .geo import GeoPoint, parse_angle, project
from .scenario import ScenarioError, dump_scenario, load_scenario, scenario_from_dict
from .report import emit_report, read_segments_csv, render_svg

__version__ = "0.1.0"
