"""JSON scenario files.

Layout (all lengths in one consistent unit, speeds in that unit per time
unit, angles in radians counterclockwise from +x)::

    {
      "pursuer":   {"x": 0, "y": 0, "theta": "3pi/2", "speed": 6, "turn_radius": 1},
      "target":    {"x": 20, "y": 12, "theta": "pi", "speed": 1},
      "obstacles": [{"x": 4, "y": 8, "radius": 2}],
      "geo":       {"reference_radius": 6371}
    }

Any position may instead be given as ``"lat"``/``"lon"`` (decimal degrees or
DMS strings); such points are projected with :func:`csintercept.geo.project`
using ``geo.reference_radius`` (default 6371, i.e. kilometres). Angles may be
numbers or strings such as ``"5pi/6"``, ``"-pi/2"`` or ``"0.75*pi"``.
"""
from __future__ import annotations

import json
import math
import re
from importlib import resources
from pathlib import Path
from typing import Any, Dict, List, Mapping, Union

from .geo import EARTH_RADIUS_KM, GeoPoint, project
from .geometry import InvalidInputError, ObstacleSpec, Pose
from .model import ScenarioConfig

_ANGLE = re.compile(
    r"^\s*(?P<sign>[+-])?\s*(?P<num>\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(?P<den>\d+(?:\.\d*)?))?\s*$",
    re.IGNORECASE)

PathLike = Union[str, Path]


class ScenarioError(InvalidInputError):
    """A scenario document is malformed; the message names the offending field."""


def parse_angle_expr(value: Any, field: str = "theta") -> float:
    """Radians from a number or an ``a*pi/b`` style string."""
    if isinstance(value, bool):
        raise ScenarioError(f"{field}: expected an angle, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _ANGLE.match(value)
        if m:
            num = float(m.group("num")) if m.group("num") else 1.0
            den = float(m.group("den")) if m.group("den") else 1.0
            if den == 0.0:
                raise ScenarioError(f"{field}: division by zero in {value!r}")
            out = num * math.pi / den
            if m.group("sign") == "-":
                out = -out
        else:
            try:
                out = float(value)
            except ValueError:
                raise ScenarioError(f"{field}: cannot parse angle {value!r}") from None
    else:
        raise ScenarioError(f"{field}: expected an angle, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ScenarioError(f"{field}: angle must be finite")
    return out


def _number(obj: Mapping[str, Any], key: str, field: str) -> float:
    if key not in obj:
        raise ScenarioError(f"{field}.{key}: missing")
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{field}.{key}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise ScenarioError(f"{field}.{key}: must be finite")
    return float(v)


def _position(obj: Mapping[str, Any], field: str, radius: float):
    has_xy = "x" in obj or "y" in obj
    has_geo = "lat" in obj or "lon" in obj
    if has_xy and has_geo:
        raise ScenarioError(f"{field}: give either x/y or lat/lon, not both")
    if has_geo:
        if "lat" not in obj or "lon" not in obj:
            raise ScenarioError(f"{field}: lat and lon must both be given")
        try:
            return project(GeoPoint(obj["lat"], obj["lon"], radius))
        except InvalidInputError as exc:
            raise ScenarioError(f"{field}: {exc}") from None
    return _number(obj, "x", field), _number(obj, "y", field)


def _section(doc: Mapping[str, Any], key: str) -> Mapping[str, Any]:
    if key not in doc:
        raise ScenarioError(f"{key}: missing")
    sec = doc[key]
    if not isinstance(sec, Mapping):
        raise ScenarioError(f"{key}: expected an object")
    return sec


def scenario_from_dict(doc: Mapping[str, Any]) -> ScenarioConfig:
    """Validate a parsed scenario document and build the config."""
    if not isinstance(doc, Mapping):
        raise ScenarioError("scenario: expected a JSON object at top level")
    radius = EARTH_RADIUS_KM
    if "geo" in doc:
        geo = _section(doc, "geo")
        if "reference_radius" in geo:
            radius = _number(geo, "reference_radius", "geo")
            if radius <= 0.0:
                raise ScenarioError("geo.reference_radius: must be positive")

    p = _section(doc, "pursuer")
    t = _section(doc, "target")
    if "theta" not in p:
        raise ScenarioError("pursuer.theta: missing")
    if "theta" not in t:
        raise ScenarioError("target.theta: missing")
    px, py = _position(p, "pursuer", radius)
    tx, ty = _position(t, "target", radius)
    try:
        pursuer = Pose(px, py, parse_angle_expr(p["theta"], "pursuer.theta"))
        target = Pose(tx, ty, parse_angle_expr(t["theta"], "target.theta"))
    except ScenarioError:
        raise
    except InvalidInputError as exc:
        raise ScenarioError(f"pursuer/target: {exc}") from None

    obstacles: List[ObstacleSpec] = []
    raw = doc.get("obstacles", [])
    if not isinstance(raw, list):
        raise ScenarioError("obstacles: expected a list")
    for i, ob in enumerate(raw):
        field = f"obstacles[{i}]"
        if not isinstance(ob, Mapping):
            raise ScenarioError(f"{field}: expected an object")
        ox, oy = _position(ob, field, radius)
        r = _number(ob, "radius", field)
        if r <= 0.0:
            raise ScenarioError(f"{field}.radius: must be positive, got {r}")
        obstacles.append(ObstacleSpec(ox, oy, r))

    vp = _number(p, "speed", "pursuer")
    vt = _number(t, "speed", "target")
    ra = _number(p, "turn_radius", "pursuer")
    if ra <= 0.0:
        raise ScenarioError(f"pursuer.turn_radius: must be positive, got {ra}")
    if vp <= 0.0:
        raise ScenarioError(f"pursuer.speed: must be positive, got {vp}")
    if vt < 0.0:
        raise ScenarioError(f"target.speed: must be >= 0, got {vt}")
    if not vp > vt:
        raise ScenarioError(
            f"pursuer.speed: must exceed target.speed for interception ({vp} <= {vt})")
    return ScenarioConfig(pursuer, vp, ra, target, vt, tuple(obstacles))


def bundled_names() -> List[str]:
    """Names of the scenario fixtures shipped with the package."""
    data = resources.files("csintercept") / "data"
    return sorted(p.name[:-5] for p in data.iterdir() if p.name.endswith(".json"))


def _read_text(source: PathLike) -> str:
    path = Path(source)
    if path.is_file():
        try:
            return path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ScenarioError(f"{path}: {exc.strerror}") from None
    name = str(source)
    if path.suffix == "" and name in bundled_names():
        return (resources.files("csintercept") / "data" / f"{name}.json").read_text("utf-8")
    raise ScenarioError(f"{source}: no such file or bundled scenario")


def load_scenario(source: PathLike) -> ScenarioConfig:
    """Load a scenario from a JSON file path or a bundled fixture name."""
    text = _read_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{source}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
    try:
        return scenario_from_dict(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{source}: {exc}") from None


def scenario_to_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """Canonical planar document; :func:`scenario_from_dict` inverts it exactly."""
    return {
        "pursuer": {"x": config.pursuer.x, "y": config.pursuer.y,
                    "theta": config.pursuer.theta, "speed": config.pursuer_speed,
                    "turn_radius": config.turn_radius},
        "target": {"x": config.target.x, "y": config.target.y,
                   "theta": config.target.theta, "speed": config.target_speed},
        "obstacles": [{"x": ob.x, "y": ob.y, "radius": ob.radius} for ob in config.obstacles],
    }


def dump_scenario(config: ScenarioConfig, path: PathLike) -> Path:
    out = Path(path)
    try:
        out.write_text(json.dumps(scenario_to_dict(config), indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"{out}: {exc.strerror}") from None
    return out
