"""Latitude/longitude ingestion and the planar projection used for map scenarios.

Coordinates are mapped per point with an equirectangular rule,
``x = R cos(lat) lon`` and ``y = R lat`` (angles in radians), so a scenario
in kilometres comes out with ``R = 6371``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Tuple, Union

from .geometry import InvalidInputError

EARTH_RADIUS_KM = 6371.0

_DMS = re.compile(
    r"""^\s*
    (?P<deg>[+-]?\d+(?:\.\d+)?)\s*(?:°|d|deg|\s)\s*
    (?:(?P<min>\d+(?:\.\d+)?)\s*(?:'|′|m|\s)\s*)?
    (?:(?P<sec>\d+(?:\.\d+)?)\s*(?:"|″|''|s)?\s*)?
    (?P<hemi>[NSEWnsew])?\s*$""",
    re.VERBOSE,
)
_DECIMAL = re.compile(r"^\s*(?P<val>[+-]?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)\s*(?P<hemi>[NSEWnsew])?\s*$")


def parse_angle(text: Union[str, float, int], axis: str = "latitude") -> float:
    """Signed decimal degrees from a number, a decimal string or a DMS string.

    Accepts e.g. ``22.7377``, ``"22.7377N"``, ``"22°44'15.66\\"N"`` or
    ``"89 3 25.65 E"``. A S or W hemisphere letter negates the value.
    """
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        value = float(text)
    elif isinstance(text, str):
        m = _DECIMAL.match(text)
        if m:
            value = float(m.group("val"))
        else:
            m = _DMS.match(text)
            if not m:
                raise InvalidInputError(f"cannot parse {axis} {text!r}")
            deg = float(m.group("deg"))
            minutes = float(m.group("min") or 0.0)
            seconds = float(m.group("sec") or 0.0)
            if minutes >= 60.0 or seconds >= 60.0:
                raise InvalidInputError(f"{axis} {text!r}: minutes and seconds must be < 60")
            value = math.copysign(abs(deg) + minutes / 60.0 + seconds / 3600.0,
                                  -1.0 if text.strip().startswith("-") else 1.0)
        hemi = (m.group("hemi") or "").upper()
        if hemi:
            if hemi in "NS" and axis != "latitude" or hemi in "EW" and axis != "longitude":
                raise InvalidInputError(f"hemisphere {hemi} does not belong to a {axis}")
            if value < 0.0:
                raise InvalidInputError(f"{axis} {text!r}: use either a sign or a hemisphere")
            if hemi in "SW":
                value = -value
    else:
        raise InvalidInputError(f"{axis} must be a number or a string, got {type(text).__name__}")
    if not math.isfinite(value):
        raise InvalidInputError(f"{axis} must be finite")
    return value


@dataclass(frozen=True)
class GeoPoint:
    """A point on the sphere in signed decimal degrees."""

    latitude: float
    longitude: float
    reference_radius: float = EARTH_RADIUS_KM

    def __post_init__(self) -> None:
        lat = parse_angle(self.latitude, "latitude")
        lon = parse_angle(self.longitude, "longitude")
        if abs(lat) > 90.0:
            raise InvalidInputError(f"latitude must lie in [-90, 90], got {lat}")
        if abs(lon) > 180.0:
            raise InvalidInputError(f"longitude must lie in [-180, 180], got {lon}")
        if not (self.reference_radius > 0.0 and math.isfinite(self.reference_radius)):
            raise InvalidInputError(
                f"reference_radius must be positive, got {self.reference_radius}")
        object.__setattr__(self, "latitude", lat)
        object.__setattr__(self, "longitude", lon)
        object.__setattr__(self, "reference_radius", float(self.reference_radius))


def project(point: GeoPoint) -> Tuple[float, float]:
    """Planar (x, y) of ``point`` in the units of its reference radius."""
    lat = math.radians(point.latitude)
    lon = math.radians(point.longitude)
    r = point.reference_radius
    return (r * math.cos(lat) * lon, r * lat)
