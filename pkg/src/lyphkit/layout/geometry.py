"""Curves and shape helpers for the layout stages.

All curves expose an arc-length parameterization: point_at(f) returns the
point a fraction f of the total arc length from the start.  Lines and
circular arcs are exact; splines use a dense cumulative-length table.
"""

from __future__ import annotations

import math
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from ..resources import ModelSpec, Resource
    from .state import LayoutState

DEFAULT_CURVATURE = 0.25
_SPLINE_TABLE = 8192


def _vec3(value) -> np.ndarray:
    arr = np.zeros(3)
    for i, x in enumerate(value[:3]):
        arr[i] = float(x)
    return arr


class Curve:
    def point_at(self, fraction: float) -> np.ndarray:
        raise NotImplementedError

    def length(self) -> float:
        raise NotImplementedError

    def distance_to(self, point: np.ndarray, samples: int = 2048) -> float:
        ts = np.linspace(0.0, 1.0, samples)
        pts = np.stack([self.point_at(t) for t in ts])
        return float(np.min(np.linalg.norm(pts - point, axis=1)))


class Line(Curve):
    def __init__(self, a: np.ndarray, b: np.ndarray):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)

    def point_at(self, fraction: float) -> np.ndarray:
        return self.a + (self.b - self.a) * fraction

    def length(self) -> float:
        return float(np.linalg.norm(self.b - self.a))


class Arc(Curve):
    """Circular arc in the xy-plane; z interpolates linearly.

    The sagitta is `curvature` times the chord length, bulging to the left
    of the a->b direction for positive curvature.  Equal parameter steps
    are equal arc-length steps.
    """

    def __init__(self, a: np.ndarray, b: np.ndarray, curvature: float = DEFAULT_CURVATURE):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.curvature = curvature
        chord = self.b[:2] - self.a[:2]
        c = float(np.linalg.norm(chord))
        if c < 1e-12 or abs(curvature) < 1e-12:
            self._degenerate = True
            return
        self._degenerate = False
        u = chord / c
        p = np.array([-u[1], u[0]])  # left-hand perpendicular
        h = curvature * c
        mid = (self.a[:2] + self.b[:2]) / 2.0
        self.apex = mid + p * h
        radius = (c * c / 4.0 + h * h) / (2.0 * abs(h))
        self.center = mid + p * (h - math.copysign(radius, h))
        v0 = self.a[:2] - self.center
        v1 = self.b[:2] - self.center
        vm = self.apex - self.center
        self.radius = radius
        beta = _signed_angle(v0, v1)
        beta_m = _signed_angle(v0, vm)
        if beta == 0.0:
            beta = 2.0 * math.pi if beta_m > 0 else -2.0 * math.pi
        elif not (math.copysign(1.0, beta_m) == math.copysign(1.0, beta) and abs(beta_m) <= abs(beta)):
            beta = beta - math.copysign(2.0 * math.pi, beta)
        self.start_angle = math.atan2(v0[1], v0[0])
        self.sweep = beta

    def point_at(self, fraction: float) -> np.ndarray:
        if self._degenerate:
            return self.a + (self.b - self.a) * fraction
        angle = self.start_angle + self.sweep * fraction
        xy = self.center + self.radius * np.array([math.cos(angle), math.sin(angle)])
        z = self.a[2] + (self.b[2] - self.a[2]) * fraction
        return np.array([xy[0], xy[1], z])

    def length(self) -> float:
        if self._degenerate:
            return float(np.linalg.norm(self.b - self.a))
        return abs(self.sweep) * self.radius


def _signed_angle(v0: np.ndarray, v1: np.ndarray) -> float:
    return math.atan2(v0[0] * v1[1] - v0[1] * v1[0], float(np.dot(v0, v1)))


class Spline(Curve):
    """Quadratic Bezier with the control point offset perpendicular to the chord."""

    def __init__(self, a: np.ndarray, b: np.ndarray, curvature: float = DEFAULT_CURVATURE):
        self.a = np.asarray(a, dtype=float)
        self.b = np.asarray(b, dtype=float)
        chord = self.b - self.a
        c = float(np.linalg.norm(chord[:2]))
        if c < 1e-12:
            perp = np.zeros(3)
        else:
            u = chord[:2] / c
            perp = np.array([-u[1], u[0], 0.0])
        self.control = (self.a + self.b) / 2.0 + perp * curvature * c
        ts = np.linspace(0.0, 1.0, _SPLINE_TABLE + 1)
        pts = self._bezier(ts)
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self._ts = ts

    def _bezier(self, t):
        t = np.asarray(t, dtype=float).reshape(-1, 1)
        return ((1 - t) ** 2) * self.a + 2 * (1 - t) * t * self.control + (t ** 2) * self.b

    def point_at(self, fraction: float) -> np.ndarray:
        target = fraction * self._cum[-1]
        i = int(np.searchsorted(self._cum, target, side="right") - 1)
        i = max(0, min(i, len(self._cum) - 2))
        span = self._cum[i + 1] - self._cum[i]
        local = 0.0 if span <= 0 else (target - self._cum[i]) / span
        t = self._ts[i] + (self._ts[i + 1] - self._ts[i]) * local
        return self._bezier([t])[0]

    def length(self) -> float:
        return float(self._cum[-1])


def make_curve(a: np.ndarray, b: np.ndarray, geometry: str, curvature: float | None) -> Curve:
    if geometry == "ARC":
        return Arc(a, b, DEFAULT_CURVATURE if curvature is None else curvature)
    if geometry == "SPLINE":
        return Spline(a, b, DEFAULT_CURVATURE if curvature is None else curvature)
    return Line(a, b)


# ---------------------------------------------------------------------------
# Model-backed helpers
# ---------------------------------------------------------------------------

def node_position(state: "LayoutState", ref: str) -> np.ndarray | None:
    pos = state.positions.get(ref)
    return None if pos is None else np.asarray(pos, dtype=float)


def link_curve(model: "ModelSpec", state: "LayoutState", link: "Resource") -> Curve | None:
    a = node_position(state, link.props.get("source", ""))
    b = node_position(state, link.props.get("target", ""))
    if a is None or b is None:
        return None
    return make_curve(a, b, link.props.get("geometry", "LINE"), link.props.get("curvature"))


def wire_curve(model: "ModelSpec", wire: "Resource") -> Curve | None:
    ends = []
    for end in ("source", "target"):
        anchor = model.find(wire.props.get(end, ""), "Anchor") if isinstance(wire.props.get(end), str) else None
        if anchor is None or not isinstance(anchor.props.get("layout"), list):
            return None
        ends.append(_vec3(anchor.props["layout"]))
    return make_curve(ends[0], ends[1], wire.props.get("geometry", "LINE"), wire.props.get("curvature"))


def region_centroid(model: "ModelSpec", region: "Resource") -> np.ndarray:
    points = []
    for ref in region.props.get("border", []):
        anchor = model.find(ref, "Anchor") if isinstance(ref, str) else None
        if anchor is not None and isinstance(anchor.props.get("layout"), list):
            points.append(_vec3(anchor.props["layout"]))
    if not points:
        return np.zeros(3)
    return np.mean(np.stack(points), axis=0)


def lyph_center(model: "ModelSpec", state: "LayoutState", lyph: "Resource") -> np.ndarray | None:
    stored = state.lyph_centers.get(lyph.ref_in(model))
    if stored is not None:
        return np.asarray(stored, dtype=float)
    conveys = lyph.props.get("conveys")
    if isinstance(conveys, str):
        link = model.find(conveys, "Link")
        if link is not None:
            curve = link_curve(model, state, link)
            if curve is not None:
                return curve.point_at(0.5)
    host_ref = lyph.props.get("hostedBy")
    if isinstance(host_ref, str):
        region = model.find(host_ref, "Region")
        if region is not None:
            return region_centroid(model, region)
    host_ref = lyph.props.get("internalIn")
    if isinstance(host_ref, str):
        host = model.find(host_ref)
        if host is not None and host.cls == "Lyph" and host is not lyph:
            return lyph_center(model, state, host)
        if host is not None and host.cls == "Region":
            return region_centroid(model, host)
    return None


def lyph_axis(model: "ModelSpec", state: "LayoutState", lyph: "Resource") -> np.ndarray | None:
    """Unit vector of the lyph's long axis; lyphs align along their links."""
    conveys = lyph.props.get("conveys")
    if isinstance(conveys, str):
        link = model.find(conveys, "Link")
        if link is not None:
            a = node_position(state, link.props.get("source", ""))
            b = node_position(state, link.props.get("target", ""))
            if a is not None and b is not None:
                d = b - a
                norm = float(np.linalg.norm(d))
                if norm > 1e-12:
                    return d / norm
    return np.array([1.0, 0.0, 0.0])


def perpendicular(axis: np.ndarray) -> np.ndarray:
    """Unit vector perpendicular to the axis, preferring the xy-plane."""
    p = np.array([-axis[1], axis[0], 0.0])
    norm = float(np.linalg.norm(p))
    if norm < 1e-12:
        return np.array([1.0, 0.0, 0.0])
    return p / norm


def angle_between(u: np.ndarray, v: np.ndarray) -> float:
    """Smallest angle between two directions (orientation ignored)."""
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu < 1e-12 or nv < 1e-12:
        return 0.0
    cos = abs(float(np.dot(u, v))) / (nu * nv)
    return math.acos(min(1.0, cos))
