"""Planar region shapes: area, containment, overlap tests, and fill paths.

Shapes are axis-aligned rectangles, discs, and annuli in part coordinates
(mm, origin at the part's minimum corner).  Fill paths are open polylines;
rectangles and discs get serpentine rasters, annuli get concentric rings
(a serpentine would have to hop the hole).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from ..errors import PlanError

__all__ = [
    "Rect",
    "Disc",
    "Annulus",
    "Shape",
    "shape_to_dict",
    "shape_from_dict",
    "shapes_overlap",
    "fill_path",
]

_EPS = 1e-9


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle [x0, x1] x [y0, y1] (mm)."""

    x0: float
    y0: float
    x1: float
    y1: float

    def __post_init__(self):
        if not (self.x1 > self.x0 and self.y1 > self.y0):
            raise PlanError(
                f"rectangle has no area: [{self.x0},{self.x1}]x[{self.y0},{self.y1}]")

    @property
    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (self.x0, self.y0, self.x1, self.y1)

    @property
    def min_feature(self) -> float:
        """Narrowest dimension a fill row must fit through (mm)."""
        return min(self.x1 - self.x0, self.y1 - self.y0)


@dataclass(frozen=True)
class Disc:
    """Filled circle of radius r centred at (cx, cy) (mm)."""

    cx: float
    cy: float
    r: float

    def __post_init__(self):
        if self.r <= 0:
            raise PlanError(f"disc radius must be > 0, got {self.r}")

    @property
    def area(self) -> float:
        return math.pi * self.r * self.r

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        return (self.cx - self.r, self.cy - self.r, self.cx + self.r, self.cy + self.r)

    @property
    def min_feature(self) -> float:
        return 2.0 * self.r


@dataclass(frozen=True)
class Annulus:
    """Ring r_in < rho < r_out centred at (cx, cy) (mm)."""

    cx: float
    cy: float
    r_in: float
    r_out: float

    def __post_init__(self):
        if not 0 < self.r_in < self.r_out:
            raise PlanError(
                f"annulus needs 0 < r_in < r_out, got ({self.r_in}, {self.r_out})")

    @property
    def area(self) -> float:
        return math.pi * (self.r_out ** 2 - self.r_in ** 2)

    @property
    def bbox(self) -> tuple[float, float, float, float]:
        r = self.r_out
        return (self.cx - r, self.cy - r, self.cx + r, self.cy + r)

    @property
    def min_feature(self) -> float:
        """The band width: fill rings run along the band."""
        return self.r_out - self.r_in


Shape = Union[Rect, Disc, Annulus]


def shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Rect):
        return {"kind": "rect", "x0": shape.x0, "y0": shape.y0,
                "x1": shape.x1, "y1": shape.y1}
    if isinstance(shape, Disc):
        return {"kind": "disc", "cx": shape.cx, "cy": shape.cy, "r": shape.r}
    if isinstance(shape, Annulus):
        return {"kind": "annulus", "cx": shape.cx, "cy": shape.cy,
                "r_in": shape.r_in, "r_out": shape.r_out}
    raise PlanError(f"unknown shape type {type(shape).__name__}")


def shape_from_dict(doc: dict) -> Shape:
    kind = doc.get("kind")
    try:
        if kind == "rect":
            return Rect(doc["x0"], doc["y0"], doc["x1"], doc["y1"])
        if kind == "disc":
            return Disc(doc["cx"], doc["cy"], doc["r"])
        if kind == "annulus":
            return Annulus(doc["cx"], doc["cy"], doc["r_in"], doc["r_out"])
    except KeyError as exc:
        raise PlanError(f"shape {kind!r} missing field {exc}") from exc
    raise PlanError(f"unknown shape kind {kind!r}")


def _dist(ax, ay, bx, by):
    return math.hypot(ax - bx, ay - by)


def _rect_point_dist(rect: Rect, px, py):
    dx = max(rect.x0 - px, 0.0, px - rect.x1)
    dy = max(rect.y0 - py, 0.0, py - rect.y1)
    return math.hypot(dx, dy)


def _rect_point_maxdist(rect: Rect, px, py):
    dx = max(px - rect.x0, rect.x1 - px)
    dy = max(py - rect.y0, rect.y1 - py)
    return math.hypot(dx, dy)


def shapes_overlap(a: Shape, b: Shape, eps: float = _EPS) -> bool:
    """True when the interiors intersect; touching boundaries do not count.

    Every pair is exact except eccentric annulus/annulus, which falls back to
    a conservative test that can flag near-miss pairs as overlapping.
    """
    if isinstance(a, Rect) and isinstance(b, Rect):
        return (min(a.x1, b.x1) - max(a.x0, b.x0) > eps
                and min(a.y1, b.y1) - max(a.y0, b.y0) > eps)
    if isinstance(a, Disc) and isinstance(b, Disc):
        return _dist(a.cx, a.cy, b.cx, b.cy) < a.r + b.r - eps
    if isinstance(a, Rect) and isinstance(b, Disc):
        return _rect_point_dist(a, b.cx, b.cy) < b.r - eps
    if isinstance(a, Disc) and isinstance(b, Rect):
        return shapes_overlap(b, a, eps)
    if isinstance(a, Disc) and isinstance(b, Annulus):
        dist = _dist(a.cx, a.cy, b.cx, b.cy)
        return (dist < b.r_out + a.r - eps) and (dist + a.r > b.r_in + eps)
    if isinstance(a, Annulus) and isinstance(b, Disc):
        return shapes_overlap(b, a, eps)
    if isinstance(a, Rect) and isinstance(b, Annulus):
        near = _rect_point_dist(a, b.cx, b.cy)
        far = _rect_point_maxdist(a, b.cx, b.cy)
        return near < b.r_out - eps and far > b.r_in + eps
    if isinstance(a, Annulus) and isinstance(b, Rect):
        return shapes_overlap(b, a, eps)
    if isinstance(a, Annulus) and isinstance(b, Annulus):
        dist = _dist(a.cx, a.cy, b.cx, b.cy)
        if dist <= eps:
            return min(a.r_out, b.r_out) - max(a.r_in, b.r_in) > eps
        if dist >= a.r_out + b.r_out - eps:
            return False
        if dist + a.r_out <= b.r_in + eps or dist + b.r_out <= a.r_in + eps:
            return False
        return True  # conservative for eccentric rings
    raise PlanError(
        f"no overlap test for {type(a).__name__}/{type(b).__name__}")


def _row_count(extent: float, pitch: float) -> int:
    """Rows spanning `extent` at nominal pitch, half-up rounding, at least 1."""
    return max(1, math.floor(extent / pitch + 0.5))


def _serpentine_rect(rect: Rect, pitch: float, axis: str):
    # Rows evenly spaced at extent/n (nominal pitch), so paths stay inside
    # the region; the pass's total screw rotation is set from the area, not
    # the path length, so row-count rounding does not change deposited volume.
    if axis == "x":
        lo, hi, a0, a1 = rect.y0, rect.y1, rect.x0, rect.x1
    else:
        lo, hi, a0, a1 = rect.x0, rect.x1, rect.y0, rect.y1
    n = _row_count(hi - lo, pitch)
    step = (hi - lo) / n
    pts: list[tuple[float, float]] = []
    for i in range(n):
        c = lo + step * (i + 0.5)
        s, e = (a0, a1) if i % 2 == 0 else (a1, a0)
        if axis == "x":
            pts.extend([(s, c), (e, c)])
        else:
            pts.extend([(c, s), (c, e)])
    return pts


def _serpentine_disc(disc: Disc, pitch: float, axis: str):
    # Chord rows; connectors between consecutive chords stay inside the
    # disc because it is convex.
    n = _row_count(2.0 * disc.r, pitch)
    step = 2.0 * disc.r / n
    pts: list[tuple[float, float]] = []
    for i in range(n):
        off = -disc.r + step * (i + 0.5)
        half = math.sqrt(max(disc.r * disc.r - off * off, 0.0))
        if half <= 0:
            continue
        if axis == "x":
            c = disc.cy + off
            s, e = disc.cx - half, disc.cx + half
            row = [(s, c), (e, c)]
        else:
            c = disc.cx + off
            s, e = disc.cy - half, disc.cy + half
            row = [(c, s), (c, e)]
        if i % 2 == 1:
            row.reverse()
        pts.extend(row)
    return pts


def _ring_points(cx, cy, r, start_angle=0.0):
    # Chord length ~0.5 mm, at least 32 segments: the polygon stays within
    # a few hundredths of a millimetre of the true circle.
    n = max(32, math.ceil(2.0 * math.pi * r / 0.5))
    return [
        (cx + r * math.cos(start_angle + 2.0 * math.pi * k / n),
         cy + r * math.sin(start_angle + 2.0 * math.pi * k / n))
        for k in range(n + 1)
    ]


def _concentric_annulus(ann: Annulus, pitch: float):
    n = _row_count(ann.r_out - ann.r_in, pitch)
    step = (ann.r_out - ann.r_in) / n
    pts: list[tuple[float, float]] = []
    for i in range(n):
        r = ann.r_in + step * (i + 0.5)
        ring = _ring_points(ann.cx, ann.cy, r)
        if pts:
            pts.extend(ring)     # short radial hop from previous ring's seam
        else:
            pts = ring
    return pts


def fill_path(shape: Shape, pitch: float, axis: str = "x") -> list[tuple[float, float]]:
    """Single open polyline covering the shape at the given row pitch (mm).

    axis selects the raster direction for rect/disc serpentines ('x' rows run
    along x).  Annuli are filled with concentric rings regardless of axis.
    """
    if pitch <= 0:
        raise PlanError(f"fill pitch must be > 0, got {pitch}")
    if axis not in ("x", "y"):
        raise PlanError(f"fill axis must be 'x' or 'y', got {axis!r}")
    if isinstance(shape, Rect):
        return _serpentine_rect(shape, pitch, axis)
    if isinstance(shape, Disc):
        return _serpentine_disc(shape, pitch, axis)
    if isinstance(shape, Annulus):
        return _concentric_annulus(shape, pitch)
    raise PlanError(f"unknown shape type {type(shape).__name__}")
