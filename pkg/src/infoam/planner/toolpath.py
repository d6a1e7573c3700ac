"""Flatten a layer plan into an ordered segment list for G-code emission.

Segments are travel (no extrusion), coil-extrude, or plot-extrude, each a
straight move with absolute endpoints in mm, a feed in mm/min, and a screw
rotation increment in rad.  A pass's total rotation is spread over its
segments in proportion to length, so the emitted file carries exactly the
volume the plan accounted for.

Between passes the nozzle lifts to the layer's travel plane (the highest
working z of the layer), moves, and drops to the next working height, so
extrusion never happens below the layer base.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import PlanError
from .plan import PartPlan

__all__ = ["Segment", "Toolpath", "build_toolpath", "TRAVEL", "COIL", "PLOT"]

TRAVEL = "travel"
COIL = "coil"
PLOT = "plot"


@dataclass(frozen=True)
class Segment:
    kind: str
    x0: float
    y0: float
    z0: float
    x1: float
    y1: float
    z1: float
    feed: float
    rotation: float = 0.0

    def __post_init__(self):
        if self.kind not in (TRAVEL, COIL, PLOT):
            raise PlanError(f"unknown segment kind {self.kind!r}")
        if self.rotation < 0 or math.isnan(self.rotation):
            raise PlanError(f"segment rotation must be >= 0, got {self.rotation}")
        if self.kind == TRAVEL and self.rotation != 0.0:
            raise PlanError("travel segments cannot extrude")
        if self.feed <= 0:
            raise PlanError(f"feed must be > 0, got {self.feed}")

    @property
    def length(self) -> float:
        return math.sqrt((self.x1 - self.x0) ** 2 + (self.y1 - self.y0) ** 2
                         + (self.z1 - self.z0) ** 2)


@dataclass(frozen=True)
class Toolpath:
    segments: tuple[Segment, ...]

    @property
    def total_rotation(self) -> float:
        return sum(s.rotation for s in self.segments)

    @property
    def extrude_length(self) -> float:
        return sum(s.length for s in self.segments if s.kind != TRAVEL)

    @property
    def travel_length(self) -> float:
        return sum(s.length for s in self.segments if s.kind == TRAVEL)


class _Cursor:
    def __init__(self, travel_feed: float):
        self.x = 0.0
        self.y = 0.0
        self.z = 0.0
        self.travel_feed = travel_feed
        self.segments: list[Segment] = []

    def _move(self, kind, x, y, z, feed, rotation=0.0):
        self.segments.append(Segment(kind, self.x, self.y, self.z,
                                     x, y, z, feed, rotation))
        self.x, self.y, self.z = x, y, z

    def travel_to(self, x: float, y: float, z: float, plane: float):
        """Lift to the travel plane, move, drop to the working height."""
        zp = max(self.z, z, plane)
        if self.z != zp:
            self._move(TRAVEL, self.x, self.y, zp, self.travel_feed)
        if (x, y) != (self.x, self.y):
            self._move(TRAVEL, x, y, zp, self.travel_feed)
        if self.z != z:
            self._move(TRAVEL, x, y, z, self.travel_feed)

    def extrude_path(self, kind, path, z, feed, rotation):
        lengths = [
            math.hypot(path[i + 1][0] - path[i][0], path[i + 1][1] - path[i][1])
            for i in range(len(path) - 1)
        ]
        total = sum(lengths)
        if total <= 0:
            raise PlanError("extrusion path has zero length")
        for (x, y), seg_len in zip(path[1:], lengths):
            if seg_len == 0.0:
                continue
            self._move(kind, x, y, z, feed, rotation * seg_len / total)


def build_toolpath(plan: PartPlan, travel_feed: float = 3000.0) -> Toolpath:
    """Order all passes into one continuous, travel-linked segment chain.

    Coil passes run before dense passes within each layer; the nozzle starts
    from the origin and is left at the last pass's end point.
    """
    if travel_feed <= 0:
        raise PlanError(f"travel feed must be > 0, got {travel_feed}")
    cur = _Cursor(travel_feed)
    for layer in plan.layers:
        zs = [p.z for p in layer.coil_passes] + \
            [p.z for p in layer.dense_passes]
        plane = max(zs) if zs else 0.0
        for p in layer.coil_passes:
            if len(p.path) < 2:
                raise PlanError("coil pass path needs at least 2 points")
            cur.travel_to(p.path[0][0], p.path[0][1], p.z, plane)
            cur.extrude_path(COIL, p.path, p.z, p.v_f * 60.0, p.rotation)
        for p in layer.dense_passes:
            if len(p.path) < 2:
                raise PlanError("dense pass path needs at least 2 points")
            cur.travel_to(p.path[0][0], p.path[0][1], p.z, plane)
            cur.extrude_path(PLOT, p.path, p.z, p.v_f * 60.0, p.rotation)
    return Toolpath(tuple(cur.segments))
