"""Planar convex-polygon primitives: widths, chords, and half-plane splits.

Lines are parametrized as (theta, offset) with theta in [0, pi): the line is
{(x, y): -x*sin(theta) + y*cos(theta) = offset}, i.e. it runs in direction
(cos(theta), sin(theta)) at signed distance `offset` from the origin along
the unit normal (-sin(theta), cos(theta)).

All degeneracy decisions (zero chords, vertex hits, sliver parts) use the
tolerance EPS_GEOM scaled by the polygon diameter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DegenerateSplit, GeometryError

EPS_GEOM = 1e-9

Point = tuple[float, float]


@dataclass(frozen=True)
class Line:
    """An undirected line in canonical (theta, offset) form, theta in [0, pi)."""

    theta: float
    offset: float

    def __post_init__(self) -> None:
        th = float(self.theta)
        p = float(self.offset)
        k = math.floor(th / math.pi)
        th -= k * math.pi
        if th >= math.pi:  # guard rounding at the upper edge
            th -= math.pi
            k += 1
        if th < 0.0:
            th = 0.0
        if k % 2:
            p = -p
        object.__setattr__(self, "theta", th + 0.0)
        object.__setattr__(self, "offset", p + 0.0)

    @property
    def normal(self) -> Point:
        return (-math.sin(self.theta), math.cos(self.theta))

    @property
    def direction(self) -> Point:
        return (math.cos(self.theta), math.sin(self.theta))

    def signed_distance(self, point: Point) -> float:
        """Signed distance of `point` from the line along the normal."""
        nx, ny = self.normal
        return nx * point[0] + ny * point[1] - self.offset


@dataclass(frozen=True)
class ConvexPolygon:
    """Closed convex polygon with CCW vertices and cached size measures."""

    vertices: tuple[Point, ...]
    area: float = field(init=False, compare=False)
    perimeter: float = field(init=False, compare=False)
    diameter: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        if len(verts) < 3:
            raise GeometryError(f"polygon needs >= 3 vertices, got {len(verts)}")
        object.__setattr__(self, "vertices", verts)

        diam = 0.0
        m = len(verts)
        for i in range(m):
            xi, yi = verts[i]
            for j in range(i + 1, m):
                d = math.hypot(verts[j][0] - xi, verts[j][1] - yi)
                if d > diam:
                    diam = d
        if diam <= 0.0:
            raise GeometryError("all vertices coincide")

        area2 = 0.0
        perim = 0.0
        eps_cross = EPS_GEOM * diam * diam
        for i in range(m):
            ax, ay = verts[i - 1]
            bx, by = verts[i]
            cx, cy = verts[(i + 1) % m]
            cross = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
            if cross < -eps_cross:
                raise GeometryError("vertices not convex in CCW order")
            area2 += bx * cy - by * cx
            perim += math.hypot(cx - bx, cy - by)
        area = 0.5 * area2
        if area <= eps_cross:
            raise GeometryError("polygon area is not positive")

        object.__setattr__(self, "area", area)
        object.__setattr__(self, "perimeter", perim)
        object.__setattr__(self, "diameter", diam)

    def contains_point(self, point: Point, slack: float = 0.0) -> bool:
        """True if `point` lies in the closed polygon (within `slack`)."""
        px, py = point
        verts = self.vertices
        m = len(verts)
        for i in range(m):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % m]
            if (bx - ax) * (py - ay) - (by - ay) * (px - ax) < -slack:
                return False
        return True


@dataclass(frozen=True)
class SplitResult:
    """Outcome of cutting a polygon by a line.

    `positive_part` is the closed side whose open half-plane contains the
    origin; `negative_part` is the other side.  `chord_length` is positive
    exactly when both parts are present.
    """

    positive_part: ConvexPolygon | None
    negative_part: ConvexPolygon | None
    chord_length: float


def support_interval(poly: ConvexPolygon, theta: float) -> tuple[float, float]:
    """Projection interval of `poly` onto the unit normal of direction theta."""
    nx, ny = -math.sin(theta), math.cos(theta)
    lo = hi = nx * poly.vertices[0][0] + ny * poly.vertices[0][1]
    for x, y in poly.vertices:
        s = nx * x + ny * y
        if s < lo:
            lo = s
        elif s > hi:
            hi = s
    return lo, hi


def width(poly: ConvexPolygon, theta: float) -> float:
    """Width of `poly` perpendicular to direction theta (always positive)."""
    lo, hi = support_interval(poly, theta)
    return hi - lo


def _classify(poly: ConvexPolygon, line: Line) -> tuple[list[float], float]:
    eps = EPS_GEOM * poly.diameter
    nx, ny = line.normal
    p = line.offset
    return [nx * x + ny * y - p for x, y in poly.vertices], eps


def _crossings(poly: ConvexPolygon, dist: list[float], eps: float) -> list[Point]:
    """Points where the line meets the polygon boundary (on-line vertices included)."""
    verts = poly.vertices
    m = len(verts)
    pts: list[Point] = []
    for i in range(m):
        si = dist[i]
        if abs(si) <= eps:
            pts.append(verts[i])
            continue
        sj = dist[(i + 1) % m]
        if abs(sj) <= eps or si * sj >= 0.0:
            continue
        t = si / (si - sj)
        ax, ay = verts[i]
        bx, by = verts[(i + 1) % m]
        pts.append((ax + t * (bx - ax), ay + t * (by - ay)))
    return pts


def chord(poly: ConvexPolygon, line: Line) -> tuple[float, tuple[Point, Point] | None]:
    """Length and endpoints of line ∩ poly; (0.0, None) when below tolerance."""
    dist, eps = _classify(poly, line)
    if min(dist) > -eps or max(dist) < eps:
        return 0.0, None
    pts = _crossings(poly, dist, eps)
    if len(pts) < 2:
        return 0.0, None
    dx, dy = line.direction
    proj = [dx * x + dy * y for x, y in pts]
    i_lo = min(range(len(pts)), key=proj.__getitem__)
    i_hi = max(range(len(pts)), key=proj.__getitem__)
    length = proj[i_hi] - proj[i_lo]
    if length <= eps:
        return 0.0, None
    return length, (pts[i_lo], pts[i_hi])


def contains_line_hit(poly: ConvexPolygon, line: Line) -> bool:
    """True iff the line crosses the closed polygon with a chord above tolerance."""
    return chord(poly, line)[0] > 0.0


def _dedupe_ring(pts: list[Point], eps: float) -> list[Point]:
    out: list[Point] = []
    for p in pts:
        if out and math.hypot(p[0] - out[-1][0], p[1] - out[-1][1]) <= eps:
            continue
        out.append(p)
    while len(out) > 1 and math.hypot(out[0][0] - out[-1][0], out[0][1] - out[-1][1]) <= eps:
        out.pop()
    return out


def _side_polygon(pts: list[Point], eps: float, eps_area: float) -> ConvexPolygon | None:
    ring = _dedupe_ring(pts, eps)
    if len(ring) < 3:
        return None
    area2 = 0.0
    m = len(ring)
    for i in range(m):
        ax, ay = ring[i]
        bx, by = ring[(i + 1) % m]
        area2 += ax * by - ay * bx
    if 0.5 * area2 <= eps_area:
        return None
    return ConvexPolygon(tuple(ring))


def split(poly: ConvexPolygon, line: Line) -> SplitResult:
    """Cut `poly` by `line` into the origin side and the far side.

    A line that misses (or merely touches the boundary of) the polygon
    leaves it whole on the appropriate side with a zero chord.  Sliver
    parts below tolerance are treated as absent.
    """
    dist, eps = _classify(poly, line)
    eps_area = EPS_GEOM * poly.diameter * poly.diameter
    # origin lies strictly on the positive-distance side iff offset < 0
    plus_is_positive = line.offset < 0.0

    lo, hi = min(dist), max(dist)
    if lo > -eps or hi < eps:
        whole_positive = (hi >= eps) == plus_is_positive
        return SplitResult(
            positive_part=poly if whole_positive else None,
            negative_part=None if whole_positive else poly,
            chord_length=0.0,
        )

    verts = poly.vertices
    m = len(verts)
    upper: list[Point] = []
    lower: list[Point] = []
    cross: list[Point] = []
    for i in range(m):
        si = dist[i]
        vi = verts[i]
        if si >= -eps:
            upper.append(vi)
        if si <= eps:
            lower.append(vi)
        if abs(si) <= eps:
            cross.append(vi)
            continue
        sj = dist[(i + 1) % m]
        if abs(sj) <= eps or si * sj >= 0.0:
            continue
        t = si / (si - sj)
        bx, by = verts[(i + 1) % m]
        pt = (vi[0] + t * (bx - vi[0]), vi[1] + t * (by - vi[1]))
        upper.append(pt)
        lower.append(pt)
        cross.append(pt)

    up_poly = _side_polygon(upper, eps, eps_area)
    low_poly = _side_polygon(lower, eps, eps_area)

    if up_poly is None and low_poly is None:
        raise DegenerateSplit("both split parts degenerate")
    if up_poly is None or low_poly is None:
        whole_positive = (low_poly is None) == plus_is_positive
        return SplitResult(
            positive_part=poly if whole_positive else None,
            negative_part=None if whole_positive else poly,
            chord_length=0.0,
        )

    dx, dy = line.direction
    proj = [dx * x + dy * y for x, y in cross]
    chord_len = max(proj) - min(proj)
    if chord_len <= eps:
        raise DegenerateSplit(f"chord length {chord_len!r} below tolerance with two parts")

    if plus_is_positive:
        return SplitResult(positive_part=up_poly, negative_part=low_poly, chord_length=chord_len)
    return SplitResult(positive_part=low_poly, negative_part=up_poly, chord_length=chord_len)
