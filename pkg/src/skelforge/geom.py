"""2D primitives and predicates used by every other module.

Coordinates are canvas units, typically O(10^3). All predicates use the
absolute tolerance EPS_GEOM, which is far below stroke precision, so no
exact arithmetic is needed.
"""
from __future__ import annotations

import math
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

EPS_GEOM = 1e-9


class Orientation(Enum):
    CCW = 1
    COLLINEAR = 0
    CW = -1


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValueError(f"non-finite coordinate: {v!r}")


class Point(NamedTuple("Point", [("x", float), ("y", float)])):
    """A point in the canvas plane. Coordinates must be finite."""

    __slots__ = ()

    def __new__(cls, x: float, y: float) -> "Point":
        _check_finite(x, y)
        return super().__new__(cls, float(x), float(y))


class Segment(NamedTuple):
    """Directed segment from a to b."""

    a: Point
    b: Point

    def length(self) -> float:
        return math.hypot(self.b.x - self.a.x, self.b.y - self.a.y)

    def direction(self) -> Point:
        """Unit direction a->b. Zero-length segments are rejected."""
        dx, dy = self.b.x - self.a.x, self.b.y - self.a.y
        n = math.hypot(dx, dy)
        if n <= EPS_GEOM:
            raise ValueError("zero-length segment has no direction")
        return Point(dx / n, dy / n)


class Ray(NamedTuple):
    """Ray with unit direction; constructed via `ray` to guarantee |dir| = 1."""

    origin: Point
    direction: Point


def ray(origin: Point, direction: Point) -> Ray:
    """Build a ray, normalizing the direction at construction."""
    n = math.hypot(direction.x, direction.y)
    if n <= EPS_GEOM:
        raise ValueError("ray direction must be nonzero")
    return Ray(origin, Point(direction.x / n, direction.y / n))


def cross(ox: float, oy: float, ax: float, ay: float) -> float:
    """2D cross product of vectors (ox,oy) x (ax,ay)."""
    return ox * ay - oy * ax


def orientation(a: Point, b: Point, c: Point) -> Orientation:
    """Sign of twice the signed area of triangle abc."""
    area2 = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    if abs(area2) <= EPS_GEOM:
        return Orientation.COLLINEAR
    return Orientation.CCW if area2 > 0 else Orientation.CW


def segment_intersect(s1: Segment, s2: Segment) -> Optional[Point]:
    """Intersection point of two segments, or None.

    Endpoint touching counts as an intersection. Collinear overlap reports
    a shared endpoint when one exists, else the midpoint of the overlap.
    """
    p, r = s1.a, (s1.b.x - s1.a.x, s1.b.y - s1.a.y)
    q, s = s2.a, (s2.b.x - s2.a.x, s2.b.y - s2.a.y)
    denom = cross(r[0], r[1], s[0], s[1])
    qp = (q.x - p.x, q.y - p.y)
    if abs(denom) <= EPS_GEOM:
        if abs(cross(qp[0], qp[1], r[0], r[1])) > EPS_GEOM:
            return None  # parallel, non-collinear
        # collinear: project s2 endpoints on s1's parameter
        rr = r[0] * r[0] + r[1] * r[1]
        if rr <= EPS_GEOM * EPS_GEOM:
            return None
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        lo, hi = max(lo, 0.0), min(hi, 1.0)
        if lo > hi + EPS_GEOM:
            return None
        t = 0.5 * (lo + hi)
        return Point(p.x + t * r[0], p.y + t * r[1])
    t = cross(qp[0], qp[1], s[0], s[1]) / denom
    u = cross(qp[0], qp[1], r[0], r[1]) / denom
    tol = EPS_GEOM
    if -tol <= t <= 1.0 + tol and -tol <= u <= 1.0 + tol:
        return Point(p.x + t * r[0], p.y + t * r[1])
    return None


def point_to_segment_distance(p: Point, s: Segment) -> float:
    """Distance from p to segment s (perpendicular foot or nearest endpoint)."""
    ax, ay = s.a
    dx, dy = s.b.x - ax, s.b.y - ay
    dd = dx * dx + dy * dy
    if dd <= EPS_GEOM * EPS_GEOM:
        return math.hypot(p.x - ax, p.y - ay)
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / dd
    t = min(1.0, max(0.0, t))
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def point_to_line_distance(p: Point, a: Point, b: Point) -> float:
    """Distance from p to the infinite line through a and b."""
    dx, dy = b.x - a.x, b.y - a.y
    n = math.hypot(dx, dy)
    if n <= EPS_GEOM:
        return math.hypot(p.x - a.x, p.y - a.y)
    return abs((p.x - a.x) * dy - (p.y - a.y) * dx) / n


def signed_area(points: Sequence[Point]) -> float:
    """Signed area of a closed polygon (positive when CCW)."""
    n = len(points)
    if n > 16:
        arr = np.asarray(points, dtype=float)
        nxt = np.roll(arr, -1, axis=0)
        return 0.5 * float(np.sum(arr[:, 0] * nxt[:, 1] - nxt[:, 0] * arr[:, 1]))
    total = 0.0
    for i in range(n):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return 0.5 * total


def polygon_diameter(points: Sequence[Point]) -> float:
    """Bounding-box diagonal, used to scale relative tolerances."""
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    return math.hypot(max(xs) - min(xs), max(ys) - min(ys))


def point_in_polygon(p: Point, vertices: Sequence[Point], tol: float = EPS_GEOM) -> bool:
    """Point containment by crossing number; boundary (within tol) counts inside."""
    x, y = p[0], p[1]
    inside = False
    n = len(vertices)
    for i in range(n):
        ax, ay = vertices[i]
        bx, by = vertices[(i + 1) % n]
        # boundary check against this edge
        dx, dy = bx - ax, by - ay
        dd = dx * dx + dy * dy
        if dd > 0.0:
            t = ((x - ax) * dx + (y - ay) * dy) / dd
            t = min(1.0, max(0.0, t))
            if math.hypot(x - (ax + t * dx), y - (ay + t * dy)) <= tol:
                return True
        elif math.hypot(x - ax, y - ay) <= tol:
            return True
        if (ay > y) != (by > y):
            xi = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < xi:
                inside = not inside
    return inside


def points_in_polygon(points: np.ndarray, vertices: np.ndarray, tol: float = EPS_GEOM,
                      edges=None) -> np.ndarray:
    """Vectorized containment for an (m,2) array against an (n,2) polygon.

    Crossing parity decides most points; only points that fail it get the
    more expensive within-tolerance boundary test. `edges` may carry the
    precomputed (start, delta) arrays of the ring.
    """
    pts = np.asarray(points, dtype=float)
    if edges is not None:
        a = edges[0]
        b = a + edges[1]
    else:
        vs = np.asarray(vertices, dtype=float)
        a = vs
        b = np.roll(vs, -1, axis=0)
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    ax, ay = a[:, 0][None, :], a[:, 1][None, :]
    bx, by = b[:, 0][None, :], b[:, 1][None, :]
    crosses = (ay > y) != (by > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = ax + (y - ay) * (bx - ax) / np.where(by == ay, 1.0, by - ay)
    hits = crosses & (x < xi)
    inside = (hits.sum(axis=1) % 2) == 1
    outside_idx = np.nonzero(~inside)[0]
    if len(outside_idx):
        xo = pts[outside_idx, 0][:, None]
        yo = pts[outside_idx, 1][:, None]
        dx, dy = bx - ax, by - ay
        dd = dx * dx + dy * dy
        dd = np.where(dd == 0.0, 1.0, dd)
        t = np.clip(((xo - ax) * dx + (yo - ay) * dy) / dd, 0.0, 1.0)
        dist2 = (xo - (ax + t * dx)) ** 2 + (yo - (ay + t * dy)) ** 2
        inside[outside_idx] = (dist2 <= tol * tol).any(axis=1)
    return inside


def line_polygon_hits(origin: Point, along: Point, vertices: np.ndarray) -> np.ndarray:
    """Signed parameters t where the line origin + t*along crosses the boundary.

    `along` need not be unit length; returned t values are in units of |along|.
    Touching a vertex may report the crossing twice; callers dedupe if needed.
    """
    vs = np.asarray(vertices, dtype=float)
    a = vs
    b = np.roll(vs, -1, axis=0)
    ox, oy = origin[0], origin[1]
    dx, dy = along[0], along[1]
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    denom = dx * ey - dy * ex
    ok = np.abs(denom) > EPS_GEOM
    denom_safe = np.where(ok, denom, 1.0)
    qpx = a[:, 0] - ox
    qpy = a[:, 1] - oy
    t = (qpx * ey - qpy * ex) / denom_safe
    u = (qpx * dy - qpy * dx) / denom_safe
    hit = ok & (u >= -EPS_GEOM) & (u < 1.0 - EPS_GEOM)
    return np.sort(t[hit])
