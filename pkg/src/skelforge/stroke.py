"""Freehand stroke to simple polygon: resampling, simplification, validation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .errors import DegenerateStroke, SelfIntersecting
from .geom import EPS_GEOM, Point, Segment, point_to_line_distance, segment_intersect, signed_area

# A repair may drop a spurious loop only when it is clearly an artifact,
# not half of a figure-eight.
_REPAIR_AREA_RATIO = 0.1


@dataclass
class RawStroke:
    """Ordered device samples. Closed strokes wrap from the last point to the first."""

    points: List[Point]
    closed: bool = True


class SimplePolygon:
    """CCW, hole-free, non-self-intersecting contour.

    Invariants are checked at construction; all operations treat the
    polygon as immutable.
    """

    __slots__ = ("vertices", "perimeter", "_coords", "_edges")

    def __init__(self, vertices: Sequence[Point], _validate: bool = True):
        verts = [p if type(p) is Point else Point(p[0], p[1]) for p in vertices]
        if _validate:
            if len(verts) < 3:
                raise ValueError("polygon needs at least 3 vertices")
            if signed_area(verts) <= 0:
                raise ValueError("polygon vertices must be counter-clockwise")
            for i in range(len(verts)):
                a, b = verts[i], verts[(i + 1) % len(verts)]
                if math.hypot(b.x - a.x, b.y - a.y) <= EPS_GEOM:
                    raise ValueError("repeated consecutive vertices")
            if polygon_self_intersects(verts):
                raise SelfIntersecting("polygon edges cross")
        self.vertices: Tuple[Point, ...] = tuple(verts)
        self.perimeter: float = _loop_length(verts)
        self._coords = None
        self._edges = None

    def __len__(self) -> int:
        return len(self.vertices)

    def coords(self) -> np.ndarray:
        """(n, 2) float array of the vertex ring, cached."""
        if self._coords is None:
            self._coords = np.array(self.vertices, dtype=float)
        return self._coords

    def edge_arrays(self):
        """Cached (start, end-minus-start) arrays of the edge ring."""
        if self._edges is None:
            c = self.coords()
            self._edges = (c, np.roll(c, -1, axis=0) - c)
        return self._edges

    def edge(self, i: int) -> Segment:
        return Segment(self.vertices[i], self.vertices[(i + 1) % len(self.vertices)])

    def diameter(self) -> float:
        c = self.coords()
        return float(math.hypot(*(c.max(axis=0) - c.min(axis=0))))


def _loop_length(points: Sequence[Point]) -> float:
    total = 0.0
    n = len(points)
    for i in range(n):
        a, b = points[i], points[(i + 1) % n]
        total += math.hypot(b.x - a.x, b.y - a.y)
    return total


def polygon_self_intersects(vertices: Sequence[Point]) -> bool:
    """True when any two non-adjacent edges of the closed ring intersect.

    All edge pairs are tested at once; endpoint touching between
    non-adjacent edges counts as an intersection.
    """
    n = len(vertices)
    if n < 4:
        return False
    vs = np.asarray(vertices, dtype=float)
    b = np.roll(vs, -1, axis=0)
    lo = np.minimum(vs, b) - EPS_GEOM
    hi = np.maximum(vs, b) + EPS_GEOM
    # candidate pairs: bounding boxes overlap, edges not adjacent, i < j
    overlap = (
        (lo[:, None, 0] <= hi[None, :, 0]) & (lo[None, :, 0] <= hi[:, None, 0])
        & (lo[:, None, 1] <= hi[None, :, 1]) & (lo[None, :, 1] <= hi[:, None, 1])
    )
    idx = np.arange(n)
    adjacent = (
        (idx[:, None] == idx[None, :])
        | ((idx[:, None] + 1) % n == idx[None, :])
        | ((idx[None, :] + 1) % n == idx[:, None])
    )
    cand = overlap & ~adjacent & (idx[:, None] < idx[None, :])
    ii, jj = np.nonzero(cand)
    if len(ii) == 0:
        return False
    r = b - vs
    ax, ay = vs[ii, 0], vs[ii, 1]
    rx, ry = r[ii, 0], r[ii, 1]
    qx, qy = vs[jj, 0], vs[jj, 1]
    sx, sy = r[jj, 0], r[jj, 1]
    qpx, qpy = qx - ax, qy - ay
    denom = rx * sy - ry * sx
    cross_qp_s = qpx * sy - qpy * sx
    cross_qp_r = qpx * ry - qpy * rx
    tol = EPS_GEOM
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross_qp_s / denom
        u = cross_qp_r / denom
    proper = (np.abs(denom) > tol) & (t >= -tol) & (t <= 1 + tol) & (u >= -tol) & (u <= 1 + tol)
    if proper.any():
        return True
    # collinear pairs need an overlap test on the shared line
    collinear = (np.abs(denom) <= tol) & (np.abs(cross_qp_r) <= tol)
    if collinear.any():
        rr = rx * rx + ry * ry
        rr = np.where(rr == 0.0, 1.0, rr)
        t0 = (qpx * rx + qpy * ry) / rr
        t1 = t0 + (sx * rx + sy * ry) / rr
        plo = np.maximum(np.minimum(t0, t1), 0.0)
        phi = np.minimum(np.maximum(t0, t1), 1.0)
        if (collinear & (plo <= phi + tol)).any():
            return True
    return False


def _first_crossing(vertices: Sequence[Point]):
    n = len(vertices)
    for i in range(n):
        si = Segment(vertices[i], vertices[(i + 1) % n])
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            sj = Segment(vertices[j], vertices[(j + 1) % n])
            hit = segment_intersect(si, sj)
            if hit is not None:
                return i, j, hit
    return None


def uniform_discretize(stroke: RawStroke, step: float) -> List[Point]:
    """Resample a closed stroke at uniform arclength spacing.

    The sample count is floor(perimeter / step); the actual spacing is
    perimeter / count, so the loop closes without a remainder gap. The
    resampling smooths pen jitter before simplification.
    """
    if not stroke.closed:
        raise DegenerateStroke("only closed strokes can form a polygon")
    pts = np.asarray([(p[0], p[1]) for p in stroke.points], dtype=float)
    if len(pts) >= 2 and np.allclose(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 3:
        raise DegenerateStroke("closed stroke needs at least 3 samples")
    ring = np.vstack([pts, pts[:1]])
    seg = np.diff(ring, axis=0)
    seg_len = np.hypot(seg[:, 0], seg[:, 1])
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    perimeter = float(cum[-1])
    if perimeter <= 2.0 * step:
        raise DegenerateStroke(f"perimeter {perimeter:.3g} too short for step {step:.3g}")
    count = int(math.floor(perimeter / step))
    if count < 3:
        raise DegenerateStroke("stroke resamples to fewer than 3 points")
    s = np.arange(count) * (perimeter / count)
    xs = np.interp(s, cum, ring[:, 0])
    ys = np.interp(s, cum, ring[:, 1])
    return [Point(float(x), float(y)) for x, y in zip(xs, ys)]


def dp_simplify(points: Sequence[Point], eps: float) -> List[Point]:
    """Classic recursive max-deviation simplification of an open polyline.

    Keeps both endpoints; every dropped point lies within eps of the output.
    eps <= 0 returns the input unchanged.
    """
    if len(points) < 3 or eps <= 0.0:
        return list(points)
    keep = [False] * len(points)
    keep[0] = keep[-1] = True
    stack = [(0, len(points) - 1)]
    while stack:
        lo, hi = stack.pop()
        if hi <= lo + 1:
            continue
        a, b = points[lo], points[hi]
        best, best_d = lo, 0.0
        for i in range(lo + 1, hi):
            d = point_to_line_distance(points[i], a, b)
            if d > best_d:
                best, best_d = i, d
        if best_d > eps:
            keep[best] = True
            stack.append((lo, best))
            stack.append((best, hi))
    return [p for p, k in zip(points, keep) if k]


def _split_indices(points: Sequence[Point]) -> Tuple[int, int]:
    """Indices of the two loop points with maximal circular arclength separation."""
    n = len(points)
    cum = [0.0]
    for i in range(n):
        a, b = points[i], points[(i + 1) % n]
        cum.append(cum[-1] + math.hypot(b.x - a.x, b.y - a.y))
    perimeter = cum[-1]
    best = (-1.0, 0, n // 2)
    arr = np.asarray(cum[:n])
    for i in range(n):
        target = cum[i] + perimeter / 2.0
        j = int(np.searchsorted(arr, target))
        for cand in (j - 1, j):
            k = cand % n
            if k == i:
                continue
            sep = abs(cum[k] - cum[i])
            sep = min(sep, perimeter - sep)
            if sep > best[0] + EPS_GEOM:
                lo, hi = min(i, k), max(i, k)
                best = (sep, lo, hi)
    return best[1], best[2]


def acquire_polygon(stroke: RawStroke, step: float = 10.0, eps_poly: float = 3.0) -> SimplePolygon:
    """Full stroke-to-polygon pipeline: resample, simplify, orient, validate.

    The closed loop is split at the two samples farthest apart along the
    stroke so both anchors survive simplification, each half is simplified
    independently, and the result is oriented counter-clockwise. A loop
    that still crosses itself after artifact repair raises SelfIntersecting.
    """
    samples = uniform_discretize(stroke, step)
    i, j = _split_indices(samples)
    half_a = dp_simplify(samples[i : j + 1], eps_poly)
    half_b = dp_simplify(samples[j:] + samples[: i + 1], eps_poly)
    loop = half_a[:-1] + half_b[:-1]
    loop = _dedupe(loop)
    if len(loop) < 3:
        raise DegenerateStroke("simplification collapsed the loop")
    if signed_area(loop) < 0:
        loop = loop[::-1]
    loop = _repair_crossings(loop)
    if signed_area(loop) < 0:
        loop = loop[::-1]
    return SimplePolygon(loop)


def _dedupe(points: List[Point]) -> List[Point]:
    out: List[Point] = []
    for p in points:
        if not out or math.hypot(p.x - out[-1].x, p.y - out[-1].y) > EPS_GEOM:
            out.append(p)
    while len(out) > 1 and math.hypot(out[0].x - out[-1].x, out[0].y - out[-1].y) <= EPS_GEOM:
        out.pop()
    return out


def _repair_crossings(loop: List[Point]) -> List[Point]:
    """Drop small spurious loops at crossings (closure artifacts).

    A crossing splits the ring into two sub-loops; the smaller one is
    removed only when its area is clearly negligible next to the larger,
    otherwise the stroke is rejected as genuinely self-intersecting.
    """
    attempts = len(loop) + 4
    while attempts > 0:
        attempts -= 1
        found = _first_crossing(loop)
        if found is None:
            return loop
        i, j, x = found
        inner = loop[i + 1 : j + 1] + [x]
        outer = loop[: i + 1] + [x] + loop[j + 1 :]
        area_in, area_out = abs(signed_area(inner)), abs(signed_area(outer))
        small, big = min(area_in, area_out), max(area_in, area_out)
        if big <= 0 or small > _REPAIR_AREA_RATIO * big:
            raise SelfIntersecting("stroke crosses itself")
        loop = _dedupe(outer if area_out >= area_in else inner)
        if len(loop) < 3:
            raise SelfIntersecting("crossing repair collapsed the loop")
    raise SelfIntersecting("could not repair crossings")
