"""Branch simplification bounded by the enclosing shape.

A long branch is resampled along an interpolating spline, sliced
perpendicular to the axis to capture the silhouette, and simplified by a
max-error point selection whose error blends axis deviation with the
change of cross-section width. The selection threshold starts large and
shrinks geometrically until every simplified edge stays inside the
general-cylinder region around the branch.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import DegenerateSlice
from .geom import EPS_GEOM, Point, points_in_polygon, signed_area
from .skeleton import Branch, Skeleton, branch_points
from .stroke import SimplePolygon

log = logging.getLogger(__name__)


@dataclass
class BoundedDPConfig:
    alpha_s: float = 1.0          # weight of the cross-section term
    eps0: Optional[float] = None  # initial threshold; derived when None
    eps0_factor: float = 0.5      # eps0 = factor * branch bbox diagonal
    alpha: float = 0.8            # threshold reduction per containment failure
    max_iterations: int = 40
    long_branch_factor: float = 4.0
    containment_samples: int = 64
    max_samples: int = 256

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie strictly between 0 and 1")
        if self.eps0 is not None and self.eps0 < 0.0:
            raise ValueError("eps0 must be non-negative")


@dataclass
class AxisSamples:
    points: np.ndarray    # (n, 2) uniform arclength samples
    tangents: np.ndarray  # (n, 2) unit tangents
    abscissa: np.ndarray  # (n,) arclength from the first sample
    spacing: float


@dataclass
class SliceSet:
    left: np.ndarray    # (n, 2) boundary hit left of the axis
    right: np.ndarray   # (n, 2) boundary hit right of the axis
    w_left: np.ndarray  # (n,) distance from sample to left hit
    w_right: np.ndarray  # (n,) distance from sample to right hit

    def segment_length(self, i: int) -> float:
        return float(self.w_left[i] + self.w_right[i])


@dataclass
class GeneralCylinder:
    axis: AxisSamples
    slices: SliceSet
    omega: SimplePolygon


class CatmullRomSpline:
    """Centripetal interpolating spline through a point sequence.

    Ghost endpoints are linear extrapolations, so the curve still passes
    through the first and last control points.
    """

    def __init__(self, points: Sequence[Point], density: int = 16):
        ctrl = np.asarray([(p[0], p[1]) for p in points], dtype=float)
        if len(ctrl) < 2:
            raise ValueError("spline needs at least 2 points")
        self.control = ctrl
        if len(ctrl) == 2:
            dense = np.linspace(0, 1, 2 * density)[:, None]
            self.dense = ctrl[0] + dense * (ctrl[1] - ctrl[0])
        else:
            self.dense = self._sample_dense(density)
        seg = np.diff(self.dense, axis=0)
        self.cum = np.concatenate([[0.0], np.cumsum(np.hypot(seg[:, 0], seg[:, 1]))])

    def _sample_dense(self, density: int) -> np.ndarray:
        """Evaluate every spline segment in one vectorized pass."""
        c = self.control
        ext = np.vstack([2 * c[0] - c[1], c, 2 * c[-1] - c[-2]])
        steps = np.diff(ext, axis=0)
        knots = np.concatenate(
            [[0.0], np.cumsum(np.maximum(np.hypot(steps[:, 0], steps[:, 1]) ** 0.5,
                                         1e-12))])
        i = np.arange(1, len(ext) - 2)
        t0, t1, t2, t3 = knots[i - 1], knots[i], knots[i + 1], knots[i + 2]
        frac = np.linspace(0.0, 1.0, density, endpoint=False)
        t = t1[:, None] + (t2 - t1)[:, None] * frac[None, :]
        p0, p1, p2, p3 = ext[i - 1], ext[i], ext[i + 1], ext[i + 2]

        def lerp(ta, tb, pa, pb):
            w = ((t - ta[:, None]) / (tb - ta)[:, None])[:, :, None]
            return (1.0 - w) * pa[:, None, :] + w * pb[:, None, :]

        a1 = lerp(t0, t1, p0, p1)
        a2 = lerp(t1, t2, p1, p2)
        a3 = lerp(t2, t3, p2, p3)
        w1 = ((t - t0[:, None]) / (t2 - t0)[:, None])[:, :, None]
        w2 = ((t - t1[:, None]) / (t3 - t1)[:, None])[:, :, None]
        wc = ((t - t1[:, None]) / (t2 - t1)[:, None])[:, :, None]
        b1 = (1.0 - w1) * a1 + w1 * a2
        b2 = (1.0 - w2) * a2 + w2 * a3
        dense = ((1.0 - wc) * b1 + wc * b2).reshape(-1, 2)
        return np.vstack([dense, c[-1][None, :]])

    @property
    def length(self) -> float:
        return float(self.cum[-1])

    def sample_uniform(self, n: int) -> AxisSamples:
        """n arclength-uniform samples with finite-difference tangents."""
        s = np.linspace(0.0, self.length, n)
        xs = np.interp(s, self.cum, self.dense[:, 0])
        ys = np.interp(s, self.cum, self.dense[:, 1])
        pts = np.stack([xs, ys], axis=1)
        grad = np.gradient(pts, axis=0)
        norm = np.hypot(grad[:, 0], grad[:, 1])
        norm = np.where(norm <= 1e-15, 1.0, norm)
        return AxisSamples(pts, grad / norm[:, None], s, float(s[1] - s[0]) if n > 1 else 0.0)


def fit_branch_spline(branch: Branch, skel: Skeleton) -> CatmullRomSpline:
    """Interpolating spline through the branch joints in order."""
    return CatmullRomSpline(branch_points(skel, branch))


def _slice_polygon(axis: AxisSamples, poly: SimplePolygon) -> SliceSet:
    """Perpendicular boundary hits for all axis samples in one matrix pass.

    Keeps the nearest hit on each side of the axis, which preserves the
    local tube when a slice line crosses the outline more than twice.
    """
    a, e = poly.edge_arrays()
    ex = e[:, 0][None, :]
    ey = e[:, 1][None, :]
    px = axis.points[:, 0][:, None]
    py = axis.points[:, 1][:, None]
    # slice direction is the left normal of the axis tangent
    dx = -axis.tangents[:, 1][:, None]
    dy = axis.tangents[:, 0][:, None]
    denom = dx * ey - dy * ex
    ok = np.abs(denom) > EPS_GEOM
    denom = np.where(ok, denom, 1.0)
    qpx = a[None, :, 0] - px
    qpy = a[None, :, 1] - py
    t = (qpx * ey - qpy * ex) / denom
    u = (qpx * dy - qpy * dx) / denom
    hit = ok & (u >= -EPS_GEOM) & (u < 1.0 - EPS_GEOM)
    pos = np.where(hit & (t > EPS_GEOM), t, np.inf)
    neg = np.where(hit & (t < -EPS_GEOM), t, -np.inf)
    tl = pos.min(axis=1)
    tr = neg.max(axis=1)
    if not (np.isfinite(tl).all() and np.isfinite(tr).all()):
        i = int(np.nonzero(~(np.isfinite(tl) & np.isfinite(tr)))[0][0])
        raise DegenerateSlice(f"axis sample {i} has no boundary hit on one side")
    left = np.stack([px[:, 0] + tl * dx[:, 0], py[:, 0] + tl * dy[:, 0]], axis=1)
    right = np.stack([px[:, 0] + tr * dx[:, 0], py[:, 0] + tr * dy[:, 0]], axis=1)
    return SliceSet(left, right, tl, -tr)


def _segments_cross(l1, r1, l2, r2) -> bool:
    d1x, d1y = r1[0] - l1[0], r1[1] - l1[1]
    d2x, d2y = r2[0] - l2[0], r2[1] - l2[1]
    denom = d1x * d2y - d1y * d2x
    if abs(denom) <= 1e-15:
        return False
    qx, qy = l2[0] - l1[0], l2[1] - l1[1]
    t = (qx * d2y - qy * d2x) / denom
    u = (qx * d1y - qy * d1x) / denom
    return 0.0 < t < 1.0 and 0.0 < u < 1.0


def _omega_polygon(slices: SliceSet) -> SimplePolygon:
    """Close the slice chains into the bounded region.

    Around sharp bends neighbouring slices can cross, which would fold
    the ring inside out; such slices are skipped so the region stays a
    simple polygon (the selection error still sees every slice).
    """
    n = len(slices.w_left)
    keep = [0]
    for i in range(1, n):
        while len(keep) > 1 and _segments_cross(
                slices.left[keep[-1]], slices.right[keep[-1]],
                slices.left[i], slices.right[i]):
            keep.pop()
        if not _segments_cross(slices.left[keep[-1]], slices.right[keep[-1]],
                               slices.left[i], slices.right[i]):
            keep.append(i)
    idx = np.asarray(keep)
    ring = np.vstack([slices.left[idx], slices.right[idx][::-1]])
    gaps = np.hypot(*(ring - np.roll(ring, 1, axis=0)).T)
    ring = ring[gaps > EPS_GEOM] if (gaps > EPS_GEOM).any() else ring[:1]
    nxt = np.roll(ring, -1, axis=0)
    area2 = np.sum(ring[:, 0] * nxt[:, 1] - nxt[:, 0] * ring[:, 1])
    if area2 < 0:
        ring = ring[::-1]
    pts = [Point(float(x), float(y)) for x, y in ring]
    # the caps may graze the shape boundary; skip the O(n^2) validity check
    return SimplePolygon(pts, _validate=False)


def build_general_cylinder(curve: CatmullRomSpline, poly: SimplePolygon,
                           n_samples: int) -> GeneralCylinder:
    """Slice the polygon perpendicular to the axis and close the end caps.

    Slices crossing the boundary more than twice keep the nearest hit on
    each side, preserving the local tube near junctions.
    """
    axis = curve.sample_uniform(max(2, n_samples))
    slices = _slice_polygon(axis, poly)
    return GeneralCylinder(axis, slices, _omega_polygon(slices))


def _range_errors(axis: AxisSamples, slices: SliceSet, a: int, b: int,
                  alpha_s: float) -> np.ndarray:
    """Selection error for interior samples of range [a, b].

    Axis deviation is the perpendicular distance to the range chord; shape
    deviation straightens the axis, stands every slice upright at its
    arclength abscissa, and measures how far the slice tips fall from the
    straight sides of the trapezoid spanned by the range's end slices.
    """
    P = axis.points
    s = axis.abscissa
    idx = np.arange(a + 1, b)
    chord = P[b] - P[a]
    clen = math.hypot(chord[0], chord[1])
    rel = P[idx] - P[a]
    if clen <= 1e-15:
        d_perp = np.hypot(rel[:, 0], rel[:, 1])
    else:
        d_perp = np.abs(rel[:, 0] * chord[1] - rel[:, 1] * chord[0]) / clen
    if alpha_s == 0.0:
        return d_perp
    top = _seg_dist_1d(s[idx], slices.w_left[idx], s[a], slices.w_left[a],
                       s[b], slices.w_left[b])
    bot = _seg_dist_1d(s[idx], -slices.w_right[idx], s[a], -slices.w_right[a],
                       s[b], -slices.w_right[b])
    return d_perp + alpha_s * (top + bot)


def _seg_dist_1d(x, y, ax, ay, bx, by) -> np.ndarray:
    """Vectorized point-to-segment distance in the straightened frame."""
    dx, dy = bx - ax, by - ay
    dd = dx * dx + dy * dy
    safe = np.where(dd <= 1e-30, 1.0, dd)
    t = np.clip(((x - ax) * dx + (y - ay) * dy) / safe, 0.0, 1.0)
    t = np.where(dd <= 1e-30, 0.0, t)
    return np.hypot(x - (ax + t * dx), y - (ay + t * dy))


def point_selection_error(i: int, rng: Tuple[int, int], axis: AxisSamples,
                          slices: SliceSet, alpha_s: float) -> float:
    """Error of one interior sample against the chord and trapezoid of rng."""
    a, b = rng
    if not a < i < b:
        raise ValueError("index must be interior to the range")
    return float(_range_errors(axis, slices, a, b, alpha_s)[i - a - 1])


def bounded_dp_select(axis: AxisSamples, slices: SliceSet, i_st: int, i_en: int,
                      eps: float, alpha_s: float) -> List[bool]:
    """Recursive max-error selection; endpoints always retained.

    The split point of each range is its error argmax, independent of eps,
    so retained sets only grow as eps shrinks. Ranges at the same recursion
    depth are evaluated together in one vectorized pass.
    """
    n = len(axis.points)
    if _kernels.HAVE_NUMBA:
        flags = np.zeros(n, dtype=np.bool_)
        _kernels.select_max_error(
            np.ascontiguousarray(axis.points[:, 0]),
            np.ascontiguousarray(axis.points[:, 1]),
            np.ascontiguousarray(axis.abscissa),
            np.ascontiguousarray(slices.w_left),
            np.ascontiguousarray(slices.w_right),
            i_st, i_en, eps, alpha_s, flags)
        return [bool(f) for f in flags]
    keep = [False] * n
    keep[i_st] = keep[i_en] = True
    P = axis.points
    s = axis.abscissa
    wl = slices.w_left
    wr = -slices.w_right
    level = [(i_st, i_en)] if i_en > i_st + 1 else []
    while level:
        starts = np.array([a for a, _ in level])
        ends = np.array([b for _, b in level])
        sizes = ends - starts - 1
        offsets = np.concatenate([[0], np.cumsum(sizes)])[:-1]
        rid = np.repeat(np.arange(len(level)), sizes)
        idx = np.concatenate([np.arange(a + 1, b) for a, b in level])
        pa = P[starts][rid]
        chord = (P[ends] - P[starts])[rid]
        clen = np.hypot(chord[:, 0], chord[:, 1])
        rel = P[idx] - pa
        with np.errstate(divide="ignore", invalid="ignore"):
            d_perp = np.where(
                clen > 1e-15,
                np.abs(rel[:, 0] * chord[:, 1] - rel[:, 1] * chord[:, 0]) / clen,
                np.hypot(rel[:, 0], rel[:, 1]))
        err = d_perp
        if alpha_s != 0.0:
            top = _seg_dist_1d(s[idx], wl[idx], s[starts][rid], wl[starts][rid],
                               s[ends][rid], wl[ends][rid])
            bot = _seg_dist_1d(s[idx], wr[idx], s[starts][rid], wr[starts][rid],
                               s[ends][rid], wr[ends][rid])
            err = d_perp + alpha_s * (top + bot)
        max_per = np.maximum.reduceat(err, offsets)
        flat = np.where(err == max_per[rid], np.arange(len(err)), len(err))
        first = np.minimum.reduceat(flat, offsets)
        next_level = []
        for k, (a, b) in enumerate(level):
            if max_per[k] > eps:
                mid = int(idx[first[k]])
                keep[mid] = True
                if mid > a + 1:
                    next_level.append((a, mid))
                if b > mid + 1:
                    next_level.append((mid, b))
        level = next_level
    return keep


def polyline_inside(points: Sequence[Point], omega: SimplePolygon,
                    samples_per_edge: int = 64, tol: float = EPS_GEOM) -> bool:
    """True when every polyline edge lies inside omega (sampled containment)."""
    pts = np.asarray([(p[0], p[1]) for p in points], dtype=float)
    if len(pts) < 2:
        return True
    t = np.linspace(0.0, 1.0, samples_per_edge)
    a = pts[:-1]
    d = pts[1:] - pts[:-1]
    probe = (a[:, None, :] + t[None, :, None] * d[:, None, :]).reshape(-1, 2)
    ring_a, ring_d = omega.edge_arrays()
    if _kernels.HAVE_NUMBA:
        return bool(_kernels.all_points_in_ring(
            np.ascontiguousarray(probe[:, 0]), np.ascontiguousarray(probe[:, 1]),
            np.ascontiguousarray(ring_a[:, 0]), np.ascontiguousarray(ring_a[:, 1]),
            np.ascontiguousarray(ring_a[:, 0] + ring_d[:, 0]),
            np.ascontiguousarray(ring_a[:, 1] + ring_d[:, 1]), tol))
    return bool(points_in_polygon(probe, omega.coords(), tol,
                                  edges=(ring_a, ring_d)).all())


def _is_long_branch(branch: Branch, skel: Skeleton, factor: float,
                    mean_bone: Optional[float] = None) -> bool:
    if len(branch.joints) >= 3:
        return True
    if mean_bone is None:
        bones = skel.bones()
        if not bones:
            return False
        mean_bone = sum(skel.bone_length(*b) for b in bones) / len(bones)
    length = skel.bone_length(branch.joints[0], branch.joints[1])
    return length >= factor * mean_bone


def bounded_dp(branch: Branch, skel: Skeleton, poly: SimplePolygon,
               config: BoundedDPConfig = BoundedDPConfig(),
               mean_bone: Optional[float] = None) -> List[Point]:
    """Simplified axis polyline for a branch, kept inside its general cylinder.

    Selection runs at a shrinking threshold until containment holds. The
    incumbent polyline wins whenever it is at least as concise as a fresh
    result and itself contained, which keeps repeated application stable.
    When the iteration budget runs out the original branch is returned and
    a warning logged.
    """
    return bounded_dp_detailed(branch, skel, poly, config, mean_bone)[0]


def _prepare_axis(branch: Branch, skel: Skeleton, poly: SimplePolygon,
                  config: BoundedDPConfig, mean_bone: Optional[float]):
    """Gate and resample one branch; None when it passes through unchanged."""
    original = branch_points(skel, branch)
    if len(original) < 2 or not _is_long_branch(branch, skel, config.long_branch_factor, mean_bone):
        return None
    eps = config.eps0
    if eps is None:
        arr = np.asarray(original)
        span = arr.max(axis=0) - arr.min(axis=0)
        eps = config.eps0_factor * float(math.hypot(span[0], span[1]))
    if eps <= 0.0:
        return None
    curve = CatmullRomSpline(original)
    # sampling density only needs a slice-width estimate: joint radii
    # when known, else the shape's ribbon width (2 area / perimeter)
    radii = [skel.joints[j].radius for j in branch.joints]
    mean_slice = 2.0 * sum(radii) / len(radii)
    if mean_slice <= EPS_GEOM:
        mean_slice = 2.0 * abs(signed_area(poly.vertices)) / poly.perimeter
    if mean_slice <= EPS_GEOM:
        return None
    n = int(min(config.max_samples, max(16, math.ceil(curve.length / (0.5 * mean_slice)))))
    return original, curve.sample_uniform(max(2, n)), eps


def _tune(original: List[Point], gc: GeneralCylinder, eps: float,
          config: BoundedDPConfig) -> List[Point]:
    """Shrink the threshold until the selected polyline stays inside omega."""
    last = len(gc.axis.points) - 1
    axis_pts = [Point(float(x), float(y)) for x, y in gc.axis.points]
    if not polyline_inside(axis_pts, gc.omega, config.containment_samples):
        # even the densest polyline exits the region; shrinking cannot help
        log.debug("axis polyline not contained in its region; branch unchanged")
        return original
    for _ in range(config.max_iterations):
        flags = bounded_dp_select(gc.axis, gc.slices, 0, last, eps, config.alpha_s)
        sel = [Point(float(x), float(y))
               for (x, y), f in zip(gc.axis.points, flags) if f]
        if polyline_inside(sel, gc.omega, config.containment_samples):
            if len(sel) >= len(original) and \
                    polyline_inside(original, gc.omega, config.containment_samples):
                return original
            sel[0] = original[0]
            sel[-1] = original[-1]
            return sel
        eps *= config.alpha
    log.warning("threshold tuning hit the iteration limit; branch left unchanged")
    return original


def bounded_dp_detailed(branch: Branch, skel: Skeleton, poly: SimplePolygon,
                        config: BoundedDPConfig = BoundedDPConfig(),
                        mean_bone: Optional[float] = None
                        ) -> Tuple[List[Point], Optional[GeneralCylinder]]:
    """`bounded_dp` plus the general cylinder it bounded the result with."""
    prep = _prepare_axis(branch, skel, poly, config, mean_bone)
    if prep is None:
        return branch_points(skel, branch), None
    original, axis, eps = prep
    try:
        slices = _slice_polygon(axis, poly)
    except DegenerateSlice:
        # the fitted axis strays outside the outline; nothing bounds it
        log.debug("axis exits the shape; branch left unchanged")
        return original, None
    gc = GeneralCylinder(axis, slices, _omega_polygon(slices))
    return _tune(original, gc, eps, config), gc


def simplify_branches(skel: Skeleton,
                      jobs: Sequence[Tuple[Branch, SimplePolygon]],
                      config: BoundedDPConfig = BoundedDPConfig(),
                      mean_bone: Optional[float] = None) -> Skeleton:
    """Run the bounded simplification over many branches at once.

    All branches bounded by the same outline share a single batched slice
    pass; results are identical to branch-by-branch calls because the
    per-branch tuning is untouched.
    """
    prepared = []
    for branch, poly in jobs:
        prep = _prepare_axis(branch, skel, poly, config, mean_bone)
        if prep is not None:
            prepared.append((branch, poly, *prep))
    by_poly: Dict[int, list] = {}
    for item in prepared:
        by_poly.setdefault(id(item[1]), []).append(item)
    out = skel
    for group in by_poly.values():
        poly = group[0][1]
        concat = AxisSamples(
            np.vstack([axis.points for _, _, _, axis, _ in group]),
            np.vstack([axis.tangents for _, _, _, axis, _ in group]),
            np.concatenate([axis.abscissa for _, _, _, axis, _ in group]),
            0.0,
        )
        try:
            all_slices = _slice_polygon(concat, poly)
            valid = np.ones(len(group), dtype=bool)
        except DegenerateSlice:
            all_slices, valid = None, None
        offset = 0
        for k, (branch, _, original, axis, eps) in enumerate(group):
            n = len(axis.points)
            if all_slices is None:
                # rare: redo individually so one stray axis cannot block
                # the others
                polyline, _ = bounded_dp_detailed(branch, out, poly, config,
                                                  mean_bone)
            else:
                sl = SliceSet(all_slices.left[offset:offset + n],
                              all_slices.right[offset:offset + n],
                              all_slices.w_left[offset:offset + n],
                              all_slices.w_right[offset:offset + n])
                gc = GeneralCylinder(axis, sl, _omega_polygon(sl))
                polyline = _tune(original, gc, eps, config)
            offset += n
            if len(polyline) != len(branch.joints):
                out = replace_branch(out, branch, polyline)
    return out


def replace_branch(skel: Skeleton, branch: Branch, polyline: Sequence[Point]) -> Skeleton:
    """Rewire a branch to follow a new polyline between its end joints.

    Interior sleeve joints are removed, fresh joints are created along the
    polyline, and radii for the new joints are interpolated by arclength
    from the old branch profile. End joints keep their ids, positions and
    other attachments.
    """
    out = skel.copy()
    old = branch.joints
    if len(polyline) < 2:
        return out
    old_pts = [skel.joints[j].position for j in old]
    old_s = [0.0]
    for a, b in zip(old_pts, old_pts[1:]):
        old_s.append(old_s[-1] + math.hypot(b.x - a.x, b.y - a.y))
    old_r = [skel.joints[j].radius for j in old]
    part = skel.joints[old[0]].part
    for j in old[1:-1]:
        out.remove_joint(j)
    if out.degree(old[0]) and old[-1] in out.neighbors(old[0]):
        out.remove_bone(old[0], old[-1])  # 2-joint branch direct bone
    new_s = [0.0]
    for a, b in zip(polyline, polyline[1:]):
        new_s.append(new_s[-1] + math.hypot(b[0] - a[0], b[1] - a[1]))
    scale = (old_s[-1] / new_s[-1]) if new_s[-1] > 0 else 0.0
    chain = [old[0]]
    for k in range(1, len(polyline) - 1):
        r = float(np.interp(new_s[k] * scale, old_s, old_r))
        chain.append(out.add_joint(polyline[k], radius=r, part=part))
    chain.append(old[-1])
    for a, b in zip(chain, chain[1:]):
        out.add_bone(a, b)
    return out
