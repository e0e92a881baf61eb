"""Deterministic test corpora and brute-force oracles.

The oracles re-derive expected results from first principles so the code
under test can be checked against an independent computation:

* `wavefront_oracle` simulates the inward offsetting of a polygon in small
  time steps, detecting topology changes by watching geometric gap
  measurements change sign, then bisecting to the event instant. It never
  predicts event times the way the production extractor does.
* `min_distance_oracle` brute-forces point-to-segment distance by sampling.
* `rdp_oracle` is a plain recursive max-deviation polyline simplifier.

Oracles share only the primitives in `geom` with the production code.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import OracleResolution
from .geom import Point, Segment
from .scene import Scene, Transform
from .skeleton import Skeleton
from .straight_skeleton import SSEdgeKind, StraightSkeleton
from .stroke import RawStroke, SimplePolygon

_EPS_DIR = 1e-12


# ------------------------------------------------------------------ corpora

def gen_star_polygon(seed: int, n_vertices: int, radius_jitter: float = 0.4,
                     radius: float = 100.0) -> SimplePolygon:
    """Star-shaped polygon around the origin, deterministic per seed."""
    if n_vertices < 3:
        raise ValueError("need at least 3 vertices")
    rng = np.random.default_rng(seed)
    base = np.linspace(0.0, 2.0 * math.pi, n_vertices, endpoint=False)
    ang = base + rng.uniform(-0.45, 0.45, n_vertices) * (2.0 * math.pi / n_vertices)
    rad = radius * (1.0 + rng.uniform(-radius_jitter, radius_jitter, n_vertices))
    pts = [Point(r * math.cos(a), r * math.sin(a)) for a, r in zip(ang, rad)]
    return SimplePolygon(pts)


def gen_blob_stroke(seed: int, n_samples: int = 600, radius: float = 150.0,
                    wobble: float = 0.25, jitter: float = 1.0) -> RawStroke:
    """Smooth closed blob outline with device-level jitter."""
    rng = np.random.default_rng(seed)
    phases = rng.uniform(0, 2 * math.pi, 3)
    amps = rng.uniform(0.3, 1.0, 3) * wobble
    ang = np.linspace(0, 2 * math.pi, n_samples, endpoint=False)
    r = radius * (1.0 + sum(a * np.sin((k + 2) * ang + p)
                            for k, (a, p) in enumerate(zip(amps, phases))))
    x = r * np.cos(ang) + rng.uniform(-jitter, jitter, n_samples)
    y = r * np.sin(ang) + rng.uniform(-jitter, jitter, n_samples)
    return RawStroke([Point(float(a), float(b)) for a, b in zip(x, y)], closed=True)


def gen_rect_stroke(seed: int, width: float = 400.0, height: float = 200.0,
                    spacing: float = 2.0, jitter: float = 1.0) -> RawStroke:
    """Axis-aligned rectangle outline traced with pen wobble.

    Jitter is applied perpendicular to each side, as a steady hand
    wobbles, so arclength stays calibrated and corners keep their phase.
    """
    rng = np.random.default_rng(seed)
    pts: List[Point] = []
    corners = [(0, 0), (width, 0), (width, height), (0, height)]
    for (x0, y0), (x1, y1) in zip(corners, corners[1:] + corners[:1]):
        ln = math.hypot(x1 - x0, y1 - y0)
        nx, ny = -(y1 - y0) / ln, (x1 - x0) / ln
        n = max(2, int(ln / spacing))
        waves = rng.integers(2, 6)
        phase = rng.uniform(0, 2 * math.pi)
        amp = jitter * rng.uniform(0.5, 1.0)
        for t in np.linspace(0, 1, n, endpoint=False):
            off = amp * math.sin(waves * 2 * math.pi * t + phase)
            pts.append(Point(x0 + t * (x1 - x0) + off * nx,
                             y0 + t * (y1 - y0) + off * ny))
    return RawStroke(pts, closed=True)


def gen_tube_fixture(seed: int, n_axis: int = 7) -> Tuple[SimplePolygon, Skeleton]:
    """Wavy tube polygon plus a skeleton chain along its axis."""
    rng = np.random.default_rng(seed)
    length = 300.0
    xs = np.linspace(0.0, length, 64)
    amp = rng.uniform(5.0, 25.0)
    freq = rng.uniform(0.5, 1.2)
    phase = rng.uniform(0, 2 * math.pi)
    ys = amp * np.sin(freq * 2 * math.pi * xs / length + phase)
    width = rng.uniform(20.0, 36.0) + rng.uniform(0.0, 8.0) * np.sin(
        rng.uniform(0.5, 1.5) * 2 * math.pi * xs / length + rng.uniform(0, 6.28))
    tang = np.gradient(np.stack([xs, ys], axis=1), axis=0)
    nrm = np.hypot(tang[:, 0], tang[:, 1])
    nx, ny = -tang[:, 1] / nrm, tang[:, 0] / nrm
    top = np.stack([xs + nx * width / 2, ys + ny * width / 2], axis=1)
    bot = np.stack([xs - nx * width / 2, ys - ny * width / 2], axis=1)
    ring = np.vstack([bot, top[::-1]])
    poly = SimplePolygon([Point(float(x), float(y)) for x, y in ring])
    skel = Skeleton()
    # keep axis endpoints strictly inside, away from the end caps
    idx = np.linspace(2, len(xs) - 3, n_axis).astype(int)
    joints = [skel.add_joint(Point(float(xs[i]), float(ys[i]))) for i in idx]
    for a, b in zip(joints, joints[1:]):
        skel.add_bone(a, b)
    return poly, skel


def gen_scene(seed: int, n_parts: Optional[int] = None) -> Scene:
    """Multi-part scene of star-shaped blobs, later parts overlapping earlier."""
    rng = np.random.default_rng(seed)
    count = int(n_parts if n_parts is not None else rng.integers(2, 6))
    scene = Scene()
    centers: List[Tuple[float, float]] = []
    for k in range(count):
        poly = gen_star_polygon(seed * 31 + k, int(rng.integers(6, 14)),
                                radius_jitter=0.25,
                                radius=float(rng.uniform(60, 120)))
        if k == 0 or rng.uniform() < 0.25:
            cx, cy = rng.uniform(-50, 50), rng.uniform(-50, 50)
            if k > 0:
                cx += 600.0 + 400.0 * len(centers)  # disjoint extra root
        else:
            bx, by = centers[int(rng.integers(0, len(centers)))]
            ang = rng.uniform(0, 2 * math.pi)
            dist = rng.uniform(80, 140)
            cx, cy = bx + dist * math.cos(ang), by + dist * math.sin(ang)
        centers.append((cx, cy))
        scene.add_part_from_polygon(poly, Transform(tx=cx, ty=cy))
    return scene


# ------------------------------------------------------- distance oracles

def min_distance_oracle(point: Point, segment: Segment, n_samples: int = 10001) -> float:
    """Minimum distance over uniformly sampled points of the segment."""
    if n_samples < 1000:
        raise ValueError("use at least 1000 samples")
    t = np.linspace(0.0, 1.0, n_samples)
    x = segment.a.x + t * (segment.b.x - segment.a.x)
    y = segment.a.y + t * (segment.b.y - segment.a.y)
    return float(np.hypot(x - point.x, y - point.y).min())


def rdp_oracle(points: Sequence[Point], eps: float) -> List[int]:
    """Classic recursive max-deviation simplification; returns kept indices."""
    def dist(p, a, b):
        dx, dy = b[0] - a[0], b[1] - a[1]
        n = math.hypot(dx, dy)
        if n == 0:
            return math.hypot(p[0] - a[0], p[1] - a[1])
        return abs((p[0] - a[0]) * dy - (p[1] - a[1]) * dx) / n

    def rec(lo, hi, keep):
        if hi <= lo + 1:
            return
        best, best_d = lo, 0.0
        for i in range(lo + 1, hi):
            d = dist(points[i], points[lo], points[hi])
            if d > best_d:
                best, best_d = i, d
        if best_d > eps:
            keep.add(best)
            rec(lo, best, keep)
            rec(best, hi, keep)

    keep: Set[int] = {0, len(points) - 1}
    rec(0, len(points) - 1, keep)
    return sorted(keep)


# ------------------------------------------------------- wavefront oracle

@dataclass
class OracleSkeleton:
    nodes: List[Tuple[float, float, float]]        # (x, y, time)
    arcs: List[Tuple[int, Tuple[str, int]]]        # node id -> ('B', i) | ('N', j)
    split_events: int


class _OV:
    __slots__ = ("px", "py", "t0", "vx", "vy", "left", "right", "ref", "reflex",
                 "serial")

    def __init__(self, px, py, t0, vx, vy, left, right, ref, reflex, serial):
        self.px, self.py, self.t0 = px, py, t0
        self.vx, self.vy = vx, vy
        self.left, self.right = left, right
        self.ref = ref
        self.reflex = reflex
        self.serial = serial


class _OracleSim:
    """Stepped inward-offset simulation. Vertices move linearly between
    topology events; events are found by sampling gap measurements at time
    steps and bisecting the first sign change."""

    def __init__(self, poly: SimplePolygon, dt: float):
        coords = poly.coords()
        self.n = len(coords)
        nxt = np.roll(coords, -1, axis=0)
        d = nxt - coords
        ln = np.hypot(d[:, 0], d[:, 1])
        self.dir = d / ln[:, None]
        self.nrm = np.stack([-self.dir[:, 1], self.dir[:, 0]], axis=1)
        self.off = self.nrm[:, 0] * coords[:, 0] + self.nrm[:, 1] * coords[:, 1]
        lo, hi = coords.min(axis=0), coords.max(axis=0)
        self.diam = float(math.hypot(*(hi - lo)))
        self.cap = 0.6 * float(min(hi[0] - lo[0], hi[1] - lo[1]))
        self.dt = dt
        # events closer than the node-merge resolution count as simultaneous
        self.tol = 1e-6 * self.diam
        self.nodes: List[Tuple[float, float, float]] = []
        self.arcs: List[Tuple[int, Tuple[str, int]]] = []
        self.splits = 0
        self._serial = 0
        self.loops: List[List[_OV]] = [[
            self._vertex(float(coords[i, 0]), float(coords[i, 1]), 0.0,
                         (i - 1) % self.n, i, ("B", i))
            for i in range(self.n)
        ]]
        self.disabled: Set[Tuple[int, int]] = set()

    def _vertex(self, px, py, t0, left, right, ref) -> _OV:
        n1, n2 = self.nrm[left], self.nrm[right]
        d1, d2 = self.dir[left], self.dir[right]
        det = n1[0] * n2[1] - n1[1] * n2[0]
        if abs(det) <= _EPS_DIR * 10:
            if n1 @ n2 >= 0:
                vx, vy = float(n1[0]), float(n1[1])
            else:
                vx, vy = 0.0, 0.0  # opposing fronts pin the vertex
        else:
            vx = float((n2[1] - n1[1]) / det)
            vy = float((n1[0] - n2[0]) / det)
        reflex = (d1[0] * d2[1] - d1[1] * d2[0]) < -_EPS_DIR
        self._serial += 1
        return _OV(px, py, t0, vx, vy, left, right, ref, reflex, self._serial)

    # ---------------------------------------------------------- predicates

    def _registry(self):
        """Gap measurements that signal the next topology change.

        Edge rows measure the signed length of a wavefront edge; split
        rows measure how far a reflex vertex still is from an opposite
        edge's moving support line. That measurement is linear in time
        and crosses zero once; the crossing is the potential event
        whichever side the vertex approaches from, so each split row
        carries the sign of its current value and fires on a sign change.
        """
        verts: List[_OV] = []
        edge_rows = []   # (i_vert, j_vert, edge id, loop idx, pos in loop)
        split_rows = []  # (v_vert, edge id, u_vert, loop idx, sign)
        index: Dict[int, int] = {}
        for L in self.loops:
            for v in L:
                index[id(v)] = len(verts)
                verts.append(v)
        for li, L in enumerate(self.loops):
            k = len(L)
            for i, u in enumerate(L):
                w = L[(i + 1) % k]
                edge_rows.append((index[id(u)], index[id(w)], u.right, li, i))
            for v in L:
                if not v.reflex:
                    continue
                for i, u in enumerate(L):
                    w = L[(i + 1) % k]
                    if u is v or w is v:
                        continue
                    if (v.serial, u.serial) in self.disabled:
                        continue
                    split_rows.append((index[id(v)], u.right, index[id(u)], li, 0))
        return verts, edge_rows, split_rows

    def _positions(self, verts: List[_OV], times: np.ndarray) -> np.ndarray:
        p0 = np.array([(v.px, v.py) for v in verts])
        t0 = np.array([v.t0 for v in verts])
        vel = np.array([(v.vx, v.vy) for v in verts])
        dt = times[:, None] - t0[None, :]
        return p0[None, :, :] + dt[:, :, None] * vel[None, :, :]

    def _values(self, verts, edge_rows, split_rows, times: np.ndarray):
        pos = self._positions(verts, np.atleast_1d(times))
        vals = []
        if edge_rows:
            i = np.array([r[0] for r in edge_rows])
            j = np.array([r[1] for r in edge_rows])
            e = np.array([r[2] for r in edge_rows])
            d = self.dir[e]
            gap = ((pos[:, j, 0] - pos[:, i, 0]) * d[None, :, 0]
                   + (pos[:, j, 1] - pos[:, i, 1]) * d[None, :, 1])
            vals.append(gap)
        if split_rows:
            v = np.array([r[0] for r in split_rows])
            e = np.array([r[1] for r in split_rows])
            sign = np.array([r[4] if r[4] != 0 else 1 for r in split_rows])
            nn = self.nrm[e]
            dist = (pos[:, v, 0] * nn[None, :, 0] + pos[:, v, 1] * nn[None, :, 1]
                    - self.off[e][None, :] - np.atleast_1d(times)[:, None])
            vals.append(dist * sign[None, :])
        if not vals:
            return np.zeros((len(np.atleast_1d(times)), 0))
        return np.concatenate(vals, axis=1)

    # -------------------------------------------------------------- events

    def _emit(self, node_id: int, v: _OV) -> None:
        self.arcs.append((node_id, v.ref))

    def _retire_small(self, L: List[_OV], node_id: int) -> None:
        born_here = [v for v in L if v.ref == ("N", node_id)]
        other = [v for v in L if v.ref != ("N", node_id)]
        target = other[0] if other else L[-1]
        self.arcs.append((node_id, target.ref))

    def _handle_edge(self, li: int, pos_in_loop: int, t: float) -> None:
        L = self.loops[li]
        k = len(L)
        u, w = L[pos_in_loop], L[(pos_in_loop + 1) % k]
        ux, uy = u.px + (t - u.t0) * u.vx, u.py + (t - u.t0) * u.vy
        wx, wy = w.px + (t - w.t0) * w.vx, w.py + (t - w.t0) * w.vy
        x, y = 0.5 * (ux + wx), 0.5 * (uy + wy)
        node = len(self.nodes)
        self.nodes.append((x, y, t))
        if k == 3:
            for v in L:
                self._emit(node, v)
            del self.loops[li]
            return
        self._emit(node, u)
        self._emit(node, w)
        nv = self._vertex(x, y, t, u.left, w.right, ("N", node))
        rest = [L[(pos_in_loop + 1 + m) % k] for m in range(1, k - 1)]
        self.loops[li] = [nv] + rest

    def _handle_split(self, row, t: float) -> bool:
        """Returns True when a split was applied, False for a disabled miss."""
        v_idx, eid, u_idx, li = row[:4]
        verts, _, _ = self._cached
        v = verts[v_idx]
        u = verts[u_idx]
        L = self.loops[li]
        k = len(L)
        iu = next(i for i, q in enumerate(L) if q is u)
        w = L[(iu + 1) % k]
        d = self.dir[eid]
        vx, vy = v.px + (t - v.t0) * v.vx, v.py + (t - v.t0) * v.vy
        s_v = vx * d[0] + vy * d[1]
        s_u = (u.px + (t - u.t0) * u.vx) * d[0] + (u.py + (t - u.t0) * u.vy) * d[1]
        s_w = (w.px + (t - w.t0) * w.vx) * d[0] + (w.py + (t - w.t0) * w.vy) * d[1]
        span_tol = 4.0 * self.tol + 1e-9
        if not (s_u - span_tol <= s_v <= s_w + span_tol):
            self.disabled.add((v.serial, u.serial))
            return False
        node = len(self.nodes)
        self.nodes.append((vx, vy, t))
        self._emit(node, v)
        self.splits += 1
        iv = next(i for i, q in enumerate(L) if q is v)
        v1 = self._vertex(vx, vy, t, v.left, eid, ("N", node))
        v2 = self._vertex(vx, vy, t, eid, v.right, ("N", node))
        ring = L[iv + 1:] + L[:iv]  # from v.next around to v.prev
        cut = ring.index(u)
        loop_b = [v2] + ring[: cut + 1]       # v2, v.next ... u
        loop_a = [v1] + ring[cut + 1:]        # v1, u.next ... v.prev
        del self.loops[li]
        for newL in (loop_a, loop_b):
            if len(newL) < 3:
                self._retire_small(newL, node)
            else:
                self.loops.append(newL)
        return True

    # ----------------------------------------------------------------- run

    def run(self) -> OracleSkeleton:
        t = 0.0
        max_events = 6 * self.n + 32 + self.n * self.n
        batch = 256
        while self.loops:
            max_events -= 1
            if max_events < 0:
                raise OracleResolution("oracle event budget exhausted")
            verts, edge_rows, split_rows = self._registry()
            if split_rows:
                # orient each row so its value decreases toward the crossing
                vals0 = self._values(verts, [], split_rows, np.array([t]))[0]
                split_rows = [
                    (r[0], r[1], r[2], r[3], 1 if val >= 0 else -1)
                    for r, val in zip(split_rows, vals0)
                ]
            self._cached = (verts, edge_rows, split_rows)
            if not edge_rows and not split_rows:
                raise OracleResolution("active loop has no measurements")
            now_vals = self._values(verts, edge_rows, split_rows, np.array([t]))[0]
            if (now_vals <= self.tol).any():
                t_star = t
            else:
                t_star = None
                t_probe = t
                while t_probe < self.cap:
                    times = t_probe + self.dt * np.arange(1, batch + 1)
                    vals = self._values(verts, edge_rows, split_rows, times)
                    hit = np.nonzero((vals <= 0.0).any(axis=1))[0]
                    if len(hit):
                        hi = times[hit[0]]
                        lo = t_probe if hit[0] == 0 else times[hit[0] - 1]
                        t_star = self._bisect(verts, edge_rows, split_rows, lo, hi)
                        break
                    t_probe = times[-1]
                if t_star is None:
                    raise OracleResolution("no further event before the time cap")
            vals = self._values(verts, edge_rows, split_rows,
                                np.array([t_star]))[0]
            below = np.nonzero(vals <= self.tol)[0]
            if len(below) == 0:
                raise OracleResolution("sign change without an identifiable event")
            edge_hits = [int(i) for i in below if i < len(edge_rows)]
            if edge_hits:
                _, _, _, li, pos = edge_rows[edge_hits[0]]
                self._handle_edge(li, pos, t_star)
            else:
                split_hits = sorted((float(vals[i]), int(i)) for i in below)
                # hit or miss both make progress: a miss disables the pair
                self._handle_split(split_rows[split_hits[0][1] - len(edge_rows)],
                                   t_star)
            t = t_star
        return OracleSkeleton(self.nodes, self.arcs, self.splits)

    def _bisect(self, verts, edge_rows, split_rows, lo: float, hi: float) -> float:
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            vals = self._values(verts, edge_rows, split_rows, np.array([mid]))[0]
            if (vals <= 0.0).any():
                hi = mid
            else:
                lo = mid
        return hi


def wavefront_oracle(poly: SimplePolygon, dt: Optional[float] = None) -> OracleSkeleton:
    """Approximate straight skeleton via stepped offsetting (test oracle)."""
    diam = poly.diameter()
    if dt is None:
        dt = diam / 1e4
    if dt > diam / 1e4 + 1e-12:
        raise ValueError("step too coarse for the oracle")
    sim = _OracleSim(poly, dt)
    raw = sim.run()
    return _merge_oracle_nodes(raw, 1e-6 * diam)


def _merge_oracle_nodes(raw: OracleSkeleton, eps: float) -> OracleSkeleton:
    k = len(raw.nodes)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        xi, yi, _ = raw.nodes[i]
        for j in range(i + 1, k):
            xj, yj, _ = raw.nodes[j]
            if (xi - xj) ** 2 + (yi - yj) ** 2 <= eps * eps:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    remap: Dict[int, int] = {}
    nodes: List[Tuple[float, float, float]] = []
    groups: Dict[int, List[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    for root in sorted(groups):
        members = groups[root]
        cid = len(nodes)
        for m in members:
            remap[m] = cid
        nodes.append((
            sum(raw.nodes[m][0] for m in members) / len(members),
            sum(raw.nodes[m][1] for m in members) / len(members),
            sum(raw.nodes[m][2] for m in members) / len(members),
        ))
    arcs: Set[Tuple[int, Tuple[str, int]]] = set()
    for node_id, ref in raw.arcs:
        src = remap[node_id]
        if ref[0] == "N":
            dst = remap[ref[1]]
            if dst == src:
                continue
            lo, hi = min(src, dst), max(src, dst)
            arcs.add((lo, ("N", hi)))
        else:
            arcs.add((src, ref))
    return OracleSkeleton(nodes, sorted(arcs), raw.split_events)


def compare_with_oracle(ss: StraightSkeleton, oracle: OracleSkeleton,
                        tol: float) -> Optional[str]:
    """Topology and position comparison; None when they agree.

    Nodes are matched greedily by distance (unique matching required),
    then peripheral and interior edge sets must coincide exactly.
    """
    impl_nodes = ss.skeleton_vertices()
    if len(impl_nodes) != len(oracle.nodes):
        return f"node count {len(impl_nodes)} != oracle {len(oracle.nodes)}"
    pairs = []
    for a, v in enumerate(impl_nodes):
        for b, (x, y, _) in enumerate(oracle.nodes):
            d = math.hypot(v.position.x - x, v.position.y - y)
            if d <= tol:
                pairs.append((d, a, b))
    pairs.sort()
    match_a: Dict[int, int] = {}
    match_b: Dict[int, int] = {}
    for d, a, b in pairs:
        if a not in match_a and b not in match_b:
            match_a[a] = b
            match_b[b] = a
    if len(match_a) != len(impl_nodes):
        return "node positions do not match within tolerance"
    n = len(ss.source.vertices)
    impl_arcs: Set[Tuple[int, Tuple[str, int]]] = set()
    for e in ss.edges:
        if e.kind is SSEdgeKind.PERIPHERAL:
            node_idx = match_a[_impl_node_index(ss, e.a if e.a >= n else e.b)]
            border = e.b if e.a >= n else e.a
            impl_arcs.add((node_idx, ("B", border)))
        elif e.kind is SSEdgeKind.SKELETON:
            na = match_a[_impl_node_index(ss, e.a)]
            nb = match_a[_impl_node_index(ss, e.b)]
            lo, hi = min(na, nb), max(na, nb)
            impl_arcs.add((lo, ("N", hi)))
    oracle_arcs = set(oracle.arcs)
    if impl_arcs != oracle_arcs:
        missing = oracle_arcs - impl_arcs
        extra = impl_arcs - oracle_arcs
        return f"arc sets differ: missing {sorted(missing)[:4]}, extra {sorted(extra)[:4]}"
    return None


def _impl_node_index(ss: StraightSkeleton, vertex_id: int) -> int:
    return vertex_id - len(ss.source.vertices)
