"""Straight skeleton of a simple polygon by inward wavefront propagation.

Every polygon edge sweeps inward at unit speed along its normal. Wavefront
vertices move so they stay on both incident offset lines; their traces are
the skeleton arcs. Two event kinds change the wavefront topology while it
shrinks:

* edge event: a wavefront edge collapses to a point and its two neighbour
  edges become adjacent;
* split event: a reflex vertex catches an opposite wavefront edge and the
  active loop divides in two.

Events live in a priority queue keyed by offset time, tie-broken by kind
(edge before split), event point, then insertion order, which makes the
output deterministic under simultaneous events. Entries are validated
against the live wavefront when popped and discarded when stale.

A vertex whose incident offset lines are anti-parallel (the two fronts of
a constant-width region meeting head on) has no finite velocity. Such a
"ridge" vertex is pinned at its birth point and keeps only a direction;
its meetings with neighbours are found by ray intersection. Uniform-width
shapes such as rectangles depend on this case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from heapq import heapify, heappop, heappush
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateAngle, NumericalCollapse
from .geom import Point, Ray, Segment, ray
from .stroke import SimplePolygon

_EDGE = 0
_SPLIT = 1

# angular tolerance for parallel / anti-parallel direction tests (unit vectors)
_EPS_ANGLE = 1e-9


class SSVertexKind(Enum):
    BORDER = "border"
    SKELETON = "skeleton"


class SSEdgeKind(Enum):
    BORDER = "border"
    PERIPHERAL = "peripheral"
    SKELETON = "skeleton"


@dataclass(frozen=True)
class SSVertex:
    id: int
    position: Point
    time: float
    kind: SSVertexKind
    defining_edges: Tuple[int, ...] = ()


@dataclass(frozen=True)
class SSEdge:
    a: int
    b: int
    kind: SSEdgeKind
    # original edge ids bounding the two faces this arc separates
    sides: Tuple[int, ...] = ()


@dataclass
class StraightSkeleton:
    vertices: List[SSVertex]
    edges: List[SSEdge]
    source: SimplePolygon

    def skeleton_vertices(self) -> List[SSVertex]:
        return [v for v in self.vertices if v.kind is SSVertexKind.SKELETON]

    def skeleton_edges(self) -> List[SSEdge]:
        return [e for e in self.edges if e.kind is SSEdgeKind.SKELETON]

    def peripheral_edges(self) -> List[SSEdge]:
        return [e for e in self.edges if e.kind is SSEdgeKind.PERIPHERAL]

    def border_edges(self) -> List[SSEdge]:
        return [e for e in self.edges if e.kind is SSEdgeKind.BORDER]


def _edge_normals(coords: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unit directions, inward unit normals and line offsets per CCW edge.

    Edge i runs from vertex i to i+1; its support line is n.x = c, and the
    offset line at time t is n.x = c + t.
    """
    nxt = np.roll(coords, -1, axis=0)
    d = nxt - coords
    length = np.hypot(d[:, 0], d[:, 1])
    d = d / length[:, None]
    normals = np.stack([-d[:, 1], d[:, 0]], axis=1)  # interior is left of CCW edges
    offsets = normals[:, 0] * coords[:, 0] + normals[:, 1] * coords[:, 1]
    return d, normals, offsets


def bisector(prev_edge: Segment, next_edge: Segment, at: Point) -> Ray:
    """Inward bisector ray at the shared endpoint of two polygon edges.

    The ray direction follows the vertex velocity that keeps the point on
    both inward-moving support lines, so reflex corners get a ray into the
    reflex wedge and collinear edges get the inward perpendicular.
    """
    d1 = prev_edge.direction()
    d2 = next_edge.direction()
    n1 = (-d1.y, d1.x)
    n2 = (-d2.y, d2.x)
    det = n1[0] * n2[1] - n1[1] * n2[0]
    if abs(det) <= _EPS_ANGLE:
        if n1[0] * n2[0] + n1[1] * n2[1] < 0.0:
            raise DegenerateAngle("edges are anti-parallel; bisector undefined")
        return ray(at, Point(n1[0], n1[1]))
    vx = (n2[1] - n1[1]) / det
    vy = (n1[0] - n2[0]) / det
    return ray(at, Point(vx, vy))


class _WV:
    """A wavefront vertex: a point moving linearly, or a pinned ridge point."""

    __slots__ = (
        "px", "py", "t0", "vx", "vy", "ridge", "rdx", "rdy", "left", "right",
        "reflex", "valid", "prev", "next", "ref", "seq", "cands", "cand_i",
    )

    def __init__(self, px, py, t0, left, right, ref, seq):
        self.px = px
        self.py = py
        self.t0 = t0
        self.left = left
        self.right = right
        self.ref = ref
        self.seq = seq
        self.vx = 0.0
        self.vy = 0.0
        self.ridge = False
        self.rdx = 0.0
        self.rdy = 0.0
        self.reflex = False
        self.valid = True
        self.prev: Optional["_WV"] = None
        self.next: Optional["_WV"] = None
        self.cands = None
        self.cand_i = 0

    def pos_at(self, t: float) -> Tuple[float, float]:
        if self.ridge:
            return self.px, self.py
        dt = t - self.t0
        return self.px + dt * self.vx, self.py + dt * self.vy


class _Propagation:
    def __init__(self, poly: SimplePolygon):
        self.poly = poly
        coords = poly.coords()
        self.coords = coords
        self.n = len(coords)
        self.dirs, self.normals, self.offsets = _edge_normals(coords)
        # plain-float copies for scalar hot paths (row indexing numpy is slow)
        self.dx_l = self.dirs[:, 0].tolist()
        self.dy_l = self.dirs[:, 1].tolist()
        self.nx_l = self.normals[:, 0].tolist()
        self.ny_l = self.normals[:, 1].tolist()
        self.off_l = self.offsets.tolist()
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        self.diam = float(math.hypot(*(hi - lo)))
        self.eps_t = 1e-9 * self.diam
        self.eps_pos = max(1e-9 * self.diam, 1e-12)
        # no inscribed disc exceeds half the narrow bbox side
        self.t_cap = 0.5 * float(min(hi[0] - lo[0], hi[1] - lo[1])) + self.eps_pos
        self.bbox_lo = lo - 8.0 * self.eps_pos
        self.bbox_hi = hi + 8.0 * self.eps_pos

        self.heap: List[tuple] = []
        self.seq = 0
        self.nodes: List[Tuple[float, float, float]] = []
        self.arcs: List[Tuple[int, tuple, int, int]] = []
        self.right_sets: Dict[int, set] = {i: set() for i in range(self.n)}
        self.active = 0

    # ------------------------------------------------------------------ setup

    def _next_seq(self) -> int:
        self.seq += 1
        return self.seq

    def _set_motion(self, v: _WV) -> None:
        """Velocity from the two incident inward normals, or ridge geometry."""
        n1x, n1y = self.nx_l[v.left], self.ny_l[v.left]
        n2x, n2y = self.nx_l[v.right], self.ny_l[v.right]
        d1x, d1y = self.dx_l[v.left], self.dy_l[v.left]
        d2x, d2y = self.dx_l[v.right], self.dy_l[v.right]
        det = n1x * n2y - n1y * n2x
        if abs(det) <= _EPS_ANGLE:
            if n1x * n2x + n1y * n2y >= 0.0:
                # collinear continuation: straight-through vertex
                v.vx, v.vy = n1x, n1y
                v.reflex = False
            else:
                v.ridge = True
                rx, ry = d2x - d1x, d2y - d1y
                norm = math.hypot(rx, ry)
                if norm <= _EPS_ANGLE:  # fully degenerate; direction is moot
                    rx, ry, norm = d2x, d2y, 1.0
                v.rdx, v.rdy = rx / norm, ry / norm
                v.reflex = False
            return
        v.vx = (n2y - n1y) / det
        v.vy = (n1x - n2x) / det
        v.reflex = (d1x * d2y - d1y * d2x) < -_EPS_ANGLE

    def _make_vertex(self, px, py, t0, left, right, ref) -> _WV:
        v = _WV(px, py, t0, left, right, ref, self._next_seq())
        self._set_motion(v)
        self.right_sets[right].add(v)
        self.active += 1
        return v

    def _invalidate(self, v: _WV) -> None:
        if v.valid:
            v.valid = False
            self.right_sets[v.right].discard(v)
            self.active -= 1

    # ------------------------------------------------------------------ events

    def _push(self, t, kind, x, y, *payload) -> None:
        heappush(self.heap, (t, kind, x, y, self._next_seq(), payload))

    def _edge_event(self, a: _WV, b: _WV, now: float):
        """Meet time and point of adjacent vertices a, b sharing a.right."""
        eid = a.right
        births = max(a.t0, b.t0)
        if a.ridge and b.ridge:
            dx, dy = b.px - a.px, b.py - a.py
            if (a.rdx * dx + a.rdy * dy) > 0.0 and (b.rdx * dx + b.rdy * dy) < 0.0:
                return births, 0.5 * (a.px + b.px), 0.5 * (a.py + b.py)
            return None
        if a.ridge or b.ridge:
            r, m = (a, b) if a.ridge else (b, a)
            det = m.vx * r.rdy - m.vy * r.rdx
            if abs(det) <= 1e-15:
                return None
            dx, dy = m.px - r.px, m.py - r.py
            s = (m.vx * dy - m.vy * dx) / det
            tau = (r.rdx * dy - r.rdy * dx) / det
            if s < -self.eps_pos or tau < -self.eps_t:
                return None
            t = m.t0 + tau
            if t < births - self.eps_t:
                return None
            return max(t, now), r.px + s * r.rdx, r.py + s * r.rdy
        dx, dy = self.dx_l[eid], self.dy_l[eid]
        sa = dx * a.vx + dy * a.vy
        sb = dx * b.vx + dy * b.vy
        fa0 = dx * a.px + dy * a.py - a.t0 * sa
        fb0 = dx * b.px + dy * b.py - b.t0 * sb
        rate = sb - sa
        gap0 = fb0 - fa0
        if abs(rate) <= 1e-15:
            if abs(gap0 + rate * births) <= self.eps_pos:
                t = births
            else:
                return None
        else:
            t = -gap0 / rate
            if t < births - self.eps_t:
                return None
        t = max(t, now)
        dt = t - a.t0
        return t, a.px + dt * a.vx, a.py + dt * a.vy

    def _queue_edge_event(self, a: _WV, now: float) -> None:
        ev = self._edge_event(a, a.next, now)
        if ev is not None:
            t, x, y = ev
            self._push(t, _EDGE, x, y, a, a.next)

    def _split_candidates(self, v: _WV):
        """All potential split times of reflex vertex v against edge support lines.

        Times are exact per line; whether the line's wavefront actually covers
        the landing point is decided when the event pops. Kept as flat arrays
        sorted by time; `_arm_split` walks them with a cursor.
        """
        N = self.normals
        C = self.offsets
        ndv = N[:, 0] * v.vx + N[:, 1] * v.vy
        denom = ndv - 1.0
        npx = N[:, 0] * v.px + N[:, 1] * v.py
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (C - npx + v.t0 * ndv) / denom
        ok = np.abs(denom) > 1e-12
        ok &= np.isfinite(t)
        ok &= t >= v.t0 - self.eps_t
        ok &= t <= self.t_cap
        ok[v.left] = False
        ok[v.right] = False
        if not ok.any():
            return None
        idx = np.nonzero(ok)[0]
        tt = t[idx]
        order = np.lexsort((idx, tt))
        return tt[order].tolist(), idx[order].tolist()

    def _arm_split(self, v: _WV, now: float) -> None:
        cands = v.cands
        if cands is None:
            return
        ts, eids = cands
        sets = self.right_sets
        i = v.cand_i
        while i < len(ts):
            t = ts[i]
            # an edge with no live wavefront vertex never comes back
            if t >= now - self.eps_t and sets[eids[i]]:
                v.cand_i = i + 1
                dt = t - v.t0
                self._push(max(t, now), _SPLIT, v.px + dt * v.vx,
                           v.py + dt * v.vy, v, eids[i])
                return
            i += 1
        v.cand_i = i

    def _introduce(self, v: _WV, now: float) -> None:
        """Queue the events a freshly created or relinked vertex can cause."""
        if v.reflex:
            v.cands = self._split_candidates(v)
            v.cand_i = 0
            self._arm_split(v, now)

    def _batch_introduce(self, vs: Sequence[_WV], now: float) -> None:
        """Split-candidate scan for many vertices in one matrix pass."""
        refl = [v for v in vs if v.reflex]
        if not refl:
            return
        m = len(refl)
        N, C = self.normals, self.offsets
        P = np.array([(v.px, v.py) for v in refl])
        V = np.array([(v.vx, v.vy) for v in refl])
        T0 = np.array([v.t0 for v in refl])
        ndv = V @ N.T
        denom = ndv - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (C[None, :] - P @ N.T + T0[:, None] * ndv) / denom
        ok = (np.abs(denom) > 1e-12) & np.isfinite(t)
        ok &= t >= (T0[:, None] - self.eps_t)
        ok &= t <= self.t_cap
        for i, v in enumerate(refl):
            ok[i, v.left] = False
            ok[i, v.right] = False
        rows, cols = np.nonzero(ok)
        if len(rows) == 0:
            return
        tt = t[rows, cols]
        order = np.lexsort((cols, tt, rows))
        rows = rows[order]
        tt_l = tt[order].tolist()
        eid_l = cols[order].tolist()
        bounds = np.searchsorted(rows, np.arange(m + 1))
        for i, v in enumerate(refl):
            a, b = int(bounds[i]), int(bounds[i + 1])
            if a == b:
                continue
            v.cands = (tt_l[a:b], eid_l[a:b])
            v.cand_i = 0
            self._arm_split(v, now)

    def _next_split_now(self, v: _WV, now: float):
        """Next candidate at the current instant, bypassing the queue.

        After a failed validation every same-time candidate can be retried
        immediately; later ones go back through the queue via `_arm_split`.
        """
        cands = v.cands
        if cands is None:
            return None
        ts, eids = cands
        sets = self.right_sets
        i = v.cand_i
        while i < len(ts):
            t = ts[i]
            if t >= now - self.eps_t and sets[eids[i]]:
                if t <= now + self.eps_t:
                    v.cand_i = i + 1
                    dt = t - v.t0
                    return v.px + dt * v.vx, v.py + dt * v.vy, eids[i]
                break
            i += 1
        v.cand_i = i
        self._arm_split(v, now)
        return None

    # ------------------------------------------------------------- propagation

    def _emit_arc(self, node_id: int, v: _WV) -> None:
        self.arcs.append((node_id, v.ref, v.left, v.right))

    def _loop_len(self, v: _WV, cap: int) -> int:
        count = 1
        w = v.next
        while w is not v and count <= cap:
            count += 1
            w = w.next
        return count

    def _retire_pair(self, node_id: int, a: _WV, b: _WV) -> None:
        """Close a two-vertex loop: link its end node to the older vertex."""
        other = b if a.ref == ("N", node_id) else a
        self.arcs.append((node_id, other.ref, other.left, other.right))
        self._invalidate(a)
        self._invalidate(b)

    def _handle_edge(self, a: _WV, b: _WV, x: float, y: float, t: float) -> None:
        node_id = len(self.nodes)
        self.nodes.append((x, y, t))
        if a.prev is b.next:  # triangle: the whole loop meets at one point
            c = b.next
            for w in (a, b, c):
                self._emit_arc(node_id, w)
                self._invalidate(w)
            return
        self._emit_arc(node_id, a)
        self._emit_arc(node_id, b)
        w = self._make_vertex(x, y, t, a.left, b.right, ("N", node_id))
        w.prev = a.prev
        w.next = b.next
        a.prev.next = w
        b.next.prev = w
        self._invalidate(a)
        self._invalidate(b)
        self._queue_edge_event(w.prev, t)
        self._queue_edge_event(w, t)
        self._introduce(w, t)

    def _find_split_target(self, v: _WV, eid: int, x: float, y: float, t: float):
        dx, dy = self.dx_l[eid], self.dy_l[eid]
        sx = dx * x + dy * y
        tol = 4.0 * self.eps_pos + 1e-9
        best = None
        for w in self.right_sets[eid]:
            if not w.valid or w is v or w.next is v or w.next is None:
                continue
            ax, ay = w.pos_at(t)
            bx, by = w.next.pos_at(t)
            lo = dx * ax + dy * ay
            hi = dx * bx + dy * by
            if lo - tol <= sx <= hi + tol and (best is None or w.seq < best.seq):
                best = w
        return best

    def _handle_split(self, v: _WV, eid: int, x: float, y: float, t: float) -> None:
        while True:
            w = self._find_split_target(v, eid, x, y, t)
            if w is not None:
                break
            nxt = self._next_split_now(v, t)
            if nxt is None:
                return
            x, y, eid = nxt
        node_id = len(self.nodes)
        self.nodes.append((x, y, t))
        self._emit_arc(node_id, v)
        v1 = self._make_vertex(x, y, t, v.left, eid, ("N", node_id))
        v2 = self._make_vertex(x, y, t, eid, v.right, ("N", node_id))
        xv = w.next
        v1.prev = v.prev
        v1.next = xv
        v.prev.next = v1
        xv.prev = v1
        v2.prev = w
        v2.next = v.next
        w.next = v2
        v2.next.prev = v2
        self._invalidate(v)
        for nv in (v1, v2):
            size = self._loop_len(nv, self.active + 2)
            if size < 3:
                self._retire_pair(node_id, nv, nv.next)
                continue
            self._queue_edge_event(nv.prev, t)
            self._queue_edge_event(nv, t)
            self._introduce(nv, t)

    def run(self) -> Tuple[List[Tuple[float, float, float]], List[tuple]]:
        n = self.n
        verts = [
            self._make_vertex(
                float(self.coords[i, 0]), float(self.coords[i, 1]), 0.0,
                (i - 1) % n, i, ("B", i),
            )
            for i in range(n)
        ]
        for i, v in enumerate(verts):
            v.prev = verts[(i - 1) % n]
            v.next = verts[(i + 1) % n]
        events = []
        for v in verts:
            ev = self._edge_event(v, v.next, 0.0)
            if ev is not None:
                t, x, y = ev
                events.append((t, _EDGE, x, y, self._next_seq(), (v, v.next)))
        self.heap = events
        heapify(self.heap)
        self._batch_introduce(verts, 0.0)

        budget = 64 * n + 4 * sum(len(v.cands[0]) for v in verts if v.cands) + 1024
        while self.heap and self.active > 0:
            budget -= 1
            if budget < 0:
                raise NumericalCollapse("event budget exhausted; degenerate polygon")
            t, kind, x, y, _, payload = heappop(self.heap)
            if kind == _EDGE:
                a, b = payload
                if not (a.valid and b.valid and a.next is b):
                    continue
                self._handle_edge(a, b, x, y, t)
            else:
                v, eid = payload
                if not v.valid:
                    continue
                self._handle_split(v, eid, x, y, t)
        if self.active > 0:
            raise NumericalCollapse("wavefront failed to close")
        return self.nodes, self.arcs


def _merge_nodes(
    nodes: List[Tuple[float, float, float]], eps: float
) -> Tuple[List[Tuple[float, float, float]], List[int]]:
    """Single-link clustering of coincident event nodes.

    Simultaneous events meeting at one point (a square's four-way centre)
    produce several raw nodes there; merging them yields one multi-way
    skeleton vertex and removes zero-length arcs. An x-sweep keeps this
    near-linear: eps is tiny, so almost no pairs are compared.
    """
    k = len(nodes)
    parent = list(range(k))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if k > 1:
        order = sorted(range(k), key=lambda i: nodes[i][0])
        for a in range(k - 1):
            i = order[a]
            xi, yi = nodes[i][0], nodes[i][1]
            for b in range(a + 1, k):
                j = order[b]
                dx = nodes[j][0] - xi
                if dx > eps:
                    break
                dy = nodes[j][1] - yi
                if dx * dx + dy * dy <= eps * eps:
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)
    clusters: Dict[int, List[int]] = {}
    for i in range(k):
        clusters.setdefault(find(i), []).append(i)
    remap = [0] * k
    merged: List[Tuple[float, float, float]] = []
    for root in sorted(clusters):
        members = clusters[root]
        cid = len(merged)
        for m in members:
            remap[m] = cid
        xs = [nodes[m][0] for m in members]
        ys = [nodes[m][1] for m in members]
        ts = [nodes[m][2] for m in members]
        merged.append((sum(xs) / len(xs), sum(ys) / len(ys), sum(ts) / len(ts)))
    return merged, remap


def extract_straight_skeleton(poly: SimplePolygon) -> StraightSkeleton:
    """Extract the straight skeleton of a CCW simple polygon."""
    prop = _Propagation(poly)
    raw_nodes, raw_arcs = prop.run()
    eps = max(1e-9 * prop.diam, 1e-12)
    nodes, remap = _merge_nodes(raw_nodes, eps)
    n = prop.n

    vertices: List[SSVertex] = [
        SSVertex(i, poly.vertices[i], 0.0, SSVertexKind.BORDER) for i in range(n)
    ]
    defining: List[set] = [set() for _ in nodes]
    edge_map: Dict[Tuple[str, int, int], Tuple[int, int, SSEdgeKind, set]] = {}
    for node_id, ref, left, right in raw_arcs:
        src = remap[node_id]
        if ref[0] == "B":
            key = ("P", src, ref[1])
            a, b, kind = n + src, ref[1], SSEdgeKind.PERIPHERAL
        else:
            dst = remap[ref[1]]
            if dst == src:
                defining[src].update((left, right))
                continue
            lo, hi = min(src, dst), max(src, dst)
            key = ("S", lo, hi)
            a, b, kind = n + lo, n + hi, SSEdgeKind.SKELETON
            defining[dst].update((left, right))
        defining[src].update((left, right))
        if key in edge_map:
            edge_map[key][3].update((left, right))
        else:
            edge_map[key] = (a, b, kind, {left, right})

    for j, (x, y, t) in enumerate(nodes):
        vertices.append(
            SSVertex(n + j, Point(x, y), t, SSVertexKind.SKELETON,
                     tuple(sorted(defining[j])))
        )
    edges: List[SSEdge] = [
        SSEdge(i, (i + 1) % n, SSEdgeKind.BORDER, (i,)) for i in range(n)
    ]
    for key in sorted(edge_map, key=lambda k: (k[0], k[1], k[2])):
        a, b, kind, sides = edge_map[key]
        edges.append(SSEdge(a, b, kind, tuple(sorted(sides))))
    return StraightSkeleton(vertices, edges, poly)


def offset_wavefront(ss: StraightSkeleton, t: float) -> List[Segment]:
    """Reconstruct the inward offset curve at time t from the skeleton.

    Each non-border arc is crossed at most once by the offset front because
    offset time varies linearly along it. Within the face of one border
    edge the front is a straight piece between its two crossings.
    """
    n = len(ss.source.vertices)
    times = [v.time for v in ss.vertices]
    pos = [v.position for v in ss.vertices]
    by_side: Dict[int, List[Point]] = {}
    for e in ss.edges:
        if e.kind is SSEdgeKind.BORDER:
            continue
        ta, tb = times[e.a], times[e.b]
        lo, hi = (e.a, e.b) if ta <= tb else (e.b, e.a)
        tlo, thi = min(ta, tb), max(ta, tb)
        if not (tlo <= t < thi):
            continue
        frac = 0.0 if thi == tlo else (t - tlo) / (thi - tlo)
        x = pos[lo].x + frac * (pos[hi].x - pos[lo].x)
        y = pos[lo].y + frac * (pos[hi].y - pos[lo].y)
        for side in e.sides:
            by_side.setdefault(side, []).append(Point(x, y))
    segments: List[Segment] = []
    for side in sorted(by_side):
        pts = by_side[side]
        if len(pts) == 2:
            segments.append(Segment(pts[0], pts[1]))
        elif len(pts) > 2:
            d = ss.source.edge(side).direction()
            pts = sorted(pts, key=lambda p: p.x * d.x + p.y * d.y)
            for k in range(0, len(pts) - 1, 2):
                segments.append(Segment(pts[k], pts[k + 1]))
    return segments
