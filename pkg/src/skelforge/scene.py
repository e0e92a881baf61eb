"""Scene document model: ordered subparts with transforms, per-part
skeletons, hierarchy deduction, global skeleton assembly and persistence."""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from .bounded_dp import BoundedDPConfig, simplify_branches
from .connect import (AttachCase, AttachChoice, CapsuleApprox, attach_choice,
                      compute_joint_radii, parts_intersect)
from .errors import MalformedDocument, SchemaVersionMismatch, UnknownPart
from .geom import Point
from .refine import RefineConfig, Scope, refine
from .skeleton import Skeleton, branches, collapse_short_edges, from_straight_skeleton
from .straight_skeleton import extract_straight_skeleton
from .stroke import RawStroke, SimplePolygon, acquire_polygon

SCHEMA_VERSION = "skelforge/1"


@dataclass(frozen=True)
class Transform:
    """Rigid 2D placement with uniform scale (invertible: scale > 0)."""

    tx: float = 0.0
    ty: float = 0.0
    rot: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.scale <= 0.0:
            raise ValueError("transform scale must be positive")

    def apply(self, p: Point) -> Point:
        c, s = math.cos(self.rot), math.sin(self.rot)
        x = self.scale * (c * p.x - s * p.y) + self.tx
        y = self.scale * (s * p.x + c * p.y) + self.ty
        return Point(x, y)

    def inverse_apply(self, p: Point) -> Point:
        c, s = math.cos(self.rot), math.sin(self.rot)
        x = (p.x - self.tx) / self.scale
        y = (p.y - self.ty) / self.scale
        return Point(c * x + s * y, -s * x + c * y)

    def apply_polygon(self, poly: SimplePolygon) -> SimplePolygon:
        # similarity transforms preserve simplicity and orientation
        return SimplePolygon([self.apply(p) for p in poly.vertices], _validate=False)

    def apply_skeleton(self, skel: Skeleton) -> Skeleton:
        out = skel.copy()
        for j in out.joints.values():
            j.position = self.apply(j.position)
            j.radius *= self.scale
        return out


@dataclass
class SceneConfig:
    step: float = 10.0
    eps_poly: float = 3.0
    alpha_s: float = 1.0
    eps0_factor: float = 0.5
    alpha: float = 0.8
    eps_s: float = 5.0
    eps_m: float = 30.0
    eps_t: float = 30.0
    eps_c: float = 10.0

    def bounded(self) -> BoundedDPConfig:
        return BoundedDPConfig(alpha_s=self.alpha_s, eps0_factor=self.eps0_factor,
                               alpha=self.alpha)

    def refinement(self) -> RefineConfig:
        return RefineConfig(self.eps_s, self.eps_m, self.eps_t, self.eps_c)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in (
            "step", "eps_poly", "alpha_s", "eps0_factor", "alpha",
            "eps_s", "eps_m", "eps_t", "eps_c")}

    @classmethod
    def from_json(cls, data: dict) -> "SceneConfig":
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass
class Subpart:
    id: int
    seq: int
    polygon: SimplePolygon          # local frame
    transform: Transform
    skeleton: Skeleton              # local frame, radii filled
    # straight-skeleton segments (local frame) kept for debug overlays
    debug_sskel: List[Tuple[float, float, float, float]] = field(default_factory=list)

    def world_polygon(self) -> SimplePolygon:
        return self.transform.apply_polygon(self.polygon)

    def world_skeleton(self) -> Skeleton:
        skel = self.transform.apply_skeleton(self.skeleton)
        for j in skel.joints.values():
            j.part = self.id
        return skel


@dataclass
class HierarchyEdge:
    """Attachment of a child part to an earlier parent part.

    Geometry is stored in the parent's local frame so the edge survives
    parent moves without recomputation.
    """

    parent: int
    child: int
    kind: str                          # "bone_split" | "joint_connect"
    bone: Optional[Tuple[int, int]]    # parent-local bone for bone splits
    point: Optional[Point]             # parent-local split point
    joint: Optional[int]               # parent-local joint for joint connects
    child_joint: int                   # child-local candidate joint


class Scene:
    """One editable document: parts in modeling order plus derived data."""

    def __init__(self, config: Optional[SceneConfig] = None):
        self.config = config or SceneConfig()
        self.parts: Dict[int, Subpart] = {}
        self.hierarchy: Dict[int, HierarchyEdge] = {}
        self.scope: Scope = Scope.global_()
        self.last_timings: Dict[str, int] = {}
        self._cache: Optional[Skeleton] = None
        self._next_id = 0

    # ------------------------------------------------------------- mutation

    def add_part(self, stroke: RawStroke,
                 transform: Transform = Transform()) -> int:
        """Full pipeline for one drawn part; records per-stage timings."""
        t0 = time.perf_counter_ns()
        poly = acquire_polygon(stroke, self.config.step, self.config.eps_poly)
        t1 = time.perf_counter_ns()
        return self._add_polygon_part(poly, transform, t1 - t0)

    def add_part_from_polygon(self, poly: SimplePolygon,
                              transform: Transform = Transform()) -> int:
        return self._add_polygon_part(poly, transform, 0)

    def _add_polygon_part(self, poly: SimplePolygon, transform: Transform,
                          t_polygon_ns: int) -> int:
        t1 = time.perf_counter_ns()
        ss = extract_straight_skeleton(poly)
        t2 = time.perf_counter_ns()
        skel = collapse_short_edges(from_straight_skeleton(ss))
        t3 = time.perf_counter_ns()
        cfg = self.config.bounded()
        all_bones = skel.bones()
        mean_bone = (sum(skel.bone_length(*b) for b in all_bones) / len(all_bones)
                     if all_bones else 0.0)
        skel = simplify_branches(skel, [(br, poly) for br in branches(skel)],
                                 cfg, mean_bone)
        t4 = time.perf_counter_ns()
        skel = compute_joint_radii(skel, poly)
        debug = []
        positions = {v.id: v.position for v in ss.vertices}
        for e in ss.edges:
            if e.kind.value != "border":
                a, b = positions[e.a], positions[e.b]
                debug.append((a.x, a.y, b.x, b.y))
        pid = self._next_id
        self._next_id += 1
        self.parts[pid] = Subpart(pid, pid, poly, transform, skel, debug)
        self._relink(pid)
        t5 = time.perf_counter_ns()
        self.last_timings = {
            "t_polygon": t_polygon_ns // 1000,
            "t_sskel": (t2 - t1) // 1000,
            "t_clean": (t3 - t2) // 1000,
            "t_boundeddp": (t4 - t3) // 1000,
            "t_connect": (t5 - t4) // 1000,
            "t_refine": 0,
        }
        self._cache = None
        return pid

    def move_part(self, pid: int, transform: Transform) -> None:
        """Replace a part's placement and recompute only its own hierarchy edge."""
        if pid not in self.parts:
            raise UnknownPart(f"no part {pid}")
        t0 = time.perf_counter_ns()
        self.parts[pid].transform = transform
        self._relink(pid)
        self.last_timings = {"t_connect": (time.perf_counter_ns() - t0) // 1000}
        self._cache = None

    def set_config(self, **kwargs: float) -> None:
        self.config = replace(self.config, **kwargs)
        self._cache = None

    def set_scope(self, scope: Scope) -> None:
        self.scope = scope
        self._cache = None

    # ------------------------------------------------------------ hierarchy

    def _relink(self, pid: int) -> None:
        """Recompute the hierarchy edge of one part against earlier parts."""
        part = self.parts[pid]
        child_world = part.world_skeleton()
        best: Optional[Tuple[float, int, AttachChoice]] = None
        for other_id in sorted(self.parts):
            other = self.parts[other_id]
            if other.seq >= part.seq:
                continue
            parent_world = other.world_skeleton()
            capsule = CapsuleApprox.from_skeleton(parent_world)
            if parts_intersect(capsule, child_world) is None:
                continue
            choice = attach_choice(parent_world, child_world)
            if choice is None:
                continue
            if best is None or choice.distance < best[0]:
                best = (choice.distance, other_id, choice)
        if best is None:
            self.hierarchy.pop(pid, None)
            return
        _, parent_id, choice = best
        parent = self.parts[parent_id]
        if choice.case is AttachCase.PERPENDICULAR:
            edge = HierarchyEdge(
                parent_id, pid, "bone_split", choice.bone,
                parent.transform.inverse_apply(choice.foot), None, choice.child_joint)
        else:
            edge = HierarchyEdge(
                parent_id, pid, "joint_connect", None, None,
                choice.parent_joint, choice.child_joint)
        self.hierarchy[pid] = edge

    def reassign_hierarchy(self) -> None:
        """Recompute every part's edge against earlier parts, in order.

        The incremental updates in add_part/move_part keep the hierarchy
        current; this full pass re-derives it from scratch, for example
        after editing parts through the document API.
        """
        self.hierarchy.clear()
        for pid in sorted(self.parts):
            self._relink(pid)
        self._cache = None

    # -------------------------------------------------------------- assembly

    def global_skeleton(self) -> Skeleton:
        if self._cache is None:
            t0 = time.perf_counter_ns()
            self._cache = self.assemble_global_skeleton()
            self.last_timings["t_refine"] = (time.perf_counter_ns() - t0) // 1000
        return self._cache

    def assemble_global_skeleton(self) -> Skeleton:
        """World-frame forest: transform, attach in modeling order, refine.

        Purely derived from (parts, hierarchy, config, scope); two calls
        produce identical output.
        """
        world = Skeleton()
        id_map: Dict[int, Dict[int, int]] = {}
        # bone lineage: global bone -> (part, part-local bone) it derives from
        lineage: Dict[Tuple[int, int], Tuple[int, Tuple[int, int]]] = {}
        for pid in sorted(self.parts):
            part = self.parts[pid]
            pskel = part.world_skeleton()
            id_map[pid] = {}
            for j in pskel.joint_ids():
                src = pskel.joints[j]
                gid = world.add_joint(src.position, src.radius, part=pid)
                id_map[pid][j] = gid
            for a, b in pskel.bones():
                ga, gb = id_map[pid][a], id_map[pid][b]
                world.add_bone(ga, gb)
                lineage[_bkey(ga, gb)] = (pid, (a, b))
            edge = self.hierarchy.get(pid)
            if edge is not None:
                self._apply_edge(world, id_map, lineage, edge)
        polygons = {pid: p.world_polygon() for pid, p in self.parts.items()}
        return refine(world, self.config.refinement(), self.scope, polygons,
                      self.config.bounded())

    def _apply_edge(self, world: Skeleton, id_map, lineage, edge: HierarchyEdge) -> None:
        child_gid = id_map[edge.child][edge.child_joint]
        parent = self.parts[edge.parent]
        if edge.kind == "joint_connect":
            anchor = id_map[edge.parent][edge.joint]
            world.add_bone(anchor, child_gid)
            return
        foot = parent.transform.apply(edge.point)
        target = self._find_derived_bone(world, lineage, edge.parent, edge.bone, foot)
        ga, gb = target
        ja, jb = world.joints[ga], world.joints[gb]
        ax, ay = ja.position
        bx, by = jb.position
        blen2 = (bx - ax) ** 2 + (by - ay) ** 2
        t = 0.0 if blen2 == 0 else ((foot.x - ax) * (bx - ax) + (foot.y - ay) * (by - ay)) / blen2
        t = min(1.0, max(0.0, t))
        radius = ja.radius + t * (jb.radius - ja.radius)
        world.remove_bone(ga, gb)
        src = lineage.pop(_bkey(ga, gb))
        anchor = world.add_joint(foot, radius=radius, part=edge.parent)
        world.add_bone(ga, anchor)
        world.add_bone(anchor, gb)
        lineage[_bkey(ga, anchor)] = src
        lineage[_bkey(anchor, gb)] = src
        world.add_bone(anchor, child_gid)

    def _find_derived_bone(self, world: Skeleton, lineage, parent_id: int,
                           local_bone: Tuple[int, int], foot: Point) -> Tuple[int, int]:
        """Global bone descended from a stored parent-local bone containing foot."""
        a, b = local_bone
        want = (parent_id, (min(a, b), max(a, b)))
        best, best_d = None, float("inf")
        for key, src in lineage.items():
            if src != want:
                continue
            ga, gb = key
            pa, pb = world.joints[ga].position, world.joints[gb].position
            dx, dy = pb.x - pa.x, pb.y - pa.y
            dd = dx * dx + dy * dy
            t = 0.0 if dd == 0 else ((foot.x - pa.x) * dx + (foot.y - pa.y) * dy) / dd
            tc = min(1.0, max(0.0, t))
            d = math.hypot(foot.x - (pa.x + tc * dx), foot.y - (pa.y + tc * dy))
            if d < best_d:
                best, best_d = key, d
        if best is None:
            raise UnknownPart(f"hierarchy references missing bone {local_bone} of part {parent_id}")
        return best

    # ---------------------------------------------------------- persistence

    def to_json(self) -> dict:
        return {
            "version": SCHEMA_VERSION,
            "config": self.config.to_json(),
            "parts": [
                {
                    "id": p.id,
                    "seq": p.seq,
                    "transform": {"tx": p.transform.tx, "ty": p.transform.ty,
                                  "rot": p.transform.rot, "scale": p.transform.scale},
                    "polygon": [[v.x, v.y] for v in p.polygon.vertices],
                    "skeleton": p.skeleton.to_json(),
                }
                for p in (self.parts[i] for i in sorted(self.parts))
            ],
            "hierarchy": [
                {
                    "parent": e.parent,
                    "child": e.child,
                    "attach": _attach_json(e),
                    "child_joint": e.child_joint,
                }
                for e in (self.hierarchy[c] for c in sorted(self.hierarchy))
            ],
        }

    def save(self) -> bytes:
        return (json.dumps(self.to_json(), separators=(",", ":"),
                           sort_keys=False) + "\n").encode()

    @classmethod
    def from_json(cls, doc: dict) -> "Scene":
        version = doc.get("version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionMismatch(f"unsupported document version {version!r}")
        try:
            scene = cls(SceneConfig.from_json(doc.get("config", {})))
            for p in doc["parts"]:
                tr = p["transform"]
                part = Subpart(
                    int(p["id"]), int(p["seq"]),
                    SimplePolygon([Point(x, y) for x, y in p["polygon"]]),
                    Transform(tr["tx"], tr["ty"], tr["rot"], tr["scale"]),
                    Skeleton.from_json(p["skeleton"]),
                )
                scene.parts[part.id] = part
                scene._next_id = max(scene._next_id, part.id + 1)
            for e in doc.get("hierarchy", []):
                at = e["attach"]
                kind = at["type"]
                edge = HierarchyEdge(
                    int(e["parent"]), int(e["child"]), kind,
                    tuple(at["bone"]) if at.get("bone") is not None else None,
                    Point(*at["point"]) if at.get("point") is not None else None,
                    int(at["joint"]) if at.get("joint") is not None else None,
                    int(e["child_joint"]),
                )
                scene.hierarchy[edge.child] = edge
            return scene
        except (KeyError, TypeError, ValueError) as ex:
            raise MalformedDocument(str(ex)) from ex

    @classmethod
    def load(cls, data: bytes) -> "Scene":
        try:
            doc = json.loads(data.decode())
        except (UnicodeDecodeError, json.JSONDecodeError) as ex:
            raise MalformedDocument(str(ex)) from ex
        if not isinstance(doc, dict):
            raise MalformedDocument("document root must be an object")
        return cls.from_json(doc)


def _bkey(a: int, b: int) -> Tuple[int, int]:
    return (a, b) if a < b else (b, a)


def _attach_json(e: HierarchyEdge) -> dict:
    out: dict = {"type": e.kind}
    if e.bone is not None:
        out["bone"] = list(e.bone)
    if e.point is not None:
        out["point"] = [e.point.x, e.point.y]
    if e.joint is not None:
        out["joint"] = e.joint
    return out
