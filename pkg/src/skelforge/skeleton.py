"""Animatable joint/bone graph: conversion from straight skeletons, cleanup,
joint taxonomy and branch decomposition."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

from .errors import EmptySkeleton
from .geom import Point
from .straight_skeleton import SSVertexKind, StraightSkeleton

log = logging.getLogger(__name__)


class JointKind(Enum):
    TERMINAL = "terminal"
    SLEEVE = "sleeve"
    JUNCTION = "junction"


@dataclass
class Joint:
    id: int
    position: Point
    radius: float = 0.0
    # part that produced the joint; filled at scene assembly, -1 otherwise
    part: int = -1


@dataclass(frozen=True)
class Branch:
    """Maximal joint path whose interior joints are all sleeves."""

    joints: Tuple[int, ...]


class Skeleton:
    """Forest of joints and bones with derived degree taxonomy.

    Operations never mutate their input; callers that want in-place editing
    work on a private copy.
    """

    def __init__(self) -> None:
        self.joints: Dict[int, Joint] = {}
        self._adj: Dict[int, Set[int]] = {}
        self._next_id = 0

    # ------------------------------------------------------------- structure

    def add_joint(self, position: Point, radius: float = 0.0,
                  id: Optional[int] = None, part: int = -1) -> int:
        jid = self._next_id if id is None else id
        if jid in self.joints:
            raise ValueError(f"joint id {jid} already present")
        self.joints[jid] = Joint(jid, Point(position[0], position[1]), radius, part)
        self._adj[jid] = set()
        self._next_id = max(self._next_id, jid + 1)
        return jid

    def add_bone(self, a: int, b: int) -> None:
        if a == b:
            raise ValueError("bone endpoints must differ")
        if a not in self.joints or b not in self.joints:
            raise KeyError("bone references unknown joint")
        self._adj[a].add(b)
        self._adj[b].add(a)

    def remove_bone(self, a: int, b: int) -> None:
        self._adj[a].discard(b)
        self._adj[b].discard(a)

    def remove_joint(self, jid: int) -> None:
        for other in list(self._adj[jid]):
            self.remove_bone(jid, other)
        del self._adj[jid]
        del self.joints[jid]

    def copy(self) -> "Skeleton":
        out = Skeleton()
        out.joints = {j: Joint(v.id, v.position, v.radius, v.part)
                      for j, v in self.joints.items()}
        out._adj = {j: set(s) for j, s in self._adj.items()}
        out._next_id = self._next_id
        return out

    # --------------------------------------------------------------- queries

    def joint_ids(self) -> List[int]:
        return sorted(self.joints)

    def neighbors(self, jid: int) -> List[int]:
        return sorted(self._adj[jid])

    def degree(self, jid: int) -> int:
        return len(self._adj[jid])

    def kind(self, jid: int) -> JointKind:
        d = self.degree(jid)
        if d >= 3:
            return JointKind.JUNCTION
        if d == 2:
            return JointKind.SLEEVE
        return JointKind.TERMINAL

    def bones(self) -> List[Tuple[int, int]]:
        out = []
        for a in sorted(self._adj):
            for b in self._adj[a]:
                if a < b:
                    out.append((a, b))
        return out

    def bone_length(self, a: int, b: int) -> float:
        pa, pb = self.joints[a].position, self.joints[b].position
        return math.hypot(pb.x - pa.x, pb.y - pa.y)

    def n_bones(self) -> int:
        return sum(len(s) for s in self._adj.values()) // 2

    def components(self) -> List[Set[int]]:
        seen: Set[int] = set()
        comps: List[Set[int]] = []
        for start in sorted(self._adj):
            if start in seen:
                continue
            comp = {start}
            stack = [start]
            while stack:
                j = stack.pop()
                for k in self._adj[j]:
                    if k not in comp:
                        comp.add(k)
                        stack.append(k)
            seen |= comp
            comps.append(comp)
        return comps

    def is_forest(self) -> bool:
        return self.n_bones() == len(self.joints) - len(self.components())

    # ---------------------------------------------------------- persistence

    def to_json(self) -> dict:
        return {
            "joints": [
                {"id": j.id, "x": j.position.x, "y": j.position.y, "radius": j.radius}
                for j in (self.joints[i] for i in self.joint_ids())
            ],
            "bones": [list(b) for b in self.bones()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Skeleton":
        out = cls()
        for j in data["joints"]:
            out.add_joint(Point(j["x"], j["y"]), j.get("radius", 0.0), id=j["id"])
        for a, b in data["bones"]:
            out.add_bone(a, b)
        return out


def from_straight_skeleton(ss: StraightSkeleton) -> Skeleton:
    """Promote the interior vertices and edges of a straight skeleton.

    Peripheral and border edges are dropped; the interior edges of a simple
    polygon's straight skeleton form a tree, which is verified defensively.
    """
    skel = Skeleton()
    mapping: Dict[int, int] = {}
    for v in ss.vertices:
        if v.kind is SSVertexKind.SKELETON:
            mapping[v.id] = skel.add_joint(v.position)
    if not mapping:
        raise EmptySkeleton("straight skeleton has no interior vertices")
    for e in ss.skeleton_edges():
        skel.add_bone(mapping[e.a], mapping[e.b])
    if not skel.is_forest():
        _break_cycles(skel)
    return skel


def _break_cycles(skel: Skeleton) -> None:
    """Drop the longest bone of each cycle; a numeric-degeneracy safety net."""
    while not skel.is_forest():
        cycle = _find_cycle(skel)
        if cycle is None:
            return
        worst = max(cycle, key=lambda ab: (skel.bone_length(*ab), ab))
        log.warning("cycle in straight-skeleton output; dropping bone %s", worst)
        skel.remove_bone(*worst)


def _find_cycle(skel: Skeleton) -> Optional[List[Tuple[int, int]]]:
    seen: Set[int] = set()
    for start in skel.joint_ids():
        if start in seen:
            continue
        parent: Dict[int, Optional[int]] = {start: None}
        stack = [start]
        while stack:
            j = stack.pop()
            seen.add(j)
            for k in skel.neighbors(j):
                if k == parent[j]:
                    continue
                if k in parent:
                    # walk both ends up to the common ancestor
                    path_j, node = [], j
                    while node is not None:
                        path_j.append(node)
                        node = parent[node]
                    path_k, node = [], k
                    while node is not None:
                        path_k.append(node)
                        node = parent[node]
                    common = next(x for x in path_j if x in set(path_k))
                    loop = path_j[: path_j.index(common) + 1]
                    loop += list(reversed(path_k[: path_k.index(common)]))
                    edges = [(loop[i], loop[i + 1]) for i in range(len(loop) - 1)]
                    edges.append((k, j))
                    return [(min(a, b), max(a, b)) for a, b in edges]
                parent[k] = j
                stack.append(k)
    return None


def collapse_short_edges(skel: Skeleton, factor: float = 0.5) -> Skeleton:
    """Iteratively collapse the shortest bone under factor * mean bone length.

    The merged joint sits at the midpoint of the collapsed bone and the
    threshold is recomputed after every collapse; a skeleton whose bones are
    all equal is left untouched. Lengths are tracked incrementally: a merge
    only disturbs bones at the merged joint.
    """
    from heapq import heapify, heappop, heappush

    out = skel.copy()
    lengths = {b: out.bone_length(*b) for b in out.bones()}
    total = sum(lengths.values())
    heap = [(ln, b) for b, ln in lengths.items()]
    heapify(heap)
    while len(lengths) >= 2:
        threshold = factor * (total / len(lengths))
        while heap:
            ln, bone = heap[0]
            if bone in lengths and lengths[bone] == ln:
                break
            heappop(heap)  # stale entry
        if not heap or heap[0][0] >= threshold:
            return out
        _, (a, b) = heappop(heap)
        touched = {(min(a, n), max(a, n)) for n in out.neighbors(a)}
        touched |= {(min(b, n), max(b, n)) for n in out.neighbors(b)}
        for key in touched:
            if key in lengths:
                total -= lengths.pop(key)
        keep = _merge_pair(out, a, b)
        for n in out.neighbors(keep):
            key = (min(keep, n), max(keep, n))
            ln = out.bone_length(keep, n)
            lengths[key] = ln
            total += ln
            heappush(heap, (ln, key))
    return out


def _merge_pair(skel: Skeleton, a: int, b: int) -> int:
    """Contract bone (a, b) into joint min(a, b) at the segment midpoint."""
    keep, drop = (a, b) if a < b else (b, a)
    pa, pb = skel.joints[a].position, skel.joints[b].position
    mid = Point(0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y))
    jk, jd = skel.joints[keep], skel.joints[drop]
    jk.position = mid
    jk.radius = 0.5 * (jk.radius + jd.radius)
    for other in list(skel.neighbors(drop)):
        if other != keep:
            skel.add_bone(keep, other)
    skel.remove_joint(drop)
    return keep


def branches(skel: Skeleton) -> List[Branch]:
    """Decompose a forest into maximal sleeve-interior paths.

    Every bone belongs to exactly one branch; ends are terminal or junction
    joints. Isolated joints yield no branch.
    """
    out: List[Branch] = []
    seen_bones: Set[Tuple[int, int]] = set()
    anchors = [j for j in skel.joint_ids() if skel.degree(j) != 2 and skel.degree(j) > 0]
    for start in anchors:
        for nxt in skel.neighbors(start):
            key = (min(start, nxt), max(start, nxt))
            if key in seen_bones:
                continue
            path = [start, nxt]
            seen_bones.add(key)
            while skel.degree(path[-1]) == 2:
                a, b = skel.neighbors(path[-1])
                step = b if a == path[-2] else a
                seen_bones.add((min(path[-1], step), max(path[-1], step)))
                path.append(step)
            out.append(Branch(tuple(path)))
    # a pure cycle of sleeves cannot appear in a forest, so every bone is
    # reachable from an anchor; a two-sleeve ring would be the only escape
    out.sort(key=lambda br: (br.joints[0], br.joints[-1], br.joints))
    # drop the duplicate orientation of junction-to-junction paths found twice
    unique: Dict[Tuple[int, ...], Branch] = {}
    for br in out:
        key = tuple(sorted((br.joints[0], br.joints[-1]))) + tuple(sorted(br.joints))
        if key not in unique:
            unique[key] = br
    return sorted(unique.values(), key=lambda br: (br.joints[0], br.joints[-1], br.joints))


def branch_length(skel: Skeleton, br: Branch) -> float:
    total = 0.0
    for a, b in zip(br.joints, br.joints[1:]):
        total += skel.bone_length(a, b)
    return total


def branch_points(skel: Skeleton, br: Branch) -> List[Point]:
    return [skel.joints[j].position for j in br.joints]
