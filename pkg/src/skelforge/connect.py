"""Sub-skeleton connection: capsule shape proxies, intersection tests and
attachment of a child skeleton to a parent skeleton."""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import SliceMiss
from .geom import EPS_GEOM, Point, line_polygon_hits
from .skeleton import JointKind, Skeleton
from .stroke import SimplePolygon


class AttachCase(Enum):
    PERPENDICULAR = "perpendicular"
    ENDPOINT = "endpoint"


@dataclass
class CapsuleApprox:
    """Discs at joints plus tapered capsules along bones.

    Bone radii interpolate linearly between the end-joint radii, so the
    proxy is fully determined by joint positions and radii.
    """

    discs: List[Tuple[Point, float]]
    capsules: List[Tuple[Point, Point, float, float]]

    @classmethod
    def from_skeleton(cls, skel: Skeleton) -> "CapsuleApprox":
        discs = [(skel.joints[j].position, skel.joints[j].radius)
                 for j in skel.joint_ids()]
        capsules = []
        for a, b in skel.bones():
            ja, jb = skel.joints[a], skel.joints[b]
            capsules.append((ja.position, jb.position, ja.radius, jb.radius))
        return cls(discs, capsules)

    def contains(self, p: Point) -> bool:
        """Point inside any disc or tapered capsule; boundary counts inside."""
        for c, r in self.discs:
            if math.hypot(p.x - c.x, p.y - c.y) <= r:
                return True
        for a, b, ra, rb in self.capsules:
            dx, dy = b.x - a.x, b.y - a.y
            dd = dx * dx + dy * dy
            if dd <= 0.0:
                continue
            t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / dd
            t = min(1.0, max(0.0, t))
            dist = math.hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy))
            if dist <= ra + t * (rb - ra):
                return True
        return False


def _slice_radius(position: Point, direction: Tuple[float, float],
                  coords: np.ndarray) -> float:
    """Mean distance to the two boundary hits of a perpendicular slice."""
    dx, dy = direction
    n = math.hypot(dx, dy)
    if n <= EPS_GEOM:
        raise SliceMiss("slice direction degenerate")
    normal = Point(-dy / n, dx / n)
    hits = line_polygon_hits(position, normal, coords)
    pos = hits[hits > EPS_GEOM]
    neg = hits[hits < -EPS_GEOM]
    if len(pos) == 0 or len(neg) == 0:
        raise SliceMiss("joint slice found no boundary hit; joint outside shape")
    return 0.5 * (float(pos.min()) + float(-neg.max()))


def _ray_cast_radius(position: Point, coords: np.ndarray, n_rays: int = 36) -> float:
    """Mean first-hit distance over evenly spread directions (lone joints)."""
    total = 0.0
    count = 0
    for k in range(n_rays):
        ang = 2.0 * math.pi * k / n_rays
        along = Point(math.cos(ang), math.sin(ang))
        hits = line_polygon_hits(position, along, coords)
        pos = hits[hits > EPS_GEOM]
        if len(pos) == 0:
            raise SliceMiss("lone joint outside shape")
        total += float(pos.min())
        count += 1
    return total / count


def _batched_slice_radii(positions, directions, coords: np.ndarray) -> np.ndarray:
    """Mean two-sided hit distance for many (position, direction) slices."""
    a = coords
    b = np.roll(coords, -1, axis=0)
    ex = (b[:, 0] - a[:, 0])[None, :]
    ey = (b[:, 1] - a[:, 1])[None, :]
    P = np.asarray(positions, dtype=float)
    D = np.asarray(directions, dtype=float)
    norms = np.hypot(D[:, 0], D[:, 1])
    if (norms <= EPS_GEOM).any():
        raise SliceMiss("slice direction degenerate")
    # slice line runs perpendicular to the given direction
    dx = (-D[:, 1] / norms)[:, None]
    dy = (D[:, 0] / norms)[:, None]
    denom = dx * ey - dy * ex
    ok = np.abs(denom) > EPS_GEOM
    denom = np.where(ok, denom, 1.0)
    qpx = a[None, :, 0] - P[:, 0][:, None]
    qpy = a[None, :, 1] - P[:, 1][:, None]
    t = (qpx * ey - qpy * ex) / denom
    u = (qpx * dy - qpy * dx) / denom
    hit = ok & (u >= -EPS_GEOM) & (u < 1.0 - EPS_GEOM)
    pos = np.where(hit & (t > EPS_GEOM), t, np.inf).min(axis=1)
    neg = np.where(hit & (t < -EPS_GEOM), t, -np.inf).max(axis=1)
    if not (np.isfinite(pos).all() and np.isfinite(neg).all()):
        raise SliceMiss("joint slice found no boundary hit; joint outside shape")
    return 0.5 * (pos - neg)


def compute_joint_radii(skel: Skeleton, poly: SimplePolygon) -> Skeleton:
    """Fill joint radii by slicing the polygon at each joint.

    Terminals slice perpendicular to their bone, sleeves perpendicular to
    the averaged direction of their two bones, junctions take the mean
    radius over one slice per incident bone. A lone joint averages ray
    casts in 36 directions instead. All slices run in one batched pass.
    """
    out = skel.copy()
    coords = poly.coords()
    positions = []
    directions = []
    owners: List[int] = []
    for jid in out.joint_ids():
        j = out.joints[jid]
        nbrs = out.neighbors(jid)
        p = j.position
        if not nbrs:
            j.radius = _ray_cast_radius(p, coords)
            continue
        if len(nbrs) == 1:
            q = out.joints[nbrs[0]].position
            dirs = [(q.x - p.x, q.y - p.y)]
        elif len(nbrs) == 2:
            q0 = out.joints[nbrs[0]].position
            q1 = out.joints[nbrs[1]].position
            d0 = _unit(p.x - q0.x, p.y - q0.y)
            d1 = _unit(q1.x - p.x, q1.y - p.y)
            t = (d0[0] + d1[0], d0[1] + d1[1])
            if math.hypot(*t) <= EPS_GEOM:
                t = (q1.x - p.x, q1.y - p.y)
            dirs = [t]
        else:
            dirs = []
            for nb in nbrs:
                q = out.joints[nb].position
                dirs.append((q.x - p.x, q.y - p.y))
        for d in dirs:
            positions.append((p.x, p.y))
            directions.append(d)
            owners.append(jid)
    if owners:
        radii = _batched_slice_radii(positions, directions, coords)
        sums: Dict[int, float] = {}
        counts: Dict[int, int] = {}
        for jid, r in zip(owners, radii):
            sums[jid] = sums.get(jid, 0.0) + float(r)
            counts[jid] = counts.get(jid, 0) + 1
        for jid in sums:
            out.joints[jid].radius = sums[jid] / counts[jid]
    return out


def _unit(x: float, y: float) -> Tuple[float, float]:
    n = math.hypot(x, y)
    if n <= EPS_GEOM:
        return (0.0, 0.0)
    return (x / n, y / n)


def bone_joint_distance(v_i: Point, v_j: Point, v_k: Point) -> Tuple[float, AttachCase]:
    """Distance from joint v_k to bone (v_i, v_j) with its influence-region case.

    Inside the slab between the two perpendiculars at the bone ends the
    perpendicular distance applies; outside, the nearest end joint. A dot
    product of exactly zero counts as inside the slab.
    """
    ex, ey = v_j.x - v_i.x, v_j.y - v_i.y
    kx, ky = v_k.x - v_i.x, v_k.y - v_i.y
    lx, ly = v_k.x - v_j.x, v_k.y - v_j.y
    if (ex * kx + ey * ky) >= 0.0 and (-ex * lx - ey * ly) >= 0.0:
        blen = math.hypot(ex, ey)
        if blen <= EPS_GEOM:
            return math.hypot(kx, ky), AttachCase.ENDPOINT
        return abs(ex * ky - ey * kx) / blen, AttachCase.PERPENDICULAR
    return min(math.hypot(kx, ky), math.hypot(lx, ly)), AttachCase.ENDPOINT


def candidate_joints(skel: Skeleton) -> List[int]:
    """Terminal and junction joints in id order; sleeves never attach."""
    return [j for j in skel.joint_ids()
            if skel.kind(j) in (JointKind.TERMINAL, JointKind.JUNCTION)]


def parts_intersect(parent: CapsuleApprox, child_skel: Skeleton) -> Optional[int]:
    """First child candidate joint inside the parent's capsule region."""
    for j in candidate_joints(child_skel):
        if parent.contains(child_skel.joints[j].position):
            return j
    return None


@dataclass
class AttachChoice:
    """Best child-joint to parent-bone pairing by attach distance."""

    child_joint: int
    case: AttachCase
    bone: Optional[Tuple[int, int]]  # parent bone, None when parent has no bones
    parent_joint: Optional[int]      # end joint for ENDPOINT attachments
    foot: Point                      # split point or parent joint position
    distance: float


def attach_choice(parent_skel: Skeleton, child_skel: Skeleton) -> Optional[AttachChoice]:
    """Minimum attach-distance pair over child candidates and parent bones.

    Perpendicular feet within geometric tolerance of a bone end demote to
    an endpoint connection so no zero-length bone can appear. Ties keep
    the earliest candidate and bone in id order.
    """
    bones = parent_skel.bones()
    best: Optional[AttachChoice] = None
    for cj in candidate_joints(child_skel):
        ck = child_skel.joints[cj].position
        if not bones:
            for pj in parent_skel.joint_ids():
                pp = parent_skel.joints[pj].position
                d = math.hypot(ck.x - pp.x, ck.y - pp.y)
                if best is None or d < best.distance:
                    best = AttachChoice(cj, AttachCase.ENDPOINT, None, pj, pp, d)
            continue
        for a, b in bones:
            pa = parent_skel.joints[a].position
            pb = parent_skel.joints[b].position
            d, case = bone_joint_distance(pa, pb, ck)
            if best is not None and d >= best.distance:
                continue
            if case is AttachCase.PERPENDICULAR:
                ex, ey = pb.x - pa.x, pb.y - pa.y
                bl2 = ex * ex + ey * ey
                t = ((ck.x - pa.x) * ex + (ck.y - pa.y) * ey) / bl2
                foot = Point(pa.x + t * ex, pa.y + t * ey)
                blen = math.sqrt(bl2)
                if t * blen <= EPS_GEOM:
                    best = AttachChoice(cj, AttachCase.ENDPOINT, (a, b), a, pa, d)
                elif (1.0 - t) * blen <= EPS_GEOM:
                    best = AttachChoice(cj, AttachCase.ENDPOINT, (a, b), b, pb, d)
                else:
                    best = AttachChoice(cj, AttachCase.PERPENDICULAR, (a, b), None, foot, d)
            else:
                da = math.hypot(ck.x - pa.x, ck.y - pa.y)
                db = math.hypot(ck.x - pb.x, ck.y - pb.y)
                pj, pp = (a, pa) if da <= db else (b, pb)
                best = AttachChoice(cj, AttachCase.ENDPOINT, (a, b), pj, pp, d)
    return best


@dataclass
class AttachResult:
    choice: AttachChoice
    combined: Skeleton
    child_ids: Dict[int, int]        # child joint id -> id in combined skeleton
    new_parent_joint: Optional[int]  # joint created by a bone split


def attach(parent_skel: Skeleton, child_skel: Skeleton) -> AttachResult:
    """Merge a child skeleton into the parent at the best attach pair.

    A perpendicular case splits the parent bone at the foot (one new
    joint, the bone becomes two) and links the foot to the child joint;
    an endpoint case links the nearest parent end joint directly. The
    combined skeleton stays acyclic because the two inputs are disjoint
    trees joined by exactly one new path.
    """
    choice = attach_choice(parent_skel, child_skel)
    if choice is None:
        raise ValueError("child skeleton has no candidate joints")
    combined = parent_skel.copy()
    new_joint: Optional[int] = None
    if choice.case is AttachCase.PERPENDICULAR:
        a, b = choice.bone
        ja, jb = combined.joints[a], combined.joints[b]
        blen = math.hypot(jb.position.x - ja.position.x, jb.position.y - ja.position.y)
        t = (math.hypot(choice.foot.x - ja.position.x, choice.foot.y - ja.position.y)
             / blen) if blen > 0 else 0.0
        radius = ja.radius + t * (jb.radius - ja.radius)
        combined.remove_bone(a, b)
        new_joint = combined.add_joint(choice.foot, radius=radius, part=ja.part)
        combined.add_bone(a, new_joint)
        combined.add_bone(new_joint, b)
        anchor = new_joint
    else:
        anchor = choice.parent_joint
    child_ids: Dict[int, int] = {}
    for j in child_skel.joint_ids():
        cj = child_skel.joints[j]
        child_ids[j] = combined.add_joint(cj.position, cj.radius, part=cj.part)
    for a, b in child_skel.bones():
        combined.add_bone(child_ids[a], child_ids[b])
    combined.add_bone(anchor, child_ids[choice.child_joint])
    return AttachResult(choice, combined, child_ids, new_joint)
