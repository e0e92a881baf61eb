"""Global skeleton refinement: branch simplification, junction merging,
short-branch pruning and internal-edge collapsing under three-tier scoping."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Set, Tuple

from .bounded_dp import BoundedDPConfig, bounded_dp, replace_branch, simplify_branches
from .geom import Point
from .skeleton import Branch, JointKind, Skeleton, _merge_pair, branch_length, branches
from .stroke import SimplePolygon


class ScopeLevel(Enum):
    BRANCH = "branch"
    SUBPART = "subpart"
    GLOBAL = "global"


@dataclass(frozen=True)
class Scope:
    level: ScopeLevel = ScopeLevel.GLOBAL
    target: Optional[int] = None  # branch index or part id

    @classmethod
    def global_(cls) -> "Scope":
        return cls(ScopeLevel.GLOBAL)

    @classmethod
    def subpart(cls, part: int) -> "Scope":
        return cls(ScopeLevel.SUBPART, part)

    @classmethod
    def branch(cls, index: int) -> "Scope":
        return cls(ScopeLevel.BRANCH, index)


@dataclass
class RefineConfig:
    eps_s: float = 5.0
    eps_m: float = 30.0
    eps_t: float = 30.0
    eps_c: float = 10.0

    def __post_init__(self) -> None:
        for name in ("eps_s", "eps_m", "eps_t", "eps_c"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


def _joint_filter(skel: Skeleton, scope: Scope) -> Callable[[int], bool]:
    if scope.level is ScopeLevel.SUBPART:
        pid = scope.target
        return lambda j: skel.joints[j].part == pid
    return lambda j: True


# ----------------------------------------------------------------- simplify

def _same_part_subpaths(skel: Skeleton, br: Branch) -> List[Tuple[int, Tuple[int, ...]]]:
    """Split a branch path into maximal runs of joints from one part.

    A run shorter than 2 joints cannot be simplified. The part id of the
    run keys the polygon used as its bound.
    """
    runs: List[Tuple[int, Tuple[int, ...]]] = []
    cur: List[int] = []
    cur_part: Optional[int] = None
    for j in br.joints:
        p = skel.joints[j].part
        if cur and p == cur_part:
            cur.append(j)
        else:
            if len(cur) >= 2:
                runs.append((cur_part, tuple(cur)))
            cur = [j]
            cur_part = p
    if len(cur) >= 2:
        runs.append((cur_part, tuple(cur)))
    return runs


def simplify_branch(skel: Skeleton, br: Branch,
                    polygons: Mapping[int, SimplePolygon], eps_s: float,
                    base: BoundedDPConfig = BoundedDPConfig(),
                    mean_bone: Optional[float] = None) -> Skeleton:
    """Replace the branch with its shape-bounded simplification.

    Each maximal same-part run of the branch is simplified against that
    part's outline; run endpoints, and with them every junction
    attachment, stay fixed. Parts without a known outline pass through.
    """
    if eps_s <= 0.0:
        return skel
    out = skel
    for part, run in _same_part_subpaths(skel, br):
        poly = polygons.get(part)
        if poly is None or len(run) < 2:
            continue
        cfg = replace(base, eps0=eps_s)
        sub = Branch(run)
        polyline = bounded_dp(sub, out, poly, cfg, mean_bone)
        if len(polyline) != len(run):
            out = replace_branch(out, sub, polyline)
    return out


# -------------------------------------------------------------------- merge

def _tree_of(skel: Skeleton, j: int, comp_cache: Dict[int, int]) -> int:
    return comp_cache[j]


def _component_ids(skel: Skeleton) -> Dict[int, int]:
    comp: Dict[int, int] = {}
    for i, c in enumerate(skel.components()):
        for j in c:
            comp[j] = i
    return comp


def _junction_clusters(skel: Skeleton, eps_m: float,
                       ok: Callable[[int], bool]) -> List[List[int]]:
    """Connected components of the junction proximity graph, per tree.

    Junction pairs closer than eps_m chain transitively; pairs in
    different trees never cluster, so merging cannot join components.
    """
    junctions = [j for j in skel.joint_ids()
                 if skel.kind(j) is JointKind.JUNCTION and ok(j)]
    if len(junctions) < 2:
        return []
    comp = _component_ids(skel)
    parent = {j: j for j in junctions}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(junctions):
        pa = skel.joints[a].position
        for b in junctions[i + 1:]:
            if comp[a] != comp[b]:
                continue
            pb = skel.joints[b].position
            if math.hypot(pb.x - pa.x, pb.y - pa.y) < eps_m:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: Dict[int, List[int]] = {}
    for j in junctions:
        groups.setdefault(find(j), []).append(j)
    return sorted([sorted(g) for g in groups.values() if len(g) >= 2])


def _spanning_subtree(skel: Skeleton, members: Sequence[int]) -> Set[int]:
    """All joints on tree paths between the members (the members included)."""
    root = members[0]
    parent: Dict[int, Optional[int]] = {root: None}
    stack = [root]
    while stack:
        j = stack.pop()
        for k in skel.neighbors(j):
            if k not in parent:
                parent[k] = j
                stack.append(k)
    keep: Set[int] = {root}
    for m in members[1:]:
        node = m
        while node not in keep:
            keep.add(node)
            node = parent[node]
    return keep


def merge_joints(skel: Skeleton, eps_m: float,
                 scope: Scope = Scope.global_()) -> Skeleton:
    """Merge each junction cluster into one joint at the cluster centroid.

    The whole subtree spanned between cluster members contracts, so the
    result stays a forest. Runs to a fixpoint: merged joints that fall
    into a fresh cluster merge again, making a second call a no-op.
    """
    if eps_m <= 0.0:
        return skel
    out = skel.copy()
    ok = _joint_filter(out, scope)
    guard = len(out.joints) + 2
    while guard > 0:
        guard -= 1
        clusters = _junction_clusters(out, eps_m, ok)
        if not clusters:
            return out
        members = clusters[0]
        nodes = _spanning_subtree(out, members)
        cx = sum(out.joints[j].position.x for j in members) / len(members)
        cy = sum(out.joints[j].position.y for j in members) / len(members)
        radius = sum(out.joints[j].radius for j in members) / len(members)
        keep = min(nodes)
        kj = out.joints[keep]
        kj.position = Point(cx, cy)
        kj.radius = radius
        for j in sorted(nodes):
            if j == keep:
                continue
            for nb in list(out.neighbors(j)):
                if nb not in nodes and nb != keep:
                    out.add_bone(keep, nb)
            out.remove_joint(j)
        ok = _joint_filter(out, scope)
    return out


# -------------------------------------------------------------------- prune

def _jt_branches(skel: Skeleton, ok: Callable[[int], bool]) -> List[Tuple[float, int, Branch]]:
    """Prunable junction-to-terminal branches with their arclength.

    The junction end survives pruning, so only the joints to be deleted
    must pass the scope filter.
    """
    out = []
    for br in branches(skel):
        a, b = br.joints[0], br.joints[-1]
        ka, kb = skel.kind(a), skel.kind(b)
        if {ka, kb} != {JointKind.JUNCTION, JointKind.TERMINAL}:
            continue
        terminal_first = ka is JointKind.TERMINAL
        doomed = br.joints[:-1] if terminal_first else br.joints[1:]
        if not all(ok(j) for j in doomed):
            continue
        term = br.joints[0] if terminal_first else br.joints[-1]
        out.append((branch_length(skel, br), term, br))
    return out


def prune_branches(skel: Skeleton, eps_t: float,
                   scope: Scope = Scope.global_()) -> Skeleton:
    """Remove junction-terminal branches shorter than eps_t, repeatedly.

    Deletion stops at (and excludes) the junction; shortest first with
    recomputation, because removing one stub can retag its junction and
    fuse the surviving branches into longer ones.
    """
    if eps_t <= 0.0:
        return skel
    out = skel.copy()
    guard = out.n_bones() + 2
    while guard > 0:
        guard -= 1
        ok = _joint_filter(out, scope)
        prunable = [(ln, term, br) for ln, term, br in _jt_branches(out, ok)
                    if ln < eps_t]
        if not prunable:
            return out
        prunable.sort(key=lambda item: (item[0], item[1]))
        _, _, br = prunable[0]
        junction_end = br.joints[-1] if out.kind(br.joints[-1]) is JointKind.JUNCTION \
            else br.joints[0]
        for j in br.joints:
            if j != junction_end:
                out.remove_joint(j)
    return out


# ----------------------------------------------------------------- collapse

def collapse_edges(skel: Skeleton, eps_c: float,
                   scope: Scope = Scope.global_()) -> Skeleton:
    """Collapse short bones between internal joints to their midpoints.

    Terminal-incident bones never collapse. Shortest first, recomputing
    after every merge, until no internal bone is below the threshold.
    """
    if eps_c <= 0.0:
        return skel
    out = skel.copy()
    guard = out.n_bones() + 2
    while guard > 0:
        guard -= 1
        ok = _joint_filter(out, scope)
        eligible = [
            (out.bone_length(a, b), (a, b))
            for a, b in out.bones()
            if out.degree(a) >= 2 and out.degree(b) >= 2 and ok(a) and ok(b)
            and out.bone_length(a, b) < eps_c
        ]
        if not eligible:
            return out
        eligible.sort()
        _merge_pair(out, *eligible[0][1])
    return out


# ------------------------------------------------------------------- refine

def refine(skel: Skeleton, config: RefineConfig,
           scope: Scope = Scope.global_(),
           polygons: Mapping[int, SimplePolygon] = {},
           base: BoundedDPConfig = BoundedDPConfig()) -> Skeleton:
    """Apply simplify, merge, prune and collapse in order within the scope.

    Branch scope runs only the simplification of the addressed branch;
    subpart and global scopes run all four operations. Every operation is
    a fixpoint of itself, which makes a second identical call a no-op.
    """
    out = skel
    if scope.level is ScopeLevel.BRANCH:
        all_branches = branches(out)
        if scope.target is not None and 0 <= scope.target < len(all_branches):
            out = simplify_branch(out, all_branches[scope.target], polygons,
                                  config.eps_s, base)
        return out
    if scope.level is ScopeLevel.SUBPART:
        scoped_polys = {p: poly for p, poly in polygons.items() if p == scope.target}
    else:
        scoped_polys = dict(polygons)
    all_bones = out.bones()
    mean_bone = (sum(out.bone_length(*b) for b in all_bones) / len(all_bones)
                 if all_bones else 0.0)
    if config.eps_s > 0.0:
        jobs = []
        for br in branches(out):
            for part, run in _same_part_subpaths(out, br):
                poly = scoped_polys.get(part)
                if poly is not None and len(run) >= 2:
                    jobs.append((Branch(run), poly))
        cfg = replace(base, eps0=config.eps_s)
        out = simplify_branches(out, jobs, cfg, mean_bone)
    out = merge_joints(out, config.eps_m, scope)
    out = prune_branches(out, config.eps_t, scope)
    out = collapse_edges(out, config.eps_c, scope)
    return out
