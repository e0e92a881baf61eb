import math

import numpy as np
import pytest

from skelforge.fixtures import gen_star_polygon, wavefront_oracle
from skelforge.geom import Point
from skelforge.skeleton import (JointKind, Skeleton, branches,
                                collapse_short_edges, from_straight_skeleton)
from skelforge.straight_skeleton import extract_straight_skeleton


def chain_skeleton(xs):
    """Straight chain of joints on the x axis at the given abscissae."""
    sk = Skeleton()
    ids = [sk.add_joint(Point(float(x), 0.0)) for x in xs]
    for a, b in zip(ids, ids[1:]):
        sk.add_bone(a, b)
    return sk, ids


def y_skeleton():
    sk = Skeleton()
    c = sk.add_joint(Point(0, 0))
    legs = []
    for ang in (0.0, 2.1, 4.2):
        mid = sk.add_joint(Point(10 * math.cos(ang), 10 * math.sin(ang)))
        tip = sk.add_joint(Point(20 * math.cos(ang), 20 * math.sin(ang)))
        sk.add_bone(c, mid)
        sk.add_bone(mid, tip)
        legs.append((mid, tip))
    return sk, c, legs


class TestFromStraightSkeleton:
    def test_rectangle(self, rect_8x4):
        skel = from_straight_skeleton(extract_straight_skeleton(rect_8x4))
        assert len(skel.joints) == 2
        assert skel.n_bones() == 1
        (a, b), = skel.bones()
        assert skel.bone_length(a, b) == pytest.approx(4.0, abs=1e-9)

    def test_square_single_joint(self, square_4):
        skel = from_straight_skeleton(extract_straight_skeleton(square_4))
        assert len(skel.joints) == 1 and skel.n_bones() == 0
        only = next(iter(skel.joints))
        assert skel.kind(only) is JointKind.TERMINAL

    def test_l_shape_counts_match_oracle(self, l_shape):
        oracle = wavefront_oracle(l_shape)
        skel = from_straight_skeleton(extract_straight_skeleton(l_shape))
        interior_arcs = [a for a in oracle.arcs if a[1][0] == "N"]
        assert len(skel.joints) == len(oracle.nodes)
        assert skel.n_bones() == len(interior_arcs)

    @pytest.mark.parametrize("seed", range(6))
    def test_random_is_tree(self, seed):
        poly = gen_star_polygon(seed + 90, 6 + seed * 2)
        skel = from_straight_skeleton(extract_straight_skeleton(poly))
        assert skel.is_forest()
        assert len(skel.components()) == 1


class TestCollapseShortEdges:
    def test_two_bone_rule(self):
        sk, ids = chain_skeleton([0, 1, 10])
        out = collapse_short_edges(sk, 0.5)
        assert out.n_bones() == 1

    def test_equal_lengths_untouched(self):
        sk, _ = chain_skeleton([0, 5, 10, 15])
        out = collapse_short_edges(sk, 0.5)
        assert out.n_bones() == 3

    def test_cascade_frozen_replay(self):
        # lengths [1, 1, 10]: collapse 1 -> [1.5, 10] -> collapse -> [10.75]
        sk, _ = chain_skeleton([0, 1, 2, 12])
        out = collapse_short_edges(sk, 0.5)
        assert out.n_bones() == 1
        xs = sorted(j.position.x for j in out.joints.values())
        assert xs == pytest.approx([1.25, 12.0])

    def test_never_disconnects_or_cycles(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            sk = Skeleton()
            ids = [sk.add_joint(Point(*rng.uniform(-50, 50, 2)))]
            for _ in range(14):
                parent = int(rng.integers(0, len(ids)))
                ids.append(sk.add_joint(Point(*rng.uniform(-50, 50, 2))))
                sk.add_bone(ids[parent], ids[-1])
            out = collapse_short_edges(sk, 0.5)
            assert out.is_forest()
            assert len(out.components()) == 1

    def test_fixpoint(self):
        sk, _ = chain_skeleton([0, 1, 2, 4, 30])
        out = collapse_short_edges(sk, 0.5)
        bones = out.bones()
        lengths = [out.bone_length(*b) for b in bones]
        if len(lengths) >= 2:
            threshold = 0.5 * sum(lengths) / len(lengths)
            assert min(lengths) >= threshold


class TestBranches:
    def test_path_is_single_branch(self):
        sk, ids = chain_skeleton([0, 1, 2, 3, 4])
        out = branches(sk)
        assert len(out) == 1
        assert out[0].joints in (tuple(ids), tuple(reversed(ids)))

    def test_y_shape_three_branches(self):
        sk, c, legs = y_skeleton()
        out = branches(sk)
        assert len(out) == 3
        for br in out:
            assert sk.kind(br.joints[0]) is not JointKind.SLEEVE
            assert sk.kind(br.joints[-1]) is not JointKind.SLEEVE
            for j in br.joints[1:-1]:
                assert sk.kind(j) is JointKind.SLEEVE

    def test_partition_property_random_tree(self):
        rng = np.random.default_rng(77)
        sk = Skeleton()
        ids = [sk.add_joint(Point(*rng.uniform(-100, 100, 2)))]
        for _ in range(19):
            parent = int(rng.integers(0, len(ids)))
            ids.append(sk.add_joint(Point(*rng.uniform(-100, 100, 2))))
            sk.add_bone(ids[parent], ids[-1])
        out = branches(sk)
        covered = []
        for br in out:
            for a, b in zip(br.joints, br.joints[1:]):
                covered.append((min(a, b), max(a, b)))
        assert sorted(covered) == sorted(sk.bones())
        assert len(covered) == 19


def test_json_roundtrip():
    sk, _ = chain_skeleton([0, 3, 9])
    doc = sk.to_json()
    back = Skeleton.from_json(doc)
    assert back.to_json() == doc
