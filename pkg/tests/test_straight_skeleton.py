import math
import xml.etree.ElementTree as ET

import pytest

from skelforge.errors import DegenerateAngle
from skelforge.fixtures import compare_with_oracle, gen_star_polygon, wavefront_oracle
from skelforge.geom import Point, Segment, point_in_polygon
from skelforge.straight_skeleton import (SSEdgeKind, bisector,
                                         extract_straight_skeleton,
                                         offset_wavefront, _edge_normals)
from skelforge.svg import straight_skeleton_svg


class TestBisector:
    def test_right_angle(self):
        r = bisector(Segment(Point(0, 0), Point(4, 0)),
                     Segment(Point(4, 0), Point(4, 4)), Point(4, 0))
        assert r.direction.x == pytest.approx(-math.sqrt(2) / 2)
        assert r.direction.y == pytest.approx(math.sqrt(2) / 2)

    def test_straight_through_is_perpendicular(self):
        r = bisector(Segment(Point(0, 0), Point(2, 0)),
                     Segment(Point(2, 0), Point(5, 0)), Point(2, 0))
        assert (r.direction.x, r.direction.y) == pytest.approx((0.0, 1.0))

    def test_reflex_points_into_wedge_and_is_equidistant(self):
        # interior corner of the L-shape: support lines y=2 and x=2
        prev_edge = Segment(Point(6, 2), Point(2, 2))
        next_edge = Segment(Point(2, 2), Point(2, 6))
        r = bisector(prev_edge, next_edge, Point(2, 2))
        assert r.direction.x < 0 and r.direction.y < 0
        for rad in (0.5, 1.0, 2.0):
            p = Point(2 + rad * r.direction.x, 2 + rad * r.direction.y)
            d_prev = abs(p.y - 2)
            d_next = abs(p.x - 2)
            assert d_prev == pytest.approx(d_next, abs=1e-12)

    def test_antiparallel_rejected(self):
        with pytest.raises(DegenerateAngle):
            bisector(Segment(Point(0, 0), Point(4, 0)),
                     Segment(Point(4, 0), Point(0, 0)), Point(4, 0))


class TestAnalyticShapes:
    def test_rectangle(self, rect_8x4):
        ss = extract_straight_skeleton(rect_8x4)
        nodes = sorted(ss.skeleton_vertices(), key=lambda v: v.position.x)
        assert len(nodes) == 2
        assert nodes[0].position == pytest.approx((2.0, 2.0), abs=1e-9)
        assert nodes[1].position == pytest.approx((6.0, 2.0), abs=1e-9)
        assert nodes[0].time == pytest.approx(2.0, abs=1e-9)
        assert nodes[1].time == pytest.approx(2.0, abs=1e-9)
        skel_edges = ss.skeleton_edges()
        assert len(skel_edges) == 1
        a = ss.vertices[skel_edges[0].a].position
        b = ss.vertices[skel_edges[0].b].position
        assert math.hypot(b.x - a.x, b.y - a.y) == pytest.approx(4.0, abs=1e-9)
        assert len(ss.peripheral_edges()) == 4

    def test_square_four_way_vertex(self, square_4):
        ss = extract_straight_skeleton(square_4)
        nodes = ss.skeleton_vertices()
        assert len(nodes) == 1
        assert nodes[0].position == pytest.approx((2.0, 2.0), abs=1e-9)
        assert nodes[0].time == pytest.approx(2.0, abs=1e-9)
        assert len(ss.skeleton_edges()) == 0
        assert len(ss.peripheral_edges()) == 4

    def test_l_shape_matches_oracle(self, l_shape):
        oracle = wavefront_oracle(l_shape)
        assert oracle.split_events == 1
        ss = extract_straight_skeleton(l_shape)
        assert compare_with_oracle(ss, oracle, 1e-3 * l_shape.diameter()) is None
        got = sorted((round(v.position.x, 6), round(v.position.y, 6))
                     for v in ss.skeleton_vertices())
        assert got == [(1.0, 1.0), (1.0, 5.0), (5.0, 1.0)]


class TestInvariants:
    @pytest.mark.parametrize("seed", range(0, 40, 4))
    def test_random_polygons(self, seed):
        poly = gen_star_polygon(seed, 5 + (seed * 3) % 24)
        ss = extract_straight_skeleton(poly)
        diam = poly.diameter()
        _, normals, offsets = _edge_normals(poly.coords())
        for v in ss.skeleton_vertices():
            assert v.time > 0
            assert len(v.defining_edges) >= 3
            for e in v.defining_edges:
                dist = (normals[e, 0] * v.position.x
                        + normals[e, 1] * v.position.y - offsets[e])
                assert abs(dist - v.time) <= 1e-6 * diam
            assert point_in_polygon(v.position, poly.vertices, 1e-9 * diam)
        for e in ss.edges:
            if e.kind is SSEdgeKind.BORDER:
                continue
            a = ss.vertices[e.a].position
            b = ss.vertices[e.b].position
            mid = Point(0.5 * (a.x + b.x), 0.5 * (a.y + b.y))
            assert point_in_polygon(mid, poly.vertices, 1e-6 * diam)
        # one face per border edge: Euler with F = n + 1 (outer included)
        V, E, F = len(ss.vertices), len(ss.edges), len(poly.vertices) + 1
        assert V - E + F == 2
        assert len(ss.peripheral_edges()) == len(poly.vertices)

    @pytest.mark.parametrize("seed", range(0, 24, 3))
    def test_oracle_equivalence_small(self, seed):
        poly = gen_star_polygon(seed + 500, 4 + seed % 13)
        ss = extract_straight_skeleton(poly)
        oracle = wavefront_oracle(poly)
        assert compare_with_oracle(ss, oracle, 1e-3 * poly.diameter()) is None


def test_offset_wavefront_rectangle(rect_8x4):
    ss = extract_straight_skeleton(rect_8x4)
    segs = offset_wavefront(ss, 1.0)
    # the offset front at t=1 is the 6x2 rectangle
    pts = [p for s in segs for p in (s.a, s.b)]
    xs = sorted({round(p.x, 6) for p in pts})
    ys = sorted({round(p.y, 6) for p in pts})
    assert xs == [1.0, 7.0] and ys == [1.0, 3.0]
    total = sum(math.hypot(s.b.x - s.a.x, s.b.y - s.a.y) for s in segs)
    assert total == pytest.approx(16.0, abs=1e-6)


def test_debug_svg_structure(l_shape):
    ss = extract_straight_skeleton(l_shape)
    doc = straight_skeleton_svg(ss, wavefront_times=[0.5])
    root = ET.fromstring(doc)
    ns = "{http://www.w3.org/2000/svg}"
    lines = root.findall(f".//{ns}line")
    greens = [l for l in lines if l.get("stroke") == "green"]
    reds = [l for l in lines if l.get("stroke") == "red"]
    assert greens and reds
    assert root.findall(f".//{ns}path")
