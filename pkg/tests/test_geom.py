import math

import numpy as np
import pytest

from skelforge.geom import (Orientation, Point, Segment, line_polygon_hits,
                            orientation, point_in_polygon,
                            point_to_segment_distance, ray, segment_intersect)

from conftest import random_points


def test_orientation_basic():
    assert orientation(Point(0, 0), Point(1, 0), Point(0, 1)) is Orientation.CCW
    assert orientation(Point(0, 0), Point(1, 0), Point(2, 0)) is Orientation.COLLINEAR
    assert orientation(Point(0, 0), Point(0, 1), Point(1, 0)) is Orientation.CW


def test_orientation_antisymmetric():
    pts = random_points(11, 300)
    flip = {Orientation.CCW: Orientation.CW, Orientation.CW: Orientation.CCW,
            Orientation.COLLINEAR: Orientation.COLLINEAR}
    for a, b, c in zip(pts[0::3], pts[1::3], pts[2::3]):
        o = orientation(a, b, c)
        assert orientation(b, a, c) is flip[o]
        assert orientation(a, c, b) is flip[o]
        assert orientation(c, b, a) is flip[o]


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point(float("nan"), 0.0)
    with pytest.raises(ValueError):
        Point(0.0, float("inf"))


def test_segment_intersect_basic():
    hit = segment_intersect(Segment(Point(0, 0), Point(2, 0)),
                            Segment(Point(1, -1), Point(1, 1)))
    assert hit == Point(1, 0)
    assert segment_intersect(Segment(Point(0, 0), Point(1, 0)),
                             Segment(Point(2, 0), Point(3, 0))) is None
    touch = segment_intersect(Segment(Point(0, 0), Point(1, 1)),
                              Segment(Point(1, 1), Point(2, 0)))
    assert touch == Point(1, 1)


def test_segment_intersect_symmetric():
    pts = random_points(23, 400, span=50.0)
    for a, b, c, d in zip(pts[0::4], pts[1::4], pts[2::4], pts[3::4]):
        s1, s2 = Segment(a, b), Segment(c, d)
        h1 = segment_intersect(s1, s2)
        h2 = segment_intersect(s2, s1)
        assert (h1 is None) == (h2 is None)
        if h1 is not None:
            assert math.hypot(h1.x - h2.x, h1.y - h2.y) < 1e-7


def test_point_to_segment_distance_cases():
    s = Segment(Point(0, 0), Point(4, 0))
    assert point_to_segment_distance(Point(2, 3), s) == pytest.approx(3)
    assert point_to_segment_distance(Point(6, 0), s) == pytest.approx(2)
    assert point_to_segment_distance(Point(-1, 1), s) == pytest.approx(math.sqrt(2))


def test_point_to_segment_distance_against_sampling():
    # unit-scale pairs: with 10001 samples the chord quantization error is
    # (len/2e4)^2 / (2 d), below 1e-6 once the point keeps a little distance
    rng = np.random.default_rng(7)
    t = np.linspace(0.0, 1.0, 10001)
    for _ in range(200):
        a = rng.uniform(-1, 1, 2)
        b = a + rng.uniform(-1, 1, 2)
        if np.hypot(*(b - a)) < 1e-3:
            continue
        u = rng.uniform(-0.5, 1.5)
        off = rng.uniform(0.05, 3.0) * (1 if rng.uniform() < 0.5 else -1)
        direction = (b - a) / np.hypot(*(b - a))
        normal = np.array([-direction[1], direction[0]])
        p = a + u * (b - a) + off * normal
        xs = a[0] + t * (b[0] - a[0])
        ys = a[1] + t * (b[1] - a[1])
        brute = float(np.hypot(xs - p[0], ys - p[1]).min())
        d = point_to_segment_distance(Point(*p), Segment(Point(*a), Point(*b)))
        assert abs(d - brute) <= 1e-6


def test_ray_normalizes():
    r = ray(Point(0, 0), Point(3, 4))
    assert math.hypot(r.direction.x, r.direction.y) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        ray(Point(0, 0), Point(0, 0))


def test_point_in_polygon_boundary_tolerance():
    square = [Point(0, 0), Point(4, 0), Point(4, 4), Point(0, 4)]
    assert point_in_polygon(Point(2, 2), square)
    assert point_in_polygon(Point(0, 2), square)          # on the boundary
    assert not point_in_polygon(Point(-1e-3, 2), square)
    assert point_in_polygon(Point(-1e-10, 2), square)     # within tolerance


def test_line_polygon_hits_counts():
    square = np.array([(0, 0), (4, 0), (4, 4), (0, 4)], dtype=float)
    hits = line_polygon_hits(Point(2, 2), Point(0, 1), square)
    assert len(hits) == 2
    assert hits[0] == pytest.approx(-2) and hits[1] == pytest.approx(2)
