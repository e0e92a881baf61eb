import numpy as np
import pytest

from skelforge.geom import Point
from skelforge.stroke import SimplePolygon


@pytest.fixture
def rect_8x4():
    return SimplePolygon([(0, 0), (8, 0), (8, 4), (0, 4)])


@pytest.fixture
def square_4():
    return SimplePolygon([(0, 0), (4, 0), (4, 4), (0, 4)])


@pytest.fixture
def l_shape():
    return SimplePolygon([(0, 0), (6, 0), (6, 2), (2, 2), (2, 6), (0, 6)])


def random_points(seed, count, span=1000.0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-span, span, (count, 2))
    return [Point(float(x), float(y)) for x, y in pts]


def ring_hausdorff(ring_a, ring_b, samples_per_edge=64):
    """Hausdorff distance between two closed polylines via segment distances."""
    from skelforge.geom import Segment, point_to_segment_distance

    def directed(src, dst):
        segs = [Segment(dst[i], dst[(i + 1) % len(dst)]) for i in range(len(dst))]
        worst = 0.0
        for p in densify(src, per_edge=samples_per_edge):
            worst = max(worst, min(point_to_segment_distance(p, s) for s in segs))
        return worst

    ring_a = [Point(p[0], p[1]) for p in ring_a]
    ring_b = [Point(p[0], p[1]) for p in ring_b]
    return max(directed(ring_a, ring_b), directed(ring_b, ring_a))


def densify(points, per_edge=64, closed=True):
    """Sample points densely along a polyline or ring."""
    pts = list(points)
    if closed:
        pts = pts + [pts[0]]
    out = []
    for a, b in zip(pts, pts[1:]):
        for t in np.linspace(0.0, 1.0, per_edge, endpoint=False):
            out.append(Point(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])))
    return out
