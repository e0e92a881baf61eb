"""Inward wavefront propagation and the straight skeleton it traces.

Extracts skeletons for a rectangle, a square and an L-shape, and renders
the offsetting fronts at a few times over a star-shaped blob.
"""
import pathlib

from skelforge import SimplePolygon, extract_straight_skeleton
from skelforge.fixtures import gen_star_polygon
from skelforge.svg import straight_skeleton_svg

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

for name, pts in [
    ("rectangle", [(0, 0), (8, 0), (8, 4), (0, 4)]),
    ("square", [(0, 0), (4, 0), (4, 4), (0, 4)]),
    ("l_shape", [(0, 0), (6, 0), (6, 2), (2, 2), (2, 6), (0, 6)]),
]:
    ss = extract_straight_skeleton(SimplePolygon(pts))
    nodes = [(round(v.position.x, 3), round(v.position.y, 3), round(v.time, 3))
             for v in ss.skeleton_vertices()]
    print(f"{name}: interior vertices {nodes}, "
          f"{len(ss.skeleton_edges())} skeleton edges, "
          f"{len(ss.peripheral_edges())} peripheral edges")

blob = gen_star_polygon(7, 14)
ss = extract_straight_skeleton(blob)
t_max = max(v.time for v in ss.skeleton_vertices())
doc = straight_skeleton_svg(ss, wavefront_times=[t_max * f for f in (0.25, 0.5, 0.75)])
(out_dir / "straight_skeleton.svg").write_text(doc)
print(f"wrote {out_dir / 'straight_skeleton.svg'} "
      f"(black outline, green offset fronts, red skeleton)")
