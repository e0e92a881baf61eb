"""Drawing a creature part by part: hierarchy from overlap and order.

A torso goes down first; limbs drawn over it attach automatically, either
by splitting a torso bone at the perpendicular foot or by linking to the
nearest end joint. Moving a limb away detaches it.
"""
import pathlib

from skelforge import Scene, SimplePolygon, Transform
from skelforge.svg import scene_svg

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)


def rect(x0, y0, w, h):
    return SimplePolygon([(x0, y0), (x0 + w, y0), (x0 + w, y0 + h), (x0, y0 + h)])


scene = Scene()
torso = scene.add_part_from_polygon(rect(0, 0, 500, 130))
for x in (50, 170, 290, 410):
    scene.add_part_from_polygon(rect(x, 100, 40, 220))
head = scene.add_part_from_polygon(rect(400, 10, 140, 140))

for child, edge in sorted(scene.hierarchy.items()):
    print(f"part {child} -> parent {edge.parent} via {edge.kind}")

g = scene.global_skeleton()
print(f"assembled skeleton: {len(g.joints)} joints, {g.n_bones()} bones, "
      f"{len(g.components())} tree(s)")

(out_dir / "creature.svg").write_text(scene_svg(scene.parts.values(), g))

scene.move_part(head, Transform(tx=900))
print(f"after moving the head away: {len(scene.global_skeleton().components())} trees")
print(f"wrote {out_dir / 'creature.svg'}")
