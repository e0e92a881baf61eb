"""From a wobbly hand-drawn outline to a clean simple polygon.

Draws a jittered rectangle stroke, resamples it at uniform arclength to
smooth pen noise, then simplifies it with the classic max-deviation rule.
"""
import pathlib

from skelforge import acquire_polygon, dp_simplify, uniform_discretize
from skelforge.fixtures import gen_rect_stroke
from skelforge.svg import polygon_svg_element, _bounds, _doc

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

stroke = gen_rect_stroke(seed=5, width=400, height=200, jitter=1.0)
print(f"raw stroke: {len(stroke.points)} device samples")

resampled = uniform_discretize(stroke, step=10.0)
print(f"after uniform resampling at step 10: {len(resampled)} points")

simplified = dp_simplify(resampled, eps=3.0)
print(f"after simplification at eps 3: {len(simplified)} points")

polygon = acquire_polygon(stroke, step=10.0, eps_poly=3.0)
print(f"final polygon: {len(polygon)} vertices, perimeter {polygon.perimeter:.1f}")

body = [polygon_svg_element(polygon, stroke="black", width=2.0)]
for p in stroke.points[:: 4]:
    body.append(f'<circle cx="{p.x:.2f}" cy="{p.y:.2f}" r="0.6" fill="#bbbbbb"/>')
for p in polygon.vertices:
    body.append(f'<circle cx="{p.x:.2f}" cy="{p.y:.2f}" r="4" fill="red"/>')
(out_dir / "stroke_to_polygon.svg").write_text(_doc(body, _bounds(stroke.points)))
print(f"wrote {out_dir / 'stroke_to_polygon.svg'}")
