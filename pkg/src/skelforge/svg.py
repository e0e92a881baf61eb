"""Debug SVG emitters for visual inspection and docs.

Colour convention everywhere: input polygon black, offset wavefronts
green, skeleton red.
"""
from __future__ import annotations

from typing import Iterable, List, Optional, Sequence, Tuple

from .bounded_dp import GeneralCylinder
from .geom import Point
from .skeleton import Skeleton
from .straight_skeleton import SSEdgeKind, StraightSkeleton, offset_wavefront
from .stroke import SimplePolygon


def _bounds(points: Iterable[Tuple[float, float]], pad: float = 10.0):
    xs, ys = zip(*[(p[0], p[1]) for p in points])
    return min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad


def _doc(body: List[str], bounds) -> str:
    x0, y0, x1, y1 = bounds
    w, h = x1 - x0, y1 - y0
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{x0:.2f} {y0:.2f} {w:.2f} {h:.2f}" '
            f'width="{w:.0f}" height="{h:.0f}">')
    return "\n".join([head, f'<g transform="translate(0,{y0 + y1:.2f}) scale(1,-1)">']
                     + body + ["</g>", "</svg>"])


def _poly_path(points: Sequence[Tuple[float, float]], close: bool = True) -> str:
    d = "M " + " L ".join(f"{p[0]:.3f} {p[1]:.3f}" for p in points)
    return d + (" Z" if close else "")


def polygon_svg_element(poly: SimplePolygon, stroke: str = "black",
                        width: float = 1.5) -> str:
    return (f'<path d="{_poly_path(poly.vertices)}" fill="none" '
            f'stroke="{stroke}" stroke-width="{width}"/>')


def straight_skeleton_svg(ss: StraightSkeleton,
                          wavefront_times: Sequence[float] = ()) -> str:
    """Polygon in black, requested offset fronts in green, skeleton in red."""
    body = [polygon_svg_element(ss.source)]
    for t in wavefront_times:
        for seg in offset_wavefront(ss, t):
            body.append(
                f'<line x1="{seg.a.x:.3f}" y1="{seg.a.y:.3f}" '
                f'x2="{seg.b.x:.3f}" y2="{seg.b.y:.3f}" '
                f'stroke="green" stroke-width="0.8"/>')
    pos = {v.id: v.position for v in ss.vertices}
    for e in ss.edges:
        if e.kind is SSEdgeKind.BORDER:
            continue
        a, b = pos[e.a], pos[e.b]
        width = 1.6 if e.kind is SSEdgeKind.SKELETON else 0.7
        body.append(
            f'<line x1="{a.x:.3f}" y1="{a.y:.3f}" x2="{b.x:.3f}" y2="{b.y:.3f}" '
            f'stroke="red" stroke-width="{width}"/>')
    for v in ss.vertices:
        r = 2.0 if v.kind.value == "skeleton" else 1.2
        fill = "red" if v.kind.value == "skeleton" else "black"
        body.append(f'<circle cx="{v.position.x:.3f}" cy="{v.position.y:.3f}" '
                    f'r="{r}" fill="{fill}"/>')
    return _doc(body, _bounds(ss.source.vertices))


def skeleton_svg(skel: Skeleton, poly: Optional[SimplePolygon] = None,
                 show_radii: bool = False) -> str:
    """Joints and bones in red over an optional outline."""
    body = []
    pts = [j.position for j in skel.joints.values()]
    if poly is not None:
        body.append(polygon_svg_element(poly))
        pts = list(poly.vertices) + pts
    for a, b in skel.bones():
        pa, pb = skel.joints[a].position, skel.joints[b].position
        body.append(f'<line x1="{pa.x:.3f}" y1="{pa.y:.3f}" '
                    f'x2="{pb.x:.3f}" y2="{pb.y:.3f}" '
                    f'stroke="red" stroke-width="2"/>')
    for j in skel.joints.values():
        body.append(f'<circle cx="{j.position.x:.3f}" cy="{j.position.y:.3f}" '
                    f'r="3" fill="red"/>')
        if show_radii and j.radius > 0:
            body.append(f'<circle cx="{j.position.x:.3f}" cy="{j.position.y:.3f}" '
                        f'r="{j.radius:.3f}" fill="none" stroke="#cc8888" '
                        f'stroke-width="0.6"/>')
    if not pts:
        pts = [Point(0, 0)]
    return _doc(body, _bounds(pts))


def cylinder_svg(gc: GeneralCylinder, retained: Optional[Sequence[bool]] = None,
                 poly: Optional[SimplePolygon] = None) -> str:
    """Axis, slices, bounded region and retained points of one branch.

    A second panel below the shape shows the straightened frame: every
    slice stood upright at its arclength abscissa, with the trapezoid
    spanned by the two end slices shaded behind them.
    """
    body = []
    if poly is not None:
        body.append(polygon_svg_element(poly, stroke="#999999", width=1.0))
    body.append(f'<path d="{_poly_path(gc.omega.vertices)}" fill="#cccccc" '
                f'fill-opacity="0.4" stroke="none"/>')
    for i in range(len(gc.axis.points)):
        lx, ly = gc.slices.left[i]
        rx, ry = gc.slices.right[i]
        body.append(f'<line x1="{lx:.3f}" y1="{ly:.3f}" x2="{rx:.3f}" y2="{ry:.3f}" '
                    f'stroke="#44aa44" stroke-width="0.5"/>')
    body.append(f'<path d="{_poly_path(gc.axis.points, close=False)}" fill="none" '
                f'stroke="red" stroke-width="1.2"/>')
    if retained is not None:
        for flag, (x, y) in zip(retained, gc.axis.points):
            if flag:
                body.append(f'<circle cx="{x:.3f}" cy="{y:.3f}" r="2.5" fill="blue"/>')
    pts = [Point(float(x), float(y)) for x, y in gc.omega.coords()]
    x0, y0, x1, y1 = _bounds(pts)
    # straightened frame below the drawing
    s = gc.axis.abscissa
    wl = gc.slices.w_left
    wr = gc.slices.w_right
    base_y = y0 - float(max(wl.max(), wr.max())) - 20.0
    ox = x0 + 10.0
    n = len(s)
    trap = [(ox + s[0], base_y + wl[0]), (ox + s[n - 1], base_y + wl[n - 1]),
            (ox + s[n - 1], base_y - wr[n - 1]), (ox + s[0], base_y - wr[0])]
    body.append(f'<path d="{_poly_path(trap)}" fill="#bbbbdd" '
                f'fill-opacity="0.5" stroke="#7777aa" stroke-width="0.6"/>')
    for i in range(n):
        x = ox + s[i]
        body.append(f'<line x1="{x:.3f}" y1="{base_y - wr[i]:.3f}" '
                    f'x2="{x:.3f}" y2="{base_y + wl[i]:.3f}" '
                    f'stroke="#44aa44" stroke-width="0.5"/>')
    low = base_y - float(wr.max()) - 10.0
    return _doc(body, (x0, low, max(x1, ox + float(s[-1]) + 10.0), y1))


def scene_svg(parts, global_skeleton: Skeleton) -> str:
    """World-frame outlines of all parts with the assembled skeleton."""
    body = []
    pts: List[Point] = []
    for part in parts:
        wp = part.world_polygon()
        pts.extend(wp.vertices)
        body.append(polygon_svg_element(wp))
    for a, b in global_skeleton.bones():
        pa = global_skeleton.joints[a].position
        pb = global_skeleton.joints[b].position
        body.append(f'<line x1="{pa.x:.3f}" y1="{pa.y:.3f}" '
                    f'x2="{pb.x:.3f}" y2="{pb.y:.3f}" stroke="red" stroke-width="2"/>')
    for j in global_skeleton.joints.values():
        body.append(f'<circle cx="{j.position.x:.3f}" cy="{j.position.y:.3f}" '
                    f'r="3" fill="red"/>')
    if not pts:
        pts = [Point(0, 0)]
    return _doc(body, _bounds(pts))
