import xml.etree.ElementTree as ET

from skelforge.bounded_dp import (bounded_dp_select, build_general_cylinder,
                                  fit_branch_spline)
from skelforge.fixtures import gen_scene, gen_tube_fixture
from skelforge.skeleton import branches
from skelforge.svg import cylinder_svg, scene_svg, skeleton_svg

NS = "{http://www.w3.org/2000/svg}"


def test_cylinder_svg_layers():
    poly, skel = gen_tube_fixture(4)
    br = branches(skel)[0]
    gc = build_general_cylinder(fit_branch_spline(br, skel), poly, 17)
    flags = bounded_dp_select(gc.axis, gc.slices, 0, 16, 5.0, 1.0)
    doc = cylinder_svg(gc, flags, poly)
    root = ET.fromstring(doc)
    assert len(root.findall(f".//{NS}line")) == 34   # slices, world + straightened
    assert root.findall(f".//{NS}circle")            # retained points
    assert len(root.findall(f".//{NS}path")) >= 4    # outline, omega, axis, trapezoid


def test_skeleton_and_scene_svg():
    scene = gen_scene(3, n_parts=2)
    g = scene.global_skeleton()
    doc = scene_svg(scene.parts.values(), g)
    root = ET.fromstring(doc)
    assert len(root.findall(f".//{NS}circle")) == len(g.joints)
    assert len([l for l in root.findall(f".//{NS}line")
                if l.get("stroke") == "red"]) == g.n_bones()
    part = scene.parts[0]
    doc2 = skeleton_svg(part.skeleton, part.polygon, show_radii=True)
    assert ET.fromstring(doc2) is not None
