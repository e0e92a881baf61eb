"""Shape-bounded branch simplification on a wavy tube.

Plain max-deviation simplification at a large threshold cuts straight
across the bends and leaves the shape; the bounded variant keeps
shrinking its threshold until the simplified axis stays inside the
general cylinder around the branch.
"""
import pathlib

from skelforge import BoundedDPConfig
from skelforge.bounded_dp import (bounded_dp_detailed, bounded_dp_select,
                                  build_general_cylinder, fit_branch_spline,
                                  polyline_inside)
from skelforge.fixtures import gen_tube_fixture, rdp_oracle
from skelforge.geom import Point
from skelforge.skeleton import branches
from skelforge.svg import cylinder_svg

out_dir = pathlib.Path(__file__).parent / "out"
out_dir.mkdir(exist_ok=True)

poly, skel = gen_tube_fixture(seed=33)
branch = branches(skel)[0]
print(f"tube branch with {len(branch.joints)} joints")

gc = build_general_cylinder(fit_branch_spline(branch, skel), poly, 65)
axis_pts = [Point(*p) for p in gc.axis.points]

plain = [axis_pts[i] for i in rdp_oracle(axis_pts, 1e9)]
print(f"plain simplification at a huge threshold keeps {len(plain)} points; "
      f"inside the tube: {polyline_inside(plain, gc.omega)}")

simplified, gc2 = bounded_dp_detailed(branch, skel, poly, BoundedDPConfig(eps0=1e4))
print(f"bounded simplification keeps {len(simplified)} points; "
      f"inside the tube: {polyline_inside(simplified, gc2.omega)}")

flags = bounded_dp_select(gc.axis, gc.slices, 0, len(axis_pts) - 1, 8.0, 1.0)
(out_dir / "general_cylinder.svg").write_text(cylinder_svg(gc, flags, poly))
print(f"wrote {out_dir / 'general_cylinder.svg'} "
      f"(grey region, green slices, red axis, blue retained points)")
