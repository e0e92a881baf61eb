"""The four refinement dials: simplify, merge, prune, collapse.

Sweeping each threshold shows the coarse-to-fine control: higher values
give simpler skeletons, zero leaves the skeleton untouched.
"""
from skelforge import RefineConfig, refine
from skelforge.fixtures import gen_scene

scene = gen_scene(12, n_parts=4)
skeleton = scene.assemble_global_skeleton()
polygons = {p: scene.parts[p].world_polygon() for p in scene.parts}
print(f"scene with {len(scene.parts)} parts; "
      f"unrefined joints: {len(refine(skeleton, RefineConfig(0, 0, 0, 0)).joints)}")

for factor in (0.5, 1.0, 2.0, 4.0):
    cfg = RefineConfig(eps_s=5.0 * factor, eps_m=30.0 * factor,
                       eps_t=30.0 * factor, eps_c=10.0 * factor)
    out = refine(skeleton, cfg, polygons=polygons)
    print(f"thresholds x{factor:<3}: {len(out.joints):3d} joints, "
          f"{out.n_bones():3d} bones")

cfg = RefineConfig()
once = refine(skeleton, cfg, polygons=polygons)
twice = refine(once, cfg, polygons=polygons)
print("second application is a no-op:", once.to_json() == twice.to_json())
