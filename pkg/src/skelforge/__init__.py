"""skelforge: real-time skeletonization of freehand 2D strokes.

Pipeline: stroke -> simple polygon -> straight skeleton -> animatable
skeleton -> shape-bounded branch simplification; parts connect into a
hierarchy as they are drawn and moved, and a four-operation refinement
stage controls the global skeleton's complexity.
"""
from .bounded_dp import (BoundedDPConfig, CatmullRomSpline, GeneralCylinder,
                         bounded_dp, bounded_dp_select, build_general_cylinder,
                         fit_branch_spline, point_selection_error)
from .connect import (AttachCase, CapsuleApprox, attach, attach_choice,
                      bone_joint_distance, compute_joint_radii, parts_intersect)
from .errors import (DegenerateAngle, DegenerateSlice, DegenerateStroke,
                     EmptySkeleton, MalformedDocument, NumericalCollapse,
                     OracleResolution, SchemaVersionMismatch, SelfIntersecting,
                     SkelforgeError, SliceMiss, UnknownPart)
from .geom import EPS_GEOM, Orientation, Point, Ray, Segment, orientation, \
    point_to_segment_distance, segment_intersect
from .refine import (RefineConfig, Scope, ScopeLevel, collapse_edges,
                     merge_joints, prune_branches, refine, simplify_branch)
from .scene import Scene, SceneConfig, Subpart, Transform
from .skeleton import (Branch, Joint, JointKind, Skeleton, branches,
                       collapse_short_edges, from_straight_skeleton)
from .straight_skeleton import (SSEdge, SSEdgeKind, SSVertex, SSVertexKind,
                                StraightSkeleton, bisector,
                                extract_straight_skeleton, offset_wavefront)
from .stroke import (RawStroke, SimplePolygon, acquire_polygon, dp_simplify,
                     uniform_discretize)

__version__ = "0.1.0"
