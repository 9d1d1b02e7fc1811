"""curvestitch: curve and lane detection by stitching probabilistic Hough
segments into tangent fields, with slope-signature matching, clustering,
and frame-to-frame tracking.
"""

from .birdseye import Homography, WorldScale, estimate_homography, project, to_world, warp
from .cluster import ClusterParams, CurveCluster, cluster_lines, select_heaviest, threshold_votes
from .config import PipelineConfig, apply_overrides, dump_config, load_config
from .curvemath import (MvtConfig, TangentSample, WeightedPoint, mvt_tangent,
                        tangent_field, weighted_centroid)
from .hough import (HoughParams, LineSegment, PolarLine, accumulate,
                    polar_to_slope_intercept, probabilistic_lines,
                    segment_angle, segment_to_polar)
from .imaging import (EdgeMap, correct_illumination, edge_detect,
                      gaussian_blur, read_pnm, to_hsv, write_pnm)
from .kernels import BACKEND
from .pipeline import DetectionResult, detect_frame, render_overlay, run_sequence
from .signature import (AngleBand, CurveClass, SlopeSignature, assign_band,
                        build_signature, classify_curve, default_library,
                        match_signature)
from .synth import CurveSpec, SceneSpec, render, score_detection
from .tracker import (LaneModel, TextureDescriptor, fill_discontinuities,
                      smooth_model, texture_descriptor, texture_distance)

__version__ = "0.1.0"
