"""Camera-configuration geometry for multi-camera 3D perception.

Subpackages cover the pinhole rig model and dataset presets, ground-plane
prior maps, Plücker ray maps, the feature modulation pipeline, ego-centric
Gaussian scenes with a deterministic splat renderer, rig augmentation
sampling, and the NDS* detection score.
"""

from .augment import AugmentSpec, Branch, choose_branch, focal_resize, sample_camera
from .errors import CamPriorError
from .ground import (
    DepthMap,
    GradientMap,
    GroundPlane,
    fit_ground_plane,
    ground_depth_map,
    ground_gradient_map,
    initial_ground_depth,
)
from .metrics import DetectionScores, nds_star, weighted_detection_score
from .modulation import (
    ProjectorWeights,
    assemble_spatial_feature,
    modulate_focal,
    spatial_embed,
    xavier_projector_weights,
)
from .priors import PriorMapSet, build_prior_set, inverse_focal_map, plucker_ray, plucker_raymap
from .rig import (
    CameraExtrinsics,
    CameraIntrinsics,
    CameraRig,
    RigCamera,
    horizontal_fov,
    load_rig,
    preset_rig,
    project,
    save_rig,
    unproject,
    vertical_fov,
)
from .scene import GaussianScene, append_points, from_rgbd, load_ply, radius_schedule, save_ply

__version__ = "0.1.0"

__all__ = [
    "AugmentSpec",
    "Branch",
    "CamPriorError",
    "CameraExtrinsics",
    "CameraIntrinsics",
    "CameraRig",
    "DepthMap",
    "DetectionScores",
    "GaussianScene",
    "GradientMap",
    "GroundPlane",
    "PriorMapSet",
    "ProjectorWeights",
    "RigCamera",
    "append_points",
    "assemble_spatial_feature",
    "build_prior_set",
    "choose_branch",
    "fit_ground_plane",
    "focal_resize",
    "from_rgbd",
    "ground_depth_map",
    "ground_gradient_map",
    "horizontal_fov",
    "initial_ground_depth",
    "inverse_focal_map",
    "load_ply",
    "load_rig",
    "modulate_focal",
    "nds_star",
    "plucker_ray",
    "plucker_raymap",
    "preset_rig",
    "project",
    "radius_schedule",
    "sample_camera",
    "save_ply",
    "save_rig",
    "spatial_embed",
    "unproject",
    "vertical_fov",
    "weighted_detection_score",
    "xavier_projector_weights",
]
