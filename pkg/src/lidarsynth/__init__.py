"""lidarsynth: deterministic synthetic LiDAR dataset generation and analysis.

Subpackages cover the pipeline end to end: scene description and
ray-casting geometry, the simulated sensor suite, bit-exact dataset
formats, world-frame aggregation, adversarial attacks plus the
cross-modal spoofing defense, and a monocular visual-odometry harness.
"""

__version__ = "0.1.0"

from .geometry import (Bvh, Hit, Pose6DoF, Ray, build_bvh, compose_poses,
                       euler_to_matrix, invert_pose, matrix_to_euler,
                       ray_intersect, transform_point, wrap_angle)
from .scene import (Material, SceneModel, SceneObject, TrajectorySpec,
                    load_obj, parse_scene, sample_trajectory)
from .sensors import (CameraConfig, Lidar3DConfig, NoiseConfig,
                      PointCloudFrame, Scan2DConfig, apply_noise,
                      lidar3d_preset, pseudo_intensity, render_depth,
                      render_intensity, scan_lidar2d, scan_lidar3d)

__all__ = [
    "__version__",
    "Bvh", "Hit", "Pose6DoF", "Ray", "build_bvh", "compose_poses",
    "euler_to_matrix", "invert_pose", "matrix_to_euler", "ray_intersect",
    "transform_point", "wrap_angle",
    "Material", "SceneModel", "SceneObject", "TrajectorySpec",
    "load_obj", "parse_scene", "sample_trajectory",
    "CameraConfig", "Lidar3DConfig", "NoiseConfig", "PointCloudFrame",
    "Scan2DConfig", "apply_noise", "lidar3d_preset", "pseudo_intensity",
    "render_depth", "render_intensity", "scan_lidar2d", "scan_lidar3d",
]
