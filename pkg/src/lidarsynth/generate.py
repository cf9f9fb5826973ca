"""Dataset generation: drive the sensor suite along the trajectory and
write the on-disk bundle (frames, images, poses.csv, manifest).

Generation is deterministic for a given (scene, config, seed): every
frame derives independent random streams from (seed, frame, sensor), so
outputs are byte-identical regardless of worker count.
"""

from __future__ import annotations

import multiprocessing
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset_io as dio
from . import scene as sc
from . import sensors as sn
from .errors import SceneParseError
from .geometry import Pose6DoF, compose_poses, transform_point

SNAPSHOT_DIR = "derived/snapshots"


@dataclass
class RunConfig:
    scene_path: Path
    output: Path
    seed: int = 0
    frames: int | None = None  # overrides the scene trajectory
    dt: float | None = None
    start_time: str = dio.DEFAULT_START_TIME
    jobs: int = 1
    dump_every: int = 0
    depth_scale: float = dio.DEFAULT_DEPTH_SCALE


def _pose_list(p: Pose6DoF) -> list[float]:
    return [p.x, p.y, p.z, p.alpha, p.beta, p.gamma]


def lidar3d_to_dict(cfg: sn.Lidar3DConfig) -> dict:
    return {"channels": cfg.channels,
            "vertical_fov_min_deg": cfg.vertical_fov_min_deg,
            "vertical_fov_max_deg": cfg.vertical_fov_max_deg,
            "azimuth_steps": cfg.azimuth_steps,
            "range_min": cfg.range_min, "range_max": cfg.range_max,
            "mount": _pose_list(cfg.mount),
            "returns_mode": cfg.returns_mode,
            "tof_round_trip_max_s": 2.0 * cfg.range_max / sn.SPEED_OF_LIGHT}


def lidar2d_to_dict(cfg: sn.Scan2DConfig) -> dict:
    return {"fov_deg": cfg.fov_deg, "beam_count": cfg.beam_count,
            "range_min": cfg.range_min, "range_max": cfg.range_max,
            "mount": _pose_list(cfg.mount),
            "tof_round_trip_max_s": 2.0 * cfg.range_max / sn.SPEED_OF_LIGHT}


def camera_to_dict(cfg: sn.CameraConfig) -> dict:
    return {"width": cfg.width, "height": cfg.height, "fx": cfg.fx,
            "fy": cfg.fy, "cx": cfg.cx, "cy": cfg.cy,
            "max_depth": cfg.max_depth, "supersample": cfg.supersample,
            "mount": _pose_list(cfg.mount)}


def noise_to_dict(cfg: sn.NoiseConfig) -> dict:
    return {"range_sigma": cfg.range_sigma, "dropout_prob": cfg.dropout_prob,
            "mixed_pixel_prob": cfg.mixed_pixel_prob,
            "mixed_pixel_min_gap": cfg.mixed_pixel_min_gap}


@dataclass
class SensorSuite:
    lidar3d: sn.Lidar3DConfig
    lidar3d_noise: sn.NoiseConfig
    lidar2d: sn.Scan2DConfig
    lidar2d_noise: sn.NoiseConfig
    camera: sn.CameraConfig


def resolve_sensors(model: sc.SceneModel, seed: int) -> SensorSuite:
    """Sensor configs from the scene file, defaults for anything absent."""
    parsed = sn.configs_from_sections(model.sensor_sections)
    l3, n3 = parsed.get("lidar3d", (sn.lidar3d_preset("vlp16"), sn.NoiseConfig()))
    l2, n2 = parsed.get("lidar2d", (sn.Scan2DConfig(), sn.NoiseConfig()))
    cam = parsed.get("camera", sn.CameraConfig())
    from dataclasses import replace
    return SensorSuite(lidar3d=l3, lidar3d_noise=replace(n3, seed=seed),
                       lidar2d=l2, lidar2d_noise=replace(n2, seed=seed),
                       camera=cam)


_WORKER = {}


def _init_worker(model, suite, root, depth_scale, dump_every):
    _WORKER["args"] = (model, suite, Path(root), depth_scale, dump_every)


def _frame_task(item):
    frame_index, pose_fields = item
    model, suite, root, depth_scale, dump_every = _WORKER["args"]
    pose = Pose6DoF(*pose_fields)
    write_frame(model, suite, root, frame_index, pose, depth_scale, dump_every)
    return frame_index


def write_frame(model, suite: SensorSuite, root: Path, frame_index: int,
                pose: Pose6DoF, depth_scale: float, dump_every: int = 0) -> None:
    f3 = sn.scan_lidar3d(model, pose, suite.lidar3d, frame_index,
                         noise=suite.lidar3d_noise)
    dio.write_ply(dio.cloud_from_frame(f3), dio.frame_path(root, "3d", frame_index))
    f2 = sn.scan_lidar2d(model, pose, suite.lidar2d, frame_index,
                         noise=suite.lidar2d_noise)
    dio.write_ply(dio.cloud_from_frame(f2), dio.frame_path(root, "2d", frame_index))
    depth, rgb = sn.render_depth_and_intensity(model, pose, suite.camera)
    dio.write_depth_pgm(depth, dio.frame_path(root, "depth", frame_index),
                        depth_scale)
    dio.write_ppm(rgb, dio.frame_path(root, "rgb", frame_index))
    if dump_every > 0 and frame_index % dump_every == 0:
        snap = root / SNAPSHOT_DIR / dio.frame_filename(frame_index, "ppm")
        snap.parent.mkdir(parents=True, exist_ok=True)
        dio.write_ppm(_bev_snapshot(model, suite, pose, f3), snap)


def _bev_snapshot(model, suite, pose, frame, size: int = 256) -> np.ndarray:
    """Top-down splat of a 3D frame's world points, intensity-shaded."""
    img = np.zeros((size, size, 3), dtype=np.uint8)
    if frame.n_valid == 0:
        return img
    world = transform_point(compose_poses(pose, suite.lidar3d.mount), frame.points)
    half = suite.lidar3d.range_max
    u = ((world[:, 0] - pose.x + half) / (2 * half) * (size - 1))
    v = ((world[:, 1] - pose.y + half) / (2 * half) * (size - 1))
    ok = (u >= 0) & (u < size) & (v >= 0) & (v < size)
    ui = u[ok].astype(np.int64)
    vi = (size - 1 - v[ok]).astype(np.int64)
    shade = (64 + 191 * frame.intensity[ok]).astype(np.uint8)
    img[vi, ui] = shade[:, None]
    return img


def generate_dataset(cfg: RunConfig) -> Path:
    """Produce a complete dataset bundle; returns the output root."""
    scene_path = Path(cfg.scene_path)
    if not scene_path.is_file():
        raise SceneParseError(f"scene file not found: {scene_path}")
    model = sc.load_scene(scene_path)

    spec = model.trajectory
    if spec is None and (cfg.frames is None or cfg.dt is None):
        raise SceneParseError(
            f"{scene_path} has no [trajectory] section and no --frames/--dt override")
    if spec is None:
        spec = sc.TrajectorySpec(waypoints=(Pose6DoF(),), frame_count=cfg.frames,
                                 dt=cfg.dt)
    else:
        frames = cfg.frames if cfg.frames is not None else spec.frame_count
        dt = cfg.dt if cfg.dt is not None else spec.dt
        spec = sc.TrajectorySpec(waypoints=spec.waypoints, frame_count=frames, dt=dt)

    suite = resolve_sensors(model, cfg.seed)
    samples = sc.sample_trajectory(spec)

    root = Path(cfg.output)
    for mod in dio.MODALITY_DIRS.values():
        (root / mod).mkdir(parents=True, exist_ok=True)

    items = [(s.frame, (s.pose.x, s.pose.y, s.pose.z,
                        s.pose.alpha, s.pose.beta, s.pose.gamma))
             for s in samples]
    if cfg.jobs > 1 and _fork_available():
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(cfg.jobs, initializer=_init_worker,
                      initargs=(model, suite, str(root), cfg.depth_scale,
                                cfg.dump_every)) as pool:
            list(pool.imap_unordered(_frame_task, items, chunksize=1))
    else:
        _init_worker(model, suite, str(root), cfg.depth_scale, cfg.dump_every)
        for item in items:
            _frame_task(item)

    rows = [dio.PoseRow(dio.format_timestamp(cfg.start_time, s.time_offset),
                        s.frame, s.pose.x, s.pose.y, s.pose.z,
                        s.pose.alpha, s.pose.beta, s.pose.gamma)
            for s in samples]
    dio.write_poses_csv(rows, root / dio.POSES_NAME)

    meta = {
        "seed": cfg.seed,
        "frame_count": spec.frame_count,
        "dt": spec.dt,
        "start_time": cfg.start_time,
        "euler_convention": ("world = Rz(yaw) @ Ry(pitch) @ Rx(roll) @ local + "
                             "translation; fixed-axis XYZ, radians in (-pi, pi]"),
        "frame_indexing": "0-based",
        "range_equation": "d = c * dt / 2 (ranges are geometric; implied "
                          "round-trip times are metadata only)",
        "depth_scale": cfg.depth_scale,
        "label_codes": {"unlabeled": 0, **sc.CLASS_CODES},
        "sensors": {"lidar3d": lidar3d_to_dict(suite.lidar3d),
                    "lidar2d": lidar2d_to_dict(suite.lidar2d),
                    "camera": camera_to_dict(suite.camera)},
        "noise": {"lidar3d": noise_to_dict(suite.lidar3d_noise),
                  "lidar2d": noise_to_dict(suite.lidar2d_noise)},
    }
    dio.write_manifest(root, dio.build_manifest(root, meta))
    return root


def _fork_available() -> bool:
    return "fork" in multiprocessing.get_all_start_methods()


def gt_camera_poses(root) -> list[np.ndarray]:
    """Ground-truth 4x4 camera-to-world matrices from poses.csv + manifest."""
    from .attack import camera_from_dict
    from .geometry import pose_matrix

    root = Path(root)
    manifest = dio.read_manifest(root)
    cam = camera_from_dict(manifest["sensors"]["camera"])
    rows = dio.read_poses_csv(root / dio.POSES_NAME)
    out = []
    for r in rows:
        vehicle = Pose6DoF(r.x, r.y, r.z, r.alpha, r.beta, r.gamma)
        out.append(pose_matrix(vehicle) @ pose_matrix(cam.mount))
    return out
