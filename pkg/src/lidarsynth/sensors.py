"""Simulated sensor suite: spinning 3D LiDAR, 2D planar scanner, pinhole
depth camera, pinhole color camera; plus the range-noise model.

Frames hold only valid returns; the beam budget reconciles as
``(n_valid - n_mixed) + n_missed + n_dropped == beams_total``.

Sensor-frame axes follow the vehicle convention (x forward, y left,
z up). The camera mount additionally rotates into the optical frame
(z forward, x right, y down); pixel (u, v) maps to the ray direction
``((u - cx)/fx, (v - cy)/fy, 1)`` before normalization, so integer
principal-point pixels sample the principal ray exactly.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, replace

import numpy as np

from .errors import SceneParseError
from .geometry import Pose6DoF, compose_poses, euler_to_matrix, triangle_normals

SPEED_OF_LIGHT = 299_792_458.0

# Reference range of the pseudo-intensity falloff, meters.
DEFAULT_INTENSITY_RANGE = 10.0

# Rotation taking the camera optical frame into the vehicle frame.
CAMERA_FORWARD_MOUNT_ANGLES = (-math.pi / 2.0, 0.0, -math.pi / 2.0)

DEFAULT_LIDAR3D_MOUNT = Pose6DoF(0.0, 0.0, 1.8)  # rooftop
DEFAULT_FENDER_MOUNT = Pose6DoF(2.0, 0.0, 0.5)  # front fender
DEFAULT_CAMERA_MOUNT = Pose6DoF(2.0, 0.0, 0.5, *CAMERA_FORWARD_MOUNT_ANGLES)

SENSOR_STREAM_IDS = {"lidar3d": 1, "lidar2d": 2, "camera": 3, "attack": 4}


def sensor_stream_id(name: str) -> int:
    return SENSOR_STREAM_IDS.get(name, 16 + zlib.crc32(name.encode()))


def frame_rng(seed: int, frame_index: int, sensor: str | int) -> np.random.Generator:
    """Independent deterministic stream for (seed, frame, sensor)."""
    sid = sensor if isinstance(sensor, int) else sensor_stream_id(sensor)
    ss = np.random.SeedSequence(entropy=int(seed) & 0xFFFFFFFFFFFFFFFF,
                                spawn_key=(sid, int(frame_index)))
    return np.random.default_rng(ss)


@dataclass(frozen=True)
class Lidar3DConfig:
    channels: int = 16
    vertical_fov_min_deg: float = -15.0
    vertical_fov_max_deg: float = 15.0
    azimuth_steps: int = 900
    range_min: float = 0.5
    range_max: float = 100.0
    mount: Pose6DoF = DEFAULT_LIDAR3D_MOUNT
    returns_mode: str = "strongest"  # dual-return hardware modeled as single
    name: str = "lidar3d"

    def __post_init__(self):
        if self.returns_mode != "strongest":
            raise ValueError("only strongest-return mode is modeled")
        if self.channels < 1 or self.azimuth_steps < 1:
            raise ValueError("channels and azimuth_steps must be >= 1")
        if not self.vertical_fov_min_deg < self.vertical_fov_max_deg:
            if not (self.channels == 1
                    and self.vertical_fov_min_deg == self.vertical_fov_max_deg):
                raise ValueError("vertical FOV min must be below max")
        if not (0.0 <= self.range_min < self.range_max):
            raise ValueError("require 0 <= range_min < range_max")

    @property
    def beams_per_frame(self) -> int:
        return self.channels * self.azimuth_steps


# The VLP-16 preset: 16 channels over a 30-degree vertical field of view,
# full 360-degree sweep, gated at 100 m. Modeled as strongest-only single
# return. The 0.4-degree azimuth step and 0.5 m minimum range are artifact
# defaults, not datasheet values.
LIDAR3D_PRESETS = {
    "vlp16": dict(channels=16, vertical_fov_min_deg=-15.0, vertical_fov_max_deg=15.0,
                  azimuth_steps=900, range_min=0.5, range_max=100.0),
}


def lidar3d_preset(name: str, **overrides) -> Lidar3DConfig:
    if name not in LIDAR3D_PRESETS:
        raise ValueError(f"unknown lidar preset {name!r}; have {sorted(LIDAR3D_PRESETS)}")
    params = dict(LIDAR3D_PRESETS[name])
    params.update(overrides)
    return Lidar3DConfig(**params)


@dataclass(frozen=True)
class Scan2DConfig:
    fov_deg: float = 180.0
    beam_count: int = 361
    range_min: float = 0.1
    range_max: float = 50.0
    mount: Pose6DoF = DEFAULT_FENDER_MOUNT
    name: str = "lidar2d"

    def __post_init__(self):
        if not (0.0 < self.fov_deg <= 360.0):
            raise ValueError("fov must be in (0, 360]")
        if self.beam_count < 1:
            raise ValueError("beam_count must be >= 1")
        if not (0.0 <= self.range_min < self.range_max):
            raise ValueError("require 0 <= range_min < range_max")


@dataclass(frozen=True)
class CameraConfig:
    width: int = 320
    height: int = 240
    fx: float = 240.0
    fy: float = 240.0
    cx: float = 160.0
    cy: float = 120.0
    max_depth: float = 60.0
    mount: Pose6DoF = DEFAULT_CAMERA_MOUNT
    supersample: int = 1  # color-image antialiasing factor (1 = off)
    name: str = "camera"

    def __post_init__(self):
        if self.width < 1 or self.height < 1:
            raise ValueError("image dimensions must be positive")
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        if self.max_depth <= 0:
            raise ValueError("max_depth must be positive")
        if not (1 <= self.supersample <= 8):
            raise ValueError("supersample must be in 1..8")

    @property
    def intrinsics(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class NoiseConfig:
    range_sigma: float = 0.0
    dropout_prob: float = 0.0
    mixed_pixel_prob: float = 0.0
    mixed_pixel_min_gap: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.range_sigma < 0:
            raise ValueError("range_sigma must be >= 0")
        for p in (self.dropout_prob, self.mixed_pixel_prob):
            if not (0.0 <= p <= 1.0):
                raise ValueError("probabilities must be in [0, 1]")
        if self.mixed_pixel_min_gap < 0:
            raise ValueError("mixed_pixel_min_gap must be >= 0")

    @property
    def is_noop(self) -> bool:
        return (self.range_sigma == 0.0 and self.dropout_prob == 0.0
                and self.mixed_pixel_prob == 0.0)


@dataclass
class PointCloudFrame:
    """Valid LiDAR returns of one frame, in the sensor frame."""

    sensor: str
    frame_index: int
    points: np.ndarray  # (N, 3) float64, == ranges[:, None] * beam direction
    ranges: np.ndarray  # (N,) float64
    intensity: np.ndarray  # (N,) float64 in [0, 1]
    channel: np.ndarray  # (N,) int32
    azimuth_index: np.ndarray  # (N,) int32
    object_id: np.ndarray  # (N,) int32, -1 for spurious returns
    label: np.ndarray  # (N,) uint16 class codes
    rgb: np.ndarray  # (N, 3) uint8 surface color
    mixed: np.ndarray  # (N,) bool, True for mixed-pixel artifacts
    beams_total: int
    n_missed: int
    n_dropped: int = 0
    n_mixed: int = 0
    azimuth_count: int = 0
    wrap_azimuth: bool = False
    range_min: float = 0.0
    range_max: float = math.inf

    @property
    def n_valid(self) -> int:
        return int(self.points.shape[0])

    def budget_consistent(self) -> bool:
        return (self.n_valid - self.n_mixed) + self.n_missed + self.n_dropped \
            == self.beams_total

    def select(self, mask) -> "PointCloudFrame":
        return replace(
            self, points=self.points[mask], ranges=self.ranges[mask],
            intensity=self.intensity[mask], channel=self.channel[mask],
            azimuth_index=self.azimuth_index[mask], object_id=self.object_id[mask],
            label=self.label[mask], rgb=self.rgb[mask], mixed=self.mixed[mask])


def pseudo_intensity(reflectivity, cos_incidence, d, d_ref: float = DEFAULT_INTENSITY_RANGE):
    """I = rho * cos(theta) * min(1, (d_ref/d)^2), clamped to [0, 1]."""
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0.0):
        raise ValueError("range d must be positive")
    rho = np.asarray(reflectivity, dtype=np.float64)
    cosi = np.asarray(cos_incidence, dtype=np.float64)
    falloff = np.minimum(1.0, (d_ref / d) ** 2)
    out = np.clip(rho * cosi * falloff, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def lidar3d_directions(cfg: Lidar3DConfig):
    """Beam unit directions (sensor frame) plus channel/azimuth indices.

    Azimuth-major order: all channels of azimuth column 0, then column 1,
    and so on. Elevations span the vertical FOV inclusively; azimuths are
    k * 360/steps starting at 0 (endpoint exclusive).
    """
    if cfg.channels == 1:
        elev = np.array([math.radians(
            (cfg.vertical_fov_min_deg + cfg.vertical_fov_max_deg) / 2.0)])
    else:
        elev = np.radians(np.linspace(cfg.vertical_fov_min_deg,
                                      cfg.vertical_fov_max_deg, cfg.channels))
    az = np.arange(cfg.azimuth_steps) * (math.tau / cfg.azimuth_steps)
    az_idx = np.repeat(np.arange(cfg.azimuth_steps, dtype=np.int32), cfg.channels)
    ch_idx = np.tile(np.arange(cfg.channels, dtype=np.int32), cfg.azimuth_steps)
    ce, se = np.cos(elev[ch_idx]), np.sin(elev[ch_idx])
    ca, sa = np.cos(az[az_idx]), np.sin(az[az_idx])
    dirs = np.stack([ce * ca, ce * sa, se], axis=1)
    return dirs, ch_idx, az_idx


def lidar2d_directions(cfg: Scan2DConfig):
    """Beam unit directions in the scan plane (z = 0, sensor frame).

    Partial FOVs are centered on +x with inclusive endpoints (181 beams
    over 180 degrees gives exactly 1-degree spacing); a full 360-degree
    scan uses exclusive spacing to avoid a duplicate beam.
    """
    if cfg.fov_deg == 360.0:
        ang = np.arange(cfg.beam_count) * (math.tau / cfg.beam_count)
    elif cfg.beam_count == 1:
        ang = np.zeros(1)
    else:
        half = math.radians(cfg.fov_deg) / 2.0
        ang = np.linspace(-half, half, cfg.beam_count)
    dirs = np.stack([np.cos(ang), np.sin(ang), np.zeros_like(ang)], axis=1)
    idx = np.arange(cfg.beam_count, dtype=np.int32)
    return dirs, np.zeros(cfg.beam_count, dtype=np.int32), idx


def _scan(scene, vehicle_pose, mount, dirs_sensor, ch_idx, az_idx,
          range_min, range_max, sensor_name, frame_index,
          azimuth_count, wrap_azimuth) -> PointCloudFrame:
    sensor_pose = compose_poses(vehicle_pose, mount)
    R = euler_to_matrix(sensor_pose)
    origin = sensor_pose.translation
    n = dirs_sensor.shape[0]
    dirs_world = dirs_sensor @ R.T
    origins = np.broadcast_to(origin, (n, 3)).copy()
    t, slot = scene.bvh.cast(origins, dirs_world, 0.0, range_max)
    valid = (slot >= 0) & (t >= range_min)
    idx = np.flatnonzero(valid)
    d = t[idx]
    slots = slot[idx]
    orig_tri = scene.bvh.tri_index[slots]
    obj = scene.tri_object[orig_tri]
    mat = scene.tri_material[orig_tri]
    normals = triangle_normals(scene.bvh, slots, dirs_world[idx])
    cos_inc = np.clip(-(normals * dirs_world[idx]).sum(axis=1), 0.0, 1.0)
    intensity = pseudo_intensity(scene.material_reflectivity[mat], cos_inc, d) \
        if len(idx) else np.zeros(0)
    return PointCloudFrame(
        sensor=sensor_name,
        frame_index=frame_index,
        points=dirs_sensor[idx] * d[:, None],
        ranges=d,
        intensity=np.asarray(intensity, dtype=np.float64),
        channel=ch_idx[idx].astype(np.int32),
        azimuth_index=az_idx[idx].astype(np.int32),
        object_id=obj.astype(np.int32),
        label=scene.object_class_code[obj] if len(idx) else np.zeros(0, dtype=np.uint16),
        rgb=scene.material_rgb[mat] if len(idx) else np.zeros((0, 3), dtype=np.uint8),
        mixed=np.zeros(len(idx), dtype=bool),
        beams_total=n,
        n_missed=int(n - len(idx)),
        azimuth_count=azimuth_count,
        wrap_azimuth=wrap_azimuth,
        range_min=range_min,
        range_max=range_max,
    )


def scan_lidar3d(scene, vehicle_pose: Pose6DoF, cfg: Lidar3DConfig,
                 frame_index: int = 0, noise: NoiseConfig | None = None,
                 rng=None) -> PointCloudFrame:
    """Cast channels x azimuth_steps beams; optionally apply ``noise``."""
    dirs, ch, az = lidar3d_directions(cfg)
    frame = _scan(scene, vehicle_pose, cfg.mount, dirs, ch, az,
                  cfg.range_min, cfg.range_max, cfg.name, frame_index,
                  azimuth_count=cfg.azimuth_steps, wrap_azimuth=True)
    if noise is not None:
        frame = apply_noise(frame, noise, rng)
    return frame


def scan_lidar2d(scene, vehicle_pose: Pose6DoF, cfg: Scan2DConfig,
                 frame_index: int = 0, noise: NoiseConfig | None = None,
                 rng=None) -> PointCloudFrame:
    """Single-elevation planar scan; otherwise identical to scan_lidar3d."""
    dirs, ch, az = lidar2d_directions(cfg)
    frame = _scan(scene, vehicle_pose, cfg.mount, dirs, ch, az,
                  cfg.range_min, cfg.range_max, cfg.name, frame_index,
                  azimuth_count=cfg.beam_count,
                  wrap_azimuth=cfg.fov_deg == 360.0)
    if noise is not None:
        frame = apply_noise(frame, noise, rng)
    return frame


def camera_rays(cfg: CameraConfig, scale: int = 1):
    """Per-pixel unit directions (camera frame) and their norm factors.

    ``scale`` > 1 produces the supersampled grid whose s x s blocks tile
    each base pixel's footprint exactly.
    """
    if scale == 1:
        u = (np.arange(cfg.width) - cfg.cx) / cfg.fx
        v = (np.arange(cfg.height) - cfg.cy) / cfg.fy
    else:
        s = float(scale)
        u = ((np.arange(cfg.width * scale) + 0.5) / s - 0.5 - cfg.cx) / cfg.fx
        v = ((np.arange(cfg.height * scale) + 0.5) / s - 0.5 - cfg.cy) / cfg.fy
    xn, yn = np.meshgrid(u, v)  # (H, W)
    norm = np.sqrt(xn * xn + yn * yn + 1.0)
    dirs = np.stack([xn / norm, yn / norm, 1.0 / norm], axis=2)
    return dirs.reshape(-1, 3), norm.reshape(-1)


def _cast_camera(scene, cam_pose, cfg, scale):
    R = euler_to_matrix(cam_pose)
    origin = cam_pose.translation
    dirs_cam, norm = camera_rays(cfg, scale)
    dirs_world = dirs_cam @ R.T
    n = dirs_world.shape[0]
    origins = np.broadcast_to(origin, (n, 3)).copy()
    t, slot = scene.bvh.cast(origins, dirs_world, 0.0, cfg.max_depth * norm)
    return t, slot, norm, dirs_world


def _shade(scene, slot, dirs_world):
    n = slot.shape[0]
    rgb = np.zeros((n, 3), dtype=np.float64)
    idx = np.flatnonzero(slot >= 0)
    if len(idx):
        slots = slot[idx]
        orig_tri = scene.bvh.tri_index[slots]
        mat = scene.tri_material[orig_tri]
        normals = triangle_normals(scene.bvh, slots, dirs_world[idx])
        cos = np.clip(-(normals * dirs_world[idx]).sum(axis=1), 0.0, 1.0)
        rgb[idx] = scene.material_rgb[mat].astype(np.float64) * cos[:, None]
    return rgb


def render_depth_and_intensity(scene, vehicle_pose: Pose6DoF, cfg: CameraConfig):
    """Render both camera modalities.

    Depth is the z-depth along the optical axis, point-sampled at pixel
    centers, with 0 as the miss/out-of-range sentinel. Color is
    Lambertian shading under a headlight co-located with the camera;
    with ``supersample`` > 1 each pixel averages an s x s sub-grid
    (the depth image stays point-sampled either way).
    """
    cam_pose = compose_poses(vehicle_pose, cfg.mount)
    h, w = cfg.height, cfg.width
    t, slot, norm, dirs_world = _cast_camera(scene, cam_pose, cfg, 1)
    hit = slot >= 0
    depth = np.zeros(h * w)
    depth[hit] = t[hit] / norm[hit]
    if cfg.supersample == 1:
        rgb = np.rint(_shade(scene, slot, dirs_world)).astype(np.uint8)
        return depth.reshape(h, w), rgb.reshape(h, w, 3)
    s = cfg.supersample
    _, slot_s, _, dirs_s = _cast_camera(scene, cam_pose, cfg, s)
    shade = _shade(scene, slot_s, dirs_s).reshape(h, s, w, s, 3)
    rgb = np.rint(shade.mean(axis=(1, 3))).astype(np.uint8)
    return depth.reshape(h, w), rgb


def render_depth(scene, vehicle_pose: Pose6DoF, cfg: CameraConfig) -> np.ndarray:
    return render_depth_and_intensity(scene, vehicle_pose, cfg)[0]


def render_intensity(scene, vehicle_pose: Pose6DoF, cfg: CameraConfig) -> np.ndarray:
    return render_depth_and_intensity(scene, vehicle_pose, cfg)[1]


def apply_noise(frame: PointCloudFrame, cfg: NoiseConfig, rng=None) -> PointCloudFrame:
    """Dropouts, Gaussian range noise, and mixed-pixel artifacts.

    Deterministic given (cfg.seed, frame.frame_index, frame.sensor) when
    no explicit rng is supplied. Post-noise returns outside the original
    range gate are discarded and counted as dropped, so the gate holds
    unconditionally. Mixed pixels spawn between azimuth-adjacent returns
    of the same channel whose range gap exceeds the configured minimum.
    """
    if cfg.is_noop:
        return replace(frame)
    if rng is None:
        rng = frame_rng(cfg.seed, frame.frame_index, frame.sensor)

    out = frame
    n0 = out.n_valid
    n_dropped = frame.n_dropped

    if cfg.dropout_prob > 0.0:
        keep = rng.random(n0) >= cfg.dropout_prob
        n_dropped += int(n0 - keep.sum())
        out = out.select(keep)

    if cfg.range_sigma > 0.0 and out.n_valid:
        d0 = out.ranges
        d1 = d0 + rng.normal(0.0, cfg.range_sigma, d0.shape[0])
        scale = np.where(d0 > 0.0, d1 / d0, 0.0)
        out = replace(out, ranges=d1, points=out.points * scale[:, None])
        ok = (d1 >= frame.range_min) & (d1 <= frame.range_max)
        n_dropped += int((~ok).sum())
        out = out.select(ok)

    if cfg.mixed_pixel_prob > 0.0 and out.azimuth_count > 0 and out.n_valid:
        out = _spawn_mixed_pixels(out, cfg, rng)

    return replace(out, n_dropped=n_dropped)


def _spawn_mixed_pixels(frame: PointCloudFrame, cfg: NoiseConfig, rng) -> PointCloudFrame:
    n_az = frame.azimuth_count
    key = frame.channel.astype(np.int64) * n_az + frame.azimuth_index
    lut = np.full((int(frame.channel.max()) + 1) * n_az, -1, dtype=np.int64)
    lut[key] = np.arange(frame.n_valid)
    az = frame.azimuth_index.astype(np.int64)
    succ_az = az + 1
    if frame.wrap_azimuth:
        succ_az %= n_az
    in_range = succ_az < n_az
    succ_key = frame.channel.astype(np.int64) * n_az + succ_az
    partner = np.where(in_range, lut[np.where(in_range, succ_key, 0)], -1)
    rows = np.flatnonzero(partner >= 0)
    partners = partner[rows]
    gap = np.abs(frame.ranges[rows] - frame.ranges[partners])
    cand = gap > cfg.mixed_pixel_min_gap
    rows, partners = rows[cand], partners[cand]
    fire = rng.random(rows.shape[0]) < cfg.mixed_pixel_prob
    frac = rng.random(rows.shape[0])
    rows, partners, frac = rows[fire], partners[fire], frac[fire]
    if rows.shape[0] == 0:
        return frame
    d_a, d_b = frame.ranges[rows], frame.ranges[partners]
    lo, hi = np.minimum(d_a, d_b), np.maximum(d_a, d_b)
    d_new = lo + frac * (hi - lo)
    dir_a = frame.points[rows] / d_a[:, None]
    dir_b = frame.points[partners] / d_b[:, None]
    mid = dir_a + dir_b
    mid /= np.linalg.norm(mid, axis=1, keepdims=True)
    new_points = mid * d_new[:, None]
    new_int = (frame.intensity[rows] + frame.intensity[partners]) / 2.0
    new_rgb = np.rint((frame.rgb[rows].astype(np.float64)
                       + frame.rgb[partners].astype(np.float64)) / 2.0).astype(np.uint8)
    k = rows.shape[0]
    return replace(
        frame,
        points=np.concatenate([frame.points, new_points]),
        ranges=np.concatenate([frame.ranges, d_new]),
        intensity=np.concatenate([frame.intensity, new_int]),
        channel=np.concatenate([frame.channel, frame.channel[rows]]),
        azimuth_index=np.concatenate([frame.azimuth_index, frame.azimuth_index[rows]]),
        object_id=np.concatenate([frame.object_id,
                                  np.full(k, -1, dtype=np.int32)]),
        label=np.concatenate([frame.label, np.zeros(k, dtype=np.uint16)]),
        rgb=np.concatenate([frame.rgb, new_rgb]),
        mixed=np.concatenate([frame.mixed, np.ones(k, dtype=bool)]),
        n_mixed=frame.n_mixed + k,
    )


# ---------------------------------------------------------------------------
# Scene-file sensor sections

_LIDAR3D_KEYS = {"preset", "channels", "vfov_min_deg", "vfov_max_deg",
                 "azimuth_steps", "range_min", "range_max", "mount",
                 "range_sigma", "dropout_prob", "mixed_pixel_prob",
                 "mixed_pixel_min_gap"}
_LIDAR2D_KEYS = {"fov_deg", "beam_count", "range_min", "range_max", "mount",
                 "range_sigma", "dropout_prob", "mixed_pixel_prob",
                 "mixed_pixel_min_gap"}
_CAMERA_KEYS = {"width", "height", "fx", "fy", "cx", "cy", "max_depth",
                "supersample", "mount"}
_NOISE_KEYS = {"range_sigma", "dropout_prob", "mixed_pixel_prob", "mixed_pixel_min_gap"}


def _num(val, ln, key):
    if len(val) != 1:
        raise SceneParseError(f"{key} takes one number", line=ln)
    try:
        v = float(val[0])
    except ValueError:
        raise SceneParseError(f"bad number for {key}: {val[0]!r}", line=ln)
    if not math.isfinite(v):
        raise SceneParseError(f"{key} must be finite", line=ln)
    return v


def _mount(val, ln) -> Pose6DoF:
    if len(val) != 6:
        raise SceneParseError("mount takes x y z roll pitch yaw", line=ln)
    try:
        vals = [float(p) for p in val]
    except ValueError:
        raise SceneParseError(f"bad mount values {val}", line=ln)
    return Pose6DoF(*vals)


def configs_from_sections(sections):
    """Validate ``[sensor KIND]`` sections and build config objects.

    Returns a dict with any of the keys ``lidar3d``, ``lidar2d`` (each a
    (config, NoiseConfig) pair) and ``camera`` (a CameraConfig).
    """
    out = {}
    for kind, header_ln, entries in sections:
        if kind in out:
            raise SceneParseError(f"duplicate sensor section {kind!r}", line=header_ln)
        if kind == "lidar3d":
            allowed, base = _LIDAR3D_KEYS, {}
            preset = None
            noise = {}
            for ln, key, val in entries:
                if key not in allowed:
                    raise SceneParseError(f"unknown lidar3d key {key!r}", line=ln)
                if key == "preset":
                    if len(val) != 1:
                        raise SceneParseError("preset takes one name", line=ln)
                    if val[0] not in LIDAR3D_PRESETS:
                        raise SceneParseError(f"unknown preset {val[0]!r}", line=ln)
                    preset = val[0]
                elif key == "mount":
                    base["mount"] = _mount(val, ln)
                elif key in _NOISE_KEYS:
                    noise[key] = _num(val, ln, key)
                elif key in ("channels", "azimuth_steps"):
                    base[key] = int(_num(val, ln, key))
                else:
                    field_name = {"vfov_min_deg": "vertical_fov_min_deg",
                                  "vfov_max_deg": "vertical_fov_max_deg"}.get(key, key)
                    base[field_name] = _num(val, ln, key)
            try:
                cfg = lidar3d_preset(preset, **base) if preset else Lidar3DConfig(**base)
                out[kind] = (cfg, NoiseConfig(**noise))
            except ValueError as exc:
                raise SceneParseError(str(exc), line=header_ln)
        elif kind == "lidar2d":
            base, noise = {}, {}
            for ln, key, val in entries:
                if key not in _LIDAR2D_KEYS:
                    raise SceneParseError(f"unknown lidar2d key {key!r}", line=ln)
                if key == "mount":
                    base["mount"] = _mount(val, ln)
                elif key in _NOISE_KEYS:
                    noise[key] = _num(val, ln, key)
                elif key == "beam_count":
                    base[key] = int(_num(val, ln, key))
                else:
                    base[key] = _num(val, ln, key)
            try:
                out[kind] = (Scan2DConfig(**base), NoiseConfig(**noise))
            except ValueError as exc:
                raise SceneParseError(str(exc), line=header_ln)
        elif kind == "camera":
            base = {}
            for ln, key, val in entries:
                if key not in _CAMERA_KEYS:
                    raise SceneParseError(f"unknown camera key {key!r}", line=ln)
                if key == "mount":
                    base["mount"] = _mount(val, ln)
                elif key in ("width", "height", "supersample"):
                    base[key] = int(_num(val, ln, key))
                else:
                    base[key] = _num(val, ln, key)
            try:
                out[kind] = CameraConfig(**base)
            except ValueError as exc:
                raise SceneParseError(str(exc), line=header_ln)
        else:
            raise SceneParseError(f"unknown sensor kind {kind!r}", line=header_ln)
    return out
