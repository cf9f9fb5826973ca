"""World-frame aggregation of per-frame clouds with optional voxel
downsampling and sectional cropping.

Frames are streamed one at a time through an incremental voxel
accumulator, so memory stays proportional to the number of occupied
voxels rather than the number of points. Voxels are emitted in sorted
(ix, iy, iz) lexicographic order; each representative is the arithmetic
centroid, colors and intensities are averaged (color rounded to 8-bit),
and the label is the most frequent in the voxel with ties broken toward
the smallest code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field
from pathlib import Path

import numpy as np

from . import dataset_io as dio
from .errors import FormatError
from .geometry import Pose6DoF, compose_poses, pose_matrix

# Default per-modality point colors for merged maps; override freely.
DEFAULT_MODALITY_COLORS = {"3d": (31, 119, 180), "2d": (255, 127, 14)}

# Voxel indices are packed into a 63-bit key: 21 bits per axis.
_KEY_BITS = 21
_KEY_BIAS = 1 << (_KEY_BITS - 1)


@dataclass(frozen=True)
class VoxelGridParams:
    voxel_size: float
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not (self.voxel_size > 0.0 and math.isfinite(self.voxel_size)):
            raise ValueError("voxel_size must be a positive finite length")


def voxel_indices(xyz, params: VoxelGridParams) -> np.ndarray:
    """Integer voxel coordinates floor((p - origin) / size) per axis."""
    origin = np.asarray(params.origin, dtype=np.float64)
    return np.floor((np.asarray(xyz, dtype=np.float64) - origin)
                    / params.voxel_size).astype(np.int64)


def _pack(idx: np.ndarray) -> np.ndarray:
    shifted = idx + _KEY_BIAS
    if shifted.size and (shifted.min() < 0 or shifted.max() >= (1 << _KEY_BITS)):
        raise ValueError("voxel index out of the supported 21-bit range; "
                         "use a larger voxel_size or a closer origin")
    return ((shifted[:, 0] << (2 * _KEY_BITS))
            | (shifted[:, 1] << _KEY_BITS)
            | shifted[:, 2])


class VoxelAccumulator:
    """Streaming voxel reducer; add clouds in frame order, then finalize."""

    def __init__(self, params: VoxelGridParams, keep_frame_index: bool = False):
        self.params = params
        self.keep_frame_index = keep_frame_index
        # key -> [count, sx, sy, sz, sr, sg, sb, s_intensity, min_frame]
        self._sums: dict[int, list] = {}
        self._labels: dict[int, dict[int, int]] = {}

    def add(self, xyz, rgb, intensity, label, frame_index: int = 0):
        xyz = np.asarray(xyz, dtype=np.float64)
        if xyz.shape[0] == 0:
            return
        keys = _pack(voxel_indices(xyz, self.params))
        order = np.argsort(keys, kind="stable")
        keys_s = keys[order]
        boundaries = np.flatnonzero(np.diff(keys_s)) + 1
        starts = np.concatenate([[0], boundaries])
        ends = np.concatenate([boundaries, [keys_s.shape[0]]])
        xyz_s = xyz[order]
        rgb_s = np.asarray(rgb, dtype=np.float64)[order]
        int_s = np.asarray(intensity, dtype=np.float64)[order]
        lab_s = np.asarray(label)[order]
        sums = np.concatenate([xyz_s, rgb_s, int_s[:, None]], axis=1)
        csum = np.concatenate([np.zeros((1, 7)), np.cumsum(sums, axis=0)])
        for s, e in zip(starts, ends):
            key = int(keys_s[s])
            part = csum[e] - csum[s]
            cell = self._sums.get(key)
            if cell is None:
                self._sums[key] = [e - s, *part, frame_index]
                self._labels[key] = {}
            else:
                cell[0] += e - s
                for j in range(7):
                    cell[j + 1] += part[j]
            lab_counts = self._labels[key]
            vals, counts = np.unique(lab_s[s:e], return_counts=True)
            for v, c in zip(vals, counts):
                lab_counts[int(v)] = lab_counts.get(int(v), 0) + int(c)

    def finalize(self) -> dio.PointCloud:
        keys = sorted(self._sums)
        n = len(keys)
        xyz = np.empty((n, 3), dtype=np.float64)
        rgb = np.empty((n, 3), dtype=np.float64)
        intensity = np.empty(n, dtype=np.float64)
        label = np.empty(n, dtype=np.uint16)
        frames = np.empty(n, dtype=np.uint32)
        for i, key in enumerate(keys):
            cnt, sx, sy, sz, sr, sg, sb, si, fmin = self._sums[key]
            xyz[i] = (sx / cnt, sy / cnt, sz / cnt)
            rgb[i] = (sr / cnt, sg / cnt, sb / cnt)
            intensity[i] = si / cnt
            frames[i] = fmin
            lab_counts = self._labels[key]
            best = max(lab_counts.items(), key=lambda kv: (kv[1], -kv[0]))
            label[i] = best[0]
        extras = {"frame": frames} if self.keep_frame_index else {}
        return dio.PointCloud(xyz.astype(np.float32), np.rint(rgb).astype(np.uint8),
                              intensity.astype(np.float32), label, extras)


def voxel_downsample(cloud: dio.PointCloud, params: VoxelGridParams) -> dio.PointCloud:
    """One representative point per occupied voxel (see module docstring)."""
    acc = VoxelAccumulator(params)
    acc.add(cloud.xyz, cloud.rgb, cloud.intensity, cloud.label)
    return acc.finalize()


def world_transform(vehicle_pose: Pose6DoF, mount: Pose6DoF) -> np.ndarray:
    return pose_matrix(compose_poses(vehicle_pose, mount))


def transform_cloud_xyz(xyz, matrix: np.ndarray) -> np.ndarray:
    pts = np.asarray(xyz, dtype=np.float64)
    return pts @ matrix[:3, :3].T + matrix[:3, 3]


@dataclass
class AggregateOptions:
    modalities: tuple[str, ...] = ("3d", "2d")
    color_map: dict = dataclass_field(default_factory=dict)
    voxel: VoxelGridParams | None = None
    region: tuple | None = None  # (min_xyz, max_xyz), min-inclusive/max-exclusive
    keep_frame_index: bool = False
    outlier_filter: bool = False


def _region_mask(xyz: np.ndarray, region) -> np.ndarray:
    lo = np.asarray(region[0], dtype=np.float64)
    hi = np.asarray(region[1], dtype=np.float64)
    return ((xyz >= lo) & (xyz < hi)).all(axis=1)


def pose_of_row(row: dio.PoseRow) -> Pose6DoF:
    return Pose6DoF(row.x, row.y, row.z, row.alpha, row.beta, row.gamma)


def mount_from_manifest(manifest: dict, modality: str) -> Pose6DoF:
    sensor_key = {"3d": "lidar3d", "2d": "lidar2d"}[modality]
    sensors_meta = manifest.get("sensors", {})
    mount = sensors_meta.get(sensor_key, {}).get("mount")
    if mount is None:
        raise FormatError(f"manifest has no mount for sensor {sensor_key!r}")
    return Pose6DoF(*mount)


def aggregate_dataset(root, options: AggregateOptions | None = None) -> dio.PointCloud:
    """Merge per-frame clouds of a dataset into one world-frame cloud.

    Every frame index present on disk must have a pose row; a missing pose
    is an error naming the frame rather than a silent skip.
    """
    root = Path(root)
    options = options or AggregateOptions()
    manifest = dio.read_manifest(root)
    rows = dio.read_poses_csv(root / dio.POSES_NAME)
    poses = {r.frame: pose_of_row(r) for r in rows}
    frame_count = manifest.get("frame_count", len(rows))
    colors = dict(DEFAULT_MODALITY_COLORS)
    colors.update(options.color_map)

    acc = VoxelAccumulator(options.voxel, options.keep_frame_index) \
        if options.voxel is not None else None
    chunks: list[dio.PointCloud] = []

    for frame in range(frame_count):
        for modality in options.modalities:
            path = dio.frame_path(root, modality, frame)
            if not path.exists():
                continue
            if frame not in poses:
                raise FormatError(
                    f"no pose for frame {frame} (file {path.name} exists)")
            cloud = dio.read_ply(path)
            matrix = world_transform(poses[frame], mount_from_manifest(manifest, modality))
            world = transform_cloud_xyz(cloud.xyz, matrix)
            if options.region is not None:
                keep = _region_mask(world, options.region)
                world = world[keep]
                cloud = cloud.select(keep)
            rgb = np.tile(np.asarray(colors[modality], dtype=np.uint8),
                          (len(cloud), 1))
            if acc is not None:
                acc.add(world, rgb, cloud.intensity, cloud.label, frame)
            else:
                extras = {"frame": np.full(len(cloud), frame, dtype=np.uint32)} \
                    if options.keep_frame_index else {}
                chunks.append(dio.PointCloud(world.astype(np.float32), rgb,
                                             cloud.intensity, cloud.label, extras))

    if acc is not None:
        merged = acc.finalize()
    elif chunks:
        merged = dio.PointCloud(
            np.concatenate([c.xyz for c in chunks]),
            np.concatenate([c.rgb for c in chunks]),
            np.concatenate([c.intensity for c in chunks]),
            np.concatenate([c.label for c in chunks]),
            {k: np.concatenate([c.extras[k] for c in chunks])
             for k in (chunks[0].extras if chunks else {})})
    else:
        merged = dio.PointCloud.empty(
            ("frame",) if options.keep_frame_index else ())

    if options.outlier_filter and len(merged) > 8:
        merged = statistical_outlier_filter(merged)
    return merged


def aggregate_section(root, region, options: AggregateOptions | None = None) -> dio.PointCloud:
    """Aggregate only world points inside ``region`` (min-incl, max-excl)."""
    options = options or AggregateOptions()
    options.region = region
    return aggregate_dataset(root, options)


def statistical_outlier_filter(cloud: dio.PointCloud, k: int = 8,
                               std_ratio: float = 2.0) -> dio.PointCloud:
    """Drop points whose mean k-NN distance exceeds mean + std_ratio * std."""
    from scipy.spatial import cKDTree

    tree = cKDTree(cloud.xyz.astype(np.float64))
    dist, _ = tree.query(cloud.xyz.astype(np.float64), k=k + 1)
    mean_d = dist[:, 1:].mean(axis=1)
    cutoff = mean_d.mean() + std_ratio * mean_d.std()
    return cloud.select(mean_d <= cutoff)


def export_aggregate(cloud: dio.PointCloud, out_base: Path) -> list[Path]:
    """Write the merged cloud to both PLY and PCD next to ``out_base``."""
    out_base = Path(out_base)
    out_base.parent.mkdir(parents=True, exist_ok=True)
    ply = out_base.with_suffix(".ply")
    pcd = out_base.with_suffix(".pcd")
    dio.write_ply(cloud, ply, "binary")
    dio.write_pcd(cloud, pcd, "binary")
    return [ply, pcd]
