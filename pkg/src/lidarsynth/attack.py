"""Adversarial manipulations of generated datasets and the cross-modal
spoofing defense.

Attacks operate on the file-level point clouds (the surface an attacker
controls); poses and images are never touched, so the dataset manifest
pinpoints exactly the altered files. Every attack writes a ground-truth
record sufficient to reproduce the attacked frame from the clean one.

The defense projects LiDAR points into the synchronized depth image and
flags points that are closer than every depth sample in a 3x3 pixel
neighborhood by more than the tolerance. Points outside the frustum,
behind the camera, on depth sentinels, or farther than the observed
surface (indistinguishable from parallax occlusion) are reported as
unverifiable rather than silently passed.
"""

from __future__ import annotations

import json
import math
import shutil
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset_io as dio
from .errors import FormatError, SceneParseError
from .geometry import Pose6DoF, euler_to_matrix, pose_matrix
from .sensors import CameraConfig, frame_rng

ATTACK_KINDS = ("inject", "remove", "replay", "perturb")
TEMPLATES = ("box_silhouette", "car_silhouette", "random_blob")
RECORD_NAME = "attack_record.json"

# Detection status codes.
UNVERIFIABLE = 0
CONSISTENT = 1
FLAGGED = 2
OCCLUDED = 3  # behind the observed surface: also unverifiable


@dataclass(frozen=True)
class AttackSpec:
    kind: str
    frames: tuple[int, ...]
    point_count: int = 20
    template: str = "box_silhouette"
    placement: Pose6DoF = Pose6DoF()
    extent: tuple[float, float, float] = (1.0, 1.0, 1.0)
    region: tuple | None = None
    label: int | None = None
    offset: int = 1
    epsilon: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"kind must be one of {ATTACK_KINDS}, got {self.kind!r}")
        if self.point_count < 0:
            raise ValueError("point_count must be >= 0")
        if self.template not in TEMPLATES:
            raise ValueError(f"template must be one of {TEMPLATES}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if self.offset < 1:
            raise ValueError("replay offset k must be >= 1")
        if self.kind == "remove" and self.region is None and self.label is None:
            raise ValueError("remove needs a region or a label")


# ---------------------------------------------------------------------------
# Template surface samplers


def _sample_box_surface(rng, count, size, centers=None):
    """Uniform points on the surface of one or more boxes (area-weighted)."""
    boxes = [(np.asarray(size, dtype=np.float64) / 2.0,
              np.zeros(3) if centers is None else np.asarray(centers))]
    return _sample_boxes(rng, count, boxes)


def _sample_boxes(rng, count, boxes):
    faces = []
    areas = []
    for half, center in boxes:
        for axis in range(3):
            u, v = [a for a in range(3) if a != axis]
            area = 4.0 * half[u] * half[v]
            for sign in (-1.0, 1.0):
                faces.append((axis, sign, u, v, half, center))
                areas.append(area)
    areas = np.asarray(areas)
    probs = areas / areas.sum()
    choice = rng.choice(len(faces), size=count, p=probs)
    uv = rng.uniform(-1.0, 1.0, size=(count, 2))
    pts = np.empty((count, 3))
    for i, f in enumerate(choice):
        axis, sign, u, v, half, center = faces[f]
        p = np.empty(3)
        p[axis] = sign * half[axis]
        p[u] = uv[i, 0] * half[u]
        p[v] = uv[i, 1] * half[v]
        pts[i] = p + center
    return pts


def sample_template(rng, template: str, extent, count: int) -> np.ndarray:
    """Points on the local-frame surface of an attack template."""
    ex = np.asarray(extent, dtype=np.float64)
    if (ex <= 0).any():
        raise ValueError("template extent must be positive")
    if template == "box_silhouette":
        return _sample_boxes(rng, count, [(ex / 2.0, np.zeros(3))])
    if template == "car_silhouette":
        body_half = np.array([ex[0], ex[1], 0.55 * ex[2]]) / 2.0
        body_center = np.array([0.0, 0.0, -0.225 * ex[2]])
        cabin_half = np.array([0.55 * ex[0], 0.85 * ex[1], 0.45 * ex[2]]) / 2.0
        cabin_center = np.array([-0.1 * ex[0], 0.0, 0.275 * ex[2]])
        return _sample_boxes(rng, count, [(body_half, body_center),
                                          (cabin_half, cabin_center)])
    if template == "random_blob":
        d = rng.normal(size=(count, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        return d * (ex / 2.0)
    raise ValueError(f"unknown template {template!r}")


# ---------------------------------------------------------------------------
# Frame-level attacks (operate on file-level PointClouds)


def inject_points(cloud: dio.PointCloud, spec: AttackSpec,
                  sensor_from_world: np.ndarray, rng) -> tuple[dio.PointCloud, dict]:
    """Append spec.point_count phantom points sampled on the template.

    Injected points clone intensity, color, and label from randomly
    chosen existing returns so per-channel statistics stay plausible.
    The record lists the new indices and full payloads.
    """
    k = spec.point_count
    local = sample_template(rng, spec.template, spec.extent, k)
    world = local @ euler_to_matrix(spec.placement).T + spec.placement.translation
    pts = world @ sensor_from_world[:3, :3].T + sensor_from_world[:3, 3]
    n0 = len(cloud)
    if n0 > 0:
        donors = rng.integers(0, n0, size=k)
        intensity = cloud.intensity[donors]
        rgb = cloud.rgb[donors]
        label = cloud.label[donors]
    else:
        intensity = rng.random(k).astype(np.float32)
        rgb = np.full((k, 3), 128, dtype=np.uint8)
        label = np.zeros(k, dtype=np.uint16)
    xyz32 = pts.astype(np.float32)
    attacked = dio.PointCloud(
        np.concatenate([cloud.xyz, xyz32]),
        np.concatenate([cloud.rgb, rgb]),
        np.concatenate([cloud.intensity, intensity]),
        np.concatenate([cloud.label, label]),
        dict(cloud.extras))
    record = {"indices": list(range(n0, n0 + k)),
              "points": _points_payload(xyz32, rgb, intensity, label)}
    return attacked, record


def remove_points(cloud: dio.PointCloud, *, region=None, label=None,
                  world_from_sensor: np.ndarray | None = None) -> tuple[dio.PointCloud, dict]:
    """Delete points inside a world-frame AABB (min-incl/max-excl) or with
    a given label code. The record stores the original indices and payloads."""
    if (region is None) == (label is None):
        raise ValueError("pass exactly one of region or label")
    if region is not None:
        if world_from_sensor is None:
            raise ValueError("region removal needs the world_from_sensor transform")
        world = cloud.xyz.astype(np.float64) @ world_from_sensor[:3, :3].T \
            + world_from_sensor[:3, 3]
        lo = np.asarray(region[0], dtype=np.float64)
        hi = np.asarray(region[1], dtype=np.float64)
        hit = ((world >= lo) & (world < hi)).all(axis=1)
    else:
        hit = cloud.label == label
    idx = np.flatnonzero(hit)
    record = {"indices": idx.tolist(),
              "points": _points_payload(cloud.xyz[idx], cloud.rgb[idx],
                                        cloud.intensity[idx], cloud.label[idx])}
    return cloud.select(~hit), record


def perturb_points(cloud: dio.PointCloud, epsilon: float, rng) -> tuple[dio.PointCloud, dict]:
    """Displace every point by a uniform random vector of norm <= epsilon."""
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    n = len(cloud)
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = epsilon * rng.random(n) ** (1.0 / 3.0)
    disp = d * r[:, None]
    xyz = (cloud.xyz.astype(np.float64) + disp).astype(np.float32)
    attacked = dio.PointCloud(xyz, cloud.rgb, cloud.intensity, cloud.label,
                              dict(cloud.extras))
    record = {"displacements": [[float(v) for v in row] for row in disp],
              "norms": [float(v) for v in r]}
    return attacked, record


def _points_payload(xyz, rgb, intensity, label):
    return [[float(xyz[i, 0]), float(xyz[i, 1]), float(xyz[i, 2]),
             int(rgb[i, 0]), int(rgb[i, 1]), int(rgb[i, 2]),
             float(intensity[i]), int(label[i])]
            for i in range(len(label))]


def _payload_cloud(payload) -> dio.PointCloud:
    if not payload:
        return dio.PointCloud.empty()
    arr = np.asarray(payload, dtype=np.float64)
    return dio.PointCloud(arr[:, 0:3].astype(np.float32),
                          arr[:, 3:6].astype(np.uint8),
                          arr[:, 6].astype(np.float32),
                          arr[:, 7].astype(np.uint16))


def apply_frame_record(clean: dio.PointCloud, kind: str, rec: dict,
                       source_cloud: dio.PointCloud | None = None) -> dio.PointCloud:
    """Reproduce the attacked frame from the clean one plus its record."""
    if kind == "inject":
        extra = _payload_cloud(rec["points"])
        return dio.PointCloud(np.concatenate([clean.xyz, extra.xyz]),
                              np.concatenate([clean.rgb, extra.rgb]),
                              np.concatenate([clean.intensity, extra.intensity]),
                              np.concatenate([clean.label, extra.label]),
                              dict(clean.extras))
    if kind == "remove":
        keep = np.ones(len(clean), dtype=bool)
        keep[np.asarray(rec["indices"], dtype=np.int64)] = False
        return clean.select(keep)
    if kind == "replay":
        if source_cloud is None:
            raise ValueError("replay record application needs the source cloud")
        return source_cloud
    if kind == "perturb":
        disp = np.asarray(rec["displacements"], dtype=np.float64) \
            if rec["displacements"] else np.zeros((0, 3))
        xyz = (clean.xyz.astype(np.float64) + disp).astype(np.float32)
        return dio.PointCloud(xyz, clean.rgb, clean.intensity, clean.label,
                              dict(clean.extras))
    raise ValueError(f"unknown attack kind {kind!r}")


def invert_inject(attacked: dio.PointCloud, rec: dict) -> dio.PointCloud:
    """Delete the recorded injected indices, restoring the clean frame."""
    keep = np.ones(len(attacked), dtype=bool)
    keep[np.asarray(rec["indices"], dtype=np.int64)] = False
    return attacked.select(keep)


def restore_removed(attacked: dio.PointCloud, rec: dict) -> dio.PointCloud:
    """Re-insert recorded points at their original indices."""
    removed = _payload_cloud(rec["points"])
    idx = np.asarray(rec["indices"], dtype=np.int64)
    n = len(attacked) + len(removed)
    take_removed = np.zeros(n, dtype=bool)
    take_removed[idx] = True

    def weave(a, b):
        out = np.empty((n,) + a.shape[1:], dtype=a.dtype)
        out[take_removed] = b
        out[~take_removed] = a
        return out

    return dio.PointCloud(weave(attacked.xyz, removed.xyz),
                          weave(attacked.rgb, removed.rgb),
                          weave(attacked.intensity, removed.intensity),
                          weave(attacked.label, removed.label))


# ---------------------------------------------------------------------------
# Dataset-level driver


@dataclass
class AttackEvent:
    kind: str
    seed: int
    modality: str
    frames: dict  # frame index -> per-frame record dict

    def to_json(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "modality": self.modality,
                "frames": {str(k): v for k, v in self.frames.items()}}

    @classmethod
    def from_json(cls, d: dict) -> "AttackEvent":
        return cls(kind=d["kind"], seed=d["seed"], modality=d["modality"],
                   frames={int(k): v for k, v in d["frames"].items()})


@dataclass
class AttackRecord:
    events: list[AttackEvent] = field(default_factory=list)

    def injected_indices(self, frame: int, modality: str = "3d") -> np.ndarray:
        idx: list[int] = []
        for ev in self.events:
            if ev.kind == "inject" and ev.modality == modality and frame in ev.frames:
                idx.extend(ev.frames[frame]["indices"])
        return np.asarray(sorted(set(idx)), dtype=np.int64)

    def save(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(json.dumps(
            {"events": [ev.to_json() for ev in self.events]},
            indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "AttackRecord":
        data = json.loads(Path(path).read_text())
        return cls(events=[AttackEvent.from_json(e) for e in data["events"]])


def replay_frame(root, t: int, k: int, modality: str = "3d") -> AttackEvent:
    """Replace frame t's cloud with frame (t-k)'s; poses stay untouched."""
    if t - k < 0:
        raise ValueError(f"replay source t-k = {t - k} is before the first frame")
    src = dio.frame_path(root, modality, t - k)
    dst = dio.frame_path(root, modality, t)
    if not src.exists() or not dst.exists():
        raise FormatError(f"replay needs both {src} and {dst} on disk")
    shutil.copyfile(src, dst)
    return AttackEvent(kind="replay", seed=0, modality=modality,
                       frames={t: {"source": t - k}})


def apply_attacks(root, specs, modality: str = "3d", output=None) -> AttackRecord:
    """Apply attack specs to a dataset (in place, or to a copied output).

    Only point-cloud files are modified. Returns and also saves the
    ground-truth record under derived/attack_record.json.
    """
    root = Path(root)
    if output is not None:
        output = Path(output)
        if output.resolve() != root.resolve():
            if output.exists():
                raise ValueError(f"output {output} already exists")
            shutil.copytree(root, output)
        root = output

    manifest = dio.read_manifest(root)
    rows = dio.read_poses_csv(root / dio.POSES_NAME)
    poses = {r.frame: Pose6DoF(r.x, r.y, r.z, r.alpha, r.beta, r.gamma)
             for r in rows}
    sensor_key = {"3d": "lidar3d", "2d": "lidar2d"}[modality]
    mount_vals = manifest.get("sensors", {}).get(sensor_key, {}).get("mount")
    if mount_vals is None:
        raise FormatError(f"manifest has no mount for sensor {sensor_key!r}")
    mount = Pose6DoF(*mount_vals)

    record = AttackRecord()
    for spec in specs:
        event = AttackEvent(kind=spec.kind, seed=spec.seed, modality=modality,
                            frames={})
        for frame in spec.frames:
            path = dio.frame_path(root, modality, frame)
            if not path.exists():
                raise FormatError(f"attack targets missing frame file {path}")
            if spec.kind == "replay":
                ev = replay_frame(root, frame, spec.offset, modality)
                event.frames.update(ev.frames)
                continue
            cloud = dio.read_ply(path)
            rng = frame_rng(spec.seed, frame, "attack")
            if frame not in poses:
                raise FormatError(f"no pose for frame {frame}")
            world = pose_matrix(poses[frame]) @ pose_matrix(mount)
            sensor_from_world = np.linalg.inv(world)
            if spec.kind == "inject":
                attacked, rec = inject_points(cloud, spec, sensor_from_world, rng)
            elif spec.kind == "remove":
                attacked, rec = remove_points(cloud, region=spec.region,
                                              label=spec.label,
                                              world_from_sensor=world)
            else:  # perturb
                attacked, rec = perturb_points(cloud, spec.epsilon, rng)
            dio.write_ply(attacked, path, "binary")
            event.frames[frame] = rec
        record.events.append(event)

    record.save(root / dio.DERIVED_DIR / RECORD_NAME)
    return record


# ---------------------------------------------------------------------------
# Attack recipe files


def parse_attack_recipe(text: str) -> list[AttackSpec]:
    """Parse ``[attack KIND]`` sections into AttackSpec objects."""
    from .scene import _split_sections  # same sectioned key-value format

    specs = []
    for header, header_ln, entries in _split_sections(text):
        if header[0] != "attack" or len(header) != 2:
            raise SceneParseError("recipe sections must be [attack KIND]",
                                  line=header_ln)
        kind = header[1]
        kw: dict = {"kind": kind}
        position = ["0", "0", "0"]
        rotation = ["0", "0", "0"]
        for ln, key, val in entries:
            if key == "frames":
                kw["frames"] = _parse_frames(val, ln)
            elif key == "point_count":
                kw["point_count"] = _parse_int(val, ln, key)
            elif key == "template":
                if len(val) != 1 or val[0] not in TEMPLATES:
                    raise SceneParseError(f"template must be one of {TEMPLATES}",
                                          line=ln)
                kw["template"] = val[0]
            elif key == "position":
                position = _parse_nums(val, 3, ln, key)
            elif key == "rotation":
                rotation = _parse_nums(val, 3, ln, key)
            elif key == "extent":
                kw["extent"] = tuple(_parse_nums(val, 3, ln, key))
            elif key == "region":
                v = _parse_nums(val, 6, ln, key)
                kw["region"] = ((v[0], v[1], v[2]), (v[3], v[4], v[5]))
            elif key == "label":
                kw["label"] = _parse_int(val, ln, key)
            elif key == "offset":
                kw["offset"] = _parse_int(val, ln, key)
            elif key == "epsilon":
                v = _parse_nums(val, 1, ln, key)
                kw["epsilon"] = v[0]
            elif key == "seed":
                kw["seed"] = _parse_int(val, ln, key)
            else:
                raise SceneParseError(f"unknown recipe key {key!r}", line=ln)
        if "frames" not in kw:
            raise SceneParseError(f"[attack {kind}] missing frames", line=header_ln)
        if isinstance(position, list):
            kw["placement"] = Pose6DoF(*(float(v) for v in position),
                                       *(float(v) for v in rotation))
        try:
            specs.append(AttackSpec(**kw))
        except (ValueError, TypeError) as exc:
            raise SceneParseError(str(exc), line=header_ln)
    return specs


def _parse_frames(val, ln) -> tuple[int, ...]:
    frames: list[int] = []
    for tok in val:
        if ".." in tok:
            a, _, b = tok.partition("..")
            try:
                frames.extend(range(int(a), int(b) + 1))
            except ValueError:
                raise SceneParseError(f"bad frame range {tok!r}", line=ln)
        else:
            try:
                frames.append(int(tok))
            except ValueError:
                raise SceneParseError(f"bad frame index {tok!r}", line=ln)
    if not frames:
        raise SceneParseError("frames list is empty", line=ln)
    return tuple(frames)


def _parse_int(val, ln, key) -> int:
    if len(val) != 1:
        raise SceneParseError(f"{key} takes one integer", line=ln)
    try:
        return int(val[0])
    except ValueError:
        raise SceneParseError(f"bad integer for {key}: {val[0]!r}", line=ln)


def _parse_nums(val, count, ln, key):
    if len(val) != count:
        raise SceneParseError(f"{key} needs {count} numbers", line=ln)
    try:
        nums = [float(v) for v in val]
    except ValueError:
        raise SceneParseError(f"bad number in {key}", line=ln)
    if any(not math.isfinite(v) for v in nums):
        raise SceneParseError(f"{key} must be finite", line=ln)
    return nums


# ---------------------------------------------------------------------------
# Cross-modal defense


@dataclass
class DetectionResult:
    status: np.ndarray  # per-point codes: UNVERIFIABLE/CONSISTENT/FLAGGED/OCCLUDED
    tolerance: float

    @property
    def flags(self) -> np.ndarray:
        return self.status == FLAGGED

    @property
    def verifiable(self) -> np.ndarray:
        return (self.status == FLAGGED) | (self.status == CONSISTENT)


def detect_cross_modal(cloud_xyz, lidar_mount: Pose6DoF, depth_image,
                       camera_cfg: CameraConfig, vehicle_pose: Pose6DoF,
                       tolerance: float) -> DetectionResult:
    """Flag LiDAR points that float in front of the camera's depth surface.

    A point is flagged when its camera z-depth is more than ``tolerance``
    closer than every valid depth sample in the 3x3 neighborhood of its
    projected pixel: a real surface there would have been seen by the
    camera. Deterministic; no randomness anywhere.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    depth = np.asarray(depth_image, dtype=np.float64)
    h, w = depth.shape
    pts = np.asarray(cloud_xyz, dtype=np.float64).reshape(-1, 3)
    n = pts.shape[0]
    status = np.zeros(n, dtype=np.uint8)
    if n == 0:
        return DetectionResult(status, tolerance)

    lidar_world = pose_matrix(vehicle_pose) @ pose_matrix(lidar_mount)
    cam_world = pose_matrix(vehicle_pose) @ pose_matrix(camera_cfg.mount)
    cam_from_lidar = np.linalg.inv(cam_world) @ lidar_world
    pc = pts @ cam_from_lidar[:3, :3].T + cam_from_lidar[:3, 3]

    z = pc[:, 2]
    front = z > 1e-9
    u = np.zeros(n)
    v = np.zeros(n)
    u[front] = camera_cfg.fx * pc[front, 0] / z[front] + camera_cfg.cx
    v[front] = camera_cfg.fy * pc[front, 1] / z[front] + camera_cfg.cy
    ui = np.rint(u).astype(np.int64)
    vi = np.rint(v).astype(np.int64)
    inside = front & (ui >= 0) & (ui < w) & (vi >= 0) & (vi < h)

    # Min over the 3x3 neighborhood, treating sentinel pixels as +inf.
    dvalid = np.where(depth > 0.0, depth, np.inf)
    padded = np.full((h + 2, w + 2), np.inf)
    padded[1:-1, 1:-1] = dvalid
    neigh_min = np.full((h, w), np.inf)
    for dy in range(3):
        for dx in range(3):
            np.minimum(neigh_min, padded[dy:dy + h, dx:dx + w], out=neigh_min)

    idx = np.flatnonzero(inside)
    center = depth[vi[idx], ui[idx]]
    valid_center = center > 0.0
    idx = idx[valid_center]
    center = center[valid_center]
    zi = z[idx]
    nm = neigh_min[vi[idx], ui[idx]]

    flagged = zi + tolerance < nm
    occluded = ~flagged & (zi > center + tolerance)
    status[idx[flagged]] = FLAGGED
    status[idx[occluded]] = OCCLUDED
    status[idx[~flagged & ~occluded]] = CONSISTENT
    return DetectionResult(status, tolerance)


# ---------------------------------------------------------------------------
# Scoring


@dataclass
class FrameScore:
    frame: int
    tp: int
    fp: int
    fn: int
    n_verifiable: int
    n_unverifiable: int
    precision: float | None
    recall: float | None
    f1: float | None


@dataclass
class DefenseReport:
    tolerance: float
    frames: list[FrameScore] = field(default_factory=list)

    def totals(self) -> FrameScore:
        tp = sum(f.tp for f in self.frames)
        fp = sum(f.fp for f in self.frames)
        fn = sum(f.fn for f in self.frames)
        nv = sum(f.n_verifiable for f in self.frames)
        nu = sum(f.n_unverifiable for f in self.frames)
        p, r, f1 = _prf(tp, fp, fn)
        return FrameScore(frame=-1, tp=tp, fp=fp, fn=fn, n_verifiable=nv,
                          n_unverifiable=nu, precision=p, recall=r, f1=f1)

    def summary(self) -> str:
        t = self.totals()
        fmt = lambda v: "undefined" if v is None else f"{v:.4f}"  # noqa: E731
        return (f"defense @ tolerance {self.tolerance} m over "
                f"{len(self.frames)} frames: tp={t.tp} fp={t.fp} fn={t.fn} "
                f"precision={fmt(t.precision)} recall={fmt(t.recall)} "
                f"f1={fmt(t.f1)} verifiable={t.n_verifiable} "
                f"unverifiable={t.n_unverifiable}")


def _prf(tp: int, fp: int, fn: int):
    precision = tp / (tp + fp) if (tp + fp) > 0 else None
    recall = tp / (tp + fn) if (tp + fn) > 0 else None
    if precision is None or recall is None or (precision + recall) == 0:
        f1 = None
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return precision, recall, f1


def score_detection(frame: int, detection: DetectionResult,
                    attacked_indices) -> FrameScore:
    """Confusion counts over verifiable points; undefined ratios stay None."""
    n = detection.status.shape[0]
    truth = np.zeros(n, dtype=bool)
    attacked_indices = np.asarray(attacked_indices, dtype=np.int64)
    truth[attacked_indices] = True
    ver = detection.verifiable
    flags = detection.flags
    tp = int((flags & truth & ver).sum())
    fp = int((flags & ~truth & ver).sum())
    fn = int((~flags & truth & ver).sum())
    p, r, f1 = _prf(tp, fp, fn)
    return FrameScore(frame=frame, tp=tp, fp=fp, fn=fn,
                      n_verifiable=int(ver.sum()),
                      n_unverifiable=int(n - ver.sum()),
                      precision=p, recall=r, f1=f1)


def write_defense_report_csv(report: DefenseReport, path) -> None:
    lines = ["frame,tp,fp,fn,precision,recall,f1"]
    rows = list(report.frames) + [report.totals()]
    for f in rows:
        name = "total" if f.frame < 0 else str(f.frame)
        cells = [name, str(f.tp), str(f.fp), str(f.fn)]
        for v in (f.precision, f.recall, f.f1):
            cells.append("" if v is None else repr(float(v)))
        lines.append(",".join(cells))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n")


def defend_dataset(root, tolerance: float = 0.05, modality: str = "3d",
                   record: AttackRecord | None = None) -> DefenseReport:
    """Run the cross-modal check on every frame of a dataset."""
    root = Path(root)
    manifest = dio.read_manifest(root)
    rows = dio.read_poses_csv(root / dio.POSES_NAME)
    sensor_key = {"3d": "lidar3d", "2d": "lidar2d"}[modality]
    mount_vals = manifest.get("sensors", {}).get(sensor_key, {}).get("mount")
    cam_meta = manifest.get("sensors", {}).get("camera")
    if mount_vals is None or cam_meta is None:
        raise FormatError("manifest lacks lidar mount or camera config")
    mount = Pose6DoF(*mount_vals)
    cam_cfg = camera_from_dict(cam_meta)

    if record is None:
        rec_path = root / dio.DERIVED_DIR / RECORD_NAME
        record = AttackRecord.load(rec_path) if rec_path.exists() else AttackRecord()

    report = DefenseReport(tolerance=tolerance)
    for row in rows:
        frame = row.frame
        cloud_path = dio.frame_path(root, modality, frame)
        depth_path = dio.frame_path(root, "depth", frame)
        if not cloud_path.exists() or not depth_path.exists():
            continue
        cloud = dio.read_ply(cloud_path)
        depth, _ = dio.read_depth_pgm(depth_path)
        pose = Pose6DoF(row.x, row.y, row.z, row.alpha, row.beta, row.gamma)
        det = detect_cross_modal(cloud.xyz, mount, depth, cam_cfg, pose, tolerance)
        report.frames.append(score_detection(
            frame, det, record.injected_indices(frame, modality)))
    return report


def camera_from_dict(d: dict) -> CameraConfig:
    mount = Pose6DoF(*d["mount"])
    return CameraConfig(width=int(d["width"]), height=int(d["height"]),
                        fx=float(d["fx"]), fy=float(d["fy"]),
                        cx=float(d["cx"]), cy=float(d["cy"]),
                        max_depth=float(d["max_depth"]),
                        supersample=int(d.get("supersample", 1)), mount=mount)
