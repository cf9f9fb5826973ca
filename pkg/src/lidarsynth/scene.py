"""Scene description: labeled objects, materials, meshes, trajectories.

The scene file is a line-oriented text format with bracketed sections
(``[material NAME]``, ``[object NAME]``, ``[trajectory]``,
``[sensor KIND]``); see docs/scene_format.md for the grammar. ``#``
starts a comment. Unknown sections or keys are rejected with the
offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import SceneParseError
from .geometry import Bvh, Pose6DoF, build_bvh, euler_to_matrix

OBJECT_CLASSES = ("ground", "building", "tree", "car", "person", "other")

# 16-bit class codes stored in the per-point label channel; 0 = unlabeled.
CLASS_CODES = {name: i + 1 for i, name in enumerate(OBJECT_CLASSES)}
CODE_CLASSES = {v: k for k, v in CLASS_CODES.items()}
UNLABELED = 0


@dataclass(frozen=True)
class Material:
    name: str
    reflectivity: float
    rgb: tuple[int, int, int]

    def __post_init__(self):
        if not (0.0 <= self.reflectivity <= 1.0):
            raise ValueError(f"reflectivity must be in [0, 1], got {self.reflectivity}")
        if len(self.rgb) != 3 or any(not (0 <= c <= 255) for c in self.rgb):
            raise ValueError(f"rgb must be three 8-bit channels, got {self.rgb}")


@dataclass
class TriangleMesh:
    vertices: np.ndarray  # (V, 3) float64
    triangles: np.ndarray  # (T, 3) int32 vertex indices


@dataclass
class SceneObject:
    object_id: int
    name: str
    category: str  # one of OBJECT_CLASSES
    kind: str  # box | sphere | plane | mesh
    params: tuple
    placement: Pose6DoF
    material: str
    label: str = ""

    @property
    def class_code(self) -> int:
        return CLASS_CODES[self.category]


@dataclass(frozen=True)
class TrajectorySpec:
    waypoints: tuple[Pose6DoF, ...]
    frame_count: int
    dt: float

    def __post_init__(self):
        if len(self.waypoints) < 1:
            raise ValueError("trajectory needs at least one waypoint")
        if self.frame_count < 1:
            raise ValueError("frame_count must be >= 1")
        if not (self.dt > 0.0 and math.isfinite(self.dt)):
            raise ValueError("dt must be a positive finite number of seconds")


@dataclass(frozen=True)
class TrajectorySample:
    frame: int
    time_offset: float  # seconds from the sequence start
    pose: Pose6DoF


@dataclass
class SceneModel:
    objects: list[SceneObject]
    materials: dict[str, Material]
    triangles: np.ndarray  # (T, 3, 3) float64, world frame
    tri_object: np.ndarray  # (T,) int64 object index
    tri_material: np.ndarray  # (T,) int64 material index
    bvh: Bvh
    world_min: np.ndarray
    world_max: np.ndarray
    material_names: list[str]
    material_reflectivity: np.ndarray  # (M,)
    material_rgb: np.ndarray  # (M, 3) uint8
    object_class_code: np.ndarray  # (O,) uint16
    trajectory: TrajectorySpec | None = None
    sensor_sections: list = field(default_factory=list)

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def class_histogram(self) -> dict[str, int]:
        hist = {c: 0 for c in OBJECT_CLASSES}
        for obj in self.objects:
            hist[obj.category] += 1
        return hist


# ---------------------------------------------------------------------------
# Tessellation


def tessellate_box(sx: float, sy: float, sz: float) -> np.ndarray:
    """12 triangles of an axis-aligned box centered at the origin."""
    hx, hy, hz = sx / 2.0, sy / 2.0, sz / 2.0
    v = np.array([
        [-hx, -hy, -hz], [hx, -hy, -hz], [hx, hy, -hz], [-hx, hy, -hz],
        [-hx, -hy, hz], [hx, -hy, hz], [hx, hy, hz], [-hx, hy, hz],
    ])
    quads = [
        (0, 3, 2, 1),  # bottom (-z)
        (4, 5, 6, 7),  # top (+z)
        (0, 1, 5, 4),  # -y
        (2, 3, 7, 6),  # +y
        (1, 2, 6, 5),  # +x
        (3, 0, 4, 7),  # -x
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((v[a], v[b], v[c]))
        tris.append((v[a], v[c], v[d]))
    return np.array(tris)


def tessellate_plane(ex: float, ey: float) -> np.ndarray:
    """2 triangles covering an ex-by-ey rectangle in the local z=0 plane."""
    hx, hy = ex / 2.0, ey / 2.0
    v = np.array([[-hx, -hy, 0.0], [hx, -hy, 0.0], [hx, hy, 0.0], [-hx, hy, 0.0]])
    return np.array([(v[0], v[1], v[2]), (v[0], v[2], v[3])])


def tessellate_sphere(radius: float, sectors: int = 16, stacks: int = 17) -> np.ndarray:
    """Lat-long sphere with 2 * sectors * (stacks - 1) triangles.

    The default (16, 17) yields 512 triangles, keeping chord error under
    a centimeter for radii up to about 2 m.
    """
    if sectors < 3 or stacks < 2:
        raise ValueError("need sectors >= 3 and stacks >= 2")
    phi = np.linspace(0.0, math.pi, stacks + 1)
    theta = np.linspace(0.0, math.tau, sectors + 1)
    tris = []
    for i in range(stacks):
        z0, z1 = radius * math.cos(phi[i]), radius * math.cos(phi[i + 1])
        r0, r1 = radius * math.sin(phi[i]), radius * math.sin(phi[i + 1])
        for j in range(sectors):
            c0, s0 = math.cos(theta[j]), math.sin(theta[j])
            c1, s1 = math.cos(theta[j + 1]), math.sin(theta[j + 1])
            p00 = (r0 * c0, r0 * s0, z0)
            p01 = (r0 * c1, r0 * s1, z0)
            p10 = (r1 * c0, r1 * s0, z1)
            p11 = (r1 * c1, r1 * s1, z1)
            if i > 0:
                tris.append((p00, p10, p01))
            if i < stacks - 1:
                tris.append((p01, p10, p11))
    return np.array(tris)


def tessellate_object(obj: SceneObject, meshes: dict[int, TriangleMesh] | None = None) -> np.ndarray:
    if obj.kind == "box":
        local = tessellate_box(*obj.params)
    elif obj.kind == "plane":
        local = tessellate_plane(*obj.params)
    elif obj.kind == "sphere":
        local = tessellate_sphere(*obj.params)
    elif obj.kind == "mesh":
        mesh = meshes[obj.object_id]
        local = mesh.vertices[mesh.triangles]
    else:
        raise ValueError(f"unknown geometry kind {obj.kind!r}")
    R = euler_to_matrix(obj.placement)
    t = obj.placement.translation
    flat = local.reshape(-1, 3) @ R.T + t
    return flat.reshape(-1, 3, 3)


# ---------------------------------------------------------------------------
# OBJ subset loader


def load_obj(obj_text: str) -> TriangleMesh:
    """Parse an ASCII OBJ subset: ``v`` and ``f`` (fan-triangulated).

    Vertex references may carry /vt/vn suffixes; negative indices are
    relative per the OBJ spec. Every other directive is ignored.
    """
    vertices: list[tuple[float, float, float]] = []
    faces: list[tuple[int, ...]] = []
    for ln, raw in enumerate(obj_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise SceneParseError("vertex needs 3 coordinates", line=ln)
            try:
                x, y, z = (float(p) for p in parts[1:4])
            except ValueError:
                raise SceneParseError(f"bad vertex coordinates {parts[1:4]}", line=ln)
            if not all(math.isfinite(c) for c in (x, y, z)):
                raise SceneParseError("vertex coordinates must be finite", line=ln)
            vertices.append((x, y, z))
        elif tag == "f":
            if len(parts) < 4:
                raise SceneParseError("face needs at least 3 vertices", line=ln)
            idx = []
            for p in parts[1:]:
                ref = p.split("/", 1)[0]
                try:
                    i = int(ref)
                except ValueError:
                    raise SceneParseError(f"bad face index {p!r}", line=ln)
                if i < 0:
                    i = len(vertices) + i + 1
                if not (1 <= i <= len(vertices)):
                    raise SceneParseError(
                        f"face index {ref} out of range (have {len(vertices)} vertices)",
                        line=ln)
                idx.append(i - 1)
            faces.append(tuple(idx))
        # all other directives ignored
    tris = []
    for f in faces:
        for k in range(1, len(f) - 1):
            tris.append((f[0], f[k], f[k + 1]))
    verts = np.array(vertices, dtype=np.float64) if vertices else np.zeros((0, 3))
    tri = np.array(tris, dtype=np.int32) if tris else np.zeros((0, 3), dtype=np.int32)
    return TriangleMesh(vertices=verts, triangles=tri)


# ---------------------------------------------------------------------------
# Trajectory sampling


def sample_trajectory(spec: TrajectorySpec, start_offset: float = 0.0) -> list[TrajectorySample]:
    """Sample ``frame_count`` poses along the waypoint polyline.

    Positions advance at a constant speed (arc-length-uniform parameter);
    each angle follows the shortest angular path within its segment.
    Frame indices start at 0; time offsets are frame * dt.
    """
    wps = spec.waypoints
    n = spec.frame_count
    pos = np.array([w.translation for w in wps])
    ang = np.array([w.angles for w in wps])
    seg = np.linalg.norm(np.diff(pos, axis=0), axis=1) if len(wps) > 1 else np.zeros(0)
    total = float(seg.sum())
    cum = np.concatenate([[0.0], np.cumsum(seg)])

    samples = []
    for k in range(n):
        frac = 0.0 if n == 1 else k / (n - 1)
        if len(wps) == 1:
            pose = wps[0]
        elif total > 0.0:
            s = frac * total
            i = int(np.searchsorted(cum, s, side="right")) - 1
            i = min(max(i, 0), len(seg) - 1)
            u = 0.0 if seg[i] == 0.0 else (s - cum[i]) / seg[i]
            pose = _lerp_pose(pos[i], pos[i + 1], ang[i], ang[i + 1], u)
        else:
            # Degenerate polyline (all waypoints at one position): spread the
            # parameter uniformly over waypoint indices so pure-rotation
            # trajectories still interpolate.
            s = frac * (len(wps) - 1)
            i = min(int(math.floor(s)), len(wps) - 2)
            u = s - i
            pose = _lerp_pose(pos[i], pos[i + 1], ang[i], ang[i + 1], u)
        samples.append(TrajectorySample(frame=k, time_offset=start_offset + k * spec.dt,
                                        pose=pose))
    return samples


def _lerp_pose(p0, p1, a0, a1, u: float) -> Pose6DoF:
    p = p0 + (p1 - p0) * u
    angles = []
    for x0, x1 in zip(a0, a1):
        d = math.remainder(x1 - x0, math.tau)
        angles.append(x0 + d * u)
    return Pose6DoF(p[0], p[1], p[2], *angles)


# ---------------------------------------------------------------------------
# Scene file parser

_SECTION_KINDS = ("material", "object", "trajectory", "sensor")

_OBJECT_KEYS = {"class", "label", "material", "position", "rotation",
                "rotation_deg", "box", "sphere", "plane", "mesh"}
_MATERIAL_KEYS = {"reflectivity", "rgb"}
_TRAJECTORY_KEYS = {"frames", "dt", "waypoint"}
# sensor keys are validated by the sensors module (see configs_from_sections)


def _floats(parts, count, ln, what):
    if len(parts) != count:
        raise SceneParseError(f"{what} needs {count} numbers, got {len(parts)}", line=ln)
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise SceneParseError(f"bad number in {what}: {parts}", line=ln)
    if not all(math.isfinite(v) for v in vals):
        raise SceneParseError(f"{what} must be finite", line=ln)
    return vals


def _parse_pose(pos_parts, rot_parts, ln, degrees=False) -> Pose6DoF:
    x, y, z = _floats(pos_parts, 3, ln, "position")
    r, p, yw = _floats(rot_parts, 3, ln, "rotation")
    if degrees:
        r, p, yw = (math.radians(v) for v in (r, p, yw))
    return Pose6DoF(x, y, z, r, p, yw)


def parse_scene(config_text: str, base_dir: str | Path | None = None) -> SceneModel:
    """Parse and fully validate a scene file; tessellate and build the BVH."""
    sections = _split_sections(config_text)

    materials: dict[str, Material] = {}
    material_lines: dict[str, int] = {}
    objects: list[SceneObject] = []
    meshes: dict[int, TriangleMesh] = {}
    trajectory: TrajectorySpec | None = None
    sensor_sections = []

    for header, header_ln, entries in sections:
        kind = header[0]
        if kind == "material":
            if len(header) != 2:
                raise SceneParseError("usage: [material NAME]", line=header_ln)
            name = header[1]
            if name in materials:
                raise SceneParseError(f"duplicate material {name!r}", line=header_ln)
            materials[name] = _parse_material(name, entries, header_ln)
            material_lines[name] = header_ln
        elif kind == "object":
            if len(header) != 2:
                raise SceneParseError("usage: [object NAME]", line=header_ln)
            obj, mesh = _parse_object(len(objects), header[1], entries, header_ln, base_dir)
            if mesh is not None:
                meshes[obj.object_id] = mesh
            objects.append(obj)
        elif kind == "trajectory":
            if trajectory is not None:
                raise SceneParseError("duplicate [trajectory] section", line=header_ln)
            trajectory = _parse_trajectory(entries, header_ln)
        elif kind == "sensor":
            if len(header) != 2:
                raise SceneParseError("usage: [sensor KIND]", line=header_ln)
            sensor_sections.append((header[1], header_ln, entries))
        else:
            raise SceneParseError(f"unknown section kind {kind!r}", line=header_ln)

    # Validate sensor sections eagerly so parse_scene rejects unknown keys.
    from . import sensors as _sensors  # deferred: sensors depends on scene types

    _sensors.configs_from_sections(sensor_sections)

    for obj in objects:
        if obj.material not in materials:
            raise SceneParseError(
                f"object {obj.name!r} references undefined material {obj.material!r}")

    mat_names = sorted(materials)
    mat_index = {m: i for i, m in enumerate(mat_names)}

    tri_chunks, tri_obj, tri_mat = [], [], []
    for i, obj in enumerate(objects):
        tris = tessellate_object(obj, meshes)
        if tris.shape[0] == 0:
            raise SceneParseError(f"object {obj.name!r} has no triangles")
        tri_chunks.append(tris)
        tri_obj.append(np.full(tris.shape[0], i, dtype=np.int64))
        tri_mat.append(np.full(tris.shape[0], mat_index[obj.material], dtype=np.int64))

    if tri_chunks:
        triangles = np.concatenate(tri_chunks)
        tri_object = np.concatenate(tri_obj)
        tri_material = np.concatenate(tri_mat)
        world_min = triangles.reshape(-1, 3).min(axis=0)
        world_max = triangles.reshape(-1, 3).max(axis=0)
    else:
        triangles = np.zeros((0, 3, 3))
        tri_object = np.zeros(0, dtype=np.int64)
        tri_material = np.zeros(0, dtype=np.int64)
        world_min = np.zeros(3)
        world_max = np.zeros(3)

    return SceneModel(
        objects=objects,
        materials=materials,
        triangles=triangles,
        tri_object=tri_object,
        tri_material=tri_material,
        bvh=build_bvh(triangles),
        world_min=world_min,
        world_max=world_max,
        material_names=mat_names,
        material_reflectivity=np.array([materials[m].reflectivity for m in mat_names]),
        material_rgb=np.array([materials[m].rgb for m in mat_names], dtype=np.uint8)
        if mat_names else np.zeros((0, 3), dtype=np.uint8),
        object_class_code=np.array([o.class_code for o in objects], dtype=np.uint16)
        if objects else np.zeros(0, dtype=np.uint16),
        trajectory=trajectory,
        sensor_sections=sensor_sections,
    )


def load_scene(path: str | Path) -> SceneModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SceneParseError(f"cannot read scene file: {exc}", path=str(path))
    return parse_scene(text, base_dir=path.parent)


def _split_sections(text: str):
    """Yield (header_tokens, header_line, [(line_no, key, value_parts)])."""
    sections = []
    current = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise SceneParseError("unterminated section header", line=ln)
            header = line[1:-1].split()
            if not header:
                raise SceneParseError("empty section header", line=ln)
            current = (header, ln, [])
            sections.append(current)
            continue
        if current is None:
            raise SceneParseError(f"content before first section: {line!r}", line=ln)
        parts = line.split()
        current[2].append((ln, parts[0], parts[1:]))
    return sections


def _parse_material(name, entries, header_ln) -> Material:
    reflectivity = None
    rgb = None
    for ln, key, val in entries:
        if key == "reflectivity":
            reflectivity = _floats(val, 1, ln, "reflectivity")[0]
            if not (0.0 <= reflectivity <= 1.0):
                raise SceneParseError("reflectivity must be in [0, 1]", line=ln)
        elif key == "rgb":
            vals = _floats(val, 3, ln, "rgb")
            if any(v != int(v) or not (0 <= v <= 255) for v in vals):
                raise SceneParseError("rgb channels must be integers in [0, 255]", line=ln)
            rgb = tuple(int(v) for v in vals)
        else:
            raise SceneParseError(f"unknown material key {key!r}", line=ln)
    if reflectivity is None:
        raise SceneParseError(f"material {name!r} missing reflectivity", line=header_ln)
    if rgb is None:
        raise SceneParseError(f"material {name!r} missing rgb", line=header_ln)
    return Material(name=name, reflectivity=reflectivity, rgb=rgb)


def _parse_object(object_id, name, entries, header_ln, base_dir):
    category = None
    material = None
    label = name
    position = ["0", "0", "0"]
    rotation = ["0", "0", "0"]
    rot_deg = False
    geometry = None
    geometry_ln = header_ln
    mesh = None
    pose_ln = header_ln

    for ln, key, val in entries:
        if key not in _OBJECT_KEYS:
            raise SceneParseError(f"unknown object key {key!r}", line=ln)
        if key == "class":
            if len(val) != 1 or val[0] not in OBJECT_CLASSES:
                raise SceneParseError(
                    f"class must be one of {OBJECT_CLASSES}, got {' '.join(val)!r}", line=ln)
            category = val[0]
        elif key == "label":
            label = " ".join(val)
        elif key == "material":
            if len(val) != 1:
                raise SceneParseError("material takes one name", line=ln)
            material = val[0]
        elif key == "position":
            _floats(val, 3, ln, "position")
            position = val
            pose_ln = ln
        elif key in ("rotation", "rotation_deg"):
            _floats(val, 3, ln, "rotation")
            rotation = val
            rot_deg = key == "rotation_deg"
            pose_ln = ln
        else:  # geometry keys
            if geometry is not None:
                raise SceneParseError("object already has a geometry", line=ln)
            geometry_ln = ln
            if key == "box":
                sx, sy, sz = _floats(val, 3, ln, "box size")
                if min(sx, sy, sz) <= 0:
                    raise SceneParseError("box dimensions must be positive", line=ln)
                geometry = ("box", (sx, sy, sz))
            elif key == "plane":
                ex, ey = _floats(val, 2, ln, "plane extent")
                if min(ex, ey) <= 0:
                    raise SceneParseError("plane extent must be positive", line=ln)
                geometry = ("plane", (ex, ey))
            elif key == "sphere":
                if len(val) == 1:
                    (r,) = _floats(val, 1, ln, "sphere radius")
                    sectors, stacks = 16, 17
                elif len(val) == 3:
                    r, sectors, stacks = _floats(val, 3, ln, "sphere")
                    sectors, stacks = int(sectors), int(stacks)
                else:
                    raise SceneParseError("usage: sphere RADIUS [SECTORS STACKS]", line=ln)
                if r <= 0:
                    raise SceneParseError("sphere radius must be positive", line=ln)
                geometry = ("sphere", (r, sectors, stacks))
            elif key == "mesh":
                if len(val) != 1:
                    raise SceneParseError("mesh takes one path", line=ln)
                if base_dir is None:
                    raise SceneParseError("mesh objects need a scene base directory", line=ln)
                mesh_path = Path(base_dir) / val[0]
                try:
                    mesh_text = mesh_path.read_text()
                except OSError as exc:
                    raise SceneParseError(f"cannot read mesh {val[0]!r}: {exc}", line=ln)
                mesh = load_obj(mesh_text)
                if mesh.triangles.shape[0] == 0:
                    raise SceneParseError(f"mesh {val[0]!r} has no faces", line=ln)
                geometry = ("mesh", (val[0],))

    if category is None:
        raise SceneParseError(f"object {name!r} missing class", line=header_ln)
    if material is None:
        raise SceneParseError(f"object {name!r} missing material", line=header_ln)
    if geometry is None:
        raise SceneParseError(f"object {name!r} missing geometry", line=header_ln)
    placement = _parse_pose(position, rotation, pose_ln, degrees=rot_deg)
    obj = SceneObject(object_id=object_id, name=name, category=category,
                      kind=geometry[0], params=geometry[1], placement=placement,
                      material=material, label=label)
    return obj, mesh


def _parse_trajectory(entries, header_ln) -> TrajectorySpec:
    frames = None
    dt = None
    waypoints = []
    for ln, key, val in entries:
        if key == "frames":
            vals = _floats(val, 1, ln, "frames")
            if vals[0] != int(vals[0]) or vals[0] < 1:
                raise SceneParseError("frames must be a positive integer", line=ln)
            frames = int(vals[0])
        elif key == "dt":
            dt = _floats(val, 1, ln, "dt")[0]
            if dt <= 0:
                raise SceneParseError("dt must be positive", line=ln)
        elif key == "waypoint":
            vals = _floats(val, 6, ln, "waypoint")
            waypoints.append(Pose6DoF(*vals))
        else:
            raise SceneParseError(f"unknown trajectory key {key!r}", line=ln)
    if frames is None:
        raise SceneParseError("trajectory missing frames", line=header_ln)
    if dt is None:
        raise SceneParseError("trajectory missing dt", line=header_ln)
    if not waypoints:
        raise SceneParseError("trajectory needs at least one waypoint", line=header_ln)
    return TrajectorySpec(waypoints=tuple(waypoints), frame_count=frames, dt=dt)
