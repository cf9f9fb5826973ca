"""Readers and writers for the dataset surface.

Formats (full byte layouts in docs/dataset_formats.md):

* poses.csv   header ``timestamp,frame,x,y,z,alpha,beta,gamma``; reals in
              shortest round-trip form, integral values without a decimal
              point; ``#`` lines are comments.
* PLY         properties x y z (float32), red green blue (uchar),
              intensity (float32), label (ushort); ascii or binary LE.
* PCD         v0.7, FIELDS x y z rgb intensity label; rgb is the packed
              24-bit value, bit-cast to float32 in binary mode and written
              as a decimal integer in ascii mode.
* PGM         P5, 16-bit big-endian, depth quantized by a scale factor
              recorded in a ``# scale`` header comment.
* PPM         P6, 8-bit.
* manifest    canonical JSON with a sha256 inventory of the payload.

Binary round-trips are bit-exact; ascii round-trips are value-exact.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import FormatError

SCHEMA_VERSION = 1
DEFAULT_START_TIME = "2025-01-01T00:00:00Z"
DEFAULT_DEPTH_SCALE = 1000.0  # millimeter depth quantization

POSES_HEADER = "timestamp,frame,x,y,z,alpha,beta,gamma"
POSES_NAME = "poses.csv"
MANIFEST_NAME = "manifest"
DERIVED_DIR = "derived"

# Fixed directory layout of a dataset bundle.
MODALITY_DIRS = {"3d": "frames/3d", "2d": "frames/2d",
                 "depth": "images/depth", "rgb": "images/rgb"}
MODALITY_EXT = {"3d": "ply", "2d": "ply", "depth": "pgm", "rgb": "ppm"}


def frame_filename(index: int, ext: str) -> str:
    return f"{index:06d}.{ext}"


def frame_path(root, modality: str, index: int) -> Path:
    return Path(root) / MODALITY_DIRS[modality] / frame_filename(
        index, MODALITY_EXT[modality])


# ---------------------------------------------------------------------------
# Number and timestamp rendering


def format_float(v: float) -> str:
    """Shortest decimal that parses back to exactly ``v``; integral values
    drop the decimal point (0.0 -> "0")."""
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"cannot render non-finite value {v!r}")
    if v == 0.0:
        return "0"
    if v == int(v) and abs(v) < 1e16:
        return str(int(v))
    return repr(v)


def format_float32(v) -> str:
    """Shortest decimal that parses back to exactly the float32 ``v``."""
    v = np.float32(v)
    if not np.isfinite(v):
        raise ValueError(f"cannot render non-finite value {v!r}")
    if v == np.float32(0.0):
        return "0"
    f = float(v)
    if f == int(f) and abs(f) < 1e16:
        return str(int(f))
    return np.format_float_positional(v, unique=True, trim="-")


def parse_iso8601(s: str) -> datetime:
    try:
        return datetime.fromisoformat(s.replace("Z", "+00:00"))
    except ValueError:
        raise FormatError(f"not an ISO 8601 timestamp: {s!r}")


def format_timestamp(start: datetime | str, offset_s: float) -> str:
    """start + offset, rendered as UTC ISO 8601 with a ``Z`` suffix."""
    if isinstance(start, str):
        start = parse_iso8601(start)
    t = start + timedelta(microseconds=round(offset_s * 1e6))
    t = t.astimezone(timezone.utc)
    base = t.strftime("%Y-%m-%dT%H:%M:%S")
    if t.microsecond:
        base += f".{t.microsecond:06d}"
    return base + "Z"


# ---------------------------------------------------------------------------
# Point cloud container

PLY_PROPERTIES = (("x", "float"), ("y", "float"), ("z", "float"),
                  ("red", "uchar"), ("green", "uchar"), ("blue", "uchar"),
                  ("intensity", "float"), ("label", "ushort"))


@dataclass
class PointCloud:
    """File-level point records: float32 coordinates and intensity, 8-bit
    color, 16-bit class label, plus optional named uint32 extras."""

    xyz: np.ndarray
    rgb: np.ndarray
    intensity: np.ndarray
    label: np.ndarray
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.xyz = np.ascontiguousarray(self.xyz, dtype=np.float32).reshape(-1, 3)
        n = self.xyz.shape[0]
        self.rgb = np.ascontiguousarray(self.rgb, dtype=np.uint8).reshape(n, 3)
        self.intensity = np.ascontiguousarray(self.intensity, dtype=np.float32).reshape(n)
        self.label = np.ascontiguousarray(self.label, dtype=np.uint16).reshape(n)
        self.extras = {k: np.ascontiguousarray(v, dtype=np.uint32).reshape(n)
                       for k, v in sorted(self.extras.items())}

    def __len__(self) -> int:
        return int(self.xyz.shape[0])

    @classmethod
    def empty(cls, extras: tuple[str, ...] = ()) -> "PointCloud":
        return cls(np.zeros((0, 3), np.float32), np.zeros((0, 3), np.uint8),
                   np.zeros(0, np.float32), np.zeros(0, np.uint16),
                   {k: np.zeros(0, np.uint32) for k in extras})

    def select(self, mask) -> "PointCloud":
        return PointCloud(self.xyz[mask], self.rgb[mask], self.intensity[mask],
                          self.label[mask],
                          {k: v[mask] for k, v in self.extras.items()})


def cloud_from_frame(frame) -> PointCloud:
    """Quantize an in-memory sensor frame to the file-level record layout."""
    return PointCloud(xyz=frame.points, rgb=frame.rgb,
                      intensity=frame.intensity, label=frame.label)


def _check_writable_cloud(cloud: PointCloud):
    if len(cloud) and not np.isfinite(cloud.xyz).all():
        raise ValueError("point coordinates must be finite")
    if len(cloud) and not np.isfinite(cloud.intensity).all():
        raise ValueError("point intensities must be finite")


def _cloud_struct_dtype(extras: tuple[str, ...]) -> np.dtype:
    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4"),
              ("red", "u1"), ("green", "u1"), ("blue", "u1"),
              ("intensity", "<f4"), ("label", "<u2")]
    fields += [(name, "<u4") for name in extras]
    return np.dtype(fields)


def _cloud_to_struct(cloud: PointCloud) -> np.ndarray:
    extras = tuple(cloud.extras)
    arr = np.empty(len(cloud), dtype=_cloud_struct_dtype(extras))
    arr["x"], arr["y"], arr["z"] = cloud.xyz[:, 0], cloud.xyz[:, 1], cloud.xyz[:, 2]
    arr["red"], arr["green"], arr["blue"] = cloud.rgb[:, 0], cloud.rgb[:, 1], cloud.rgb[:, 2]
    arr["intensity"] = cloud.intensity
    arr["label"] = cloud.label
    for name in extras:
        arr[name] = cloud.extras[name]
    return arr


def _cloud_from_struct(arr: np.ndarray, extras: tuple[str, ...]) -> PointCloud:
    xyz = np.stack([arr["x"], arr["y"], arr["z"]], axis=1)
    rgb = np.stack([arr["red"], arr["green"], arr["blue"]], axis=1)
    return PointCloud(xyz, rgb, arr["intensity"].copy(), arr["label"].copy(),
                      {name: arr[name].copy() for name in extras})


# ---------------------------------------------------------------------------
# PLY


def write_ply(cloud: PointCloud, path, mode: str = "binary") -> None:
    if mode not in ("binary", "ascii"):
        raise ValueError("mode must be 'binary' or 'ascii'")
    _check_writable_cloud(cloud)
    fmt = "binary_little_endian" if mode == "binary" else "ascii"
    lines = ["ply", f"format {fmt} 1.0", f"element vertex {len(cloud)}"]
    lines += [f"property {typ} {name}" for name, typ in PLY_PROPERTIES]
    lines += [f"property uint {name}" for name in cloud.extras]
    lines.append("end_header")
    header = ("\n".join(lines) + "\n").encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        if mode == "binary":
            fh.write(_cloud_to_struct(cloud).tobytes())
        else:
            for i in range(len(cloud)):
                row = [format_float32(cloud.xyz[i, 0]),
                       format_float32(cloud.xyz[i, 1]),
                       format_float32(cloud.xyz[i, 2]),
                       str(cloud.rgb[i, 0]), str(cloud.rgb[i, 1]), str(cloud.rgb[i, 2]),
                       format_float32(cloud.intensity[i]),
                       str(cloud.label[i])]
                row += [str(cloud.extras[k][i]) for k in cloud.extras]
                fh.write((" ".join(row) + "\n").encode("ascii"))


def read_ply(path) -> PointCloud:
    with open(path, "rb") as fh:
        data = fh.read()
    nl = data.find(b"end_header\n")
    if not data.startswith(b"ply\n") or nl < 0:
        raise FormatError(f"{path}: not a PLY file (missing header)")
    header = data[:nl].decode("ascii", errors="replace").splitlines()
    payload = data[nl + len(b"end_header\n"):]

    fmt = None
    count = None
    props: list[tuple[str, str]] = []
    for line in header[1:]:
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if len(parts) != 3 or parts[1] not in ("ascii", "binary_little_endian"):
                raise FormatError(f"{path}: unsupported PLY format line {line!r}")
            fmt = parts[1]
        elif parts[0] == "element":
            if parts[1] != "vertex" or count is not None:
                raise FormatError(f"{path}: only a single vertex element is supported")
            count = int(parts[2])
        elif parts[0] == "property":
            if len(parts) != 3:
                raise FormatError(f"{path}: malformed property line {line!r}")
            props.append((parts[2], parts[1]))
        else:
            raise FormatError(f"{path}: unsupported header line {line!r}")
    if fmt is None or count is None:
        raise FormatError(f"{path}: PLY header missing format or element")

    base = list(PLY_PROPERTIES)
    if props[:len(base)] != [(n, t) for n, t in base]:
        raise FormatError(
            f"{path}: property list {props!r} does not match the expected "
            f"schema {base!r}")
    extras = []
    for name, typ in props[len(base):]:
        if typ != "uint":
            raise FormatError(f"{path}: unsupported extra property type {typ!r}")
        extras.append(name)
    extras = tuple(extras)

    dtype = _cloud_struct_dtype(extras)
    if fmt == "binary_little_endian":
        expected = count * dtype.itemsize
        if len(payload) != expected:
            raise FormatError(
                f"{path}: payload size mismatch: expected {expected} bytes "
                f"({count} points), got {len(payload)}")
        return _cloud_from_struct(np.frombuffer(payload, dtype=dtype), extras)

    text = payload.decode("ascii", errors="replace").splitlines()
    rows = [ln for ln in text if ln.strip()]
    if len(rows) != count:
        raise FormatError(f"{path}: expected {count} ascii rows, got {len(rows)}")
    n_fields = len(base) + len(extras)
    arr = np.empty(count, dtype=dtype)
    for i, ln in enumerate(rows):
        parts = ln.split()
        if len(parts) != n_fields:
            raise FormatError(f"{path}: row {i} has {len(parts)} fields, "
                              f"expected {n_fields}")
        try:
            arr[i] = tuple(
                np.float32(parts[j]) if typ == "float" else int(parts[j])
                for j, (name, typ) in enumerate(base)
            ) + tuple(int(parts[len(base) + j]) for j in range(len(extras)))
        except ValueError as exc:
            raise FormatError(f"{path}: row {i}: {exc}")
    return _cloud_from_struct(arr, extras)


# ---------------------------------------------------------------------------
# PCD


def pack_rgb(rgb: np.ndarray) -> np.ndarray:
    """(N, 3) uint8 -> packed uint32 0x00RRGGBB."""
    rgb = np.asarray(rgb, dtype=np.uint32)
    return (rgb[:, 0] << 16) | (rgb[:, 1] << 8) | rgb[:, 2]


def unpack_rgb(packed: np.ndarray) -> np.ndarray:
    packed = np.asarray(packed, dtype=np.uint32)
    return np.stack([(packed >> 16) & 0xFF, (packed >> 8) & 0xFF,
                     packed & 0xFF], axis=1).astype(np.uint8)


def _pcd_header(n: int, mode: str, extras: tuple[str, ...]) -> str:
    fields = "x y z rgb intensity label"
    size = "4 4 4 4 4 2"
    typ = "F F F F F U"
    cnt = "1 1 1 1 1 1"
    for name in extras:
        fields += f" {name}"
        size += " 4"
        typ += " U"
        cnt += " 1"
    return (
        "# .PCD v0.7 - Point Cloud Data file format\n"
        "VERSION 0.7\n"
        f"FIELDS {fields}\n"
        f"SIZE {size}\n"
        f"TYPE {typ}\n"
        f"COUNT {cnt}\n"
        f"WIDTH {n}\n"
        "HEIGHT 1\n"
        "VIEWPOINT 0 0 0 1 0 0 0\n"
        f"POINTS {n}\n"
        f"DATA {mode}\n")


def _pcd_struct_dtype(extras: tuple[str, ...]) -> np.dtype:
    fields = [("x", "<f4"), ("y", "<f4"), ("z", "<f4"), ("rgb", "<u4"),
              ("intensity", "<f4"), ("label", "<u2")]
    fields += [(name, "<u4") for name in extras]
    return np.dtype(fields)


def write_pcd(cloud: PointCloud, path, mode: str = "binary") -> None:
    if mode not in ("binary", "ascii"):
        raise ValueError("mode must be 'binary' or 'ascii'")
    _check_writable_cloud(cloud)
    extras = tuple(cloud.extras)
    header = _pcd_header(len(cloud), mode, extras).encode("ascii")
    packed = pack_rgb(cloud.rgb)
    with open(path, "wb") as fh:
        fh.write(header)
        if mode == "binary":
            arr = np.empty(len(cloud), dtype=_pcd_struct_dtype(extras))
            arr["x"], arr["y"], arr["z"] = cloud.xyz[:, 0], cloud.xyz[:, 1], cloud.xyz[:, 2]
            arr["rgb"] = packed
            arr["intensity"] = cloud.intensity
            arr["label"] = cloud.label
            for name in extras:
                arr[name] = cloud.extras[name]
            fh.write(arr.tobytes())
        else:
            for i in range(len(cloud)):
                row = [format_float32(cloud.xyz[i, 0]),
                       format_float32(cloud.xyz[i, 1]),
                       format_float32(cloud.xyz[i, 2]),
                       str(packed[i]),
                       format_float32(cloud.intensity[i]),
                       str(cloud.label[i])]
                row += [str(cloud.extras[k][i]) for k in extras]
                fh.write((" ".join(row) + "\n").encode("ascii"))


def read_pcd(path) -> PointCloud:
    with open(path, "rb") as fh:
        data = fh.read()
    m = re.search(rb"DATA (ascii|binary)\n", data)
    if m is None:
        raise FormatError(f"{path}: PCD header missing DATA line")
    header_text = data[:m.end()].decode("ascii", errors="replace")
    payload = data[m.end():]

    fields: dict[str, str] = {}
    for line in header_text.splitlines():
        if line.startswith("#") or not line.strip():
            continue
        key, _, rest = line.partition(" ")
        fields[key] = rest.strip()
    for key in ("VERSION", "FIELDS", "SIZE", "TYPE", "COUNT", "POINTS", "DATA"):
        if key not in fields:
            raise FormatError(f"{path}: PCD header missing {key}")
    names = fields["FIELDS"].split()
    base_names = ["x", "y", "z", "rgb", "intensity", "label"]
    if names[:6] != base_names:
        raise FormatError(f"{path}: FIELDS {names!r} does not match expected "
                          f"{base_names!r}")
    extras = tuple(names[6:])
    expected_size = "4 4 4 4 4 2" + " 4" * len(extras)
    if fields["SIZE"] != expected_size:
        raise FormatError(f"{path}: SIZE {fields['SIZE']!r} does not match "
                          f"{expected_size!r}")
    try:
        count = int(fields["POINTS"])
    except ValueError:
        raise FormatError(f"{path}: bad POINTS value {fields['POINTS']!r}")

    dtype = _pcd_struct_dtype(extras)
    if fields["DATA"] == "binary":
        expected = count * dtype.itemsize
        if len(payload) != expected:
            raise FormatError(
                f"{path}: payload size mismatch: expected {expected} bytes "
                f"({count} points), got {len(payload)}")
        arr = np.frombuffer(payload, dtype=dtype)
    else:
        rows = [ln for ln in payload.decode("ascii", errors="replace").splitlines()
                if ln.strip()]
        if len(rows) != count:
            raise FormatError(f"{path}: expected {count} ascii rows, got {len(rows)}")
        arr = np.empty(count, dtype=dtype)
        n_fields = 6 + len(extras)
        for i, ln in enumerate(rows):
            parts = ln.split()
            if len(parts) != n_fields:
                raise FormatError(f"{path}: row {i} has {len(parts)} fields, "
                                  f"expected {n_fields}")
            try:
                arr[i] = (np.float32(parts[0]), np.float32(parts[1]),
                          np.float32(parts[2]), int(parts[3]),
                          np.float32(parts[4]), int(parts[5]),
                          *(int(p) for p in parts[6:]))
            except ValueError as exc:
                raise FormatError(f"{path}: row {i}: {exc}")
    xyz = np.stack([arr["x"], arr["y"], arr["z"]], axis=1)
    return PointCloud(xyz, unpack_rgb(arr["rgb"]), arr["intensity"].copy(),
                      arr["label"].copy(),
                      {name: arr[name].copy() for name in extras})


# ---------------------------------------------------------------------------
# PGM / PPM


def write_pgm16(data: np.ndarray, path, comments: tuple[str, ...] = ()) -> None:
    data = np.ascontiguousarray(data, dtype=np.uint16)
    if data.ndim != 2:
        raise ValueError("PGM data must be 2-D")
    h, w = data.shape
    header = "P5\n" + "".join(f"# {c}\n" for c in comments) + f"{w} {h}\n65535\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(data.astype(">u2").tobytes())


def write_depth_pgm(depth_m: np.ndarray, path, scale: float = DEFAULT_DEPTH_SCALE) -> int:
    """Quantize depth (meters) by ``scale`` into 16-bit samples.

    Returns the number of samples clamped at 65535; the scale rides along
    in a header comment so readers can undo the quantization.
    """
    depth = np.asarray(depth_m, dtype=np.float64)
    if not np.isfinite(depth).all():
        raise ValueError("depth image must be finite")
    scaled = np.rint(depth * float(scale))
    clamped = int((scaled > 65535).sum())
    data = np.clip(scaled, 0, 65535).astype(np.uint16)
    write_pgm16(data, path, comments=(f"scale {format_float(scale)}",))
    return clamped


def _read_netpbm(path, magic: bytes):
    with open(path, "rb") as fh:
        data = fh.read()
    if not data.startswith(magic):
        raise FormatError(f"{path}: expected {magic.decode()} file")
    pos = len(magic)
    comments = []
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise FormatError(f"{path}: truncated header")
        if data[pos:pos + 1] == b"#":
            end = data.find(b"\n", pos)
            if end < 0:
                raise FormatError(f"{path}: unterminated header comment")
            comments.append(data[pos + 1:end].decode("ascii", "replace").strip())
            pos = end + 1
            continue
        end = pos
        while end < len(data) and not data[end:end + 1].isspace():
            end += 1
        tokens.append(data[pos:end])
        pos = end
    pos += 1  # single whitespace byte after maxval
    try:
        w, h, maxval = (int(t) for t in tokens)
    except ValueError:
        raise FormatError(f"{path}: malformed header tokens {tokens!r}")
    if w < 0 or h < 0:
        raise FormatError(f"{path}: negative image dimensions")
    return data[pos:], w, h, maxval, comments


def read_pgm(path):
    payload, w, h, maxval, comments = _read_netpbm(path, b"P5")
    if maxval != 65535:
        raise FormatError(f"{path}: expected 16-bit PGM (maxval 65535), got {maxval}")
    expected = w * h * 2
    if len(payload) != expected:
        raise FormatError(f"{path}: payload size mismatch: expected {expected} "
                          f"bytes, got {len(payload)}")
    data = np.frombuffer(payload, dtype=">u2").reshape(h, w).astype(np.uint16)
    return data, comments


def read_depth_pgm(path, scale: float | None = None):
    data, comments = read_pgm(path)
    if scale is None:
        for c in comments:
            parts = c.split()
            if len(parts) == 2 and parts[0] == "scale":
                scale = float(parts[1])
                break
        else:
            raise FormatError(f"{path}: no scale comment and none supplied")
    return data.astype(np.float64) / float(scale), float(scale)


def write_ppm(rgb: np.ndarray, path) -> None:
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError("PPM data must have shape (H, W, 3)")
    h, w = rgb.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    payload, w, h, maxval, _ = _read_netpbm(path, b"P6")
    if maxval != 255:
        raise FormatError(f"{path}: expected 8-bit PPM (maxval 255), got {maxval}")
    expected = w * h * 3
    if len(payload) != expected:
        raise FormatError(f"{path}: payload size mismatch: expected {expected} "
                          f"bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w, 3).copy()


# ---------------------------------------------------------------------------
# Poses CSV


@dataclass(frozen=True)
class PoseRow:
    timestamp: str
    frame: int
    x: float
    y: float
    z: float
    alpha: float
    beta: float
    gamma: float

    def values(self):
        return (self.x, self.y, self.z, self.alpha, self.beta, self.gamma)


def write_poses_csv(rows, path) -> None:
    lines = [POSES_HEADER]
    prev_frame = None
    for row in rows:
        parse_iso8601(row.timestamp)
        if prev_frame is not None and row.frame <= prev_frame:
            raise ValueError(
                f"frame numbers must be unique and strictly increasing; "
                f"{row.frame} follows {prev_frame}")
        prev_frame = row.frame
        vals = ",".join(format_float(v) for v in row.values())
        lines.append(f"{row.timestamp},{row.frame},{vals}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_poses_csv(path) -> list[PoseRow]:
    text = Path(path).read_text()
    rows: list[PoseRow] = []
    header_seen = False
    prev_frame = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != POSES_HEADER:
                raise FormatError(
                    f"{path}:line {ln}: bad header {line!r}, expected {POSES_HEADER!r}")
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise FormatError(f"{path}:line {ln}: expected 8 fields, got {len(parts)}")
        try:
            parse_iso8601(parts[0])
            frame = int(parts[1])
            vals = [float(p) for p in parts[2:]]
        except (FormatError, ValueError) as exc:
            raise FormatError(f"{path}:line {ln}: {exc}")
        if any(not math.isfinite(v) for v in vals):
            raise FormatError(f"{path}:line {ln}: non-finite value")
        if prev_frame is not None and frame <= prev_frame:
            raise FormatError(
                f"{path}:line {ln}: frame {frame} is not strictly increasing "
                f"(previous {prev_frame})")
        prev_frame = frame
        rows.append(PoseRow(parts[0], frame, *vals))
    if not header_seen:
        raise FormatError(f"{path}: missing header line")
    return rows


# ---------------------------------------------------------------------------
# Manifest and validation


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _payload_files(root: Path, modalities) -> list[str]:
    names = []
    if (root / POSES_NAME).exists():
        names.append(POSES_NAME)
    for mod in sorted(modalities):
        d = root / MODALITY_DIRS[mod]
        if d.is_dir():
            names.extend(sorted(str(p.relative_to(root)).replace("\\", "/")
                                for p in d.iterdir() if p.is_file()))
    return names


def build_manifest(root, meta: dict, modalities=None) -> dict:
    root = Path(root)
    if modalities is None:
        modalities = list(MODALITY_DIRS)
    files = {}
    for rel in _payload_files(root, modalities):
        p = root / rel
        files[rel] = {"sha256": sha256_file(p), "bytes": p.stat().st_size}
    manifest = dict(meta)
    manifest["schema_version"] = SCHEMA_VERSION
    manifest["modalities"] = {m: MODALITY_DIRS[m] for m in sorted(modalities)}
    manifest["files"] = files
    return manifest


def write_manifest(root, manifest: dict) -> Path:
    path = Path(root) / MANIFEST_NAME
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def read_manifest(root) -> dict:
    path = Path(root) / MANIFEST_NAME
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read manifest: {exc}")
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: manifest is not valid JSON: {exc}")


@dataclass
class ValidationReport:
    discrepancies: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.discrepancies

    def __str__(self) -> str:
        if self.ok:
            return "dataset valid: no discrepancies"
        body = "\n".join(f"  - {d}" for d in self.discrepancies)
        return f"dataset invalid: {len(self.discrepancies)} discrepancies\n{body}"


def validate_dataset(root) -> ValidationReport:
    """Recompute checksums and structural invariants of a dataset bundle."""
    root = Path(root)
    report = ValidationReport()
    try:
        manifest = read_manifest(root)
    except FormatError as exc:
        report.discrepancies.append(str(exc))
        return report

    if manifest.get("schema_version") != SCHEMA_VERSION:
        report.discrepancies.append(
            f"unsupported schema_version {manifest.get('schema_version')!r}")

    inventory = manifest.get("files", {})
    for rel in sorted(inventory):
        entry = inventory[rel]
        p = root / rel
        if not p.is_file():
            report.discrepancies.append(f"missing file: {rel}")
            continue
        size = p.stat().st_size
        if size != entry.get("bytes"):
            report.discrepancies.append(
                f"size mismatch: {rel} has {size} bytes, manifest says "
                f"{entry.get('bytes')}")
            continue
        digest = sha256_file(p)
        if digest != entry.get("sha256"):
            report.discrepancies.append(f"checksum mismatch: {rel}")

    modalities = manifest.get("modalities", {})
    for rel in _payload_files(root, [m for m in modalities if m in MODALITY_DIRS]):
        if rel not in inventory:
            report.discrepancies.append(f"untracked file: {rel}")

    frame_count = manifest.get("frame_count")
    if isinstance(frame_count, int):
        for mod, d in sorted(modalities.items()):
            if mod not in MODALITY_DIRS:
                report.discrepancies.append(f"unknown modality {mod!r}")
                continue
            expected = {f"{d}/{frame_filename(i, MODALITY_EXT[mod])}"
                        for i in range(frame_count)}
            present = {rel for rel in inventory if rel.startswith(d + "/")}
            for rel in sorted(expected - present):
                report.discrepancies.append(f"frame gap: {rel} not in manifest")
            for rel in sorted(present - expected):
                report.discrepancies.append(f"unexpected frame file: {rel}")
    else:
        report.discrepancies.append("manifest missing integer frame_count")

    if POSES_NAME in inventory:
        try:
            rows = read_poses_csv(root / POSES_NAME)
            if isinstance(frame_count, int):
                frames = [r.frame for r in rows]
                if frames != list(range(frame_count)):
                    report.discrepancies.append(
                        f"poses.csv frames are not 0..{frame_count - 1} contiguous")
        except (FormatError, OSError) as exc:
            report.discrepancies.append(f"poses.csv unreadable: {exc}")
    else:
        report.discrepancies.append("poses.csv not in manifest")

    return report
