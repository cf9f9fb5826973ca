"""Rigid-body poses, Euler conversions, rays, and a BVH over triangles.

Conventions
-----------
* Angles are radians, wrapped to (-pi, pi].
* A pose maps local coordinates to world coordinates:
  ``world = Rz(gamma) @ Ry(beta) @ Rx(alpha) @ p + t`` (fixed-axis XYZ;
  alpha = roll about X, beta = pitch about Y, gamma = yaw about Z).
* Ray directions are unit vectors; intersections below ``T_EPSILON``
  are rejected to suppress self-intersection acne.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels

# Minimum accepted ray parameter (meters).
T_EPSILON = kernels.T_EPS

# Tolerated deviation from orthonormality for caller-supplied matrices.
ORTHONORMAL_TOL = 1e-6


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]. Exact for values already in range."""
    a = math.remainder(float(a), math.tau)
    if a <= -math.pi:
        a += math.tau
    return a


@dataclass(frozen=True)
class Pose6DoF:
    """Position (meters) plus roll/pitch/yaw (radians, wrapped to (-pi, pi])."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.z, self.alpha, self.beta, self.gamma)
        for v in vals:
            if not math.isfinite(v):
                raise ValueError(f"pose fields must be finite, got {vals!r}")
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))
        object.__setattr__(self, "z", float(self.z))
        object.__setattr__(self, "alpha", wrap_angle(self.alpha))
        object.__setattr__(self, "beta", wrap_angle(self.beta))
        object.__setattr__(self, "gamma", wrap_angle(self.gamma))

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @property
    def angles(self) -> tuple[float, float, float]:
        return (self.alpha, self.beta, self.gamma)


def euler_to_matrix(pose) -> np.ndarray:
    """Rotation matrix Rz(gamma) @ Ry(beta) @ Rx(alpha) for a pose or angle triple."""
    if isinstance(pose, Pose6DoF):
        a, b, g = pose.angles
    else:
        a, b, g = (float(v) for v in pose)
    for v in (a, b, g):
        if not math.isfinite(v):
            raise ValueError("angles must be finite")
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    cg, sg = math.cos(g), math.sin(g)
    return np.array([
        [cb * cg, sa * sb * cg - ca * sg, ca * sb * cg + sa * sg],
        [cb * sg, sa * sb * sg + ca * cg, ca * sb * sg - sa * cg],
        [-sb, sa * cb, ca * cb],
    ])


def _check_rotation(R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=np.float64)
    if R.shape != (3, 3) or not np.isfinite(R).all():
        raise ValueError("rotation must be a finite 3x3 matrix")
    dev = np.abs(R.T @ R - np.eye(3)).max()
    if dev > ORTHONORMAL_TOL:
        raise ValueError(f"matrix is not orthonormal (deviation {dev:.3g})")
    if abs(np.linalg.det(R) - 1.0) > ORTHONORMAL_TOL:
        raise ValueError("matrix determinant is not +1 (improper rotation)")
    return R


def matrix_to_euler(R) -> tuple[float, float, float]:
    """Inverse of :func:`euler_to_matrix`.

    At gimbal lock (|beta| = pi/2) the split between roll and yaw is
    unobservable; alpha is set to 0 and yaw absorbs the remainder.
    """
    R = _check_rotation(R)
    sb = -R[2, 0]
    sb = min(1.0, max(-1.0, float(sb)))
    if abs(sb) >= 1.0 - 1e-10:
        beta = math.copysign(math.pi / 2.0, sb)
        alpha = 0.0
        gamma = math.atan2(-R[0, 1], R[1, 1])
    else:
        beta = math.asin(sb)
        alpha = math.atan2(R[2, 1], R[2, 2])
        gamma = math.atan2(R[1, 0], R[0, 0])
    return (wrap_angle(alpha), wrap_angle(beta), wrap_angle(gamma))


def transform_point(pose: Pose6DoF, p) -> np.ndarray:
    """Apply the rigid transform of ``pose`` to a point (3,) or points (N, 3)."""
    R = euler_to_matrix(pose)
    t = pose.translation
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 1:
        return R @ p + t
    return p @ R.T + t


def invert_pose(pose: Pose6DoF) -> Pose6DoF:
    """Pose whose transform undoes ``pose`` (R^T, -R^T t)."""
    R = euler_to_matrix(pose)
    t = -(R.T @ pose.translation)
    a, b, g = matrix_to_euler(R.T)
    return Pose6DoF(t[0], t[1], t[2], a, b, g)


def compose_poses(outer: Pose6DoF, inner: Pose6DoF) -> Pose6DoF:
    """Pose equivalent to applying ``inner`` then ``outer`` (outer o inner)."""
    Ro = euler_to_matrix(outer)
    Ri = euler_to_matrix(inner)
    t = Ro @ inner.translation + outer.translation
    a, b, g = matrix_to_euler(Ro @ Ri)
    return Pose6DoF(t[0], t[1], t[2], a, b, g)


def pose_matrix(pose: Pose6DoF) -> np.ndarray:
    """4x4 homogeneous matrix of ``pose``."""
    m = np.eye(4)
    m[:3, :3] = euler_to_matrix(pose)
    m[:3, 3] = pose.translation
    return m


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    t_min: float = 0.0
    t_max: float = math.inf

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=np.float64)
        d = np.asarray(self.direction, dtype=np.float64)
        if o.shape != (3,) or d.shape != (3,):
            raise ValueError("ray origin/direction must be 3-vectors")
        if not np.isfinite(o).all() or not np.isfinite(d).all():
            raise ValueError("ray origin/direction must be finite")
        if abs(float(np.linalg.norm(d)) - 1.0) > 1e-9:
            raise ValueError("ray direction must be a unit vector")
        if not (0.0 <= self.t_min < self.t_max):
            raise ValueError("require 0 <= t_min < t_max")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)


@dataclass(frozen=True)
class Hit:
    t: float
    point: np.ndarray
    normal: np.ndarray  # unit, oriented toward the ray origin
    object_id: int
    material_id: int


@dataclass
class Bvh:
    """Median-split BVH. Triangle storage is permuted into leaf order;
    ``tri_index[slot]`` recovers the original triangle index."""

    node_min: np.ndarray
    node_max: np.ndarray
    node_left: np.ndarray
    node_right: np.ndarray
    leaf_start: np.ndarray
    leaf_count: np.ndarray
    v0: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    degenerate: np.ndarray
    tri_index: np.ndarray

    @property
    def n_triangles(self) -> int:
        return int(self.v0.shape[0])

    def cast(self, origins, dirs, t_min=None, t_max=None):
        """Batch nearest-hit query. Returns (t, slot); slot -1 marks a miss."""
        origins = np.ascontiguousarray(origins, dtype=np.float64)
        dirs = np.ascontiguousarray(dirs, dtype=np.float64)
        n = origins.shape[0]
        if t_min is None:
            t_min = np.zeros(n)
        elif np.isscalar(t_min):
            t_min = np.full(n, float(t_min))
        else:
            t_min = np.ascontiguousarray(t_min, dtype=np.float64)
        if t_max is None:
            t_max = np.full(n, np.inf)
        elif np.isscalar(t_max):
            t_max = np.full(n, float(t_max))
        else:
            t_max = np.ascontiguousarray(t_max, dtype=np.float64)
        return kernels.cast_rays(self, origins, dirs, t_min, t_max)

    def validate(self) -> None:
        """Check structural invariants; raises AssertionError on violation."""
        n_nodes = self.node_min.shape[0]
        if n_nodes == 0:
            assert self.n_triangles == 0
            return
        seen = np.zeros(self.n_triangles, dtype=bool)

        def walk(nid, lo, hi):
            assert (self.node_min[nid] >= lo - 1e-12).all()
            assert (self.node_max[nid] <= hi + 1e-12).all()
            if self.node_left[nid] < 0:
                s, c = self.leaf_start[nid], self.leaf_count[nid]
                for k in range(s, s + c):
                    assert not seen[k]
                    seen[k] = True
                    verts = np.stack([self.v0[k], self.v0[k] + self.e1[k],
                                      self.v0[k] + self.e2[k]])
                    assert (verts.min(0) >= self.node_min[nid] - 1e-9).all()
                    assert (verts.max(0) <= self.node_max[nid] + 1e-9).all()
            else:
                walk(self.node_left[nid], self.node_min[nid], self.node_max[nid])
                walk(self.node_right[nid], self.node_min[nid], self.node_max[nid])

        walk(0, np.full(3, -np.inf), np.full(3, np.inf))
        assert seen.all()


_EMPTY3 = np.zeros((0, 3))


_SAH_BINS = 16


def _surface_bound(lo: np.ndarray, hi: np.ndarray) -> float:
    d = np.maximum(hi - lo, 0.0)
    return 2.0 * float(d[0] * d[1] + d[1] * d[2] + d[2] * d[0])


def build_bvh(triangles, leaf_size: int = 4) -> Bvh:
    """Build a deterministic BVH over ``triangles`` (T, 3, 3).

    Splits use a binned surface-area heuristic, falling back to a median
    split when binning is degenerate; both are deterministic for a given
    input order. Zero-area triangles are kept but flagged degenerate and
    never produce hits.
    """
    tris = np.asarray(triangles, dtype=np.float64)
    if tris.size == 0:
        tris = tris.reshape(0, 3, 3)
    if tris.ndim != 3 or tris.shape[1:] != (3, 3):
        raise ValueError("triangles must have shape (T, 3, 3)")
    if tris.shape[0] and not np.isfinite(tris).all():
        raise ValueError("triangle vertices must be finite")
    n = tris.shape[0]
    e1 = tris[:, 1] - tris[:, 0]
    e2 = tris[:, 2] - tris[:, 0]
    cr = np.cross(e1, e2)
    degenerate = (cr * cr).sum(axis=1) == 0.0
    if n == 0:
        zi = np.zeros(0, dtype=np.int64)
        return Bvh(_EMPTY3.copy(), _EMPTY3.copy(), zi.copy(), zi.copy(),
                   zi.copy(), zi.copy(), _EMPTY3.copy(), _EMPTY3.copy(),
                   _EMPTY3.copy(), np.zeros(0, dtype=bool), zi.copy())

    bmin = tris.min(axis=1)
    bmax = tris.max(axis=1)
    cent = (bmin + bmax) * 0.5
    order = np.arange(n, dtype=np.int64)

    node_min, node_max = [], []
    node_left, node_right, leaf_start, leaf_count = [], [], [], []

    def new_node():
        node_min.append(None)
        node_max.append(None)
        node_left.append(-1)
        node_right.append(-1)
        leaf_start.append(0)
        leaf_count.append(0)
        return len(node_min) - 1

    root = new_node()
    stack = [(root, 0, n)]
    while stack:
        nid, lo, hi = stack.pop()
        sel = order[lo:hi]
        count = hi - lo
        nmin = bmin[sel].min(axis=0)
        nmax = bmax[sel].max(axis=0)
        node_min[nid] = nmin
        node_max[nid] = nmax
        if count <= leaf_size:
            leaf_start[nid] = lo
            leaf_count[nid] = count
            continue

        mid = None
        if count >= 4 * leaf_size:
            c = cent[sel]
            clo = c.min(axis=0)
            chi = c.max(axis=0)
            span = chi - clo
            area = _surface_bound(nmin, nmax)
            best_cost = np.inf
            best = None  # (bins, threshold_bin)
            sel_min = bmin[sel]
            sel_max = bmax[sel]
            for axis in range(3):
                if span[axis] <= 0.0:
                    continue
                bins = np.minimum(((c[:, axis] - clo[axis]) / span[axis]
                                   * _SAH_BINS).astype(np.int64), _SAH_BINS - 1)
                counts = np.bincount(bins, minlength=_SAH_BINS)
                bin_min = np.full((_SAH_BINS, 3), np.inf)
                bin_max = np.full((_SAH_BINS, 3), -np.inf)
                np.minimum.at(bin_min, bins, sel_min)
                np.maximum.at(bin_max, bins, sel_max)
                left_min = np.minimum.accumulate(bin_min, axis=0)
                left_max = np.maximum.accumulate(bin_max, axis=0)
                right_min = np.minimum.accumulate(bin_min[::-1], axis=0)[::-1]
                right_max = np.maximum.accumulate(bin_max[::-1], axis=0)[::-1]
                left_n = np.cumsum(counts)
                for b in range(_SAH_BINS - 1):
                    nl = left_n[b]
                    nr = count - nl
                    if nl == 0 or nr == 0:
                        continue
                    cost = (nl * _surface_bound(left_min[b], left_max[b])
                            + nr * _surface_bound(right_min[b + 1], right_max[b + 1]))
                    if cost < best_cost:
                        best_cost = cost
                        best = (bins, b)
            if best is not None and area > 0.0 and best_cost / area < count:
                bins, b = best
                left_sel = sel[bins <= b]
                right_sel = sel[bins > b]
                order[lo:lo + len(left_sel)] = left_sel
                order[lo + len(left_sel):hi] = right_sel
                mid = lo + len(left_sel)
        if mid is None:
            # Median split: node too small for SAH, or binning degenerate.
            axis = int(np.argmax(nmax - nmin))
            loc = np.argsort(cent[sel, axis], kind="stable")
            order[lo:hi] = sel[loc]
            mid = lo + count // 2
        left = new_node()
        right = new_node()
        node_left[nid] = left
        node_right[nid] = right
        stack.append((right, mid, hi))
        stack.append((left, lo, mid))

    return Bvh(
        node_min=np.ascontiguousarray(node_min),
        node_max=np.ascontiguousarray(node_max),
        node_left=np.asarray(node_left, dtype=np.int64),
        node_right=np.asarray(node_right, dtype=np.int64),
        leaf_start=np.asarray(leaf_start, dtype=np.int64),
        leaf_count=np.asarray(leaf_count, dtype=np.int64),
        v0=np.ascontiguousarray(tris[order, 0]),
        e1=np.ascontiguousarray(e1[order]),
        e2=np.ascontiguousarray(e2[order]),
        degenerate=np.ascontiguousarray(degenerate[order]),
        tri_index=np.ascontiguousarray(order),
    )


def triangle_normals(bvh: Bvh, slots, dirs) -> np.ndarray:
    """Unit normals for hit slots, oriented against the ray directions."""
    n = np.cross(bvh.e1[slots], bvh.e2[slots])
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    flip = (n * dirs).sum(axis=1) > 0.0
    n[flip] *= -1.0
    return n


def ray_intersect(bvh: Bvh, ray: Ray, tri_object=None, tri_material=None):
    """Nearest hit of a single ray, or None.

    ``tri_object``/``tri_material`` map original triangle indices to ids;
    when omitted the original triangle index doubles as the object id.
    """
    t, slot = bvh.cast(ray.origin[None, :], ray.direction[None, :],
                       np.array([ray.t_min]), np.array([ray.t_max]))
    s = int(slot[0])
    if s < 0:
        return None
    tv = float(t[0])
    normal = triangle_normals(bvh, np.array([s]), ray.direction[None, :])[0]
    orig = int(bvh.tri_index[s])
    obj = int(tri_object[orig]) if tri_object is not None else orig
    mat = int(tri_material[orig]) if tri_material is not None else 0
    return Hit(t=tv, point=ray.origin + tv * ray.direction,
               normal=normal, object_id=obj, material_id=mat)
