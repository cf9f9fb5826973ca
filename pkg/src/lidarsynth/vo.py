"""Feature-based monocular visual odometry.

Pipeline: FAST-9 corners with 3x3 non-maximum suppression and
intensity-centroid orientation, a 256-bit rotated binary descriptor over
a fixed sampling pattern, brute-force Hamming matching with cross-check,
RANSAC essential-matrix estimation (normalized 8-point), cheirality-based
pose decomposition, and trajectory concatenation with unit translation
steps (monocular scale is unobservable, so evaluation is direction-only).

A RelativePose is the pose of the *later* camera expressed in the
*earlier* camera's frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._brief_pattern import PATTERN
from .errors import DecompositionError, InsufficientDataError

# Keypoints keep this margin from the border so the orientation disc
# (radius 15) and the rotated descriptor pattern (|offset| <= 13, rotated,
# plus 2 for smoothing) always fit: ceil(13 * sqrt(2)) + 2 = 21.
PATCH_MARGIN = 21
ORIENTATION_RADIUS = 15
DEFAULT_FAST_THRESHOLD = 20.0
DEFAULT_MAX_KEYPOINTS = 500
DEFAULT_RANSAC_ITERATIONS = 2000
DEFAULT_RANSAC_THRESHOLD_PX = 1.0

GRAY_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    score: float
    orientation: float


@dataclass(frozen=True)
class Match:
    index_a: int
    index_b: int
    distance: int


@dataclass(frozen=True)
class RelativePose:
    rotation: np.ndarray  # (3, 3): later camera axes in the earlier frame
    translation_direction: np.ndarray  # unit vector, earlier frame
    inliers: int


def to_grayscale(rgb: np.ndarray) -> np.ndarray:
    """Luma conversion (0.299/0.587/0.114), kept as float64."""
    rgb = np.asarray(rgb, dtype=np.float64)
    if rgb.ndim == 2:
        return rgb
    w = np.asarray(GRAY_WEIGHTS)
    return rgb @ w


# ---------------------------------------------------------------------------
# Detection

_disc_off = None


def _orientation_disc():
    global _disc_off
    if _disc_off is None:
        r = ORIENTATION_RADIUS
        ys, xs = np.mgrid[-r:r + 1, -r:r + 1]
        keep = (xs * xs + ys * ys) <= r * r
        _disc_off = (xs[keep], ys[keep])
    return _disc_off


def detect_keypoints(image, threshold: float = DEFAULT_FAST_THRESHOLD,
                     max_count: int = DEFAULT_MAX_KEYPOINTS) -> list[Keypoint]:
    """FAST-9 corners, strongest ``max_count`` after non-maximum suppression.

    Keypoints within PATCH_MARGIN of the border are discarded so the
    orientation and descriptor patches always fit.
    """
    img = np.asarray(image, dtype=np.float64)
    scores = kernels.fast_scores(img, threshold)
    h, w = scores.shape
    if h <= 2 * PATCH_MARGIN or w <= 2 * PATCH_MARGIN:
        return []
    scores = scores.copy()
    scores[:PATCH_MARGIN, :] = 0.0
    scores[-PATCH_MARGIN:, :] = 0.0
    scores[:, :PATCH_MARGIN] = 0.0
    scores[:, -PATCH_MARGIN:] = 0.0

    # 3x3 NMS. Flat synthetic renders produce exact score plateaus, so ties
    # break by raster order: a peak must beat earlier neighbors strictly and
    # later neighbors weakly, keeping exactly one pixel per plateau.
    c = scores[1:-1, 1:-1]
    peak = c > 0.0
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx == 0 and dy == 0:
                continue
            neigh = scores[1 + dy:h - 1 + dy, 1 + dx:w - 1 + dx]
            if dy < 0 or (dy == 0 and dx < 0):
                peak &= c > neigh
            else:
                peak &= c >= neigh
    ys, xs = np.nonzero(peak)
    ys = ys + 1
    xs = xs + 1
    if len(xs) == 0:
        return []
    vals = scores[ys, xs]
    order = np.lexsort((xs, ys, -vals))[:max_count]

    ox, oy = _orientation_disc()
    kps = []
    for i in order:
        x, y = int(xs[i]), int(ys[i])
        rx, ry = _refine_corner(img, x, y)
        patch = img[y + oy, x + ox]
        m10 = float((ox * patch).sum())
        m01 = float((oy * patch).sum())
        theta = 0.0 if (m10 == 0.0 and m01 == 0.0) else math.atan2(m01, m10)
        kps.append(Keypoint(x=rx, y=ry, score=float(vals[i]),
                            orientation=theta))
    return kps


def _refine_corner(img, x: int, y: int, radius: int = 3) -> tuple[float, float]:
    """Sub-pixel corner point: gradient-normal least squares over a window.

    Every window pixel with gradient g votes for the line through it
    perpendicular to g; the corner is the point minimizing squared
    distance to all lines. Falls back to the integer location when the
    gradient structure is degenerate or the shift is implausible.
    """
    win = img[y - radius - 1:y + radius + 2, x - radius - 1:x + radius + 2]
    gx = 0.5 * (win[1:-1, 2:] - win[1:-1, :-2])
    gy = 0.5 * (win[2:, 1:-1] - win[:-2, 1:-1])
    qx, qy = np.meshgrid(np.arange(-radius, radius + 1.0),
                         np.arange(-radius, radius + 1.0))
    a = float((gx * gx).sum())
    b = float((gx * gy).sum())
    c = float((gy * gy).sum())
    det = a * c - b * b
    if det < 1e-9:
        return float(x), float(y)
    r1 = float((gx * gx * qx + gx * gy * qy).sum())
    r2 = float((gx * gy * qx + gy * gy * qy).sum())
    dx = (c * r1 - b * r2) / det
    dy = (a * r2 - b * r1) / det
    if dx * dx + dy * dy > 2.25:
        return float(x), float(y)
    return x + dx, y + dy


# ---------------------------------------------------------------------------
# Description


def box_smooth_sums(image: np.ndarray, radius: int = 2) -> np.ndarray:
    """(2r+1)^2 box sums of the 1024-quantized image, exact int64.

    Integer arithmetic keeps descriptor comparisons free of float
    accumulation noise, so equal-intensity regions compare equal no
    matter where they sit in the image. Borders are partially summed.
    """
    img = np.rint(np.asarray(image, dtype=np.float64) * 1024.0).astype(np.int64)
    h, w = img.shape
    ii = np.zeros((h + 1, w + 1), dtype=np.int64)
    np.cumsum(np.cumsum(img, axis=0), axis=1, out=ii[1:, 1:])
    # clamp-to-edge integral lookups via index clipping
    ys = np.clip(np.arange(-radius, h + radius + 1), 0, h)
    xs = np.clip(np.arange(-radius, w + radius + 1), 0, w)
    padded = ii[np.ix_(ys, xs)]
    k = 2 * radius + 1
    return padded[k:, k:] - padded[:-k, k:] - padded[k:, :-k] + padded[:-k, :-k]


def compute_descriptors(image, keypoints):
    """256-bit descriptors over the fixed pattern rotated per keypoint.

    Returns (descriptors (K, 32) uint8, kept keypoints, skipped count);
    keypoints too close to the border are skipped and counted.
    """
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    smooth = box_smooth_sums(img)
    p1 = PATTERN[:, 0:2].astype(np.float64)
    p2 = PATTERN[:, 2:4].astype(np.float64)

    descs = []
    kept = []
    skipped = 0
    for kp in keypoints:
        cx, cy = int(round(kp.x)), int(round(kp.y))
        if not (PATCH_MARGIN <= cx < w - PATCH_MARGIN
                and PATCH_MARGIN <= cy < h - PATCH_MARGIN):
            skipped += 1
            continue
        c, s = math.cos(kp.orientation), math.sin(kp.orientation)
        rot = np.array([[c, -s], [s, c]])
        q1 = np.rint(p1 @ rot.T).astype(np.int64)
        q2 = np.rint(p2 @ rot.T).astype(np.int64)
        a = smooth[cy + q1[:, 1], cx + q1[:, 0]]
        b = smooth[cy + q2[:, 1], cx + q2[:, 0]]
        bits = a < b
        descs.append(np.packbits(bits))
        kept.append(kp)
    if descs:
        return np.stack(descs), kept, skipped
    return np.zeros((0, 32), dtype=np.uint8), kept, skipped


# ---------------------------------------------------------------------------
# Matching

_POPCOUNT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint16)


def hamming_matrix(desc_a: np.ndarray, desc_b: np.ndarray) -> np.ndarray:
    """(Na, Nb) pairwise Hamming distances between 256-bit descriptors."""
    a = np.asarray(desc_a, dtype=np.uint8)
    b = np.asarray(desc_b, dtype=np.uint8)
    return _POPCOUNT[a[:, None, :] ^ b[None, :, :]].sum(axis=2).astype(np.int32)


def match(desc_a, desc_b) -> list[Match]:
    """Mutual unique nearest neighbors under Hamming distance.

    A pair (i, j) is emitted iff j is i's unique argmin and i is j's
    unique argmin; ties yield no match.
    """
    if len(desc_a) == 0 or len(desc_b) == 0:
        return []
    d = hamming_matrix(desc_a, desc_b)
    row_best = d.min(axis=1)
    row_arg = d.argmin(axis=1)
    row_unique = (d == row_best[:, None]).sum(axis=1) == 1
    col_best = d.min(axis=0)
    col_arg = d.argmin(axis=0)
    col_unique = (d == col_best[None, :]).sum(axis=0) == 1
    out = []
    for i in range(d.shape[0]):
        if not row_unique[i]:
            continue
        j = int(row_arg[i])
        if col_unique[j] and int(col_arg[j]) == i:
            out.append(Match(index_a=i, index_b=j, distance=int(row_best[i])))
    return out


# ---------------------------------------------------------------------------
# Essential matrix


@dataclass
class EssentialResult:
    E: np.ndarray
    inliers: np.ndarray  # bool mask over the input correspondences
    degenerate: bool

    @property
    def n_inliers(self) -> int:
        return int(self.inliers.sum())


def _normalize_pixels(pts: np.ndarray, K: np.ndarray) -> np.ndarray:
    return (pts - K[[0, 1], [2, 2]]) / K[[0, 1], [0, 1]]


def _eight_point(xa: np.ndarray, xb: np.ndarray, weights=None) -> np.ndarray:
    """Linear solve of x_b^T E x_a = 0 with Hartley normalization.

    Optional per-correspondence weights scale the constraint rows
    (used by the robust re-estimation pass).
    """

    def hartley(x):
        c = x.mean(axis=0)
        d = np.linalg.norm(x - c, axis=1).mean()
        s = math.sqrt(2.0) / d if d > 0 else 1.0
        T = np.array([[s, 0, -s * c[0]], [0, s, -s * c[1]], [0, 0, 1.0]])
        return (x - c) * s, T

    na, Ta = hartley(xa)
    nb, Tb = hartley(xb)
    x1, y1 = na[:, 0], na[:, 1]
    x2, y2 = nb[:, 0], nb[:, 1]
    A = np.stack([x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2,
                  x1, y1, np.ones_like(x1)], axis=1)
    if weights is not None:
        A = A * weights[:, None]
    _, _, vt = np.linalg.svd(A)
    E = vt[-1].reshape(3, 3)
    return Tb.T @ E @ Ta


def _design_matrix(xa: np.ndarray, xb: np.ndarray) -> np.ndarray:
    x1, y1 = xa[:, 0], xa[:, 1]
    x2, y2 = xb[:, 0], xb[:, 1]
    return np.stack([x2 * x1, x2 * y1, x2, y2 * x1, y2 * y1, y2,
                     x1, y1, np.ones_like(x1)], axis=1)


def _project_essential(E: np.ndarray) -> np.ndarray:
    u, s, vt = np.linalg.svd(E)
    m = (s[0] + s[1]) / 2.0
    return u @ np.diag([m, m, 0.0]) @ vt


def _epipolar_distances(E: np.ndarray, pa: np.ndarray, pb: np.ndarray,
                        K: np.ndarray) -> np.ndarray:
    """Symmetric epipolar distance in pixels: max of the two point-to-line
    distances under the fundamental matrix K^-T E K^-1."""
    Kinv = np.linalg.inv(K)
    F = Kinv.T @ E @ Kinv
    ha = np.concatenate([pa, np.ones((len(pa), 1))], axis=1)
    hb = np.concatenate([pb, np.ones((len(pb), 1))], axis=1)
    la = ha @ F.T  # epipolar lines in image b
    lb = hb @ F  # epipolar lines in image a
    val = np.abs((hb * la).sum(axis=1))
    with np.errstate(divide="ignore", invalid="ignore"):
        d_b = val / np.hypot(la[:, 0], la[:, 1])
        d_a = val / np.hypot(lb[:, 0], lb[:, 1])
    return np.fmax(np.nan_to_num(d_a, nan=np.inf),
                   np.nan_to_num(d_b, nan=np.inf))


def estimate_essential(pts_a, pts_b, K, iterations: int = DEFAULT_RANSAC_ITERATIONS,
                       threshold_px: float = DEFAULT_RANSAC_THRESHOLD_PX,
                       seed: int = 0) -> EssentialResult:
    """RANSAC essential matrix from pixel correspondences.

    The final matrix is re-estimated on the consensus set and projected to
    the essential manifold (singular values (s, s, 0)); the reported
    inlier mask is recomputed with that final matrix, so every reported
    inlier's residual is below the threshold. Deterministic given seed.
    """
    pa = np.asarray(pts_a, dtype=np.float64).reshape(-1, 2)
    pb = np.asarray(pts_b, dtype=np.float64).reshape(-1, 2)
    K = np.asarray(K, dtype=np.float64)
    n = pa.shape[0]
    if n < 8:
        raise InsufficientDataError(f"need at least 8 correspondences, got {n}")
    xa = _normalize_pixels(pa, K)
    xb = _normalize_pixels(pb, K)

    rng = np.random.default_rng(seed)
    best_mask = np.zeros(n, dtype=bool)
    best_count = -1
    for _ in range(iterations):
        sample = rng.choice(n, size=8, replace=False)
        try:
            E = _project_essential(_eight_point(xa[sample], xb[sample]))
        except np.linalg.LinAlgError:
            continue
        mask = _epipolar_distances(E, pa, pb, K) < threshold_px
        count = int(mask.sum())
        if count > best_count:
            best_count = count
            best_mask = mask

    if best_count < 8:
        raise InsufficientDataError(
            f"RANSAC consensus too small ({best_count} inliers)")

    # Re-estimate on the consensus set, iterating to a fixpoint. The
    # linear solve is Tukey-reweighted by current residuals so that
    # near-threshold contaminated matches stop biasing the solution;
    # the reported inlier gate stays at threshold_px throughout.
    mask = best_mask
    E = _project_essential(_eight_point(xa[mask], xb[mask]))
    for _ in range(10):
        if mask.sum() < 8:
            break
        d = _epipolar_distances(E, pa, pb, K)
        res_in = d[mask]
        sigma = 1.4826 * float(np.median(res_in))
        cutoff = max(2.5 * sigma, 0.35)
        w = np.zeros(n)
        t = d[mask] / cutoff
        w_in = np.where(t < 1.0, (1.0 - t * t) ** 2, 0.0)
        if w_in.sum() < 8 or not np.isfinite(w_in).all():
            break
        w[mask] = w_in
        E_new = _project_essential(_eight_point(xa[mask], xb[mask], w[mask]))
        new_mask = _epipolar_distances(E_new, pa, pb, K) < threshold_px
        E = E_new
        if (new_mask == mask).all():
            mask = new_mask
            break
        mask = new_mask
    inliers = _epipolar_distances(E, pa, pb, K) < threshold_px

    sv = np.linalg.svd(_design_matrix(xa[best_mask], xb[best_mask]),
                       compute_uv=False)
    degenerate = bool(sv[7] < max(sv[0] * 1e-9, 1e-12))
    return EssentialResult(E=E, inliers=inliers, degenerate=degenerate)


def triangulate_points(R: np.ndarray, t: np.ndarray, xa: np.ndarray,
                       xb: np.ndarray) -> np.ndarray:
    """Linear triangulation with P1 = [I|0], P2 = [R|t] (normalized coords)."""
    P1 = np.hstack([np.eye(3), np.zeros((3, 1))])
    P2 = np.hstack([R, t.reshape(3, 1)])
    out = np.empty((len(xa), 3))
    for i in range(len(xa)):
        A = np.stack([
            xa[i, 0] * P1[2] - P1[0],
            xa[i, 1] * P1[2] - P1[1],
            xb[i, 0] * P2[2] - P2[0],
            xb[i, 1] * P2[2] - P2[1],
        ])
        _, _, vt = np.linalg.svd(A)
        X = vt[-1]
        out[i] = X[:3] / X[3]
    return out


def decompose_essential(E, pts_a, pts_b, K) -> RelativePose:
    """Pick the (R, t) candidate whose triangulated points lie in front of
    both cameras; translation is returned as a unit direction only."""
    pa = np.asarray(pts_a, dtype=np.float64).reshape(-1, 2)
    pb = np.asarray(pts_b, dtype=np.float64).reshape(-1, 2)
    if pa.shape[0] < 1:
        raise InsufficientDataError("decomposition needs at least one inlier")
    K = np.asarray(K, dtype=np.float64)
    xa = _normalize_pixels(pa, K)
    xb = _normalize_pixels(pb, K)

    u, _, vt = np.linalg.svd(E)
    if np.linalg.det(u) < 0:
        u = -u
    if np.linalg.det(vt) < 0:
        vt = -vt
    W = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    R1 = u @ W @ vt
    R2 = u @ W.T @ vt
    tvec = u[:, 2]

    best = None
    best_count = -1
    for R in (R1, R2):
        for t in (tvec, -tvec):
            X = triangulate_points(R, t, xa, xb)
            z1 = X[:, 2]
            z2 = (X @ R.T + t)[:, 2]
            count = int(((z1 > 0) & (z2 > 0)).sum())
            if count > best_count:
                best_count = count
                best = (R, t)
    if best_count <= 0:
        raise DecompositionError("no candidate passed the cheirality test")
    R, t = best
    # (R, t) maps earlier-frame coords to later-frame coords; report the
    # later camera's pose in the earlier frame instead.
    rotation = R.T
    direction = -R.T @ t
    norm = np.linalg.norm(direction)
    if norm == 0:
        raise DecompositionError("degenerate zero translation")
    return RelativePose(rotation=rotation, translation_direction=direction / norm,
                        inliers=len(pa))


# ---------------------------------------------------------------------------
# Trajectory


def concatenate_trajectory(relatives) -> list[tuple[np.ndarray, np.ndarray]]:
    """Dead-reckon unit-length steps: pose_k = pose_{k-1} o relative_k.

    Entries of ``relatives`` may be None (no estimate); the previous pose
    is then carried forward unchanged. Returns [(R, t)] with pose_0 =
    identity; positions are up to scale by construction.
    """
    R = np.eye(3)
    t = np.zeros(3)
    out = [(R.copy(), t.copy())]
    for rel in relatives:
        if rel is not None:
            t = t + R @ rel.translation_direction
            R = R @ rel.rotation
        out.append((R.copy(), t.copy()))
    return out


def rotation_angle_deg(Ra: np.ndarray, Rb: np.ndarray) -> float:
    """Geodesic angle between two rotations, degrees."""
    c = (np.trace(Ra.T @ Rb) - 1.0) / 2.0
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


def direction_angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    c = float(np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b)))
    return math.degrees(math.acos(min(1.0, max(-1.0, c))))


@dataclass
class VoFrameError:
    frame: int
    rot_err_deg: float | None
    tdir_err_deg: float | None
    inliers: int
    stationary: bool = False


@dataclass
class VoReport:
    frames: list[VoFrameError] = field(default_factory=list)
    n_stationary: int = 0
    n_missing: int = 0

    def mean_rotation_error(self) -> float | None:
        vals = [f.rot_err_deg for f in self.frames if f.rot_err_deg is not None]
        return float(np.mean(vals)) if vals else None

    def mean_direction_error(self) -> float | None:
        vals = [f.tdir_err_deg for f in self.frames if f.tdir_err_deg is not None]
        return float(np.mean(vals)) if vals else None

    def max_rotation_error(self) -> float | None:
        vals = [f.rot_err_deg for f in self.frames if f.rot_err_deg is not None]
        return float(np.max(vals)) if vals else None


def evaluate_vo(estimates, gt_camera_poses) -> VoReport:
    """Per-pair rotation and translation-direction errors vs ground truth.

    ``estimates`` holds RelativePose or None per consecutive pair;
    ``gt_camera_poses`` holds 4x4 camera-to-world matrices, one per frame.
    Stationary ground-truth pairs (zero baseline) are excluded from
    direction statistics and counted separately. No absolute-position
    metric exists: monocular scale is unobservable.
    """
    gt = [np.asarray(m, dtype=np.float64) for m in gt_camera_poses]
    if len(estimates) != len(gt) - 1:
        raise ValueError(
            f"need one estimate per consecutive pair: {len(estimates)} "
            f"estimates for {len(gt)} poses")
    report = VoReport()
    for k, est in enumerate(estimates):
        rel = np.linalg.inv(gt[k]) @ gt[k + 1]
        R_gt = rel[:3, :3]
        t_gt = rel[:3, 3]
        baseline = float(np.linalg.norm(t_gt))
        if est is None:
            report.n_missing += 1
            report.frames.append(VoFrameError(frame=k + 1, rot_err_deg=None,
                                              tdir_err_deg=None, inliers=0))
            continue
        rot_err = rotation_angle_deg(est.rotation, R_gt)
        if baseline < 1e-12:
            report.n_stationary += 1
            report.frames.append(VoFrameError(frame=k + 1, rot_err_deg=rot_err,
                                              tdir_err_deg=None,
                                              inliers=est.inliers, stationary=True))
        else:
            terr = direction_angle_deg(est.translation_direction, t_gt)
            report.frames.append(VoFrameError(frame=k + 1, rot_err_deg=rot_err,
                                              tdir_err_deg=terr,
                                              inliers=est.inliers))
    return report


# ---------------------------------------------------------------------------
# Driver


@dataclass
class VoParams:
    fast_threshold: float = DEFAULT_FAST_THRESHOLD
    max_keypoints: int = DEFAULT_MAX_KEYPOINTS
    ransac_iterations: int = DEFAULT_RANSAC_ITERATIONS
    ransac_threshold_px: float = DEFAULT_RANSAC_THRESHOLD_PX
    min_matches: int = 8
    seed: int = 0


def run_monocular_vo(images, K, params: VoParams | None = None):
    """Estimate relative poses for each consecutive image pair.

    Returns (estimates, diagnostics): one RelativePose or None per pair,
    plus per-pair dicts with keypoint/match/inlier counts and flags.
    """
    params = params or VoParams()
    feats = []
    for img in images:
        gray = to_grayscale(img)
        kps = detect_keypoints(gray, params.fast_threshold, params.max_keypoints)
        desc, kept, _ = compute_descriptors(gray, kps)
        feats.append((kept, desc))

    estimates = []
    diagnostics = []
    for k in range(len(images) - 1):
        kps_a, desc_a = feats[k]
        kps_b, desc_b = feats[k + 1]
        matches = match(desc_a, desc_b)
        diag = {"frame": k + 1, "keypoints_a": len(kps_a),
                "keypoints_b": len(kps_b), "matches": len(matches),
                "inliers": 0, "degenerate": False, "status": "ok"}
        if len(matches) < max(8, params.min_matches):
            diag["status"] = "too_few_matches"
            estimates.append(None)
            diagnostics.append(diag)
            continue
        pa = np.array([[kps_a[m.index_a].x, kps_a[m.index_a].y] for m in matches])
        pb = np.array([[kps_b[m.index_b].x, kps_b[m.index_b].y] for m in matches])
        try:
            res = estimate_essential(pa, pb, K, params.ransac_iterations,
                                     params.ransac_threshold_px, params.seed)
            diag["inliers"] = res.n_inliers
            diag["degenerate"] = res.degenerate
            if res.degenerate:
                diag["status"] = "degenerate"
                estimates.append(None)
                diagnostics.append(diag)
                continue
            pose = decompose_essential(res.E, pa[res.inliers], pb[res.inliers], K)
            pose = RelativePose(rotation=pose.rotation,
                                translation_direction=pose.translation_direction,
                                inliers=res.n_inliers)
            estimates.append(pose)
        except (InsufficientDataError, DecompositionError) as exc:
            diag["status"] = type(exc).__name__
            estimates.append(None)
        diagnostics.append(diag)
    return estimates, diagnostics
