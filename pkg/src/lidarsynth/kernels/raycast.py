"""Nearest-hit ray casting kernels.

Two interchangeable implementations of the same Moller-Trumbore test:

* ``cast_rays_numba``: per-ray BVH traversal compiled with ``@njit``.
* ``cast_rays_numpy``: brute-force scan of every triangle, vectorized
  per ray. No BVH, so it is slow on large scenes, but it computes the
  identical IEEE arithmetic and is used as the fallback path and as the
  benchmark baseline.

Both return ``(t, slot)`` arrays where ``slot`` indexes the BVH's
reordered triangle storage (-1 for a miss, ``t`` = inf). Ties in ``t``
resolve to the lowest *original* triangle index.
"""

import numpy as np

from ._config import HAVE_NUMBA, NUMBA_ENABLED

# Shared numeric policy. T_EPS suppresses self-intersection acne;
# PARALLEL_EPS rejects rays (nearly) parallel to a triangle's plane.
T_EPS = 1e-6
PARALLEL_EPS = 1e-12

if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _traverse(node_min, node_max, node_left, node_right,
                  leaf_start, leaf_count,
                  v0, e1, e2, degenerate, tri_index,
                  origins, dirs, t_min, t_max):
        n_rays = origins.shape[0]
        out_t = np.full(n_rays, np.inf)
        out_slot = np.full(n_rays, -1, np.int64)
        if node_min.shape[0] == 0:
            return out_t, out_slot
        stack = np.empty(128, np.int64)
        for r in range(n_rays):
            ox = origins[r, 0]
            oy = origins[r, 1]
            oz = origins[r, 2]
            dx = dirs[r, 0]
            dy = dirs[r, 1]
            dz = dirs[r, 2]
            lo = t_min[r]
            best_t = t_max[r]
            best_slot = -1
            best_orig = np.int64(2 ** 62)
            sp = 0
            stack[0] = 0
            sp = 1
            while sp > 0:
                sp -= 1
                nid = stack[sp]
                # Slab test against the active window [lo, best_t]. The
                # upper bound carries rounding slack so a node holding an
                # exact-tie candidate is never pruned by slab round-off;
                # the in-leaf tie-break (lowest original index) decides.
                tn = lo
                tf = best_t + (best_t * 1e-12 + 1e-12)
                ok = True
                if dx != 0.0:
                    inv = 1.0 / dx
                    t1 = (node_min[nid, 0] - ox) * inv
                    t2 = (node_max[nid, 0] - ox) * inv
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > tn:
                        tn = t1
                    if t2 < tf:
                        tf = t2
                elif ox < node_min[nid, 0] or ox > node_max[nid, 0]:
                    ok = False
                if ok and dy != 0.0:
                    inv = 1.0 / dy
                    t1 = (node_min[nid, 1] - oy) * inv
                    t2 = (node_max[nid, 1] - oy) * inv
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > tn:
                        tn = t1
                    if t2 < tf:
                        tf = t2
                elif ok and (oy < node_min[nid, 1] or oy > node_max[nid, 1]):
                    ok = False
                if ok and dz != 0.0:
                    inv = 1.0 / dz
                    t1 = (node_min[nid, 2] - oz) * inv
                    t2 = (node_max[nid, 2] - oz) * inv
                    if t1 > t2:
                        t1, t2 = t2, t1
                    if t1 > tn:
                        tn = t1
                    if t2 < tf:
                        tf = t2
                elif ok and (oz < node_min[nid, 2] or oz > node_max[nid, 2]):
                    ok = False
                if not ok or tn > tf:
                    continue
                if node_left[nid] < 0:
                    s = leaf_start[nid]
                    c = leaf_count[nid]
                    for k in range(s, s + c):
                        if degenerate[k]:
                            continue
                        # Moller-Trumbore
                        hx = dy * e2[k, 2] - dz * e2[k, 1]
                        hy = dz * e2[k, 0] - dx * e2[k, 2]
                        hz = dx * e2[k, 1] - dy * e2[k, 0]
                        a = e1[k, 0] * hx + e1[k, 1] * hy + e1[k, 2] * hz
                        if -PARALLEL_EPS < a < PARALLEL_EPS:
                            continue
                        f = 1.0 / a
                        sx = ox - v0[k, 0]
                        sy = oy - v0[k, 1]
                        sz = oz - v0[k, 2]
                        u = f * (sx * hx + sy * hy + sz * hz)
                        if u < 0.0 or u > 1.0:
                            continue
                        qx = sy * e1[k, 2] - sz * e1[k, 1]
                        qy = sz * e1[k, 0] - sx * e1[k, 2]
                        qz = sx * e1[k, 1] - sy * e1[k, 0]
                        v = f * (dx * qx + dy * qy + dz * qz)
                        if v < 0.0 or u + v > 1.0:
                            continue
                        t = f * (e2[k, 0] * qx + e2[k, 1] * qy + e2[k, 2] * qz)
                        if t <= T_EPS or t < lo or t > best_t:
                            continue
                        if t < best_t or tri_index[k] < best_orig:
                            best_t = t
                            best_slot = k
                            best_orig = tri_index[k]
                else:
                    left = node_left[nid]
                    right = node_right[nid]
                    # Visit the nearer child first: push the farther one
                    # deeper in the stack.
                    pl = ((node_min[left, 0] + node_max[left, 0]) * 0.5 - ox) * dx \
                        + ((node_min[left, 1] + node_max[left, 1]) * 0.5 - oy) * dy \
                        + ((node_min[left, 2] + node_max[left, 2]) * 0.5 - oz) * dz
                    pr = ((node_min[right, 0] + node_max[right, 0]) * 0.5 - ox) * dx \
                        + ((node_min[right, 1] + node_max[right, 1]) * 0.5 - oy) * dy \
                        + ((node_min[right, 2] + node_max[right, 2]) * 0.5 - oz) * dz
                    if pl <= pr:
                        stack[sp] = right
                        sp += 1
                        stack[sp] = left
                        sp += 1
                    else:
                        stack[sp] = left
                        sp += 1
                        stack[sp] = right
                        sp += 1
            if best_slot >= 0:
                out_t[r] = best_t
                out_slot[r] = best_slot
        return out_t, out_slot

    def cast_rays_numba(bvh, origins, dirs, t_min, t_max):
        return _traverse(bvh.node_min, bvh.node_max, bvh.node_left,
                         bvh.node_right, bvh.leaf_start, bvh.leaf_count,
                         bvh.v0, bvh.e1, bvh.e2, bvh.degenerate,
                         bvh.tri_index, origins, dirs, t_min, t_max)
else:
    def cast_rays_numba(bvh, origins, dirs, t_min, t_max):
        raise RuntimeError("numba is not installed; use cast_rays_numpy")


def cast_rays_numpy(bvh, origins, dirs, t_min, t_max):
    """Brute-force fallback: every ray against every triangle."""
    n_rays = origins.shape[0]
    out_t = np.full(n_rays, np.inf)
    out_slot = np.full(n_rays, -1, np.int64)
    n_tri = bvh.v0.shape[0]
    if n_tri == 0:
        return out_t, out_slot
    v0, e1, e2 = bvh.v0, bvh.e1, bvh.e2
    alive = ~bvh.degenerate
    tri_index = bvh.tri_index
    for r in range(n_rays):
        o = origins[r]
        d = dirs[r]
        h = np.cross(np.broadcast_to(d, e2.shape), e2)
        a = (e1 * h).sum(axis=1)
        cand = alive & (np.abs(a) >= PARALLEL_EPS)
        if not cand.any():
            continue
        with np.errstate(divide="ignore", invalid="ignore"):
            f = 1.0 / a
            s = o - v0
            u = f * (s * h).sum(axis=1)
            q = np.cross(s, e1)
            v = f * (q * d).sum(axis=1)
            t = f * (e2 * q).sum(axis=1)
            cand &= (u >= 0.0) & (u <= 1.0) & (v >= 0.0) & (u + v <= 1.0)
            cand &= (t > T_EPS) & (t >= t_min[r]) & (t <= t_max[r])
        if not cand.any():
            continue
        ts = np.where(cand, t, np.inf)
        best = ts.min()
        tie = ts == best
        # Lowest original triangle index wins ties, matching the BVH path.
        slot = np.flatnonzero(tie)[np.argmin(tri_index[tie])]
        out_t[r] = best
        out_slot[r] = slot
    return out_t, out_slot


cast_rays = cast_rays_numba if NUMBA_ENABLED else cast_rays_numpy
