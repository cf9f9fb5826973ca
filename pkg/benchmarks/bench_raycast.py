#!/usr/bin/env python3
"""Benchmark the numba-jitted kernels against the pure-numpy fallbacks.

Both paths compute bit-identical results; this script measures the gap
and verifies the equality on the benchmarked workload.

    python benchmarks/bench_raycast.py --triangles 20000 --rays 5000
"""

import argparse
import time

import numpy as np

from lidarsynth import geometry, kernels


def timeit(fn, *args, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_raycast(n_tris, n_rays, seed):
    rng = np.random.default_rng(seed)
    tris = rng.uniform(-50, 50, (n_tris, 3, 3))
    c = tris.mean(axis=1, keepdims=True)
    tris = c + (tris - c) * 0.05
    t_build = time.perf_counter()
    bvh = geometry.build_bvh(tris)
    t_build = time.perf_counter() - t_build

    origins = rng.uniform(-60, 60, (n_rays, 3))
    dirs = rng.normal(size=(n_rays, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t_min = np.zeros(n_rays)
    t_max = np.full(n_rays, np.inf)

    print(f"ray casting: {n_tris} triangles, {n_rays} rays "
          f"(BVH build {t_build:.2f}s)")
    if kernels.HAVE_NUMBA:
        # warm the JIT outside the timed region
        kernels.cast_rays_numba(bvh, origins[:1], dirs[:1], t_min[:1], t_max[:1])
        tb, (tn, sn) = timeit(kernels.cast_rays_numba, bvh, origins, dirs,
                              t_min, t_max)
        print(f"  numba BVH traversal : {tb:8.4f}s "
              f"({n_rays / tb:,.0f} rays/s)")
    else:
        tb, tn, sn = None, None, None
        print("  numba BVH traversal : unavailable (numba not installed)")
    tp, (tn2, sn2) = timeit(kernels.cast_rays_numpy, bvh, origins, dirs,
                            t_min, t_max, repeats=1)
    print(f"  numpy brute force    : {tp:8.4f}s ({n_rays / tp:,.0f} rays/s)")
    if tb is not None:
        same = np.array_equal(tn, tn2) and np.array_equal(sn, sn2)
        print(f"  speedup {tp / tb:,.0f}x; results bit-identical: {same}")


def bench_fast(h, w, seed):
    rng = np.random.default_rng(seed)
    img = rng.uniform(0, 255, (h, w))
    print(f"FAST-9 corner scores: {w}x{h} image")
    if kernels.HAVE_NUMBA:
        kernels.fast_scores_numba(img[:16, :16], 20.0)
        tb, a = timeit(kernels.fast_scores_numba, img, 20.0)
        print(f"  numba : {tb:8.4f}s")
    else:
        tb, a = None, None
        print("  numba : unavailable")
    tp, b = timeit(kernels.fast_scores_numpy, img, 20.0)
    print(f"  numpy : {tp:8.4f}s")
    if tb is not None:
        print(f"  speedup {tp / tb:.1f}x; identical: {np.array_equal(a, b)}")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--triangles", type=int, default=20000,
                    help="scene size for the ray-casting benchmark")
    ap.add_argument("--rays", type=int, default=5000,
                    help="number of rays to cast")
    ap.add_argument("--image", type=int, nargs=2, default=(480, 640),
                    metavar=("H", "W"), help="image size for the FAST benchmark")
    ap.add_argument("--seed", type=int, default=0, help="workload seed")
    args = ap.parse_args()
    bench_raycast(args.triangles, args.rays, args.seed)
    print()
    bench_fast(args.image[0], args.image[1], args.seed)


if __name__ == "__main__":
    main()
