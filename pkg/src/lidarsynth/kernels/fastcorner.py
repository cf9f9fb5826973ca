"""FAST-9 corner response kernels.

The response of a pixel is the classic "maximum threshold" strength: the
largest margin by which a contiguous arc of 9 circle pixels is brighter
(or darker) than the center. ``score > 0`` is exactly the FAST-9 segment
test. Scores are 0 inside the 3-pixel border.

Numba and numpy implementations compute identical values.
"""

import numpy as np

from ._config import HAVE_NUMBA, NUMBA_ENABLED

# Bresenham circle of radius 3, clockwise from 12 o'clock.
CIRCLE_OFFSETS = (
    (0, -3), (1, -3), (2, -2), (3, -1),
    (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1),
    (-3, 0), (-3, -1), (-2, -2), (-1, -3),
)

_OFF_X = np.array([o[0] for o in CIRCLE_OFFSETS], dtype=np.int64)
_OFF_Y = np.array([o[1] for o in CIRCLE_OFFSETS], dtype=np.int64)

if HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _scores(img, thr, off_x, off_y):
        h, w = img.shape
        out = np.zeros((h, w))
        if h < 7 or w < 7:
            return out
        d = np.empty(16)
        for y in range(3, h - 3):
            for x in range(3, w - 3):
                c = img[y, x]
                for k in range(16):
                    d[k] = img[y + off_y[k], x + off_x[k]] - c
                best = 0.0
                for s in range(16):
                    wmin = d[s]
                    wmax = d[s]
                    for j in range(1, 9):
                        v = d[(s + j) % 16]
                        if v < wmin:
                            wmin = v
                        if v > wmax:
                            wmax = v
                    if wmin - thr > best:
                        best = wmin - thr
                    if -wmax - thr > best:
                        best = -wmax - thr
                if best > 0.0:
                    out[y, x] = best
        return out

    def fast_scores_numba(image, threshold):
        img = np.ascontiguousarray(image, dtype=np.float64)
        return _scores(img, float(threshold), _OFF_X, _OFF_Y)
else:
    def fast_scores_numba(image, threshold):
        raise RuntimeError("numba is not installed; use fast_scores_numpy")


def fast_scores_numpy(image, threshold):
    img = np.asarray(image, dtype=np.float64)
    h, w = img.shape
    out = np.zeros((h, w))
    if h < 7 or w < 7:
        return out
    thr = float(threshold)
    c = img[3:h - 3, 3:w - 3]
    d = np.stack([img[3 + oy:h - 3 + oy, 3 + ox:w - 3 + ox] - c
                  for ox, oy in CIRCLE_OFFSETS])
    dd = np.concatenate([d, d[:8]], axis=0)
    bright = np.full(c.shape, -np.inf)
    dark = np.full(c.shape, np.inf)
    for s in range(16):
        wmin = dd[s].copy()
        wmax = dd[s].copy()
        for j in range(1, 9):
            np.minimum(wmin, dd[s + j], out=wmin)
            np.maximum(wmax, dd[s + j], out=wmax)
        np.maximum(bright, wmin, out=bright)
        np.minimum(dark, wmax, out=dark)
    score = np.maximum(bright - thr, -dark - thr)
    out[3:h - 3, 3:w - 3] = np.where(score > 0.0, score, 0.0)
    return out


fast_scores = fast_scores_numba if NUMBA_ENABLED else fast_scores_numpy
