"""Fixed 256-pair sampling pattern for the rotated binary descriptor.

Each row is (x1, y1, x2, y2), offsets from the keypoint center in
pixels, drawn once from a clipped Gaussian (sigma 6.5, |offset| <= 13)
and frozen here so descriptors are stable across builds. Bit i of a
descriptor is 1 iff the smoothed intensity at the rotated first point
is less than at the second.
"""

import numpy as np

PATTERN = np.array([
    (9, -13, 0, 1), (0, 8, 6, 1), (5, 3, 2, 2), (3, 0, -4, -4),
    (0, -1, -1, 4), (5, -5, 13, -2), (12, 1, 0, -11), (1, -3, 6, -2),
    (-7, -4, -3, 7), (5, -6, -1, 0), (7, 9, 3, 12), (-2, -5, -2, 7),
    (-6, -6, -4, 4), (-6, -1, -1, 10), (1, -6, -6, -6), (0, 13, 4, 0),
    (11, -7, 7, -3), (9, -9, -2, 2), (1, -4, -11, -4), (1, -2, 8, 8),
    (4, -4, 1, 10), (9, 3, 0, 0), (-7, -11, -9, -3), (2, -5, -6, -1),
    (9, -1, -3, -13), (-2, -4, -3, 0), (7, 3, 6, -5), (-13, -2, -7, 13),
    (-2, -1, 0, 3), (-7, -1, -2, 1), (3, -4, 11, -4), (-3, -6, 2, -7),
    (-6, 3, 10, 2), (7, 0, 1, 2), (2, -4, -8, 1), (13, 5, 12, 5),
    (-7, 1, -2, -3), (6, -13, 4, 2), (10, 8, 3, 11), (-7, 0, -2, -1),
    (10, -10, 0, 2), (-1, 5, 2, 3), (1, 3, -5, 3), (6, -6, 4, -2),
    (3, -2, 1, 1), (-8, 5, 7, 5), (13, 3, -1, -13), (3, 1, -2, 7),
    (-4, 7, 7, -5), (-5, -10, -5, 0), (-7, 13, -12, 3), (-9, 5, 0, -8),
    (2, 3, 12, 1), (1, 4, 6, 8), (10, 8, -5, 2), (0, -12, 1, -3),
    (5, -9, 3, 7), (7, 4, 1, -5), (-5, 3, 8, 0), (-11, 5, 0, 10),
    (-7, -4, -4, -9), (1, -8, -7, 13), (-8, 10, 8, -4), (-8, -3, 3, -6),
    (12, -5, -4, -12), (0, 10, 5, 3), (7, 7, 8, -3), (-12, 7, 0, -7),
    (-6, -4, 3, 5), (-5, -2, 2, 7), (8, -4, 5, -2), (-1, 5, -9, -8),
    (-5, -1, 1, 10), (-13, -11, 5, -9), (-1, 2, 4, 11), (-11, -1, 11, 5),
    (9, -2, -10, 7), (-4, 0, 4, -7), (1, 4, 0, -5), (-1, 6, 0, -1),
    (8, 11, -2, 10), (-2, 12, -1, -11), (0, 2, -3, -8), (5, 10, -12, -13),
    (-5, 2, -8, 12), (7, 11, 2, 1), (2, 3, -6, -12), (-4, 8, -13, -4),
    (-7, 3, -2, -2), (7, -12, -2, -13), (1, 4, 9, 8), (-5, 1, 4, 7),
    (9, -7, 7, -4), (-9, 9, 0, 0), (-13, 4, -8, 0), (-6, -8, -4, 4),
    (0, 1, 13, 2), (3, 12, 13, 2), (-2, -4, -1, -10), (8, 4, -1, 10),
    (-2, -3, -6, 5), (3, 12, -4, 10), (6, 1, 2, -5), (-2, -1, 3, -1),
    (-7, -4, 11, 2), (0, -2, -1, -8), (-1, -2, -3, 2), (-8, 3, -10, -11),
    (5, -5, -12, 1), (-11, 3, 5, -10), (1, 2, 6, -13), (-4, 4, -13, -9),
    (0, -4, -7, 13), (0, 10, 0, -2), (-1, 9, -4, -11), (11, -5, -9, 11),
    (3, 1, -9, 3), (-7, 0, -11, -2), (-1, 9, 6, -4), (0, 9, 3, 0),
    (1, 8, 3, 3), (12, -2, 13, 8), (3, -3, -4, 11), (11, 4, -13, 1),
    (6, -13, 9, 0), (-5, -5, 7, -5), (-10, 12, 5, -1), (-2, -10, 1, -7),
    (4, -6, 13, 7), (5, 8, 12, 0), (-13, 4, 8, -1), (11, -6, 0, 8),
    (9, 0, 9, 3), (-4, -5, -3, -6), (-2, -2, -6, 5), (8, 4, -10, 13),
    (-1, 3, -1, 4), (6, -4, -3, 4), (-6, 7, 5, -4), (13, -2, 4, 2),
    (4, -3, 6, -3), (-3, -1, -2, 8), (11, -4, -7, -6), (4, -12, 6, 0),
    (3, -7, 2, 5), (1, -4, -4, -3), (-3, 1, -5, -5), (-8, 13, -4, 2),
    (-5, 0, 2, -13), (-2, -7, -3, -1), (4, -11, 12, 7), (13, 2, -5, 0),
    (-9, 6, -2, 5), (4, 13, -13, 8), (-6, 2, -13, -6), (10, 1, 5, 1),
    (-3, -8, -2, -6), (3, -2, 10, 2), (-2, 4, 1, -2), (-3, -12, -2, -4),
    (-13, 10, -3, 1), (-12, 1, 7, 2), (6, -5, 6, -3), (4, 5, -6, 1),
    (6, 10, -4, 2), (-4, 5, -2, -1), (-7, 0, 4, -1), (-6, 4, 7, -4),
    (4, 6, -11, 2), (3, 1, 4, -1), (-5, -5, 0, -4), (-7, 0, 0, -2),
    (0, -7, 10, -6), (1, 3, 3, -6), (-4, 5, -7, -1), (4, 13, 13, -3),
    (3, 0, -5, -6), (-5, -9, 4, -2), (5, 6, -8, -13), (4, -2, 13, -4),
    (4, -4, 10, 6), (-6, 0, 10, 13), (0, 13, 3, 6), (5, 6, -8, 1),
    (2, -3, 4, -13), (-4, -13, 1, 1), (7, 7, -6, -1), (-3, -3, 1, -5),
    (0, 8, -6, -8), (0, 7, 0, 3), (-2, 1, 2, 3), (-13, 2, 11, -5),
    (-9, -5, -3, 3), (-3, -9, -13, 6), (0, -5, 6, -6), (10, -8, 2, 1),
    (2, 1, -2, 0), (5, 6, -7, 1), (-2, -1, 1, -11), (4, 2, -9, 7),
    (-4, 6, -7, -2), (0, 9, 0, -2), (-2, 5, 5, 8), (-1, 1, 12, -11),
    (-6, 9, 2, -5), (-2, 5, 10, 6), (-5, -6, 1, 3), (-11, 3, 10, 0),
    (5, -5, -1, 8), (9, 1, 10, 1), (-7, 8, -3, 1), (7, -3, 4, 4),
    (1, 0, -8, -11), (-4, 0, -8, -1), (-9, 13, 10, 1), (11, 3, -5, 2),
    (6, 2, -7, 1), (1, 7, -2, -3), (6, 13, 1, -10), (1, 1, 6, -7),
    (-1, 6, -8, -1), (-4, -13, 0, -5), (2, 6, 5, -12), (-7, 11, -6, 4),
    (6, -9, 3, 3), (-11, -3, 1, 4), (8, 10, 5, 9), (-5, 5, -2, -6),
    (-1, 12, -13, 5), (-6, -13, -6, 4), (-9, 4, 12, 13), (10, 3, 6, 2),
    (8, -9, 5, -3), (0, 3, -4, -6), (2, 6, -7, -8), (-3, 1, -5, -13),
    (-3, 6, 1, -13), (6, 7, 1, -11), (12, -1, -3, 6), (3, -12, -11, 1),
    (12, -1, -11, 3), (-3, 0, -3, 6), (9, 5, 2, -13), (7, 0, 11, 8),
    (1, 9, 9, 1), (6, 5, -4, 3), (9, -1, -11, -4), (-4, -10, -1, -3),
    (5, 3, 13, 13), (-4, -12, 6, 4), (4, -6, -10, 6), (-7, -2, 6, 7),
    (10, -3, -2, -3), (-5, 0, 9, 4), (13, -3, -8, -2), (3, 7, 3, 1),
], dtype=np.int8)

assert PATTERN.shape == (256, 4)
