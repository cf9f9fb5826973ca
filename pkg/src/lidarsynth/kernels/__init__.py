"""Hot numeric kernels shared by the sensor and vision modules.

Each kernel has a numba-jitted implementation and a pure-numpy fallback
producing identical results; ``LIDARSYNTH_DISABLE_NUMBA=1`` forces the
fallback. ``benchmarks/bench_raycast.py`` compares the two.
"""

from ._config import ENV_FLAG, HAVE_NUMBA, NUMBA_ENABLED
from .fastcorner import fast_scores, fast_scores_numba, fast_scores_numpy
from .raycast import T_EPS, cast_rays, cast_rays_numba, cast_rays_numpy

__all__ = [
    "ENV_FLAG",
    "HAVE_NUMBA",
    "NUMBA_ENABLED",
    "T_EPS",
    "cast_rays",
    "cast_rays_numba",
    "cast_rays_numpy",
    "fast_scores",
    "fast_scores_numba",
    "fast_scores_numpy",
]
