"""Selects the kernel implementation: numba JIT or pure numpy.

Set LIDARSYNTH_DISABLE_NUMBA=1 (or true/yes/on) to force the numpy
fallback even when numba is installed. The flag is read once at import.
"""

import os

ENV_FLAG = "LIDARSYNTH_DISABLE_NUMBA"


def flag_disabled() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

NUMBA_ENABLED = HAVE_NUMBA and not flag_disabled()
