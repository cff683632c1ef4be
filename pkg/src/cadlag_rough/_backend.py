"""Kernel backend selection.

Hot loops live in kernels.py in two builds: a numba @njit build and a pure
numpy build.  The active build is picked once at import time from the
CADLAG_ROUGH_NUMBA environment variable: "0" forces the numpy path, anything
else (or unset) uses numba when it imports cleanly.
"""

import os

_flag = os.environ.get("CADLAG_ROUGH_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "false", "off", "no")

HAS_NUMBA = False
if _want_numba:
    try:
        from numba import njit  # noqa: F401

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False

USE_NUMBA = _want_numba and HAS_NUMBA

# kwargs shared by every jitted kernel
JIT_OPTIONS = {"nogil": True, "cache": True, "fastmath": False}


def backend():
    """Name of the active kernel backend, "numba" or "numpy"."""
    return "numba" if USE_NUMBA else "numpy"
