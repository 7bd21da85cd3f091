"""Numba switch.

Set ``QCONNPART_NO_NUMBA=1`` to run every kernel on its pure numpy/Python
path. The flag is read once at import time.
"""

import os

_disabled = os.environ.get("QCONNPART_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("disabled by QCONNPART_NO_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA


def njit(fn):
    """Compile ``fn`` in nopython mode when numba is active, else return it as is."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
