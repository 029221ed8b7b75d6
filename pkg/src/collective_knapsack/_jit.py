"""Optional numba acceleration.

Set ``CK_NO_NUMBA=1`` to force the pure-numpy path even when numba is
importable. The flag is read once, at import time.
"""

import os

_disabled = os.environ.get("CK_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("numba disabled by CK_NO_NUMBA")
    from numba import njit as _numba_njit

    HAVE_NUMBA = True
except ImportError:
    _numba_njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator."""
    if HAVE_NUMBA:
        return _numba_njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def backend() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
