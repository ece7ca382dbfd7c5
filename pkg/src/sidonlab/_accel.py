"""Numba dispatch.

Set ``SIDONLAB_NO_NUMBA=1`` to force the pure-numpy kernels (useful for
debugging and for the benchmark comparison).
"""
import os

_DISABLED = os.environ.get("SIDONLAB_NO_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised by the fallback CI leg
    _njit = None
    HAVE_NUMBA = False


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    if HAVE_NUMBA:
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def use_numba():
    return HAVE_NUMBA
