"""Optional numba acceleration.

Set ``SPHGAIN_DISABLE_NUMBA=1`` before import to force the pure-numpy kernels.
"""
import os
import warnings

_DISABLED = os.environ.get("SPHGAIN_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba as _numba
except ImportError:  # pragma: no cover - depends on environment
    _numba = None
    if not _DISABLED:
        warnings.warn("numba not found; falling back to numpy kernels", RuntimeWarning)

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAVE_NUMBA:
        return _numba.njit(*args, **kwargs)

    def identity(func):
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return identity
