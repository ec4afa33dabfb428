"""Selects between numba-compiled kernels and their pure-numpy counterparts.

Set ``AUTOTUNE_DISABLE_NUMBA=1`` (or any of ``true``/``yes``) before import to
force the numpy path, e.g. when numba is unavailable or for debugging.
"""

from __future__ import annotations

import os

_FLAG = os.environ.get("AUTOTUNE_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _njit = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and _FLAG not in ("1", "true", "yes", "on")


def njit(fn):
    """Compile ``fn`` with numba (cached, GIL released) if available, else return it as is."""
    if _njit is None:
        return fn
    return _njit(cache=True, nogil=True)(fn)


def pick(numba_impl, numpy_impl, use_numba: bool | None = None):
    """Return the implementation matching the active backend."""
    if use_numba is None:
        use_numba = USE_NUMBA
    return numba_impl if use_numba else numpy_impl


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
