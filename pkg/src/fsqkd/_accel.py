"""Optional numba acceleration for the hot numeric kernels.

The kernels in :mod:`fsqkd._kernels` are written as plain scalar Python so
they run identically with or without JIT compilation.  Backend selection is
controlled by the ``FSQKD_NUMBA`` environment variable:

* ``FSQKD_NUMBA=auto`` (default) -- use numba when importable,
* ``FSQKD_NUMBA=1``    -- require numba, raise if unavailable,
* ``FSQKD_NUMBA=0``    -- pure NumPy/Python fallback, no compilation.

When numba is active every kernel keeps its uncompiled twin on the
``py_func`` attribute, which the benchmark suite uses to compare backends.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("FSQKD_NUMBA", "auto").strip().lower()

_numba_requested = _FLAG in ("auto", "1", "true", "yes", "on")
_numba_required = _FLAG in ("1", "true", "yes", "on")

NUMBA_ENABLED = False

if _numba_requested:
    try:
        from numba import njit as _numba_njit

        NUMBA_ENABLED = True
    except ImportError:
        if _numba_required:
            raise ImportError(
                "FSQKD_NUMBA=1 requires numba; install it or set FSQKD_NUMBA=0"
            )


def njit(func=None, **kwargs):
    """``numba.njit`` when enabled, identity decorator otherwise."""
    if NUMBA_ENABLED:
        kwargs.setdefault("cache", True)
        kwargs.setdefault("nogil", True)
        if func is None:
            return _numba_njit(**kwargs)
        return _numba_njit(**kwargs)(func)
    if func is None:
        return lambda f: f
    return func


def using_numba() -> bool:
    """True when kernels are JIT-compiled in this process."""
    return NUMBA_ENABLED


def plain(func):
    """Return the uncompiled implementation of a (possibly jitted) kernel."""
    return getattr(func, "py_func", func)
