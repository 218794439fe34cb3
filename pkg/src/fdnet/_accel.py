"""Numba acceleration switch.

Hot kernels are compiled with numba unless the environment variable
``FDNET_DISABLE_NUMBA`` is set to a truthy value (or numba is missing), in
which case the pure numpy/python implementations are used instead.
"""

import os

_FALSY = {"", "0", "false", "no", "off"}


def _numba_requested():
    return os.environ.get("FDNET_DISABLE_NUMBA", "").strip().lower() in _FALSY


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and _numba_requested()


def njit(fn):
    """Compile ``fn`` in nopython mode when numba is available.

    The undecorated function is kept as ``fn.py_func`` either way so tests can
    compare both paths.
    """
    if not HAVE_NUMBA:
        fn.py_func = fn
        return fn
    return _numba.njit(cache=True, nogil=True)(fn)
