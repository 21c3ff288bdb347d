"""Kernel backend selection.

Hot numeric kernels are numba-jitted by default. Setting the environment
variable ``CAMPLACE_NUMBA=0`` before import selects the pure-Python/NumPy
fallback (the same code, un-jitted), ``CAMPLACE_NUMBA=1`` makes a missing
numba an import error. Both paths execute identical arithmetic in identical
order, so results are bit-for-bit equal.
"""

import os

_FALSY = ("0", "false", "no", "off")
_TRUTHY = ("1", "true", "yes", "on")


def _resolve_backend() -> bool:
    flag = os.environ.get("CAMPLACE_NUMBA", "").strip().lower()
    if flag in _FALSY:
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        if flag in _TRUTHY:
            raise ImportError("CAMPLACE_NUMBA=1 but numba is not importable")
        return False
    return True


NUMBA_ENABLED = _resolve_backend()

if NUMBA_ENABLED:
    from numba import njit as _njit

    def kernel(fn):
        """Jit a kernel for the active backend."""
        return _njit(cache=True, nogil=True)(fn)

else:

    def kernel(fn):
        """Identity decorator: pure-Python fallback backend."""
        return fn


def python_impl(fn):
    """Return the un-jitted implementation of a kernel (for benchmarks)."""
    return getattr(fn, "py_func", fn)
