"""Backend selection for the hot kernels.

``UEKS_BACKEND=numpy`` forces the pure-numpy path; ``numba`` (the default)
uses the jitted kernels when numba is importable and falls back to numpy
otherwise. Both paths return bit-identical results.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - exercised only without numba
    numba = None

HAVE_NUMBA = numba is not None
BACKEND_ENV = "UEKS_BACKEND"
THREADS_ENV = "UEKS_THREADS"


def requested_backend():
    name = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if name not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        return "numpy"
    return name


def njit(fn):
    """``numba.njit`` when available, identity otherwise.

    fastmath stays off: the numba and numpy paths must round identically.
    """
    if not HAVE_NUMBA:
        return fn
    return numba.njit(nogil=True, cache=True)(fn)


def max_workers():
    """Worker cap from ``UEKS_THREADS`` (default: all CPUs)."""
    raw = os.environ.get(THREADS_ENV)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return os.cpu_count() or 1
