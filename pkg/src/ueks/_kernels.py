"""Hot loops: pairwise kernel values, run-length compression, step-function sweeps.

Every routine exists twice, a numba-jitted loop and a vectorized numpy
version, with identical floating point semantics. The active pair is chosen
from ``UEKS_BACKEND`` at import and can be switched with :func:`set_backend`.

Step functions are passed around as ``(locs, cum, total)``: strictly
increasing jump locations, cumulative integer counts and the total count.
Differences are formed on integer numerators ``a * tb - b * ta`` and divided
once, so both backends agree to the last bit.
"""

import math

import numpy as np

from ._accel import HAVE_NUMBA, njit, requested_backend

SQRT2 = math.sqrt(2.0)

# pairwise kernels enumerated over all i < j
ABSDIFF = 0
SUM_SQRT2 = 1
PAIR_KINDS = {"absdiff": ABSDIFF, "sum_sqrt2": SUM_SQRT2}


# --- numpy ------------------------------------------------------------------

def pair_values_numpy(x, kind):
    i, j = np.triu_indices(x.shape[0], 1)
    if kind == ABSDIFF:
        v = np.abs(x[i] - x[j])
    else:
        v = (x[i] + x[j]) / SQRT2
    v.sort()
    return v


def compress_numpy(v):
    """Sorted values -> (unique locations, cumulative counts)."""
    if v.shape[0] == 0:
        return v.copy(), np.zeros(0, dtype=np.int64)
    last = np.empty(v.shape[0], dtype=bool)
    last[:-1] = v[1:] != v[:-1]
    last[-1] = True
    idx = np.flatnonzero(last)
    return v[idx], (idx + 1).astype(np.int64)


def weighted_compress_numpy(v, w):
    """Unsorted values with integer weights -> (locations, cumulative weights)."""
    keep = w > 0
    v, w = v[keep], w[keep].astype(np.int64)
    order = np.argsort(v, kind="mergesort")
    v, w = v[order], w[order]
    if v.shape[0] == 0:
        return v, w
    cw = np.cumsum(w)
    last = np.empty(v.shape[0], dtype=bool)
    last[:-1] = v[1:] != v[:-1]
    last[-1] = True
    return v[last], cw[last]


def step_sup_numpy(la, ca, ta, lb, cb, tb):
    """Exact one-sided suprema of ``A - B`` and ``B - A``.

    Returns ``(plus, plus_loc, plus_right, minus, minus_loc, minus_right)``;
    ``*_right`` is True when the extreme is a right limit at ``*_loc``.
    """
    z = np.union1d(la, lb)
    c0a = np.concatenate([[0], ca]).astype(np.int64)
    c0b = np.concatenate([[0], cb]).astype(np.int64)
    al = c0a[np.searchsorted(la, z, "left")]
    ar = c0a[np.searchsorted(la, z, "right")]
    bl = c0b[np.searchsorted(lb, z, "left")]
    br = c0b[np.searchsorted(lb, z, "right")]
    d = np.empty(2 * z.shape[0], dtype=np.int64)
    d[0::2] = al * tb - bl * ta
    d[1::2] = ar * tb - br * ta
    ip = int(np.argmax(d))
    im = int(np.argmin(d))
    denom = ta * tb
    return (d[ip] / denom, z[ip // 2], ip % 2 == 1,
            -d[im] / denom, z[im // 2], im % 2 == 1)


# --- numba ------------------------------------------------------------------

@njit
def pair_values_numba(x, kind):
    n = x.shape[0]
    out = np.empty(n * (n - 1) // 2)
    k = 0
    for i in range(n):
        xi = x[i]
        for j in range(i + 1, n):
            if kind == 0:
                out[k] = abs(xi - x[j])
            else:
                out[k] = (xi + x[j]) / SQRT2
            k += 1
    out.sort()
    return out


@njit
def compress_numba(v):
    n = v.shape[0]
    locs = np.empty(n)
    cum = np.empty(n, dtype=np.int64)
    k = 0
    for i in range(n):
        if i == n - 1 or v[i + 1] != v[i]:
            locs[k] = v[i]
            cum[k] = i + 1
            k += 1
    return locs[:k], cum[:k]


@njit
def _merge_sorted_weighted(v, w):
    n = v.shape[0]
    locs = np.empty(n)
    cum = np.empty(n, dtype=np.int64)
    k = 0
    run = 0
    for i in range(n):
        run += w[i]
        if i == n - 1 or v[i + 1] != v[i]:
            locs[k] = v[i]
            cum[k] = run
            k += 1
    return locs[:k], cum[:k]


def weighted_compress_numba(v, w):
    keep = w > 0
    v, w = v[keep], w[keep].astype(np.int64)
    order = np.argsort(v, kind="mergesort")
    return _merge_sorted_weighted(v[order], w[order])


@njit
def step_sup_numba(la, ca, ta, lb, cb, tb):
    na = la.shape[0]
    nb = lb.shape[0]
    i = 0
    j = 0
    a = 0
    b = 0
    if na > 0 and (nb == 0 or la[0] <= lb[0]):
        z0 = la[0]
    else:
        z0 = lb[0]
    bp = 0
    bp_loc = z0
    bp_right = False
    bm = 0
    bm_loc = z0
    bm_right = False
    while i < na or j < nb:
        if j >= nb or (i < na and la[i] <= lb[j]):
            z = la[i]
        else:
            z = lb[j]
        d = a * tb - b * ta
        if d > bp:
            bp, bp_loc, bp_right = d, z, False
        if -d > bm:
            bm, bm_loc, bm_right = -d, z, False
        if i < na and la[i] == z:
            a = ca[i]
            i += 1
        if j < nb and lb[j] == z:
            b = cb[j]
            j += 1
        d = a * tb - b * ta
        if d > bp:
            bp, bp_loc, bp_right = d, z, True
        if -d > bm:
            bm, bm_loc, bm_right = -d, z, True
    denom = ta * tb
    return bp / denom, bp_loc, bp_right, bm / denom, bm_loc, bm_right


# --- dispatch ---------------------------------------------------------------

_IMPLS = {
    "numpy": dict(pair_values=pair_values_numpy, compress=compress_numpy,
                  weighted_compress=weighted_compress_numpy,
                  step_sup=step_sup_numpy),
}
if HAVE_NUMBA:
    _IMPLS["numba"] = dict(pair_values=pair_values_numba, compress=compress_numba,
                           weighted_compress=weighted_compress_numba,
                           step_sup=step_sup_numba)

_active = {}


def set_backend(name):
    """Switch the module-level kernels; returns the previous backend name."""
    if name not in _IMPLS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(_IMPLS)}")
    prev = _active.get("name")
    _active.update(_IMPLS[name], name=name)
    return prev


def backend():
    return _active["name"]


def get(name):
    """Kernel table of one backend, for side-by-side comparisons."""
    return _IMPLS[name]


def pair_values(x, kind):
    return _active["pair_values"](x, kind)


def compress(v):
    return _active["compress"](v)


def weighted_compress(v, w):
    return _active["weighted_compress"](v, w)


def step_sup(la, ca, ta, lb, cb, tb):
    r = _active["step_sup"](la, ca, np.int64(ta), lb, cb, np.int64(tb))
    return (float(r[0]), float(r[1]), bool(r[2]), float(r[3]), float(r[4]), bool(r[5]))


set_backend(requested_backend())
