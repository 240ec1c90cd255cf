"""Empirical and U-empirical distribution functions and the test statistics.

All step functions are left-continuous: ``A(t)`` is the mass strictly below
``t``. Suprema are exact. Every candidate location is evaluated both at the
point and as a right limit, and differences of two step functions are formed
on integer numerators so that no rounding depends on the evaluation order.
"""

import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import _kernels
from .errors import DomainError, ParameterError, RegistryError, SizeError, TieError

SIDES = ("plus", "minus", "two-sided")
DEFAULT_CAP = 10 ** 8

# named kernels h with dedicated exact enumeration
NAMED_H = {
    "identity": 1,
    "2min": 2,
    "max": 2,
    "absmax": 2,
    "absdiff": 2,
    "sum_sqrt2": 2,
}


@dataclass(frozen=True, eq=False)
class Sample:
    """Sorted observations without ties, with optional provenance."""

    values: np.ndarray
    seed: Optional[int] = None
    dist: Optional[str] = None

    @property
    def n(self):
        return int(self.values.shape[0])

    def __len__(self):
        return self.n

    @classmethod
    def from_values(cls, values, seed=None, dist=None, jitter=False):
        """Validate and sort ``values``.

        Raises :class:`TieError` on duplicates unless ``jitter`` is set, in
        which case the k-th copy of a repeated value is moved up by
        ``k * 1e-12 * range``.
        """
        x = np.array(values, dtype=float).ravel()
        if x.shape[0] == 0:
            raise SizeError("a sample needs at least one observation")
        if not np.all(np.isfinite(x)):
            raise DomainError("sample contains non-finite values")
        x.sort(kind="mergesort")
        if jitter:
            x = _break_ties(x)
        dup = np.flatnonzero(x[1:] == x[:-1])
        if dup.size:
            raise TieError(float(x[dup[0]]))
        x.flags.writeable = False
        return cls(x, seed, dist)


def _break_ties(x):
    span = float(x[-1] - x[0])
    delta = 1e-12 * (span if span > 0 else max(1.0, abs(float(x[0]))))
    for _ in range(64):
        same = np.concatenate([[False], x[1:] == x[:-1]])
        if not same.any():
            return x
        # position of each element within its run of equal values
        start = np.maximum.accumulate(np.where(~same, np.arange(x.shape[0]), 0))
        x = np.sort(x + (np.arange(x.shape[0]) - start) * delta)
    return x


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Left-continuous step function with integer jump counts.

    ``locs`` are strictly increasing jump locations, ``cum`` the cumulative
    counts after each jump and ``total`` the full count, so the height just
    right of ``locs[k]`` is ``cum[k] / total``.
    """

    locs: np.ndarray
    cum: np.ndarray
    total: int

    def __call__(self, t):
        idx = np.searchsorted(self.locs, np.asarray(t, dtype=float), side="left")
        return self._height(idx, t)

    def right_limit(self, t):
        idx = np.searchsorted(self.locs, np.asarray(t, dtype=float), side="right")
        return self._height(idx, t)

    def _height(self, idx, t):
        c = np.concatenate([[0], self.cum])[idx] / self.total
        return float(c) if np.ndim(t) == 0 else c

    @property
    def jumps(self):
        """``[(location, cumulative height), ...]``."""
        return [(float(z), c / self.total) for z, c in zip(self.locs, self.cum)]

    def __len__(self):
        return int(self.locs.shape[0])


def _values(s):
    return s.values if isinstance(s, Sample) else np.asarray(s, dtype=float)


def build_edf(s):
    """Empirical df: a jump of ``1/n`` at every observation."""
    x = _values(s)
    locs, cum = _kernels.compress(np.ascontiguousarray(x))
    return StepFunction(locs, cum, int(x.shape[0]))


def n_subsets(n, m):
    return math.comb(n, m)


def build_udf(s, h, m=None, cap=DEFAULT_CAP):
    """U-empirical df of ``h`` over all ``m``-subsets of the sample.

    ``h`` is either one of the names in :data:`NAMED_H` (exact fast paths)
    or a symmetric vectorized callable of ``m`` arrays.
    """
    x = np.ascontiguousarray(_values(s))
    n = x.shape[0]
    if isinstance(h, str):
        if h not in NAMED_H:
            raise RegistryError(f"unknown kernel function {h!r}; known: {', '.join(NAMED_H)}")
        if m is not None and m != NAMED_H[h]:
            raise ParameterError(f"{h} has degree {NAMED_H[h]}, got m={m}")
        m = NAMED_H[h]
    elif m is None:
        raise ParameterError("m is required for a callable kernel")
    if n < m:
        raise SizeError(f"need n >= m, got n={n}, m={m}")
    count = n_subsets(n, m)
    if count > cap:
        raise SizeError(f"C({n},{m}) = {count} kernel evaluations exceed the cap {cap}")

    if h == "identity":
        return build_edf(x)
    if isinstance(h, str):
        locs, cum = _udf_named(x, h)
        return StepFunction(locs, cum, count)
    if m == 2:
        i, j = np.triu_indices(n, 1)
        v = np.asarray(h(x[i], x[j]), dtype=float)
    else:
        idx = np.array(list(combinations(range(n), m)), dtype=np.intp).reshape(-1, m)
        v = np.asarray(h(*(x[idx[:, k]] for k in range(m))), dtype=float)
    v = np.sort(v.ravel())
    locs, cum = _kernels.compress(v)
    return StepFunction(locs, cum, count)


def _udf_named(x, h):
    """``x`` sorted ascending; returns (locs, cum)."""
    n = x.shape[0]
    rank = np.arange(n, dtype=np.int64)
    if h == "2min":
        # x[i] is the minimum of the n - 1 - i pairs it forms with larger points
        return _kernels.weighted_compress(2.0 * x, n - 1 - rank)
    if h == "max":
        return _kernels.weighted_compress(x, rank)
    if h == "absmax":
        return _kernels.weighted_compress(np.abs(x), rank)
    v = _kernels.pair_values(x, _kernels.PAIR_KINDS[h])
    return _kernels.compress(v)


class SupResult(NamedTuple):
    value: float
    argmax_t: float
    right_limit: bool


class _Sides(NamedTuple):
    plus: float
    plus_t: float
    plus_right: bool
    minus: float
    minus_t: float
    minus_right: bool


def _pick(sides, side):
    if side == "plus":
        return SupResult(sides.plus, sides.plus_t, sides.plus_right)
    if side == "minus":
        return SupResult(sides.minus, sides.minus_t, sides.minus_right)
    if side == "two-sided":
        if sides.plus >= sides.minus:
            return SupResult(sides.plus, sides.plus_t, sides.plus_right)
        return SupResult(sides.minus, sides.minus_t, sides.minus_right)
    raise ParameterError(f"side must be one of {SIDES}, got {side!r}")


def _sup_steps(A, B):
    return _Sides(*_kernels.step_sup(A.locs, A.cum, A.total, B.locs, B.cum, B.total))


def sup_diff(A, B, side="two-sided"):
    """Exact ``sup_t (A - B)``, ``sup_t (B - A)`` or ``sup_t |A - B|``."""
    return _pick(_sup_steps(A, B), side)


def _sup_smooth(A, G):
    z = A.locs
    if z.shape[0] == 0:
        return _Sides(0.0, -math.inf, False, 0.0, math.inf, False)
    g = np.asarray(G(z), dtype=float)
    right = A.cum / A.total
    left = np.concatenate([[0], A.cum[:-1]]) / A.total
    dp = right - g      # sup of A - G over (z_k, z_k+1] is its right limit at z_k
    dm = g - left       # sup of G - A over (z_k-1, z_k] is attained at z_k
    ip, im = int(np.argmax(dp)), int(np.argmax(dm))
    plus, minus = max(float(dp[ip]), 0.0), max(float(dm[im]), 0.0)
    return _Sides(plus, float(z[ip]), True, minus, float(z[im]), False)


def sup_against_G(A, G, side="two-sided"):
    """Exact supremum of a step function against a continuous increasing df.

    ``G`` is a vectorized callable (for instance ``dist.cdf``). On each
    interval between jumps ``A`` is constant and ``G`` monotone, so the
    extremes sit at interval ends: the right limit of ``A - G`` after a jump
    and the value of ``G - A`` at the next jump.
    """
    return _pick(_sup_smooth(A, G), side)


# --- the named tests ----------------------------------------------------------

TEST_IDS = ("desu", "angus", "puri-rubin", "symmetry-h", "bh", "polya",
            "max-kernel", "kolmogorov")


@dataclass(frozen=True)
class StatResult:
    test_id: str
    side: str
    n: int
    value: float
    argmax_t: float
    right_limit: bool = False
    plus: float = field(default=math.nan, compare=False)
    minus: float = field(default=math.nan, compare=False)

    def as_dict(self):
        return {"test": self.test_id, "side": self.side, "n": self.n,
                "value": self.value, "argmax_t": self.argmax_t}


def _angus(x):
    """``sup_{x >= 0} [Fbar_n(2x) - Fbar_n(x)^2]`` with ``Fbar_n(x) = #{X >= x}/n``.

    The function is piecewise constant with breaks at ``X_j / 2`` and
    ``X_j``; each break is evaluated at the point and as a right limit, and
    ``x = 0`` is included explicitly.
    """
    n = x.shape[0]
    c = np.unique(np.concatenate([[0.0], x[x >= 0] / 2.0, x[x >= 0]]))
    c = c[c >= 0]
    out = []
    for kind in ("left", "right"):
        ge1 = n - np.searchsorted(x, c, side=kind).astype(np.int64)
        ge2 = n - np.searchsorted(x, 2.0 * c, side=kind).astype(np.int64)
        out.append(n * ge2 - ge1 * ge1)
    d = np.empty(2 * c.shape[0], dtype=np.int64)
    d[0::2], d[1::2] = out
    return _int_sides(d, c, n * n)


def _symmetry_h(x):
    """``sup_t [DF_n(t) - n^-1 sum_j DF_n(X_j)]``, ``DF_n(t) = F_n(t) + F_n(-t) - 1``.

    In counts: ``(n * cnt(t) - S) / n^2`` with ``cnt(t) = #{X < t} + #{X < -t} - n``.
    Candidates are ``+-X_j`` at the point and both one-sided limits.
    """
    n = x.shape[0]
    sl = np.searchsorted
    S = int(np.sum(sl(x, x, "left") + sl(x, -x, "left") - n))
    c = np.unique(np.concatenate([x, -x]))
    at = sl(x, c, "left") + sl(x, -c, "left") - n
    right = sl(x, c, "right") + sl(x, -c, "left") - n
    left = sl(x, c, "left") + sl(x, -c, "right") - n
    d = np.empty(3 * c.shape[0], dtype=np.int64)
    d[0::3], d[1::3], d[2::3] = n * left - S, n * at - S, n * right - S
    return _int_sides(d, c, n * n, triple=True)


def _int_sides(d, c, denom, triple=False):
    """Pick extremes from interleaved integer numerators over candidates ``c``."""
    per = 3 if triple else 2
    ip, im = int(np.argmax(d)), int(np.argmin(d))
    plus, minus = max(int(d[ip]), 0) / denom, max(-int(d[im]), 0) / denom
    # 'right' flags the right-limit slot; a left limit is reported at its point
    rslot = per - 1
    return _Sides(plus, float(c[ip // per]), ip % per == rslot,
                  minus, float(c[im // per]), im % per == rslot)


def _default_null(test_id):
    from .kernels import get_family

    return get_family(test_id).null


def statistic_sides(test_id, x, null=None, cap=DEFAULT_CAP):
    """Both one-sided statistics of ``test_id`` on sorted data ``x``.

    Returns ``(plus, plus_t, plus_right, minus, minus_t, minus_right)``.
    This is the lean entry point used by the simulations.
    """
    x = np.ascontiguousarray(x, dtype=float)
    if test_id == "desu":
        return _sup_steps(build_udf(x, "2min", cap=cap), build_edf(x))
    if test_id == "puri-rubin":
        return _sup_steps(build_udf(x, "absdiff", cap=cap), build_edf(x))
    if test_id == "polya":
        return _sup_steps(build_udf(x, "sum_sqrt2", cap=cap), build_edf(x))
    if test_id == "bh":
        return _sup_steps(build_edf(np.sort(np.abs(x))), build_udf(x, "absmax", cap=cap))
    if test_id == "angus":
        return _angus(x)
    if test_id == "symmetry-h":
        return _symmetry_h(x)
    if test_id == "max-kernel":
        F = (null or _default_null(test_id)).cdf
        return _sup_smooth(build_udf(x, "max", cap=cap), lambda t: F(t) ** 2)
    if test_id == "kolmogorov":
        G = (null or _default_null(test_id)).cdf
        return _sup_smooth(build_edf(x), G)
    raise RegistryError(f"unknown test {test_id!r}; known: {', '.join(TEST_IDS)}")


def compute_statistic(test_id, s, side="two-sided", center=False, null=None,
                      cap=DEFAULT_CAP):
    """Evaluate a named test statistic on a :class:`Sample`.

    Parameters
    ----------
    test_id : str
        One of :data:`TEST_IDS`.
    s : Sample or array_like
    side : {"plus", "minus", "two-sided"}
    center : bool
        Polya only: subtract the sample mean first. This changes the null
        distribution of the statistic.
    null : Distribution, optional
        The df ``F`` of the max-kernel and Kolmogorov tests (defaults to
        uniform(0, 1)).
    """
    if side not in SIDES:
        raise ParameterError(f"side must be one of {SIDES}, got {side!r}")
    if test_id not in TEST_IDS:
        raise RegistryError(f"unknown test {test_id!r}; known: {', '.join(TEST_IDS)}")
    if not isinstance(s, Sample):
        s = Sample.from_values(s)
    x = s.values
    if center:
        if test_id != "polya":
            raise ParameterError("centering applies to the polya test only")
        x = Sample.from_values(x - x.mean()).values
    need = 1 if test_id == "kolmogorov" else 2
    if x.shape[0] < need:
        raise SizeError(f"{test_id} needs at least {need} observations, got {x.shape[0]}")
    sides = statistic_sides(test_id, x, null=null, cap=cap)
    best = _pick(sides, side)
    return StatResult(test_id, side, int(x.shape[0]), best.value, best.argmax_t,
                      best.right_limit, sides.plus, sides.minus)
