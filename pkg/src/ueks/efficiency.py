"""Local Bahadur efficiency.

For a test with leading rate coefficient ``c`` and almost-sure limit
``b(theta)`` under an alternative, the local exact slope is
``2 c b(theta)^2``. Its ratio to twice the Kullback-Leibler distance from the
alternative to the composite null, both taken to leading order ``theta^2``,
is the local efficiency.
"""

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .distributions import (Exponential, MakehamAlt, NormalShift, WeibullAlt,
                            min_kl_to_null)
from .errors import IndeterminateError, RegistryError
from .kernels import get_family
from .large_deviation import ld_leading_coeff
from .optimize import scan_maximize
from .quadrature import DEFAULT_QUAD, graded_edges, integrate

SQRT2 = math.sqrt(2.0)
THETAS = (0.02, 0.01, 0.005)
_EDGES = graded_edges()


@dataclass(frozen=True)
class AlternativeFamily:
    id: str
    member: Callable = field(repr=False)
    null_family: str
    description: str = ""

    def __call__(self, theta):
        return self.member(theta)


ALTERNATIVES = {
    a.id: a for a in (
        AlternativeFamily("weibull", WeibullAlt, "exponential-scale",
                          "survival exp(-x^(1+theta))"),
        AlternativeFamily("makeham", MakehamAlt, "exponential-scale",
                          "density (1 + theta(1 - e^-x)) exp(-x - theta(x - 1 + e^-x))"),
        AlternativeFamily("normal-shift", NormalShift, "symmetric",
                          "N(theta, 1)"),
        AlternativeFamily("exponential-scale", lambda th: Exponential(1.0 + th),
                          "exponential-scale", "exponential with rate 1 + theta"),
    )
}


def get_alternative(alt_id):
    try:
        return ALTERNATIVES[alt_id]
    except KeyError:
        raise RegistryError(f"unknown alternative {alt_id!r}; "
                            f"known: {', '.join(sorted(ALTERNATIVES))}") from None


# --- population limits ----------------------------------------------------------

def _convolution_cdf(alt, shift, scale, quad=DEFAULT_QUAD):
    """``P(X + scale Y < shift_k)`` for every ``shift_k``; ``X, Y ~ alt`` independent.

    With ``scale = -1`` this is ``P(X - Y < shift)``.
    """
    shift = np.atleast_1d(np.asarray(shift, dtype=float))
    lo, hi = alt.support
    a, b = (0.0, 1.0) if math.isfinite(lo) and math.isfinite(hi) else (quad.tail, 1 - quad.tail)

    def fun(u, k):
        y = alt.ppf(u)
        if scale > 0:
            return alt.cdf(shift[k] - scale * y)
        return alt.cdf(shift[k] + y)

    return integrate(fun, a, b, nparams=shift.shape[0], epsabs=quad.epsabs, edges=_EDGES)


def _difference(test_id, alt, null):
    """Signed population difference ``t -> D(t)`` whose sup norm is ``b``.

    Returns ``(D, lo, hi, at_infinity)`` where ``at_infinity`` lists the
    limits of ``D`` at the interval ends that are not attained at any finite t.
    """
    lo_s, hi_s = alt.support
    q_lo = lo_s if math.isfinite(lo_s) else float(alt.ppf(1e-10))
    q_hi = hi_s if math.isfinite(hi_s) else float(alt.ppf(1 - 1e-10))
    ends = ()
    if test_id == "desu":
        def D(t):
            return alt.sf(t) - alt.sf(t / 2) ** 2
        lo, hi = max(q_lo, 0.0), 2 * q_hi
    elif test_id == "angus":
        def D(t):
            return alt.sf(2 * t) - alt.sf(t) ** 2
        lo, hi = max(q_lo, 0.0), q_hi
    elif test_id == "puri-rubin":
        def D(t):
            t = np.asarray(t, dtype=float)
            p = _convolution_cdf(alt, t.ravel(), -1.0) - _convolution_cdf(alt, -t.ravel(), -1.0)
            return p.reshape(t.shape) - alt.cdf(t)
        lo, hi = 0.0, q_hi - q_lo
    elif test_id == "polya":
        def D(t):
            t = np.asarray(t, dtype=float)
            p = _convolution_cdf(alt, SQRT2 * t.ravel(), 1.0)
            return p.reshape(t.shape) - alt.cdf(t)
        lo, hi = q_lo, q_hi
    elif test_id == "symmetry-h":
        # centring constant  int DF dF = P(X + Y < 0) - 1/2
        c = float(_convolution_cdf(alt, np.array([0.0]), 1.0)[0]) - 0.5

        def D(t):
            return alt.cdf(t) + alt.cdf(-t) - 1.0 - c
        m = max(abs(q_lo), abs(q_hi))
        lo, hi = -m, m
        ends = (-c,)
    elif test_id == "bh":
        def D(t):
            return (alt.cdf(t) - alt.cdf(-t)) - (alt.cdf(t) ** 2 - alt.cdf(-t) ** 2)
        lo, hi = 0.0, max(abs(q_lo), abs(q_hi))
    elif test_id == "max-kernel":
        F0 = (null or get_family(test_id).null).cdf

        def D(t):
            return alt.cdf(t) ** 2 - F0(t) ** 2
        lo, hi = q_lo, q_hi
    elif test_id == "kolmogorov":
        F0 = (null or get_family(test_id).null).cdf

        def D(t):
            return alt.cdf(t) - F0(t)
        lo, hi = q_lo, q_hi
    else:
        raise RegistryError(f"no population limit for test {test_id!r}")
    return D, lo, hi, ends


def population_limit(test_id, alt, null=None, n_scan=1001, full=False):
    """Almost-sure limit ``b`` of the two-sided statistic under ``alt``.

    The supremum of ``|D(t)|`` is located by a scan and golden-section
    refinement; limits at infinity are included as candidates. With
    ``full=True`` returns ``(b, t_at_sup)``.
    """
    D, lo, hi, ends = _difference(test_id, alt, null)

    def f_vec(t):
        return np.abs(np.asarray(D(np.asarray(t, dtype=float)), dtype=float))

    def f_scalar(t):
        return float(np.ravel(f_vec(np.array([t])))[0])

    t_best, v, _ = scan_maximize(f_vec, lo, hi, f_scalar=f_scalar, n_scan=n_scan)
    for e in ends:
        if abs(e) > v:
            t_best, v = math.inf, abs(e)
    v = float(v)
    return (v, float(t_best)) if full else v


# --- local efficiency -----------------------------------------------------------

def richardson(values, thetas):
    """Extrapolate ``s(theta) = s0 + s1 theta + s2 theta^2 + ...`` to ``theta = 0``.

    ``thetas`` must halve at each step; with three values both the linear
    and the quadratic terms are eliminated.
    """
    v = np.asarray(values, dtype=float)
    th = np.asarray(thetas, dtype=float)
    if v.shape[0] == 1:
        return float(v[0])
    if not np.allclose(th[1:] / th[:-1], 0.5):
        raise ValueError("Richardson extrapolation needs halving theta steps")
    r1 = 2.0 * v[1:] - v[:-1]
    if r1.shape[0] == 1:
        return float(r1[0])
    r2 = (4.0 * r1[1:] - r1[:-1]) / 3.0
    return float(r2[-1])


def _diagnose(values, label):
    """Flags for a theta sequence of normalised values ``s(theta)``."""
    v = np.asarray(values, dtype=float)
    flags = []
    scale = np.max(np.abs(v))
    if scale == 0.0:
        return flags
    d = np.diff(v)
    monotone = bool(np.all(d >= 0) or np.all(d <= 0))
    spread = (v.max() - v.min()) / scale
    if not monotone and spread > 0.01:
        flags.append(f"{label}: non-monotone sequence with spread {spread:.3g}")
    elif spread > 0.01 and monotone:
        # a monotone drift is expected; only a growth like 1/theta is suspicious
        ratios = np.abs(v[1:] / v[:-1])
        if np.all(ratios > 1.5):
            flags.append(f"{label}: non-quadratic local behaviour, ratios {ratios.round(3).tolist()}")
    return flags


@dataclass(frozen=True)
class EfficiencyReport:
    test_id: str
    alt_id: str
    slope_coeff: float
    kl_coeff: float
    efficiency: float
    thetas: tuple
    slope_values: tuple
    kl_values: tuple
    b_values: tuple
    leading_coeff: float
    flags: tuple = ()

    def as_dict(self):
        return {"test": self.test_id, "alternative": self.alt_id,
                "slope_coeff": self.slope_coeff, "kl_coeff": self.kl_coeff,
                "efficiency": self.efficiency, "flags": list(self.flags)}


def _slope_sequence(test_id, alt_family, thetas):
    c = ld_leading_coeff(test_id).leading_coeff
    b = [population_limit(test_id, alt_family(th)) for th in thetas]
    s = [2.0 * c * bi * bi / (th * th) for bi, th in zip(b, thetas)]
    return c, b, s


def local_slope_coeff(test_id, alt_family, thetas=THETAS):
    """Limit of ``2 c b(theta)^2 / theta^2`` as ``theta -> 0``."""
    alt_family = get_alternative(alt_family) if isinstance(alt_family, str) else alt_family
    _, _, s = _slope_sequence(test_id, alt_family, thetas)
    return richardson(s, thetas)


def kl_coeff(alt_family, thetas=THETAS):
    """Limit of ``2 K*(theta) / theta^2`` and the sequence it came from."""
    alt_family = get_alternative(alt_family) if isinstance(alt_family, str) else alt_family
    k = [2.0 * min_kl_to_null(alt_family(th), alt_family.null_family) / (th * th)
         for th in thetas]
    return richardson(k, thetas), k


def local_efficiency(test_id, alt_family, thetas=THETAS):
    """Local Bahadur efficiency of ``test_id`` against an alternative family."""
    alt_family = get_alternative(alt_family) if isinstance(alt_family, str) else alt_family
    thetas = tuple(float(t) for t in thetas)
    c, b, s = _slope_sequence(test_id, alt_family, thetas)
    slope = richardson(s, thetas)
    kl, k = kl_coeff(alt_family, thetas)
    if not kl > 1e-9:
        raise IndeterminateError(
            f"{alt_family.id}: local Kullback-Leibler coefficient {kl:.3g} vanishes")
    flags = _diagnose(s, "slope") + _diagnose(k, "kl")
    eff = slope / kl
    if eff > 1.02:
        flags.append(f"efficiency {eff:.4f} exceeds the Bahadur bound")
    return EfficiencyReport(test_id, alt_family.id, slope, kl, eff, thetas,
                            tuple(s), tuple(k), tuple(b), c, tuple(flags))
