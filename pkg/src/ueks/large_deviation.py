"""Large-deviation quantities of Kolmogorov-type statistics.

Kolmogorov's exact rate for the one-sided empirical process, the variance
maximum ``phi0^2`` of a kernel family, the leading small-``a`` coefficient
``1/(2 m^2 phi0^2)`` of the U-empirical rate, and two explicit exponential
tail bounds.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, DomainError
from .kernels import get_family, grid_interval, variance_at
from .optimize import golden_section, scan_maximize


def kolmogorov_f(a, t):
    """``(a+t) ln((a+t)/t) + (1-a-t) ln((1-a-t)/(1-t))``, ``+inf`` for ``t > 1-a``.

    Vectorized in ``t``; ``0 ln 0 = 0``.
    """
    a = float(a)
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a}")
    t_arr = np.asarray(t, dtype=float)
    if np.any(np.isnan(t_arr)) or np.any(t_arr < 0.0) or np.any(t_arr > 1.0):
        raise DomainError(f"t must lie in [0, 1], got {t}")
    with np.errstate(divide="ignore", invalid="ignore"):
        first = (a + t_arr) * np.log1p(a / t_arr)
        rest = 1.0 - a - t_arr
        second = np.where(rest > 0, rest * np.log1p(-a / (1.0 - t_arr)), 0.0)
        out = np.where(t_arr > 1.0 - a, np.inf, first + second)
    return float(out) if out.ndim == 0 else out


def kolmogorov_f0(a, n_scan=1000, tol=1e-10):
    """``f0(a) = inf_t f(a, t)``: scan of ``(0, 1-a]`` then golden section."""
    a = float(a)
    if not 0.0 < a < 1.0:
        raise DomainError(f"a must lie in (0, 1), got {a}")
    hi = 1.0 - a
    grid = hi * np.arange(1, n_scan + 1) / n_scan
    vals = kolmogorov_f(a, grid)
    i = int(np.argmin(vals))
    lo_b = grid[i - 1] if i > 0 else 0.0
    hi_b = grid[min(i + 1, n_scan - 1)]

    def f(t):
        return kolmogorov_f(a, t) if t > 0 else math.inf

    _, val = golden_section(f, lo_b, hi_b, tol=tol)
    return float(min(val, vals[i]))


def kolmogorov_argmin(a, tol=1e-10):
    """Minimizing ``t`` of ``f(a, .)``; the rate's least favourable point."""
    a = float(a)
    hi = 1.0 - a
    grid = hi * np.arange(1, 1001) / 1000
    i = int(np.argmin(kolmogorov_f(a, grid)))
    t, _ = golden_section(lambda s: kolmogorov_f(a, s) if s > 0 else math.inf,
                          grid[i - 1] if i > 0 else 0.0, grid[min(i + 1, 999)], tol=tol)
    return t


def _resolve(fam):
    return get_family(fam) if isinstance(fam, str) else fam


def maximize_variance(fam, n_scan=1001, tol=1e-10):
    """Global maximum ``(t*, phi0^2)`` of the variance function.

    A scan over the (truncated) parameter interval followed by golden-section
    refinement of every local maximum. Ties within ``1e-9`` go to the
    smallest ``|t|``.
    """
    fam = _resolve(fam)
    lo, hi = grid_interval(fam)

    def f_vec(t):
        return np.asarray(variance_at(fam, t), dtype=float)

    def f_scalar(t):
        return float(variance_at(fam, float(min(max(t, lo), hi))))

    t_star, v, _ = scan_maximize(f_vec, lo, hi, f_scalar=f_scalar, n_scan=n_scan, tol=tol)
    if not v > 0.0:
        raise DegeneracyError(f"variance function of {fam.id} vanishes on its interval")
    return float(t_star), float(v)


@dataclass(frozen=True)
class RateFunction:
    """Leading behaviour ``c a^2`` of the large-deviation rate of a family."""

    family: str
    degree: int
    phi0_sq: float
    argmax_t: float

    @property
    def leading_coeff(self):
        return 1.0 / (2.0 * self.degree ** 2 * self.phi0_sq)

    def rate(self, a):
        """Leading-order rate ``c a^2``."""
        return self.leading_coeff * np.asarray(a, dtype=float) ** 2


def ld_leading_coeff(fam):
    """``RateFunction`` with ``c = 1/(2 m^2 phi0^2)``."""
    fam = _resolve(fam)
    t_star, phi0_sq = maximize_variance(fam)
    return RateFunction(fam.id, fam.degree, phi0_sq, t_star)


def arcones_constant(m, M):
    """``L = (2^(m+3) m^m + 2/(3m)) M``."""
    return (2.0 ** (m + 3) * float(m) ** m + 2.0 / (3.0 * m)) * M


def arcones_bound(n, z, m, sigma_sq, M):
    """``4 exp(-n z^2 / (2 m^2 sigma^2 + L z))`` for a bounded U-statistic."""
    if not (n > 0 and z > 0 and m >= 1 and sigma_sq > 0 and M > 0):
        raise DomainError("arcones_bound needs positive n, z, m, sigma_sq and M")
    L = arcones_constant(m, M)
    return 4.0 * math.exp(-n * z * z / (2.0 * m * m * sigma_sq + L * z))


def binomial_tail_bound(n, N, tau):
    """``4^n exp(-n tau ln N)``, a bound on ``P(Bin(n, 1/N) > n tau)``."""
    if not (n >= 1 and N >= 2 and 0.0 < tau < 1.0):
        raise DomainError("binomial_tail_bound needs n >= 1, N >= 2, 0 < tau < 1")
    log_b = n * (math.log(4.0) - tau * math.log(N))
    return math.exp(log_b) if log_b < 700.0 else math.inf
