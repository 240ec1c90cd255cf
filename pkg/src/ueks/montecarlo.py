"""Null simulation, critical values, p-values and empirical rate estimates.

Replication ``r`` draws its sample from stream ``r`` of the counter-based
generator keyed by the seed, so the output does not depend on how the
replications are split across workers or in which order they run.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._accel import max_workers
from .errors import PrecisionError, RegistryError, SizeError
from .kernels import get_family
from .large_deviation import kolmogorov_f0, ld_leading_coeff
from .rng import uniforms
from .statistics import TEST_IDS, statistic_sides

DEFAULT_BUDGET = 5 * 10 ** 9
MIN_REPS = 100
_CHUNK = 2048


@dataclass(frozen=True, eq=False)
class NullSimulation:
    """Simulated null distribution of a statistic.

    ``plus`` and ``minus`` are indexed by replication; ``values`` holds the
    sorted two-sided statistics.
    """

    test_id: str
    n: int
    reps: int
    seed: int
    null: str
    plus: np.ndarray = field(repr=False)
    minus: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    def sorted_side(self, side="two-sided"):
        if side == "two-sided":
            return self.values
        if side == "plus":
            return np.sort(self.plus)
        if side == "minus":
            return np.sort(self.minus)
        raise ValueError(f"unknown side {side!r}")

    def tail(self, a, side="two-sided"):
        """Number of replications with statistic strictly above ``a``."""
        v = self.sorted_side(side)
        return int(v.shape[0] - np.searchsorted(v, a, side="right"))


def _budget(test_id, n, reps):
    degree = get_family(test_id).degree
    return reps * math.comb(n, degree)


def _run_chunk(test_id, n, seed, start, stop, null):
    plus = np.empty(stop - start)
    minus = np.empty(stop - start)
    for k, r in enumerate(range(start, stop)):
        x = null.ppf(uniforms(seed, n, stream=r))
        x.sort()
        s = statistic_sides(test_id, x, null=null)
        plus[k], minus[k] = s.plus, s.minus
    return plus, minus


def simulate_null(test_id, n, reps, seed, null=None, workers=None,
                  cap=DEFAULT_BUDGET):
    """Simulate ``reps`` replications of a statistic under its null.

    Parameters
    ----------
    test_id : str
    n : int
        Sample size.
    reps : int
        At least 100.
    seed : int
    null : Distribution, optional
        Sampling distribution; defaults to the test's registered null.
    workers : int, optional
        Process count; defaults to ``UEKS_THREADS`` or the CPU count.
    cap : int
        Maximum of ``reps * C(n, m)`` kernel evaluations.
    """
    if test_id not in TEST_IDS:
        raise RegistryError(f"unknown test {test_id!r}; known: {', '.join(TEST_IDS)}")
    n, reps, seed = int(n), int(reps), int(seed)
    if reps < MIN_REPS:
        raise PrecisionError(f"need at least {MIN_REPS} replications, got {reps}")
    need = 1 if test_id == "kolmogorov" else 2
    if n < need:
        raise SizeError(f"{test_id} needs n >= {need}, got {n}")
    cost = _budget(test_id, n, reps)
    if cost > cap:
        raise SizeError(f"{reps} replications at n={n} need {cost} kernel evaluations, "
                        f"above the cap {cap}")
    null = null or get_family(test_id).null
    bounds = list(range(0, reps, _CHUNK)) + [reps]
    jobs = list(zip(bounds[:-1], bounds[1:]))
    workers = min(workers or max_workers(), len(jobs))
    if workers <= 1:
        parts = [_run_chunk(test_id, n, seed, a, b, null) for a, b in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_run_chunk, test_id, n, seed, a, b, null) for a, b in jobs]
            parts = [f.result() for f in futs]
    plus = np.concatenate([p for p, _ in parts])
    minus = np.concatenate([m for _, m in parts])
    values = np.sort(np.maximum(plus, minus))
    for arr in (plus, minus, values):
        arr.flags.writeable = False
    return NullSimulation(test_id, n, reps, seed, null.descriptor, plus, minus, values)


def critical_value(sim, alpha, side="two-sided"):
    """Upper-``alpha`` critical value: order statistic ``ceil((1 - alpha) reps)``.

    At most ``alpha * reps`` simulated values exceed it.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if sim.reps * alpha < 10:
        raise PrecisionError(f"reps * alpha = {sim.reps * alpha:g} < 10; "
                             "too few replications for this level")
    k = max(1, math.ceil((1.0 - alpha) * sim.reps - 1e-9))
    return float(sim.sorted_side(side)[k - 1])


def p_value(sim, observed, side="two-sided"):
    """``(1 + #{simulated >= observed}) / (reps + 1)``."""
    v = sim.sorted_side(side)
    ge = v.shape[0] - np.searchsorted(v, observed, side="left")
    return float((1 + ge) / (sim.reps + 1))


@dataclass(frozen=True)
class RateEstimate:
    test_id: str
    a: float
    n_grid: tuple
    reps: int
    seed: int
    exceedances: tuple
    p_hat: tuple
    rate_hat: tuple
    rate_theory: float
    f0: Optional[float] = None
    flags: tuple = ()

    def rows(self):
        return [dict(n=n, exceedances=e, p_hat=p, rate_hat=r, rate_theory=self.rate_theory)
                for n, e, p, r in zip(self.n_grid, self.exceedances, self.p_hat, self.rate_hat)]


def empirical_ld_rate(test_id, a, n_grid, reps, seed, side="two-sided",
                      workers=None, cap=DEFAULT_BUDGET, min_exceed=20):
    """Estimate ``-n^-1 ln P(T_n > a)`` on a grid of sample sizes.

    Raw exceedance counts are used (no smoothing); a grid point with zero
    exceedances gets a NaN rate and a flag, as does one with fewer than
    ``min_exceed`` exceedances. For the Kolmogorov case the exact limit
    ``f0(a)`` is attached.
    """
    n_grid = tuple(int(n) for n in n_grid)
    total = sum(_budget(test_id, n, reps) for n in n_grid)
    if total > cap:
        raise SizeError(f"rate estimation needs {total} kernel evaluations, above the cap {cap}")
    counts, p_hat, rates, flags = [], [], [], []
    for n in n_grid:
        sim = simulate_null(test_id, n, reps, seed, workers=workers, cap=cap)
        c = sim.tail(a, side)
        p = c / reps
        counts.append(c)
        p_hat.append(p)
        if c == 0:
            rates.append(math.nan)
            flags.append(f"n={n}: no exceedances")
        else:
            rates.append(-math.log(p) / n)
            if c < min_exceed:
                flags.append(f"n={n}: only {c} exceedances")
    theory = ld_leading_coeff(test_id).leading_coeff * a * a
    f0 = kolmogorov_f0(a) if test_id == "kolmogorov" and 0 < a < 1 else None
    return RateEstimate(test_id, float(a), n_grid, int(reps), int(seed), tuple(counts),
                        tuple(p_hat), tuple(rates), theory, f0, tuple(flags))
