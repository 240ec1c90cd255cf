import math

import numpy as np
import pytest

from ueks import statistics as S
from ueks.distributions import Exponential, Normal, Uniform
from ueks.errors import RegistryError, SizeError, TieError

from oracles import NULLS, check_against_oracle as _check_against_oracle, statistic_oracle as _oracle

SQRT2 = math.sqrt(2.0)


def test_edf_examples():
    F = S.build_edf(S.Sample.from_values([2.0, 1.0]))
    assert F(1.0) == 0.0 and F(1.5) == 0.5 and F(2.5) == 1.0
    assert F.right_limit(1.0) == 0.5
    G = S.build_edf([3.0])
    assert G.jumps == [(3.0, 1.0)]
    assert G(3.0) == 0.0 and G(3.0 + 1e-12) == 1.0


def test_edf_kolmogorov_quantile(rng):
    misses = 0
    for seed in range(100):
        x = np.sort(np.random.default_rng(seed).uniform(size=1000))
        d = S.sup_against_G(S.build_edf(x), lambda t: t).value
        misses += d >= 1.63 / math.sqrt(1000)
    # 1.63 is the asymptotic 99% point; P(Bin(100, 0.01) > 4) < 0.4%
    assert misses <= 4


def test_udf_examples():
    G = S.build_udf([1.0, 2.0, 3.0], "max")
    assert G.jumps == [(2.0, pytest.approx(1 / 3)), (3.0, 1.0)]
    G = S.build_udf([1.0, 2.0], "2min")
    assert G.jumps == [(2.0, 1.0)]
    x = np.array([0.3, 0.1, 0.7])
    E, U = S.build_edf(np.sort(x)), S.build_udf(np.sort(x), "identity")
    assert np.array_equal(E.locs, U.locs) and np.array_equal(E.cum, U.cum) and E.total == U.total
    U = S.build_udf(np.sort(x), lambda a: a, m=1)
    assert np.array_equal(E.locs, U.locs) and np.array_equal(E.cum, U.cum)


@pytest.mark.parametrize("name,h", [
    ("2min", lambda a, b: 2 * np.minimum(a, b)),
    ("max", np.maximum),
    ("absmax", lambda a, b: np.abs(np.maximum(a, b))),
    ("absdiff", lambda a, b: np.abs(a - b)),
    ("sum_sqrt2", lambda a, b: (a + b) / SQRT2),
])
def test_named_udf_equals_generic_enumeration(name, h, rng, each_backend):
    for n in (2, 3, 10, 57):
        x = np.sort(rng.normal(size=n))
        a = S.build_udf(x, name)
        b = S.build_udf(x, h, m=2)
        assert np.array_equal(a.locs, b.locs)
        assert np.array_equal(a.cum, b.cum)
        assert a.total == b.total == n * (n - 1) // 2


def test_udf_degree_three():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    G = S.build_udf(x, lambda a, b, c: a + b + c, m=3)
    assert G.total == 4
    assert [z for z, _ in G.jumps] == [7.0, 11.0, 13.0, 14.0]


def test_udf_cap():
    with pytest.raises(SizeError):
        S.build_udf(np.arange(100.0), "absdiff", cap=100)
    with pytest.raises(SizeError):
        S.build_udf([1.0], "max")


def test_sample_validation():
    with pytest.raises(TieError) as err:
        S.Sample.from_values([1.0, 2.0, 1.0])
    assert err.value.value == 1.0
    s = S.Sample.from_values([1.0, 2.0, 1.0, 1.0], jitter=True)
    assert s.n == 4 and np.all(np.diff(s.values) > 0)
    assert np.max(np.abs(s.values - [1, 1, 1, 2])) <= 2e-12
    assert s.values.flags.writeable is False


def test_sup_diff_examples():
    x = np.array([1.0, 2.0])
    A, B = S.build_udf(x, "2min"), S.build_edf(x)
    r = S.sup_diff(A, B, "two-sided")
    assert r.value == 0.5
    assert S.sup_diff(B, B).value == 0.0
    assert S.sup_diff(A, B, "minus").value == 0.5
    assert S.sup_diff(A, B, "plus").value == 0.0


def test_sup_against_G_examples():
    A = S.build_edf([0.0])
    assert S.sup_against_G(A, Normal(0, 1).cdf).value == 0.5
    for u in (0.1, 0.5, 0.83):
        assert S.sup_against_G(S.build_edf([u]), lambda t: t).value == pytest.approx(max(u, 1 - u))


def _dense_steps(A, grid):
    return np.searchsorted(A.locs, grid, "left").astype(float)


def _step_values(A, grid):
    c = np.concatenate([[0], A.cum])
    return c[np.searchsorted(A.locs, grid, "left")] / A.total


def test_sup_against_G_max_kernel_dense():
    x = np.sort(Uniform(0, 1).ppf(np.random.default_rng(1).uniform(size=50)))
    A = S.build_udf(x, "max")
    grid = np.linspace(0, 1, 10 ** 6)
    d = _step_values(A, grid) - grid ** 2
    r = S.sup_against_G(A, lambda t: t ** 2)
    assert r.value == pytest.approx(np.abs(d).max(), abs=1e-6)
    assert r.value >= np.abs(d).max() - 1e-15


@pytest.mark.parametrize("test", sorted(NULLS))
def test_statistic_matches_dense_grid(test):
    rng = np.random.default_rng(hash(test) % 2 ** 32)
    for _ in range(100):
        n = int(rng.integers(2, 31))
        x = np.sort(NULLS[test].ppf(rng.uniform(size=n)))
        _check_against_oracle(test, x)


def test_bh_all_negative_samples():
    for seed in range(100):
        x = np.sort(-np.random.default_rng(seed).uniform(0.01, 1, 30))
        _check_against_oracle("bh", x)


def test_desu_two_points():
    r = S.compute_statistic("desu", S.Sample.from_values([1.0, 2.0]))
    assert r.value == 0.5 and r.argmax_t == 1.0 and r.right_limit


def test_symmetry_h_antisymmetric_pair():
    a = 0.37
    r = S.compute_statistic("symmetry-h", [-a, a])
    p, m = _oracle("symmetry-h", np.array([-a, a]), np.linspace(-1, 1, 10 ** 6))
    assert r.value == pytest.approx(max(p, m), abs=1e-15)
    assert r.value == 0.5


def test_sides_and_errors():
    x = S.Sample.from_values(Exponential(1).ppf(np.linspace(0.05, 0.95, 19) ** 1.3))
    for test in S.TEST_IDS:
        two = S.compute_statistic(test, x, "two-sided")
        plus = S.compute_statistic(test, x, "plus")
        minus = S.compute_statistic(test, x, "minus")
        assert two.value == max(plus.value, minus.value)
    with pytest.raises(RegistryError):
        S.compute_statistic("nope", x)
    with pytest.raises(SizeError):
        S.compute_statistic("desu", [1.0])
    with pytest.raises(ValueError):
        S.compute_statistic("desu", x, "both")


def test_polya_centering():
    x = Normal(0.0, 1.0).ppf(np.linspace(0.02, 0.98, 25)) + 3.0
    plain = S.compute_statistic("polya", x)
    centred = S.compute_statistic("polya", x, center=True)
    again = S.compute_statistic("polya", x - x.mean())
    assert centred.value == again.value
    assert plain.value > centred.value


def test_refinement_changes_udf_by_at_most_two_over_n(rng):
    for n in (5, 20, 80):
        x = rng.exponential(size=n + 1)
        for h, bound in (("2min", 2 / n), ("absdiff", 2 / n), ("identity", 1 / n)):
            a = S.build_udf(np.sort(x[:n]), h)
            b = S.build_udf(np.sort(x), h)
            assert S.sup_diff(a, b).value <= bound + 1e-15


def test_scale_invariance_exact():
    u = np.random.default_rng(5).uniform(size=60)
    for test in ("desu", "angus", "puri-rubin"):
        a = S.compute_statistic(test, np.sort(Exponential(1).ppf(u)))
        b = S.compute_statistic(test, np.sort(Exponential(1).ppf(u)) * 8.0)
        assert a.value == b.value
    a = S.compute_statistic("polya", np.sort(Normal(0, 1).ppf(u)))
    b = S.compute_statistic("polya", np.sort(Normal(0, 4).ppf(u)))
    assert a.value == b.value
