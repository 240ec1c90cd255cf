"""Time the numba and numpy backends on the statistic computation.

    python3 benchmarks/bench_backends.py --n 50 200 800 --repeat 20

Both backends are first checked to give identical statistics on the
benchmark samples; the table reports the median time per statistic.
"""

import argparse
import sys
import time

import numpy as np

from ueks import _kernels
from ueks.kernels import get_family
from ueks.statistics import TEST_IDS, statistic_sides


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, nargs="+", default=[50, 200, 800])
    p.add_argument("--tests", nargs="+", default=list(TEST_IDS), choices=TEST_IDS)
    p.add_argument("--repeat", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    if "numba" not in _kernels._IMPLS:
        print("numba is not installed; nothing to compare", file=sys.stderr)
        return 1
    rng = np.random.default_rng(args.seed)
    print(f"{'test':>12} {'n':>6} {'numba [ms]':>11} {'numpy [ms]':>11} {'speedup':>8}")
    prev = _kernels.backend()
    try:
        for test in args.tests:
            null = get_family(test).null if test != "kolmogorov" else None
            for n in args.n:
                u = rng.uniform(size=n)
                x = np.sort(null.ppf(u) if null is not None else u)
                timings, results = {}, {}
                for name in ("numba", "numpy"):
                    _kernels.set_backend(name)
                    results[name] = statistic_sides(test, x)  # also warms the jit cache
                    timings[name] = median_time(lambda: statistic_sides(test, x), args.repeat)
                if results["numba"] != results["numpy"]:
                    print(f"backends disagree on {test} n={n}", file=sys.stderr)
                    return 2
                print(f"{test:>12} {n:>6} {1e3 * timings['numba']:>11.3f} "
                      f"{1e3 * timings['numpy']:>11.3f} {timings['numpy'] / timings['numba']:>8.1f}")
    finally:
        _kernels.set_backend(prev)
    return 0


if __name__ == "__main__":
    sys.exit(main())
