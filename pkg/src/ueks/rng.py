"""Counter-based uniform streams.

A stream is a Philox-4x64 generator keyed by a hash of the seed; stream
``r`` starts at counter block ``r`` (third counter word), so streams never
overlap for fewer than 2**128 draws each. Nothing is stored between calls:
replication ``r`` of a simulation sees the same numbers regardless of worker
count or the order in which replications are run.
"""

from functools import lru_cache

import numpy as np

_MASK64 = (1 << 64) - 1
_SCALE = 2.0 ** -53


@lru_cache(maxsize=64)
def _key(seed):
    ss = np.random.SeedSequence(int(seed) & _MASK64)
    return tuple(int(w) for w in ss.generate_state(2, dtype=np.uint64))


def stream_generator(seed, stream=0):
    """Philox bit generator positioned at the start of ``stream``."""
    counter = np.array([0, 0, int(stream) & _MASK64, 0], dtype=np.uint64)
    return np.random.Philox(key=np.array(_key(seed), dtype=np.uint64),
                            counter=counter)


def uniforms(seed, n, stream=0):
    """``n`` uniforms in the open interval (0, 1).

    The top 53 bits of each raw 64-bit word are mapped to the midpoint of
    their dyadic cell, so neither 0 nor 1 can occur and inverse-cdf sampling
    never hits an infinite quantile.
    """
    raw = stream_generator(seed, stream).random_raw(int(n))
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _SCALE
