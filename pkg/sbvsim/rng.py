"""
Counter-based variate stream
Sample i's uniform variates depend only on (seed, i), so any chunking or
evaluation order reproduces the same draws
"""

import numpy as np

from .exceptions import DomainError

# Philox emits four 64-bit words per counter step; a sample uses the first two
WORDS_PER_SAMPLE = 4
VARIATES_PER_SAMPLE = 2
MAX_SEED = 2 ** 64 - 1


def uniform_variates(seed: int, start: int, count: int) -> np.ndarray:
    """
    Uniform variates in [0, 1) for samples start .. start+count-1, shape (count, 2).
    Each sample owns one Philox counter value under the key `seed`.
    """
    if not 0 <= seed <= MAX_SEED:
        raise DomainError(f"seed must be in [0, 2^64), got {seed}")
    if start < 0 or count < 0:
        raise DomainError(f"start and count must be >= 0, got start={start}, count={count}")
    if count == 0:
        return np.empty((0, VARIATES_PER_SAMPLE))

    bit_generator = np.random.Philox(key=seed, counter=start)
    raw = bit_generator.random_raw(WORDS_PER_SAMPLE * count).reshape(count, WORDS_PER_SAMPLE)
    # Top 53 bits give doubles on the [0, 1) lattice
    return (raw[:, :VARIATES_PER_SAMPLE] >> np.uint64(11)).astype(np.float64) * 2.0 ** -53
