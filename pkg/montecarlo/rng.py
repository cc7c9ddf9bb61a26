"""
Counter-based random streams.

Trials are grouped in fixed blocks of BLOCK_SIZE; block b of a run seeded
with s draws from a Philox generator keyed by (s, b). The draws of a given
trial therefore depend only on the seed and the trial index, never on how
blocks are scheduled across threads.
"""
import numpy as np

from imagecrb.exceptions import ConfigurationError

BLOCK_SIZE = 1024
SEED_LIMIT = 2 ** 64


def check_seed(seed) -> int:
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= int(seed) < SEED_LIMIT:
        raise ConfigurationError(f"seed must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


def block_generator(seed, block) -> np.random.Generator:
    key = (int(block) << 64) | check_seed(seed)
    return np.random.Generator(np.random.Philox(key=key))


def trial_blocks(n_trials):
    """(block index, number of trials in the block) covering n_trials."""
    return [(b, min(BLOCK_SIZE, n_trials - start)) for b, start in enumerate(range(0, n_trials, BLOCK_SIZE))]
