import numpy as np

# spawn keys of the independent streams one training run draws from
STREAM_INIT = 0
STREAM_DROPOUT = 1
STREAM_SHUFFLE = 2
STREAM_SAMPLE = 3
STREAM_DATA = 4
STREAM_GRADCHECK = 5


def make_rng(seed, *keys):
    """
    Returns a generator for `seed`, on the sub-stream named by `keys`.

    Streams with different keys are statistically independent, and the same
    (seed, keys) always yields the same sequence. A `numpy.random.Generator`
    passed as `seed` is returned unchanged, so callers may hand down either.

    Parameters
    ----------
    seed : int or numpy.random.Generator
        Non-negative integer seed.
    *keys : int
        Non-negative integers naming the sub-stream.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ValueError(f"Seed must be a non-negative integer, got {seed!r}.")
    spawn_key = tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))
