"""Named, reproducible random substreams derived from a single seed."""
import zlib

import numpy as np


def _key_to_int(key: int | str) -> int:
    """Maps a substream name to a stable non-negative integer."""
    if isinstance(key, str):
        return zlib.crc32(key.encode('utf-8'))

    if key < 0:
        raise ValueError(f'Substream keys must be non-negative but got {key}.')

    return key


def derive_seed_sequence(seed: int, *keys: int | str) -> np.random.SeedSequence:
    """Derives the seed sequence of a named substream.

    :param seed: The master seed.
    :param keys: Names (strings) or indices (ints) identifying the substream, from outermost to innermost.
    :return: A SeedSequence that is independent of every other substream of the same master seed.
    """
    return np.random.SeedSequence(entropy=seed, spawn_key=tuple(_key_to_int(key) for key in keys))


def derive_rng(seed: int, *keys: int | str) -> np.random.Generator:
    """Builds a numpy Generator for a named substream."""
    return np.random.default_rng(derive_seed_sequence(seed, *keys))


def derive_seed(seed: int, *keys: int | str) -> int:
    """Derives an integer seed for a named substream (for APIs that take an int seed)."""
    return int(derive_seed_sequence(seed, *keys).generate_state(1, dtype=np.uint32)[0])
