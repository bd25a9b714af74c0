"""Reservoir sampling: m items without replacement (Vitter) and m single-slot reservoirs with replacement."""
from typing import Any

import numpy as np


def _as_rng(rng: np.random.Generator | int) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


class ReservoirWithReplacement:
    """m independent single-slot reservoirs, which together sample m items uniformly with replacement.

    Every slot sees the same items, so one items-seen counter serves all of them. Slot independence comes
    from drawing an independent uniform per slot on every observation.
    """

    def __init__(self, m: int, rng: np.random.Generator | int = 0, dtype: Any = object) -> None:
        """
        :param m: Number of slots.
        :param rng: A numpy Generator or a seed.
        :param dtype: Numpy dtype of the stored items (object for arbitrary items).
        """
        if m < 1:
            raise ValueError(f'Number of slots must be at least 1 but got {m}.')

        self.m = m
        self.rng = _as_rng(rng)
        self.items_seen = 0
        self.peak_items = 0
        self._slots = np.empty(m, dtype=dtype)

    @property
    def stored_items(self) -> int:
        return self.m if self.items_seen > 0 else 0

    def observe(self, item: Any) -> None:
        """Observes the next item of the stream: slot i replaces its item with probability 1/t."""
        self.items_seen += 1

        if self.items_seen == 1:
            self._slots[:] = item
        else:
            replace = self.rng.random(self.m) < 1.0 / self.items_seen
            self._slots[replace] = item

        self.peak_items = max(self.peak_items, self.stored_items)
        assert self.peak_items <= self.m

    def finish(self) -> list:
        """Returns the m sampled items, or an empty list if the stream was empty."""
        return self._slots.tolist() if self.items_seen > 0 else []


class ReservoirWithoutReplacement:
    """Vitter's algorithm R: a uniform m-subset of the items seen so far."""

    def __init__(self, capacity: int, rng: np.random.Generator | int = 0) -> None:
        if capacity < 1:
            raise ValueError(f'Capacity must be at least 1 but got {capacity}.')

        self.capacity = capacity
        self.rng = _as_rng(rng)
        self.items_seen = 0
        self.peak_items = 0
        self._buffer: list = []

    @property
    def stored_items(self) -> int:
        return len(self._buffer)

    def observe(self, item: Any) -> None:
        self.items_seen += 1

        if len(self._buffer) < self.capacity:
            self._buffer.append(item)
        else:
            index = int(self.rng.integers(self.items_seen))
            if index < self.capacity:
                self._buffer[index] = item

        self.peak_items = max(self.peak_items, self.stored_items)
        assert self.peak_items <= self.capacity

    def finish(self) -> list:
        return list(self._buffer)


Reservoir = ReservoirWithReplacement | ReservoirWithoutReplacement


def observe(reservoir: Reservoir, item: Any) -> Reservoir:
    """Feeds one item to a reservoir and returns it."""
    reservoir.observe(item)

    return reservoir


def finish(reservoir: Reservoir) -> list:
    """Returns a reservoir's sample."""
    return reservoir.finish()
