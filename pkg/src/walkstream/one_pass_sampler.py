"""Starting-vertex-oblivious one-pass preprocessing (per-vertex neighbor lists) and walk replay from its output."""
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from walkstream.constants import DEFAULT_C2, Walk
from walkstream.errors import DeadEnd
from walkstream.graph_stream import EdgeStream
from walkstream.reservoir import ReservoirWithReplacement
from walkstream.seeding import derive_rng, derive_seed

VertexMode = Literal['full', 'sampled']


@dataclass(frozen=True)
class SamplerConfig:
    """Configuration of one-pass preprocessing.

    :param tau: Number of with-replacement neighbor samples kept for every sampled-mode vertex.
    :param c2: Cap constant; preprocessing stores at most c2 * tau * n words.
    :param seed: Master seed.
    """
    tau: int
    c2: int = DEFAULT_C2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.tau < 1:
            raise ValueError(f'tau must be at least 1 but got {self.tau}.')

        if self.c2 < 1:
            raise ValueError(f'c2 must be at least 1 but got {self.c2}.')


@dataclass(frozen=True)
class Failure:
    """The sampler ran out of stored neighbors for a sampled-mode vertex."""
    vertex: int
    step: int


@dataclass(frozen=True)
class NeighborTable:
    """The preprocessing message: one neighbor list per vertex plus the space accounting."""
    n: int
    lists: tuple[tuple[int, ...], ...]
    full_vertices: frozenset[int]
    tau: int
    stored_words: int
    cap: int
    operated_correctly: bool
    sketch_words: int = field(default=0, compare=False)

    def mode(self, vertex: int) -> VertexMode:
        return 'full' if vertex in self.full_vertices else 'sampled'

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'tau': self.tau,
            'cap': self.cap,
            'stored_words': self.stored_words,
            'sketch_words': self.sketch_words,
            'operated_correctly': self.operated_correctly,
            'full_vertices': sorted(self.full_vertices),
            'lists': [list(neighbors) for neighbors in self.lists]
        }

    @classmethod
    def from_dict(cls, data: dict) -> 'NeighborTable':
        return cls(
            n=data['n'],
            lists=tuple(tuple(neighbors) for neighbors in data['lists']),
            full_vertices=frozenset(data['full_vertices']),
            tau=data['tau'],
            stored_words=data['stored_words'],
            cap=data['cap'],
            operated_correctly=data['operated_correctly'],
            sketch_words=data.get('sketch_words', 0)
        )


class _OnePassRecorder:
    """Runs `copies` independent one-pass preprocessing instances that share a single stream replay.

    Every instance sees the same edges and therefore stores the same number of candidate words, so one
    word counter and one cap serve all of them. Copy j of a sampled vertex owns reservoir slots
    [j * tau, (j + 1) * tau).
    """

    def __init__(
            self,
            n: int,
            tau: int,
            full_vertices: frozenset[int],
            c2: int,
            rng: np.random.Generator,
            copies: int = 1
    ) -> None:
        self.n = n
        self.tau = tau
        self.full_vertices = full_vertices
        self.copies = copies
        self.cap = c2 * tau * n
        self.rng = rng
        self.stored_words = 0
        self.operated_correctly = True
        self._full_lists: dict[int, list[int]] = {}
        self._reservoirs: dict[int, ReservoirWithReplacement] = {}

    def observe_edge(self, u: int, v: int) -> None:
        if not self.operated_correctly:
            return

        if u in self.full_vertices:
            needed = 1
        else:
            needed = self.tau if u not in self._reservoirs else 0

        # Once the cap would be exceeded nothing more is recorded
        if self.stored_words + needed > self.cap:
            self.operated_correctly = False
            return

        self.stored_words += needed

        if u in self.full_vertices:
            self._full_lists.setdefault(u, []).append(v)
        else:
            if u not in self._reservoirs:
                self._reservoirs[u] = ReservoirWithReplacement(m=self.copies * self.tau, rng=self.rng, dtype=np.int64)
            self._reservoirs[u].observe(v)

    @property
    def peak_words(self) -> int:
        """Words held by all copies together."""
        return self.copies * self.stored_words

    def finish(self) -> list[NeighborTable]:
        samples = {vertex: reservoir.finish() for vertex, reservoir in self._reservoirs.items()}

        tables = []
        for copy in range(self.copies):
            lists = []
            for vertex in range(self.n):
                if vertex in self.full_vertices:
                    lists.append(tuple(self._full_lists.get(vertex, ())))
                elif vertex in samples:
                    lists.append(tuple(samples[vertex][copy * self.tau:(copy + 1) * self.tau]))
                else:
                    lists.append(())

            tables.append(NeighborTable(
                n=self.n,
                lists=tuple(lists),
                full_vertices=self.full_vertices,
                tau=self.tau,
                stored_words=self.stored_words,
                cap=self.cap,
                operated_correctly=self.operated_correctly
            ))

        return tables


def preprocess(
        stream: EdgeStream,
        tau: int,
        full_vertices: frozenset[int] | set[int],
        config: SamplerConfig
) -> NeighborTable:
    """Builds neighbor lists in one pass: vertices in full_vertices record every out-neighbor, the rest keep
    tau with-replacement reservoir samples. Recording stops when c2 * tau * n words would be exceeded.

    :param stream: An insertion-only stream. Exactly one replay is consumed.
    :param tau: Samples per sampled-mode vertex.
    :param full_vertices: Vertices whose full out-neighborhood is recorded.
    :param config: Cap constant and seed (config.tau is overridden by tau).
    :return: The NeighborTable.
    """
    if stream.turnstile:
        raise ValueError('One-pass preprocessing needs an insertion-only stream.')

    if tau < 1:
        raise ValueError(f'tau must be at least 1 but got {tau}.')

    recorder = _OnePassRecorder(
        n=stream.n,
        tau=tau,
        full_vertices=frozenset(full_vertices),
        c2=config.c2,
        rng=derive_rng(config.seed, 'one-pass-preprocess')
    )

    passes_before = stream.pass_count
    for u, v in stream.replay():
        recorder.observe_edge(u, v)
    assert stream.pass_count == passes_before + 1

    return recorder.finish()[0]


def sample_walk(
        n: int,
        u_start: int,
        L: int,
        full_vertices: frozenset[int] | set[int],
        table: NeighborTable,
        seed: int = 0
) -> Walk | Failure:
    """Replays an L-step walk from a NeighborTable.

    At a full-mode vertex the next vertex is a fresh uniform draw from its list. At a sampled-mode vertex
    the k-th visit takes the k-th list entry, and Failure is returned once the list is exhausted.

    :param n: Number of vertices.
    :param u_start: Start vertex.
    :param L: Number of steps.
    :param full_vertices: Vertices in full mode.
    :param table: The preprocessing output.
    :param seed: Seed for the full-mode draws.
    :return: A walk of L + 1 vertices, or Failure.
    """
    if not 0 <= u_start < n:
        raise ValueError(f'Start vertex {u_start} is outside [0, {n}).')

    if L < 0:
        raise ValueError(f'Walk length must be non-negative but got {L}.')

    rng = derive_rng(seed, 'one-pass-sample')
    visits = np.zeros(n, dtype=np.int64)
    walk = [u_start]
    current = u_start

    for step in range(1, L + 1):
        neighbors = table.lists[current]

        if current in full_vertices:
            if not neighbors:
                if table.operated_correctly:
                    raise DeadEnd(current)
                return Failure(vertex=current, step=step)

            current = neighbors[int(rng.integers(len(neighbors)))]
        else:
            if visits[current] >= len(neighbors):
                if not neighbors and table.operated_correctly:
                    raise DeadEnd(current)
                return Failure(vertex=current, step=step)

            visits[current] += 1
            current = neighbors[visits[current] - 1]

        walk.append(int(current))

    return tuple(walk)


def folklore_preprocess(stream: EdgeStream, L: int, seed: int = 0) -> NeighborTable:
    """The folklore one-pass algorithm's preprocessing: L samples per vertex, nothing in full mode."""
    tau = max(L, 1)

    return preprocess(stream, tau=tau, full_vertices=frozenset(), config=SamplerConfig(tau=tau, seed=seed))


def folklore_sample(stream: EdgeStream, u_start: int, L: int, seed: int = 0) -> Walk:
    """Samples an L-step walk with the folklore one-pass algorithm. Its output is an exact random walk.

    :param stream: An insertion-only stream (one replay is consumed).
    :param u_start: Start vertex.
    :param L: Number of steps.
    :param seed: Master seed.
    :return: The walk.
    """
    if not 0 <= u_start < stream.n:
        raise ValueError(f'Start vertex {u_start} is outside [0, {stream.n}).')

    table = folklore_preprocess(stream, L=L, seed=seed)
    walk = sample_walk(stream.n, u_start, L, table.full_vertices, table, seed=seed)

    # L samples per vertex always cover L steps
    assert not isinstance(walk, Failure)

    return walk


def sample_all_walks(table: NeighborTable, L: int, seed: int = 0) -> list[Walk | Failure]:
    """Samples one L-step walk from every vertex using the same table.

    The walks are individually distributed as sample_walk's but are correlated with each other.

    :return: A list whose u-th entry is the walk (or Failure) from vertex u.
    """
    return [
        sample_walk(table.n, vertex, L, table.full_vertices, table, seed=derive_seed(seed, 'all-walks', vertex))
        for vertex in range(table.n)
    ]
