"""Two-pass random walk sampling: estimate heavy/light vertices in pass one, record neighbor lists in pass two."""
import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from walkstream.constants import DEFAULT_C1, DEFAULT_C2, ESTIMATED_HEAVY_FRACTION, Walk
from walkstream.errors import DeadEndVertex
from walkstream.graph_stream import EdgeStream
from walkstream.one_pass_sampler import (
    Failure,
    NeighborTable,
    SamplerConfig,
    _OnePassRecorder,
    preprocess,
    sample_walk
)
from walkstream.seeding import derive_rng, derive_seed
from walkstream.walk_oracle import VertexClass, exact_heavy_vertices, exact_light_vertices


@dataclass(frozen=True)
class TwoPassConfig:
    """Configuration of the two-pass sampler.

    :param L: Walk length.
    :param delta: Target total variation error, in (0, 1).
    :param c1: Constant of the number of first-pass trials gamma = ceil(c1 * log2(1 / delta)).
    :param c2: Cap constant of both passes.
    :param seed: Master seed.
    """
    L: int
    delta: float
    c1: float = DEFAULT_C1
    c2: int = DEFAULT_C2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.L < 1:
            raise ValueError(f'L must be at least 1 but got {self.L}.')

        if not 0 < self.delta < 1:
            raise ValueError(f'delta must be in (0, 1) but got {self.delta}.')

        if self.c1 <= 0:
            raise ValueError(f'c1 must be positive but got {self.c1}.')

        if self.c2 < 1:
            raise ValueError(f'c2 must be at least 1 but got {self.c2}.')

    @property
    def ell(self) -> int:
        """Revisit horizon ceil(sqrt(L))."""
        root = math.isqrt(self.L)
        return root if root * root == self.L else root + 1

    @property
    def gamma(self) -> int:
        """Number of first-pass trial walks per vertex."""
        return max(1, math.ceil(self.c1 * math.log2(1 / self.delta)))

    def to_dict(self) -> dict:
        return {
            'L': self.L,
            'delta': self.delta,
            'c1': self.c1,
            'c2': self.c2,
            'seed': self.seed,
            'ell': self.ell,
            'gamma': self.gamma
        }


@dataclass(frozen=True)
class HeavyLightEstimate:
    """Per-vertex revisit counts of the gamma first-pass trial walks and the resulting heavy/light split."""
    n: int
    gamma: int
    ell: int
    revisit_counts: tuple[int, ...]
    dead_end_counts: tuple[int, ...]
    peak_words: int = 0

    @property
    def fractions(self) -> np.ndarray:
        """w_u, the fraction of trial walks from u that revisit u within ell steps."""
        return np.array(self.revisit_counts, dtype=np.float64) / self.gamma

    @property
    def heavy(self) -> frozenset[int]:
        return frozenset(int(vertex) for vertex in np.flatnonzero(self.fractions >= ESTIMATED_HEAVY_FRACTION))

    @property
    def light(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.heavy

    @property
    def dead_end_walks(self) -> int:
        return sum(self.dead_end_counts)

    def to_dict(self) -> dict:
        return {
            'n': self.n,
            'gamma': self.gamma,
            'ell': self.ell,
            'fractions': self.fractions.tolist(),
            'heavy': sorted(self.heavy),
            'light': sorted(self.light),
            'dead_end_walks': self.dead_end_walks,
            'peak_words': self.peak_words
        }


@dataclass(frozen=True)
class SpaceReport:
    """Space and pass accounting of one pipeline run. Sketch counters count as words."""
    pass_count: int
    pass1_peak_words: int
    pass2_peak_words: int
    heavy_count: int
    gamma: int
    ell: int
    operated_correctly: bool
    sketch_words: int = 0

    @property
    def peak_words(self) -> int:
        return max(self.pass1_peak_words, self.pass2_peak_words)

    def to_dict(self) -> dict:
        return {
            'pass_count': self.pass_count,
            'pass1_peak_words': self.pass1_peak_words,
            'pass2_peak_words': self.pass2_peak_words,
            'peak_words': self.peak_words,
            'heavy_count': self.heavy_count,
            'gamma': self.gamma,
            'ell': self.ell,
            'operated_correctly': self.operated_correctly,
            'sketch_words': self.sketch_words
        }


@dataclass(frozen=True)
class PipelineResult:
    walk: Walk | Failure
    report: SpaceReport
    estimate: HeavyLightEstimate
    table: NeighborTable


def warn_if_delta_unproven(delta: float, n: int) -> None:
    """Warns when delta >= 1/n, where the accuracy guarantee is not proven."""
    if delta >= 1 / n:
        warnings.warn(f'delta = {delta} is at least 1/n = {1 / n:.4g}; the accuracy guarantee is unproven there.')


def _lists_to_array(lists: Sequence[Sequence[int]], width: int) -> np.ndarray:
    """Packs neighbor lists into an (n, width) array padded with -1."""
    array = np.full((len(lists), width), -1, dtype=np.int64)
    for vertex, neighbors in enumerate(lists):
        neighbors = neighbors[:width]
        array[vertex, :len(neighbors)] = neighbors

    return array


def estimate_heavy_light(
        lists_bank: Sequence[Sequence[Sequence[int]]],
        ell: int,
        peak_words: int = 0
) -> HeavyLightEstimate:
    """Simulates one ell-step trial walk from every vertex on every table of the bank and counts revisits.

    Trial walks consume list entries sequentially, so with ell entries per list they never run out. A walk that
    reaches an empty list is a dead-end walk and counts as a non-revisit.

    :param lists_bank: gamma collections of per-vertex neighbor lists.
    :param ell: Revisit horizon.
    :param peak_words: Words the bank occupied, carried into the estimate.
    :return: The HeavyLightEstimate.
    """
    gamma = len(lists_bank)
    n = len(lists_bank[0])
    starts = np.arange(n)
    revisit_counts = np.zeros(n, dtype=np.int64)
    dead_end_counts = np.zeros(n, dtype=np.int64)

    for lists in lists_bank:
        neighbors = _lists_to_array(lists, ell)
        visits = np.zeros((n, n), dtype=np.int64)
        current = starts.copy()
        alive = np.ones(n, dtype=bool)
        died = np.zeros(n, dtype=bool)
        revisited = np.zeros(n, dtype=bool)

        for _ in range(ell):
            used = visits[starts, current]
            following = neighbors[current, np.minimum(used, ell - 1)]
            stuck = alive & (following < 0)
            moving = alive & ~stuck

            visits[starts[moving], current[moving]] += 1
            current = np.where(moving, following, current)
            revisited |= moving & (current == starts)
            died |= stuck
            alive = moving

        revisit_counts += revisited & ~died
        dead_end_counts += died

    estimate = HeavyLightEstimate(
        n=n,
        gamma=gamma,
        ell=ell,
        revisit_counts=tuple(int(count) for count in revisit_counts),
        dead_end_counts=tuple(int(count) for count in dead_end_counts),
        peak_words=peak_words
    )

    stranded = [vertex for vertex in range(n) if estimate.dead_end_counts[vertex] == gamma]
    if stranded:
        warnings.warn(
            f'Every trial walk hit a dead end for {len(stranded):,} vertices (first: {stranded[0]}).',
            DeadEndVertex
        )

    return estimate


def first_pass(stream: EdgeStream, config: TwoPassConfig) -> HeavyLightEstimate:
    """Estimates heavy and light vertices in one pass.

    Runs gamma independent folklore preprocessing instances with horizon ell over a single replay, then
    simulates one trial walk per vertex on each of them.

    :param stream: An insertion-only stream. Exactly one replay is consumed.
    :param config: The two-pass configuration.
    :return: The HeavyLightEstimate.
    """
    if stream.turnstile:
        raise ValueError('The two-pass sampler needs an insertion-only stream.')

    recorder = _OnePassRecorder(
        n=stream.n,
        tau=config.ell,
        full_vertices=frozenset(),
        c2=config.c2,
        rng=derive_rng(config.seed, 'first-pass'),
        copies=config.gamma
    )

    passes_before = stream.pass_count
    for u, v in stream.replay():
        recorder.observe_edge(u, v)
    assert stream.pass_count == passes_before + 1

    tables = recorder.finish()

    return estimate_heavy_light([table.lists for table in tables], ell=config.ell, peak_words=recorder.peak_words)


def second_pass(stream: EdgeStream, estimate: HeavyLightEstimate, config: TwoPassConfig) -> NeighborTable:
    """Records full neighborhoods of estimated-heavy vertices and gamma * ell samples for the rest.

    :param stream: An insertion-only stream. Exactly one replay is consumed.
    :param estimate: The first pass's estimate.
    :param config: The two-pass configuration.
    :return: The NeighborTable.
    """
    tau = config.gamma * config.ell

    return preprocess(
        stream,
        tau=tau,
        full_vertices=estimate.heavy,
        config=SamplerConfig(tau=tau, c2=config.c2, seed=derive_seed(config.seed, 'second-pass'))
    )


def sample(
        n: int,
        u_start: int,
        L: int,
        full_vertices: frozenset[int] | set[int],
        table: NeighborTable,
        seed: int = 0
) -> Walk | Failure:
    """Samples a walk from the two-pass table (the one-pass replay rule applies unchanged)."""
    return sample_walk(n, u_start, L, full_vertices, table, seed=seed)


def run_pipeline(stream: EdgeStream, u_start: int, config: TwoPassConfig) -> PipelineResult:
    """Runs both passes over a fresh two-pass handle of the stream and samples a walk from u_start.

    :param stream: An insertion-only stream.
    :param u_start: Start vertex.
    :param config: The two-pass configuration.
    :return: A PipelineResult with the walk (or Failure) and the SpaceReport.
    """
    if not 0 <= u_start < stream.n:
        raise ValueError(f'Start vertex {u_start} is outside [0, {stream.n}).')

    warn_if_delta_unproven(config.delta, stream.n)

    handle = stream.handle(max_passes=2)
    estimate = first_pass(handle, config)
    table = second_pass(handle, estimate, config)
    assert handle.pass_count == 2

    walk = sample(stream.n, u_start, config.L, table.full_vertices, table, seed=derive_seed(config.seed, 'sample'))

    report = SpaceReport(
        pass_count=handle.pass_count,
        pass1_peak_words=estimate.peak_words,
        pass2_peak_words=table.stored_words,
        heavy_count=len(estimate.heavy),
        gamma=config.gamma,
        ell=config.ell,
        operated_correctly=table.operated_correctly
    )

    return PipelineResult(walk=walk, report=report, estimate=estimate, table=table)


def classification_sound(estimate: HeavyLightEstimate, exact_classes: list[VertexClass]) -> bool:
    """Checks that every estimated-heavy vertex is truly heavy and every estimated-light vertex is truly light."""
    return (
        estimate.heavy <= exact_heavy_vertices(exact_classes)
        and estimate.light <= exact_light_vertices(exact_classes)
    )
