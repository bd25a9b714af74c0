"""Turnstile-model preprocessing: l1 samplers stand in for reservoirs and a heavy-hitter sketch recovers
the full neighborhoods of heavy vertices."""
import math
from dataclasses import dataclass

import numpy as np

from walkstream.errors import SketchFailure
from walkstream.graph_stream import EdgeStream
from walkstream.one_pass_sampler import NeighborTable
from walkstream.seeding import derive_rng, derive_seed
from walkstream.two_pass_sampler import (
    HeavyLightEstimate,
    PipelineResult,
    SpaceReport,
    TwoPassConfig,
    estimate_heavy_light,
    sample,
    warn_if_delta_unproven
)

MERSENNE_PRIME = 2 ** 31 - 1
SAMPLER_HASH_DEGREE = 8
HEAVY_HITTER_HASH_DEGREE = 2
FAIL = -1


@dataclass(frozen=True)
class SketchConfig:
    """Parameters of the turnstile sketches.

    :param width: Buckets per row of every l1 sampler level.
    :param failure_probability: Failure probability of one l1 sampler (sets its number of rows).
    :param heavy_hitter_failure_probability: Failure probability of the heavy-hitter sketch.
    """
    width: int = 16
    failure_probability: float = 0.01
    heavy_hitter_failure_probability: float = 0.01

    def __post_init__(self) -> None:
        if self.width < 2:
            raise ValueError(f'Sketch width must be at least 2 but got {self.width}.')

        for name in ('failure_probability', 'heavy_hitter_failure_probability'):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f'{name} must be in (0, 1) but got {getattr(self, name)}.')


def _poly_hash(coefficients: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Evaluates random polynomials modulo 2^31 - 1 (a k-wise independent family for degree k).

    :param coefficients: An (H, k) array of coefficients in [0, 2^31 - 1).
    :param values: A (D,) array of inputs in [0, 2^31 - 1).
    :return: An (H, D) array of hash values.
    """
    result = np.zeros((coefficients.shape[0], values.shape[0]), dtype=np.int64)
    for power in range(coefficients.shape[1]):
        result = (result * values[None, :] + coefficients[:, power:power + 1]) % MERSENNE_PRIME

    return result


class L1SamplerSketch:
    """A bank of independent l1 samplers over the same frequency vector.

    Each sampler gives coordinate i an exponential E_i = -ln(u_i) from a hashed uniform u_i and keeps i in
    level l while u_i >= 1 - 2^-l, so deeper levels hold the coordinates with the smallest E_i. Every level
    is sketched by `depth` rows of `width` buckets holding (sum f, sum f * x, sum f * x^2) for x = i + 1.
    At query time the buckets are peeled until a level is explained exactly, and the coordinate with the
    smallest E_i / |f_i| wins the race, which happens with probability |f_i| / ||f||_1. A winner found
    above level 0 is only reported when no coordinate missing from that level could have beaten it.

    The certificate assumes the vector is non-negative at query time.
    """

    def __init__(
            self,
            domain: int,
            copies: int = 1,
            failure_probability: float = 0.01,
            width: int = 16,
            seed: int = 0
    ) -> None:
        if domain < 1:
            raise ValueError(f'Domain size must be at least 1 but got {domain}.')

        if copies < 1:
            raise ValueError(f'Number of copies must be at least 1 but got {copies}.')

        self.domain = domain
        self.copies = copies
        self.width = width
        self.failure_probability = failure_probability
        self.seed = seed
        self.depth = max(1, math.ceil(math.log2(1 / failure_probability)))
        self.num_levels = math.ceil(math.log2(domain)) + 1 if domain > 1 else 1

        rng = derive_rng(seed, 'l1-sampler')
        coordinates = np.arange(domain, dtype=np.int64)
        bucket_coefficients = rng.integers(0, MERSENNE_PRIME, size=(copies * self.depth, SAMPLER_HASH_DEGREE))
        race_coefficients = rng.integers(0, MERSENNE_PRIME, size=(copies, SAMPLER_HASH_DEGREE))
        self.hash_words = bucket_coefficients.size + race_coefficients.size

        uniforms = (_poly_hash(race_coefficients, coordinates) + 1) / (MERSENNE_PRIME + 1)
        self._exponentials = -np.log(uniforms)

        # Coordinate i survives levels 0..levels[c, i] - 1, level l keeps E_i <= thresholds[l]
        self._levels = sum((uniforms >= 1 - 2.0 ** -level).astype(np.int64) for level in range(self.num_levels))
        self._thresholds = np.array([np.inf] + [-math.log1p(-2.0 ** -level) for level in range(1, self.num_levels)])
        self._buckets = (_poly_hash(bucket_coefficients, coordinates) % width).reshape(copies, self.depth, domain)
        self._counters = np.zeros((copies, self.num_levels, self.depth, width, 3), dtype=np.int64)
        self.mass = 0

    @property
    def words(self) -> int:
        return self._counters.size + self.hash_words

    def update(self, i: int, delta: int) -> None:
        """Applies f_i <- f_i + delta to every sampler of the bank."""
        copies, levels = np.nonzero(np.arange(self.num_levels)[None, :] < self._levels[:, i][:, None])
        rows = np.arange(self.depth)[None, :]
        buckets = self._buckets[copies[:, None], rows, i]
        x = i + 1

        self._counters[copies[:, None], levels[:, None], rows, buckets] += delta * np.array([1, x, x * x])
        self.mass += delta

    def merge(self, other: 'L1SamplerSketch') -> None:
        """Adds another bank's counters into this one. Both must share parameters and seed."""
        if (self.domain, self.copies, self.width, self.depth, self.seed) != \
                (other.domain, other.copies, other.width, other.depth, other.seed):
            raise ValueError('Only sketches with identical parameters and seed can be merged.')

        self._counters += other._counters
        self.mass += other.mass

    def state(self) -> np.ndarray:
        """A read-only view of the counters."""
        view = self._counters.view()
        view.flags.writeable = False

        return view

    def _isolated(self, residual: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Finds the buckets of residual that hold exactly one coordinate.

        :param residual: Counters shaped like the sketch's.
        :return: Copy, level, coordinate and value arrays with one entry per distinct (copy, level, coordinate).
        """
        counts, first, second = residual[..., 0], residual[..., 1], residual[..., 2]
        safe_counts = np.where(counts == 0, 1, counts)
        indices = first // safe_counts - 1

        isolated = (
            (counts != 0)
            & (first % safe_counts == 0)
            & (first * first == second * counts)
            & (indices >= 0)
            & (indices < self.domain)
        )
        copy_ids, level_ids, row_ids, bucket_ids = np.nonzero(isolated)
        coordinates = indices[copy_ids, level_ids, row_ids, bucket_ids]

        # A 1-sparse bucket is only trusted if its coordinate hashes there and survives to that level
        consistent = (
            (self._buckets[copy_ids, row_ids, coordinates] == bucket_ids)
            & (self._levels[copy_ids, coordinates] > level_ids)
        )
        copy_ids, level_ids, row_ids, bucket_ids = (
            copy_ids[consistent], level_ids[consistent], row_ids[consistent], bucket_ids[consistent]
        )
        coordinates = coordinates[consistent]
        values = counts[copy_ids, level_ids, row_ids, bucket_ids]

        keys = (copy_ids * self.num_levels + level_ids) * self.domain + coordinates
        _, first_positions = np.unique(keys, return_index=True)

        return (
            copy_ids[first_positions],
            level_ids[first_positions],
            coordinates[first_positions],
            values[first_positions]
        )

    def _peel(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Repeatedly subtracts every isolated coordinate from all rows of its level.

        :return: Copy, level, coordinate and value arrays of the peeled coordinates (summed per
                 (copy, level, coordinate)), and the residual counters.
        """
        residual = self._counters.copy()
        peeled = []

        for _ in range(self.domain):
            copy_ids, level_ids, coordinates, values = self._isolated(residual)

            if copy_ids.size == 0:
                break

            x = coordinates + 1
            contributions = np.stack([values, values * x, values * x * x], axis=-1)
            for row in range(self.depth):
                np.subtract.at(
                    residual,
                    (copy_ids, level_ids, np.full_like(copy_ids, row), self._buckets[copy_ids, row, coordinates]),
                    contributions
                )

            peeled.append((copy_ids * self.num_levels + level_ids) * self.domain + coordinates)
            peeled.append(values)

        keys = np.concatenate(peeled[::2]) if peeled else np.zeros(0, dtype=np.int64)
        raw_values = np.concatenate(peeled[1::2]) if peeled else np.zeros(0, dtype=np.int64)

        keys, inverse = np.unique(keys, return_inverse=True)
        values = np.zeros(keys.size, dtype=np.int64)
        np.add.at(values, inverse.reshape(-1), raw_values)

        copy_ids, level_ids = np.divmod(keys // self.domain, self.num_levels)

        return copy_ids, level_ids, keys % self.domain, values, residual

    def query(self) -> np.ndarray:
        """Draws one coordinate per sampler.

        :return: A (copies,) array of coordinates, with -1 (FAIL) where a sampler failed or the vector is zero.
        """
        copy_ids, level_ids, coordinates, values, residual = self._peel()

        recovered = ~np.any(residual != 0, axis=(2, 3, 4)) & np.any(self._counters != 0, axis=(2, 3, 4))
        has_level = recovered.any(axis=1)
        chosen_levels = np.argmax(recovered, axis=1)

        candidates = has_level[copy_ids] & (level_ids == chosen_levels[copy_ids]) & (values != 0)
        copy_ids, coordinates, values = copy_ids[candidates], coordinates[candidates], values[candidates]
        scores = self._exponentials[copy_ids, coordinates] / np.abs(values)

        order = np.lexsort((scores, copy_ids))
        winner_copies, winner_positions = np.unique(copy_ids[order], return_index=True)
        winners = coordinates[order][winner_positions]
        best_scores = scores[order][winner_positions]

        # A coordinate missing from the chosen level has E_j above the level threshold and f_j at most the
        # unrecovered mass, so the winner stands when its score is below threshold / unrecovered mass
        recovered_mass = np.zeros(self.copies, dtype=np.int64)
        np.add.at(recovered_mass, copy_ids, values)
        unrecovered = self.mass - recovered_mass[winner_copies]
        certified = (unrecovered <= 0) | (
            best_scores * unrecovered < self._thresholds[chosen_levels[winner_copies]]
        )

        samples = np.full(self.copies, FAIL, dtype=np.int64)
        samples[winner_copies[certified]] = winners[certified]

        return samples


class HeavyHitterSketch:
    """A count-min sketch that reports every coordinate with f_i >= ||f||_1 / k and none with
    f_i <= ||f||_1 / (2k), for frequency vectors that are non-negative at query time.

    When 8k buckets would cover the domain the sketch keeps one exact counter per coordinate instead.
    """

    def __init__(self, domain: int, k: int, failure_probability: float = 0.01, seed: int = 0) -> None:
        if domain < 1:
            raise ValueError(f'Domain size must be at least 1 but got {domain}.')

        if k < 1:
            raise ValueError(f'k must be at least 1 but got {k}.')

        self.domain = domain
        self.k = k
        self.seed = seed
        self.mass = 0

        if 8 * k >= domain:
            self.width, self.depth = domain, 1
            self._buckets = np.arange(domain, dtype=np.int64)[None, :]
            self.hash_words = 0
        else:
            self.width = 8 * k
            self.depth = max(1, math.ceil(math.log2(domain / failure_probability)))
            coefficients = derive_rng(seed, 'heavy-hitter').integers(
                0, MERSENNE_PRIME, size=(self.depth, HEAVY_HITTER_HASH_DEGREE)
            )
            self._buckets = _poly_hash(coefficients, np.arange(domain, dtype=np.int64)) % self.width
            self.hash_words = coefficients.size

        self._counters = np.zeros((self.depth, self.width), dtype=np.int64)

    @property
    def words(self) -> int:
        return self._counters.size + self.hash_words + 1

    def update(self, i: int, delta: int) -> None:
        self._counters[np.arange(self.depth), self._buckets[:, i]] += delta
        self.mass += delta

    def merge(self, other: 'HeavyHitterSketch') -> None:
        if (self.domain, self.k, self.width, self.depth, self.seed) != \
                (other.domain, other.k, other.width, other.depth, other.seed):
            raise ValueError('Only sketches with identical parameters and seed can be merged.')

        self._counters += other._counters
        self.mass += other.mass

    def state(self) -> np.ndarray:
        view = self._counters.view()
        view.flags.writeable = False

        return view

    def estimate(self, indices: np.ndarray) -> np.ndarray:
        """Count-min estimates (never below the true value for non-negative vectors)."""
        return self._counters[np.arange(self.depth)[:, None], self._buckets[:, indices]].min(axis=0)

    def query(self, candidates: range | list[int] | None = None) -> set[int]:
        """Returns the coordinates among candidates (default: all) whose estimate exceeds 3 ||f||_1 / (4k)."""
        if self.mass <= 0:
            return set()

        indices = np.arange(self.domain) if candidates is None else np.asarray(list(candidates), dtype=np.int64)
        if indices.size == 0:
            return set()

        reported = indices[self.estimate(indices) > 0.75 * self.mass / self.k]

        return {int(index) for index in reported}


Sketch = L1SamplerSketch | HeavyHitterSketch


def sketch_update(sketch: Sketch, i: int, delta: int) -> Sketch:
    """Applies f_i <- f_i + delta to a sketch and returns it.

    :param sketch: An l1 sampler bank or a heavy-hitter sketch.
    :param i: Coordinate in [0, domain).
    :param delta: +1 or -1.
    :return: The updated sketch.
    """
    if not 0 <= i < sketch.domain:
        raise ValueError(f'Coordinate {i} is outside [0, {sketch.domain}).')

    if delta not in (1, -1):
        raise ValueError(f'Turnstile updates must be +1 or -1 but got {delta}.')

    sketch.update(i, delta)

    return sketch


def _sample_lists(banks: dict[int, L1SamplerSketch], n: int, copies: int) -> list[list[int] | None]:
    """Queries every vertex's sampler bank. None marks a vertex with no out-edges."""
    samples = []
    for vertex in range(n):
        bank = banks.get(vertex)

        if bank is None or bank.mass == 0:
            samples.append(None)
            continue

        drawn = bank.query()
        if np.any(drawn == FAIL):
            raise SketchFailure(vertex, f'l1 sampler failed for vertex {vertex}.')

        samples.append(drawn.tolist())

    assert all(drawn is None or len(drawn) == copies for drawn in samples)

    return samples


def turnstile_first_pass(
        stream: EdgeStream,
        config: TwoPassConfig,
        sketch_config: SketchConfig = SketchConfig()
) -> HeavyLightEstimate:
    """Estimates heavy and light vertices in one turnstile pass with gamma * ell l1 samplers per vertex.

    :param stream: A turnstile stream. Exactly one replay is consumed.
    :param config: The two-pass configuration.
    :param sketch_config: Sketch parameters.
    :return: The HeavyLightEstimate.
    """
    gamma, ell, n = config.gamma, config.ell, stream.n
    banks: dict[int, L1SamplerSketch] = {}

    passes_before = stream.pass_count
    for u, v, delta in stream.replay_updates():
        if u not in banks:
            banks[u] = L1SamplerSketch(
                domain=n,
                copies=gamma * ell,
                failure_probability=sketch_config.failure_probability,
                width=sketch_config.width,
                seed=derive_seed(config.seed, 'turnstile-first-pass', u)
            )
        sketch_update(banks[u], v, delta)
    assert stream.pass_count == passes_before + 1

    samples = _sample_lists(banks, n, gamma * ell)
    lists_bank = [
        [() if drawn is None else tuple(drawn[copy * ell:(copy + 1) * ell]) for drawn in samples]
        for copy in range(gamma)
    ]

    return estimate_heavy_light(lists_bank, ell=ell, peak_words=sum(bank.words for bank in banks.values()))


def turnstile_second_pass(
        stream: EdgeStream,
        estimate: HeavyLightEstimate,
        config: TwoPassConfig,
        sketch_config: SketchConfig = SketchConfig()
) -> NeighborTable:
    """Records neighbor lists in one turnstile pass.

    Heavy vertices recover their full neighborhoods from one global heavy-hitter sketch over edge slots
    u * n + v with k = c2 * gamma * ell * n. Light vertices draw gamma * ell neighbors from fresh l1 samplers.

    :param stream: A turnstile stream. Exactly one replay is consumed.
    :param estimate: The first pass's estimate.
    :param config: The two-pass configuration.
    :param sketch_config: Sketch parameters.
    :return: The NeighborTable, with sketch counters reported in sketch_words.
    """
    n = stream.n
    tau = config.gamma * config.ell
    heavy = estimate.heavy
    heavy_hitter = HeavyHitterSketch(
        domain=n * n,
        k=config.c2 * tau * n,
        failure_probability=sketch_config.heavy_hitter_failure_probability,
        seed=derive_seed(config.seed, 'turnstile-heavy-hitter')
    )
    heavy_degrees = np.zeros(n, dtype=np.int64)
    banks: dict[int, L1SamplerSketch] = {}

    passes_before = stream.pass_count
    for u, v, delta in stream.replay_updates():
        if u in heavy:
            sketch_update(heavy_hitter, u * n + v, delta)
            heavy_degrees[u] += delta
        else:
            if u not in banks:
                banks[u] = L1SamplerSketch(
                    domain=n,
                    copies=tau,
                    failure_probability=sketch_config.failure_probability,
                    width=sketch_config.width,
                    seed=derive_seed(config.seed, 'turnstile-second-pass', u)
                )
            sketch_update(banks[u], v, delta)
    assert stream.pass_count == passes_before + 1

    samples = _sample_lists(banks, n, tau)
    lists = []
    for vertex in range(n):
        if vertex in heavy:
            slots = heavy_hitter.query(candidates=range(vertex * n, (vertex + 1) * n))
            neighbors = tuple(sorted(slot - vertex * n for slot in slots))

            if len(neighbors) != heavy_degrees[vertex]:
                raise SketchFailure(vertex, f'Heavy-hitter recovery of vertex {vertex} found {len(neighbors):,} '
                                            f'of {heavy_degrees[vertex]:,} neighbors.')

            lists.append(neighbors)
        else:
            lists.append(() if samples[vertex] is None else tuple(samples[vertex]))

    stored_words = sum(len(neighbors) for neighbors in lists)
    cap = config.c2 * tau * n

    return NeighborTable(
        n=n,
        lists=tuple(lists),
        full_vertices=heavy,
        tau=tau,
        stored_words=stored_words,
        cap=cap,
        operated_correctly=stored_words <= cap,
        sketch_words=heavy_hitter.words + n + sum(bank.words for bank in banks.values())
    )


def turnstile_preprocess(
        stream: EdgeStream,
        config: TwoPassConfig,
        sketch_config: SketchConfig = SketchConfig()
) -> NeighborTable:
    """Two-pass turnstile preprocessing producing a NeighborTable that sample_walk consumes unchanged.

    :param stream: A turnstile stream. Exactly two replays are consumed.
    :param config: The two-pass configuration.
    :param sketch_config: Sketch parameters.
    :return: The NeighborTable.
    """
    if not stream.turnstile:
        raise ValueError('Turnstile preprocessing needs a turnstile stream.')

    estimate = turnstile_first_pass(stream, config, sketch_config)

    return turnstile_second_pass(stream, estimate, config, sketch_config)


def run_turnstile_pipeline(
        stream: EdgeStream,
        u_start: int,
        config: TwoPassConfig,
        sketch_config: SketchConfig = SketchConfig()
) -> PipelineResult:
    """Runs both turnstile passes over a fresh two-pass handle and samples a walk from u_start.

    Sketch banks hold dense counters per vertex, so this path is meant for small graphs.

    :param stream: A turnstile stream.
    :param u_start: Start vertex.
    :param config: The two-pass configuration.
    :param sketch_config: Sketch parameters.
    :return: A PipelineResult whose SpaceReport counts sketch counters as words.
    """
    if not stream.turnstile:
        raise ValueError('Turnstile preprocessing needs a turnstile stream.')

    if not 0 <= u_start < stream.n:
        raise ValueError(f'Start vertex {u_start} is outside [0, {stream.n}).')

    warn_if_delta_unproven(config.delta, stream.n)

    handle = stream.handle(max_passes=2)
    estimate = turnstile_first_pass(handle, config, sketch_config)
    table = turnstile_second_pass(handle, estimate, config, sketch_config)
    assert handle.pass_count == 2

    walk = sample(stream.n, u_start, config.L, table.full_vertices, table, seed=derive_seed(config.seed, 'sample'))

    report = SpaceReport(
        pass_count=handle.pass_count,
        pass1_peak_words=estimate.peak_words,
        pass2_peak_words=table.stored_words + table.sketch_words,
        heavy_count=len(estimate.heavy),
        gamma=config.gamma,
        ell=config.ell,
        operated_correctly=table.operated_correctly,
        sketch_words=table.sketch_words
    )

    return PipelineResult(walk=walk, report=report, estimate=estimate, table=table)
