"""Tests for turnstile."""
import numpy as np
import pytest
from scipy.stats import chisquare

from walkstream.errors import SketchFailure
from walkstream.graph_stream import EdgeStream, from_graph, to_turnstile
from walkstream.instance_gen import gen_random_graph, gen_star
from walkstream.turnstile import (
    FAIL,
    HeavyHitterSketch,
    L1SamplerSketch,
    SketchConfig,
    run_turnstile_pipeline,
    sketch_update,
    turnstile_preprocess
)
from walkstream.two_pass_sampler import TwoPassConfig
from walkstream.walk_oracle import exact_walk_distribution, tv_distance


def churned_stream() -> EdgeStream:
    """Vertex 0 gains and then loses the edge to 1."""
    return EdgeStream(n=3, updates=[(0, 1, 1), (0, 2, 1), (0, 1, -1), (1, 0, 1), (2, 0, 1)], turnstile=True)


def test_sketch_config_validation() -> None:
    with pytest.raises(ValueError):
        SketchConfig(width=1)

    with pytest.raises(ValueError):
        SketchConfig(failure_probability=0.0)


def test_l1_sampler_single_coordinate() -> None:
    sketch = sketch_update(L1SamplerSketch(domain=10, copies=20, seed=1), 3, 1)

    assert sketch.query().tolist() == [3] * 20
    assert sketch.mass == 1


def test_l1_sampler_cancellation_fails() -> None:
    sketch = L1SamplerSketch(domain=10, copies=5)
    sketch_update(sketch, 4, 1)
    sketch_update(sketch, 4, -1)

    assert sketch.query().tolist() == [FAIL] * 5
    assert not sketch.state().any()


def test_l1_sampler_follows_frequencies() -> None:
    sketch = L1SamplerSketch(domain=10, copies=2_000, seed=3)
    for i in (2, 2, 2, 5, 7, 7):
        sketch_update(sketch, i, 1)
    sketch_update(sketch, 7, -1)
    sketch_update(sketch, 7, -1)

    samples = sketch.query()

    assert not np.any(samples == FAIL)
    assert set(samples.tolist()) <= {2, 5}
    assert np.mean(samples == 2) == pytest.approx(0.75, abs=0.05)


def weighted_vector(index: int) -> np.ndarray:
    """Fixed non-negative vectors over 32 coordinates with l1 mass at most 32. Odd indices carry weights."""
    rng = np.random.default_rng(index)
    support = rng.choice(32, size=int(rng.integers(1, 17)), replace=False)
    vector = np.zeros(32, dtype=np.int64)
    vector[support] = rng.integers(1, 3, size=support.size) if index % 2 else 1

    return vector


def sketch_vector(vector: np.ndarray, copies: int, seed: int) -> L1SamplerSketch:
    """Sketches a vector through churned updates: every coordinate also gains and loses one unit."""
    sketch = L1SamplerSketch(domain=vector.size, copies=copies, seed=seed)
    for i, value in enumerate(vector):
        sketch_update(sketch, i, 1)
        for _ in range(value):
            sketch_update(sketch, i, 1)
        sketch_update(sketch, i, -1)

    return sketch


@pytest.mark.parametrize('index', range(20))
def test_l1_sampler_frequencies_chisquare(index: int) -> None:
    vector = weighted_vector(index)
    samples = sketch_vector(vector, copies=2_000, seed=index).query()
    drawn = samples[samples != FAIL]
    support = np.flatnonzero(vector)

    assert vector.sum() <= 32
    assert np.mean(samples == FAIL) <= 0.01
    assert set(drawn.tolist()) <= set(support.tolist())

    if support.size > 1:
        counts = np.bincount(drawn, minlength=vector.size)[support]
        expected = drawn.size * vector[support] / vector.sum()
        assert chisquare(counts, f_exp=expected).pvalue > 0.001


def test_l1_sampler_heavy_coordinate_share() -> None:
    vector = np.zeros(64, dtype=np.int64)
    vector[0] = 16
    vector[np.arange(1, 64, 4)] = 1

    samples = np.concatenate([sketch_vector(vector, copies=2_000, seed=seed).query() for seed in range(5)])
    drawn = samples[samples != FAIL]

    assert vector.sum() == 32 and np.count_nonzero(vector) == 17
    assert drawn.size >= 0.99 * samples.size
    assert np.mean(drawn == 0) == pytest.approx(0.5, abs=0.02)


def test_l1_sampler_recovers_supports_wider_than_width() -> None:
    vector = np.ones(30, dtype=np.int64)
    sketch = sketch_vector(vector, copies=200, seed=7)
    samples = sketch.query()

    assert sketch.width == 16
    assert np.mean(samples == FAIL) <= 0.01
    assert len(set(samples[samples != FAIL].tolist())) > 25


def test_sketch_state_is_order_independent() -> None:
    rng = np.random.default_rng(0)
    updates = [(i, 1) for i in rng.integers(0, 200, size=300)] + [(i, -1) for i in rng.integers(0, 200, size=50)]
    updates = [(int(i), delta) for i, delta in updates]

    states = []
    for order in (np.arange(len(updates)), rng.permutation(len(updates))):
        sampler = L1SamplerSketch(domain=200, copies=6, seed=4)
        heavy_hitter = HeavyHitterSketch(domain=200, k=4, seed=4)
        for position in order:
            i, delta = updates[position]
            sketch_update(sampler, i, delta)
            sketch_update(heavy_hitter, i, delta)
        states.append((sampler.state().copy(), heavy_hitter.state().copy(), sampler.mass))

    assert heavy_hitter.width == 32
    assert np.array_equal(states[0][0], states[1][0])
    assert np.array_equal(states[0][1], states[1][1])
    assert states[0][2] == states[1][2]


def test_l1_sampler_merge() -> None:
    combined = L1SamplerSketch(domain=8, copies=4, seed=2)
    left = L1SamplerSketch(domain=8, copies=4, seed=2)
    right = L1SamplerSketch(domain=8, copies=4, seed=2)

    for i, delta in [(1, 1), (6, 1), (1, -1), (3, 1)]:
        sketch_update(combined, i, delta)
        sketch_update(left if i != 3 else right, i, delta)

    left.merge(right)

    assert np.array_equal(left.state(), combined.state())
    assert left.query().tolist() == combined.query().tolist()

    with pytest.raises(ValueError):
        left.merge(L1SamplerSketch(domain=8, copies=4, seed=5))


def test_state_is_read_only() -> None:
    with pytest.raises(ValueError):
        L1SamplerSketch(domain=4).state()[0, 0, 0, 0, 0] = 1


def test_sketch_update_validation() -> None:
    with pytest.raises(ValueError):
        sketch_update(L1SamplerSketch(domain=4), 4, 1)

    with pytest.raises(ValueError):
        sketch_update(HeavyHitterSketch(domain=4, k=1), 0, 2)


def test_heavy_hitter_exact_mode() -> None:
    sketch = HeavyHitterSketch(domain=16, k=2)
    for i in (3, 3, 3, 3, 3, 7):
        sketch_update(sketch, i, 1)

    assert sketch.width == 16
    assert sketch.query() == {3}
    assert sketch.query(candidates=[7, 8]) == set()


def test_heavy_hitter_cancellation() -> None:
    sketch = HeavyHitterSketch(domain=16, k=2)
    sketch_update(sketch, 3, 1)
    sketch_update(sketch, 3, -1)

    assert sketch.query() == set()


def test_heavy_hitter_count_min_mode() -> None:
    sketch = HeavyHitterSketch(domain=10_000, k=4, seed=1)
    for _ in range(100):
        sketch_update(sketch, 0, 1)
    for i in range(1, 101):
        sketch_update(sketch, i * 97, 1)

    assert sketch.width == 32
    assert sketch.query() == {0}
    assert np.all(sketch.estimate(np.arange(1, 101) * 97) >= 1)


@pytest.mark.slow
def test_heavy_hitter_guarantees_on_many_vectors() -> None:
    k, failure_probability, trials = 4, 0.01, 10_000
    violations = 0

    for trial in range(trials):
        rng = np.random.default_rng(trial)
        vector = np.zeros(64, dtype=np.int64)
        vector[rng.choice(64, size=int(rng.integers(1, 65)), replace=False)] = 1
        vector[int(rng.integers(64))] += int(rng.integers(0, 16))

        sketch = HeavyHitterSketch(domain=64, k=k, failure_probability=failure_probability, seed=trial)
        for i in np.repeat(np.arange(64), vector):
            sketch_update(sketch, int(i), 1)

        reported = sketch.query()
        mass = vector.sum()
        guaranteed_in = set(np.flatnonzero(vector >= mass / k).tolist())
        guaranteed_out = set(np.flatnonzero(vector <= mass / (2 * k)).tolist())
        violations += not (guaranteed_in <= reported and not reported & guaranteed_out)

    assert sketch.width == 32
    assert violations <= failure_probability * trials


def test_turnstile_preprocess_drops_deleted_edges() -> None:
    stream = churned_stream()
    table = turnstile_preprocess(stream, TwoPassConfig(L=4, delta=0.1))

    assert set(table.lists[0]) == {2}
    assert set(table.lists[1]) == {0}
    assert set(table.lists[2]) == {0}
    assert table.sketch_words > 0
    assert stream.pass_count == 2


@pytest.mark.slow
def test_deleted_edges_never_appear_in_lists() -> None:
    for seed in range(1_000):
        graph = gen_random_graph(5, 2, seed=seed)
        table = turnstile_preprocess(to_turnstile(graph, seed=seed), TwoPassConfig(L=4, delta=0.1, c1=1, seed=seed))

        assert all((u, v) in graph.edge_set for u, neighbors in enumerate(table.lists) for v in neighbors)

        churned = turnstile_preprocess(churned_stream(), TwoPassConfig(L=4, delta=0.1, c1=1, seed=seed))
        assert 1 not in churned.lists[0]


def test_turnstile_preprocess_rejects_insertion_only_streams() -> None:
    with pytest.raises(ValueError):
        turnstile_preprocess(from_graph(gen_star(3)), TwoPassConfig(L=4, delta=0.1))


def test_turnstile_heavy_recovery_failure(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(HeavyHitterSketch, 'query', lambda self, candidates=None: set())

    with pytest.raises(SketchFailure) as error:
        run_turnstile_pipeline(to_turnstile(gen_star(5)), 0, TwoPassConfig(L=4, delta=0.1))
    assert error.value.vertex == 0


def test_run_turnstile_pipeline() -> None:
    graph = gen_star(5)
    result = run_turnstile_pipeline(to_turnstile(graph, seed=1), 0, TwoPassConfig(L=4, delta=0.1, seed=2))

    assert result.report.pass_count == 2
    assert result.report.pass2_peak_words == result.table.stored_words + result.report.sketch_words
    assert len(result.walk) == 5
    assert all((u, v) in graph.edge_set for u, v in zip(result.walk[:-1], result.walk[1:]))


@pytest.mark.slow
def test_turnstile_matches_exact_distribution() -> None:
    graph = gen_star(4)
    stream = to_turnstile(graph, seed=0)
    walks = [
        run_turnstile_pipeline(stream, 0, TwoPassConfig(L=4, delta=0.2, c1=1, seed=seed)).walk
        for seed in range(1_000)
    ]
    tv = tv_distance(exact_walk_distribution(graph, 0, 4), walks)

    assert tv.estimate <= tv.radius
