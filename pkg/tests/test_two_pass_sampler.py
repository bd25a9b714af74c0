"""Tests for two_pass_sampler."""
import math
import warnings

import numpy as np
import pytest

from walkstream.errors import DeadEndVertex, PassBudgetExceeded
from walkstream.graph_stream import DirectedGraph, from_graph
from walkstream.instance_gen import gen_cycle, gen_random_graph, gen_small_corpus, gen_star
from walkstream.one_pass_sampler import Failure, folklore_preprocess
from walkstream.two_pass_sampler import (
    SpaceReport,
    TwoPassConfig,
    classification_sound,
    estimate_heavy_light,
    first_pass,
    run_pipeline,
    second_pass
)
from walkstream.walk_oracle import (
    classify_exact,
    exact_light_vertices,
    exact_walk_distribution,
    tv_distance,
    visit_count_distribution
)


@pytest.mark.parametrize('L, ell', [(1, 1), (4, 2), (5, 3), (100, 10), (101, 11)])
def test_config_ell(L: int, ell: int) -> None:
    assert TwoPassConfig(L=L, delta=0.1).ell == ell


def test_config_gamma() -> None:
    assert TwoPassConfig(L=4, delta=0.1, c1=1).gamma == 4
    assert TwoPassConfig(L=4, delta=0.5, c1=1).gamma == 1
    assert TwoPassConfig(L=4, delta=0.1).gamma == 160


@pytest.mark.parametrize('kwargs', [{'L': 0, 'delta': 0.1}, {'L': 4, 'delta': 0.0}, {'L': 4, 'delta': 1.0},
                                    {'L': 4, 'delta': 0.1, 'c1': 0}, {'L': 4, 'delta': 0.1, 'c2': 0}])
def test_config_validation(kwargs: dict) -> None:
    with pytest.raises(ValueError):
        TwoPassConfig(**kwargs)


def test_estimate_heavy_light() -> None:
    # In the second table vertex 0 moves to the self-loop at 1 and never returns
    estimate = estimate_heavy_light([((0, 0), (1, 1)), ((1, 1), (1, 1))], ell=2)

    assert estimate.revisit_counts == (1, 2)
    assert estimate.fractions.tolist() == [0.5, 1.0]
    assert estimate.heavy == {0, 1}
    assert estimate.light == frozenset()


def test_estimate_heavy_light_counts_dead_ends() -> None:
    with pytest.warns(DeadEndVertex):
        estimate = estimate_heavy_light([((1,), ()), ((1,), ())], ell=2)

    assert estimate.dead_end_counts == (2, 2)
    assert estimate.revisit_counts == (0, 0)
    assert estimate.heavy == frozenset()
    assert estimate.dead_end_walks == 4


def test_first_pass_star() -> None:
    config = TwoPassConfig(L=100, delta=0.001, c1=1)
    estimate = first_pass(from_graph(gen_star(101)), config)

    assert estimate.gamma == 10
    assert estimate.ell == 10
    assert estimate.fractions[0] == 1.0
    assert 0 in estimate.heavy
    assert estimate.peak_words == 10 * 101 * 10


def test_first_pass_cycle_is_all_light() -> None:
    estimate = first_pass(from_graph(gen_cycle(3)), TwoPassConfig(L=4, delta=0.1))

    assert estimate.light == {0, 1, 2}
    assert estimate.fractions.tolist() == [0.0, 0.0, 0.0]


def test_second_pass_records_heavy_neighborhoods() -> None:
    stream = from_graph(gen_star(101))
    config = TwoPassConfig(L=100, delta=0.001, c1=1)
    estimate = first_pass(stream, config)
    table = second_pass(stream, estimate, config)

    assert table.tau == config.gamma * config.ell
    assert table.full_vertices == estimate.heavy
    assert sorted(table.lists[0]) == list(range(1, 101))
    assert table.operated_correctly


def test_run_pipeline_uses_two_passes() -> None:
    stream = from_graph(gen_random_graph(10, 3, seed=0))
    result = run_pipeline(stream, 0, TwoPassConfig(L=9, delta=0.05, seed=1))

    assert result.report.pass_count == 2
    assert stream.pass_count == 0
    assert result.report.peak_words == max(result.report.pass1_peak_words, result.report.pass2_peak_words)
    assert not isinstance(result.walk, Failure)
    assert len(result.walk) == 10
    assert all((u, v) in stream.materialize().edge_set for u, v in zip(result.walk[:-1], result.walk[1:]))


def test_run_pipeline_is_deterministic() -> None:
    stream = from_graph(gen_random_graph(10, 3, seed=0))
    config = TwoPassConfig(L=16, delta=0.05, seed=4)

    assert run_pipeline(stream, 3, config).walk == run_pipeline(stream, 3, config).walk


def test_second_pass_needs_a_second_replay() -> None:
    handle = from_graph(gen_cycle(3)).handle(max_passes=1)
    config = TwoPassConfig(L=4, delta=0.1)
    estimate = first_pass(handle, config)

    with pytest.raises(PassBudgetExceeded):
        second_pass(handle, estimate, config)


def test_run_pipeline_warns_when_delta_is_large() -> None:
    with pytest.warns(UserWarning, match='unproven'):
        run_pipeline(from_graph(gen_cycle(3)), 0, TwoPassConfig(L=4, delta=0.5))

    with warnings.catch_warnings():
        warnings.simplefilter('error')
        run_pipeline(from_graph(gen_cycle(3)), 0, TwoPassConfig(L=4, delta=0.1))


def test_run_pipeline_dead_end_graph() -> None:
    graph = DirectedGraph(n=2, edges=((0, 1),))

    with pytest.warns(DeadEndVertex):
        result = run_pipeline(from_graph(graph), 0, TwoPassConfig(L=1, delta=0.1))

    assert result.walk == (0, 1)
    assert result.estimate.heavy == frozenset()


def test_classification_sound_on_star() -> None:
    estimate = first_pass(from_graph(gen_star(101)), TwoPassConfig(L=100, delta=0.001, c1=1, seed=2))

    assert classification_sound(estimate, classify_exact(gen_star(101), ell=10))


@pytest.mark.slow
@pytest.mark.parametrize('graph', gen_small_corpus())
def test_classification_sound_on_small_graphs(graph: DirectedGraph) -> None:
    stream = from_graph(graph)
    exact_classes = classify_exact(graph, ell=2)
    sound_runs = sum(
        classification_sound(first_pass(stream, TwoPassConfig(L=4, delta=0.01, seed=seed)), exact_classes)
        for seed in range(200)
    )

    assert sound_runs >= 190


@pytest.mark.slow
def test_light_vertices_are_rarely_overvisited() -> None:
    graph = gen_star(101)
    config = TwoPassConfig(L=100, delta=0.01, c1=1)
    light = sorted(exact_light_vertices(classify_exact(graph, ell=config.ell)))
    rng = np.random.default_rng(0)
    trials = 100_000
    bound = config.delta / (2 * graph.n)
    sigma = math.sqrt(bound * (1 - bound) / trials)

    assert 0 not in light and len(light) == 100

    for pair in range(20):
        u_start, v = int(rng.integers(graph.n)), int(rng.choice(light))
        histogram = visit_count_distribution(graph, u_start, v, config.L, trials, seed=pair)
        overvisited = histogram[config.gamma * config.ell + 1:].sum() / trials

        assert overvisited <= bound + 3 * sigma


def test_space_report_dict() -> None:
    report = SpaceReport(pass_count=2, pass1_peak_words=10, pass2_peak_words=12, heavy_count=1, gamma=2, ell=3,
                         operated_correctly=True)

    assert report.to_dict()['peak_words'] == 12
    assert report.to_dict()['sketch_words'] == 0


def test_two_pass_matches_exact_distribution() -> None:
    graph = gen_star(4)
    stream = from_graph(graph)
    walks = [run_pipeline(stream, 0, TwoPassConfig(L=4, delta=0.2, c1=1, seed=seed)).walk for seed in range(2_000)]
    tv = tv_distance(exact_walk_distribution(graph, 0, 4), walks)

    assert tv.estimate <= tv.radius


@pytest.mark.slow
@pytest.mark.parametrize('graph', gen_small_corpus())
@pytest.mark.parametrize('delta', [0.05, 0.01])
def test_two_pass_matches_exact_distribution_on_small_graphs(graph: DirectedGraph, delta: float) -> None:
    stream = from_graph(graph)
    walks = []
    for seed in range(2_000):
        walk = run_pipeline(stream, 0, TwoPassConfig(L=4, delta=delta, seed=seed)).walk
        walks.append((-1,) if isinstance(walk, Failure) else walk)
    tv = tv_distance(exact_walk_distribution(graph, 0, 4), walks)

    assert tv.estimate <= delta + tv.radius


@pytest.mark.slow
@pytest.mark.filterwarnings('ignore::UserWarning')
@pytest.mark.parametrize('L', [64, 256, 1024])
def test_two_pass_uses_less_space_than_folklore(L: int) -> None:
    stream = from_graph(gen_star(101))
    report = run_pipeline(stream, 0, TwoPassConfig(L=L, delta=0.1, c1=1)).report
    folklore_words = folklore_preprocess(stream, L=L).stored_words
    config = TwoPassConfig(L=L, delta=0.1, c1=1)

    assert report.pass1_peak_words == config.gamma * config.ell * 101
    assert report.pass2_peak_words <= 100 + 100 * config.gamma * config.ell
    assert report.peak_words < folklore_words == 101 * L
