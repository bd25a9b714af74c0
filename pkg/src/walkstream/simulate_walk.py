"""Samples one random walk with a streaming sampler and reports the walk and its space usage."""
from pathlib import Path
from typing import Literal

from walkstream.constants import DEFAULT_C1, DEFAULT_C2
from walkstream.errors import WalkFailure
from walkstream.experiment import ExperimentSpec, get_sampler, resolve_source, walk_to_text, write_report


def simulate_walk(
        steps: int,
        graph: Path | None = None,
        gen: Literal['star', 'cycle', 'complete', 'random', 'hard', 'gadget'] | None = None,
        algo: Literal['folklore', 'two-pass', 'turnstile'] = 'two-pass',
        start: int | None = None,
        delta: float = 0.1,
        c1: float = DEFAULT_C1,
        c2: int = DEFAULT_C2,
        seed: int = 0,
        out: Path | None = None,
        n: int = 5,
        p: int = 1,
        degree: int = 2,
        tau: int = 2,
        bits: str | None = None
) -> None:
    """Samples one random walk with a streaming sampler and reports the walk and its space usage.

    :param steps: Walk length L.
    :param graph: Path to an edge-list or turnstile file.
    :param gen: Name of a graph generator (used instead of graph).
    :param algo: Sampler to run.
    :param start: Start vertex (defaults to the source's start vertex).
    :param delta: Target total variation error of the two-pass samplers.
    :param c1: Constant of the number of first-pass trials.
    :param c2: Cap constant.
    :param seed: Random seed.
    :param out: Path to a JSON file where the walk and the space report are saved.
    :param n: Generator parameter: number of vertices (layer size for the hard instance).
    :param p: Generator parameter: pass parameter of the hard instance.
    :param degree: Generator parameter: out-degree.
    :param tau: Generator parameter: gadget side length.
    :param bits: Generator parameter: gadget bit string.
    """
    # Load graph
    source = resolve_source(graph=graph, gen=gen, n=n, p=p, degree=degree, tau=tau, bits=bits, seed=seed)
    start = source.start if start is None else start
    spec = ExperimentSpec(
        command='sample', algo=algo, start=start, steps=steps, delta=delta, c1=c1, c2=c2, seed=seed,
        source=source.sidecar
    )
    print(f'Number of vertices = {source.graph.n:,}')
    print(f'Number of edges = {source.graph.num_edges:,}')

    # Sample walk
    run = get_sampler(algo)(source.stream, start, steps, delta, c1, c2, seed)
    print(f'Passes = {run.report.pass_count}')
    print(f'Peak words = {run.report.peak_words:,}')

    if run.estimate is not None:
        print(f'Estimated heavy vertices = {len(run.estimate.heavy):,}')

        if run.estimate.dead_end_walks > 0:
            print(f'First-pass trial walks that hit a dead end = {run.estimate.dead_end_walks:,}')

    report = {
        'config': spec.to_dict(),
        'space': run.report.to_dict(),
        'estimate': None if run.estimate is None else run.estimate.to_dict(),
        'walk': None if run.failed else walk_to_text(run.walk),
        'failure': {'vertex': run.walk.vertex, 'step': run.walk.step} if run.failed else None
    }

    if out is not None:
        write_report(report, save_path=out)

    if run.failed:
        raise WalkFailure(vertex=run.walk.vertex, step=run.walk.step)

    print(walk_to_text(run.walk))
