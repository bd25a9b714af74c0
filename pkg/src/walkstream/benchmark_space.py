"""Benchmarks peak space, passes and accuracy of the samplers over a sweep of walk lengths."""
import time
from pathlib import Path
from typing import Literal

import pandas as pd
from tqdm import tqdm

from walkstream.constants import DEFAULT_C1, DEFAULT_C2, DEFAULT_WALK_BUDGET
from walkstream.errors import BudgetExceeded
from walkstream.experiment import (
    TWO_PASS_SAMPLERS,
    ExperimentSpec,
    ReportFormat,
    resolve_source,
    run_trials,
    write_report
)
from walkstream.seeding import derive_seed
from walkstream.walk_oracle import exact_walk_distribution, random_walks, tv_distance


def benchmark_space(
        steps: list[int],
        graph: Path | None = None,
        gen: Literal['star', 'cycle', 'complete', 'random', 'hard', 'gadget'] | None = None,
        algo: list[Literal['folklore', 'two-pass', 'turnstile']] | None = None,
        start: int | None = None,
        delta: float = 0.1,
        c1: float = DEFAULT_C1,
        c2: int = DEFAULT_C2,
        trials: int = 0,
        seed: int = 0,
        out: Path | None = None,
        format: ReportFormat = 'csv',
        budget: int = DEFAULT_WALK_BUDGET,
        timing: bool = False,
        num_workers: int = 1,
        n: int = 5,
        p: int = 1,
        degree: int = 2,
        tau: int = 2,
        bits: str | None = None
) -> None:
    """Benchmarks peak space, passes and accuracy of the samplers over a sweep of walk lengths.

    :param steps: Walk lengths L to sweep.
    :param graph: Path to an edge-list or turnstile file.
    :param gen: Name of a graph generator (used instead of graph).
    :param algo: Samplers to benchmark (default: folklore and two-pass).
    :param start: Start vertex (defaults to the source's start vertex).
    :param delta: Target total variation error of the two-pass samplers.
    :param c1: Constant of the number of first-pass trials.
    :param c2: Cap constant.
    :param trials: Number of walks per row for the empirical TV and failure rate (0 runs once, without TV).
    :param seed: Random seed.
    :param out: Path to the report file.
    :param format: Report format.
    :param budget: Largest number of walks the exact oracle may enumerate; beyond it TV is paired against
                   independent exact random walks.
    :param timing: Whether to record wall time per row (off keeps reports byte-identical across runs).
    :param num_workers: Number of worker processes for the trials.
    :param n: Generator parameter: number of vertices (layer size for the hard instance).
    :param p: Generator parameter: pass parameter of the hard instance.
    :param degree: Generator parameter: out-degree.
    :param tau: Generator parameter: gadget side length.
    :param bits: Generator parameter: gadget bit string.
    """
    if not steps:
        raise ValueError('At least one walk length must be given.')

    if trials < 0:
        raise ValueError(f'Number of trials must be non-negative but got {trials}.')

    algo = ['folklore', 'two-pass'] if algo is None else algo

    # Load graph
    source = resolve_source(graph=graph, gen=gen, n=n, p=p, degree=degree, tau=tau, bits=bits, seed=seed)
    start = source.start if start is None else start
    spec = ExperimentSpec(
        command='bench', algo=','.join(algo), start=start, steps=list(steps), delta=delta, c1=c1, c2=c2,
        trials=trials, seed=seed, source=source.sidecar
    )
    print(f'Number of vertices = {source.graph.n:,}')
    print(f'Number of edges = {source.graph.num_edges:,}')

    rows = []
    for L in tqdm(steps, desc='L'):
        # Reference for the empirical TV
        reference = None
        if trials > 0:
            try:
                reference = exact_walk_distribution(source.graph, start, L, budget=budget)
            except BudgetExceeded:
                reference = [
                    tuple(walk)
                    for walk in random_walks(source.graph, start, L, trials, seed=derive_seed(seed, 'reference', L))
                ]

        for name in algo:
            derived = spec.derived_parameters(L) if name in TWO_PASS_SAMPLERS else {'gamma': None, 'ell': None}
            start_time = time.perf_counter()
            runs = run_trials(
                name, source.stream, start, L, delta, c1, c2,
                trials=max(trials, 1), seed=derive_seed(seed, L), num_workers=num_workers
            )
            wall_time = time.perf_counter() - start_time

            walks = [run.walk for run in runs if not run.failed]
            tv = tv_distance(reference, walks) if reference is not None and walks else None

            rows.append({
                'algorithm': name,
                'n': source.graph.n,
                'L': L,
                'delta': None if name == 'folklore' else delta,
                **derived,
                'peak_words': max(run.report.peak_words for run in runs),
                'pass_count': max(run.report.pass_count for run in runs),
                'empirical_tv': None if tv is None else tv.estimate,
                'failure_rate': 1 - len(walks) / len(runs),
                'wall_time': wall_time if timing else None
            })

    print(pd.DataFrame(rows).to_string(index=False))

    if out is not None:
        report = rows if format == 'csv' else {'config': spec.to_dict(), 'rows': rows}
        write_report(report, save_path=out, format=format)
