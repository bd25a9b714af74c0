"""Verifies a streaming sampler against the exact walk distribution and the exact heavy/light classes."""
from pathlib import Path
from typing import Literal

import numpy as np

from walkstream.constants import DEFAULT_C1, DEFAULT_C2, DEFAULT_WALK_BUDGET
from walkstream.experiment import ExperimentSpec, resolve_source, run_trials, write_report
from walkstream.two_pass_sampler import TwoPassConfig, classification_sound
from walkstream.walk_oracle import classify_exact, exact_walk_distribution, tv_distance


def verify_sampler(
        steps: int,
        trials: int,
        graph: Path | None = None,
        gen: Literal['star', 'cycle', 'complete', 'random', 'hard', 'gadget'] | None = None,
        algo: Literal['folklore', 'two-pass', 'turnstile'] = 'two-pass',
        start: int | None = None,
        delta: float = 0.1,
        c1: float = DEFAULT_C1,
        c2: int = DEFAULT_C2,
        seed: int = 0,
        out: Path | None = None,
        budget: int = DEFAULT_WALK_BUDGET,
        num_workers: int = 1,
        n: int = 5,
        p: int = 1,
        degree: int = 2,
        tau: int = 2,
        bits: str | None = None
) -> None:
    """Verifies a streaming sampler against the exact walk distribution and the exact heavy/light classes.

    :param steps: Walk length L.
    :param trials: Number of sampler invocations.
    :param graph: Path to an edge-list or turnstile file.
    :param gen: Name of a graph generator (used instead of graph).
    :param algo: Sampler to verify.
    :param start: Start vertex (defaults to the source's start vertex).
    :param delta: Target total variation error of the two-pass samplers.
    :param c1: Constant of the number of first-pass trials.
    :param c2: Cap constant.
    :param seed: Random seed.
    :param out: Path to a JSON file where the verification report is saved.
    :param budget: Largest number of walks the exact oracle may enumerate.
    :param num_workers: Number of worker processes for the trials.
    :param n: Generator parameter: number of vertices (layer size for the hard instance).
    :param p: Generator parameter: pass parameter of the hard instance.
    :param degree: Generator parameter: out-degree.
    :param tau: Generator parameter: gadget side length.
    :param bits: Generator parameter: gadget bit string.
    """
    if trials < 1:
        raise ValueError(f'Number of trials must be at least 1 but got {trials}.')

    # Load graph
    source = resolve_source(graph=graph, gen=gen, n=n, p=p, degree=degree, tau=tau, bits=bits, seed=seed)
    start = source.start if start is None else start
    spec = ExperimentSpec(
        command='verify', algo=algo, start=start, steps=steps, delta=delta, c1=c1, c2=c2, trials=trials,
        seed=seed, source=source.sidecar
    )
    print(f'Number of vertices = {source.graph.n:,}')

    # Compute exact distribution
    exact = exact_walk_distribution(source.graph, start, steps, budget=budget)
    print(f'Exact support size = {len(exact.probabilities):,}')

    # Run sampler
    runs = run_trials(
        algo, source.stream, start, steps, delta, c1, c2, trials=trials, seed=seed, num_workers=num_workers
    )
    walks = [run.walk for run in runs if not run.failed]
    failure_rate = 1 - len(walks) / trials
    print(f'Failure rate = {failure_rate:.4f}')

    tolerance = 0.0 if algo == 'folklore' else delta
    tv = tv_distance(exact, walks) if walks else None
    if tv is not None:
        print(f'TV estimate = {tv.estimate:.4f} (radius {tv.radius:.4f}, tolerance {tolerance})')

    report = {
        'config': spec.to_dict(),
        'failure_rate': failure_rate,
        'tv': None if tv is None else tv.to_dict(),
        'tv_tolerance': tolerance,
        'passed': tv is not None and tv.estimate <= tolerance + tv.radius,
        'pass_counts': sorted({run.report.pass_count for run in runs}),
        'peak_words': max(run.report.peak_words for run in runs),
        'classification': None
    }

    # Compare heavy/light estimates with the exact classes
    if algo != 'folklore' and not source.graph.dead_ends:
        ell = TwoPassConfig(L=steps, delta=delta, c1=c1, c2=c2, seed=seed).ell
        classes = classify_exact(source.graph, ell)
        estimated_heavy = np.array([
            [vertex in run.estimate.heavy for vertex in range(source.graph.n)]
            for run in runs
        ])
        exact_heavy = np.array([vertex_class in ('heavy', 'both') for vertex_class in classes])
        exact_light = np.array([vertex_class in ('light', 'both') for vertex_class in classes])
        agreement = np.where(estimated_heavy, exact_heavy, exact_light).mean(axis=0)

        report['classification'] = {
            'ell': ell,
            'sound_rate': float(np.mean([classification_sound(run.estimate, classes) for run in runs])),
            'vertices': [
                {
                    'vertex': vertex,
                    'exact': classes[vertex],
                    'estimated_heavy_rate': float(estimated_heavy[:, vertex].mean()),
                    'agreement': float(agreement[vertex])
                }
                for vertex in range(source.graph.n)
            ]
        }
        print(f'Classification sound in {report["classification"]["sound_rate"]:.2%} of trials')

    if out is not None:
        write_report(report, save_path=out)
