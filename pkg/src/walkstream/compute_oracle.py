"""Computes exact reference quantities of a small graph: revisit probabilities, classes and walk distribution."""
import math
from pathlib import Path
from typing import Literal

from walkstream.constants import DEFAULT_VISIT_CAP, DEFAULT_WALK_BUDGET
from walkstream.experiment import ExperimentSpec, resolve_source, write_report
from walkstream.walk_oracle import (
    classify_exact,
    exact_walk_distribution,
    heavy_out_degree_bound,
    revisit_probabilities
)


def compute_oracle(
        steps: int,
        graph: Path | None = None,
        gen: Literal['star', 'cycle', 'complete', 'random', 'hard', 'gadget'] | None = None,
        start: int | None = None,
        ell: int | None = None,
        budget: int = DEFAULT_WALK_BUDGET,
        cap: int = DEFAULT_VISIT_CAP,
        seed: int = 0,
        out: Path | None = None,
        n: int = 5,
        p: int = 1,
        degree: int = 2,
        tau: int = 2,
        bits: str | None = None
) -> None:
    """Computes exact reference quantities of a small graph: revisit probabilities, classes and walk distribution.

    :param steps: Walk length L of the exact distribution.
    :param graph: Path to an edge-list or turnstile file.
    :param gen: Name of a graph generator (used instead of graph).
    :param start: Start vertex (defaults to the source's start vertex).
    :param ell: Revisit horizon (defaults to ceil(sqrt(steps))).
    :param budget: Largest number of walks that may be enumerated.
    :param cap: Largest revisit horizon.
    :param seed: Random seed of the generator.
    :param out: Path to a JSON file where the oracle report is saved.
    :param n: Generator parameter: number of vertices (layer size for the hard instance).
    :param p: Generator parameter: pass parameter of the hard instance.
    :param degree: Generator parameter: out-degree.
    :param tau: Generator parameter: gadget side length.
    :param bits: Generator parameter: gadget bit string.
    """
    # Load graph
    source = resolve_source(graph=graph, gen=gen, n=n, p=p, degree=degree, tau=tau, bits=bits, seed=seed)
    start = source.start if start is None else start
    ell = math.isqrt(max(steps, 1) - 1) + 1 if ell is None else ell
    spec = ExperimentSpec(command='oracle', start=start, steps=steps, seed=seed, source=source.sidecar)
    print(f'Number of vertices = {source.graph.n:,}')
    print(f'Number of edges = {source.graph.num_edges:,}')

    report = {'config': {**spec.to_dict(), 'ell': ell}, 'revisit': None}

    # Revisit probabilities are defined only when no vertex is a dead end
    if not source.graph.dead_ends:
        classes = classify_exact(source.graph, ell, cap=cap)
        total, bound = heavy_out_degree_bound(source.graph, ell)
        report['revisit'] = {
            'probabilities': revisit_probabilities(source.graph, ell, cap=cap).tolist(),
            'classes': classes,
            'heavy_out_degree': total,
            'heavy_out_degree_bound': bound
        }
        print(f'Exact heavy vertices = {sum(vertex_class != "light" for vertex_class in classes):,}')
        print(f'Heavy out-degree = {total:,} (bound {bound:,})')
    else:
        print(f'Skipping revisit probabilities: {len(source.graph.dead_ends):,} dead ends')

    # Enumerate walks
    distribution = exact_walk_distribution(source.graph, start, steps, budget=budget)
    report['distribution'] = distribution.to_dict()
    print(f'Number of walks = {len(distribution.probabilities):,}')

    if out is not None:
        write_report(report, save_path=out)
