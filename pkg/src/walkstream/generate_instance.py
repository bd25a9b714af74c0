"""Generates a graph instance and saves it as an edge list (or turnstile file) with a JSON sidecar."""
from pathlib import Path
from typing import Literal

from walkstream.experiment import get_available_generators, resolve_source
from walkstream.graph_stream import to_turnstile
from walkstream.instance_gen import write_instance


def generate_instance(
        gen: Literal['star', 'cycle', 'complete', 'random', 'hard', 'gadget'],
        out: Path,
        n: int = 5,
        p: int = 1,
        degree: int = 2,
        tau: int = 2,
        bits: str | None = None,
        seed: int = 0,
        turnstile: bool = False,
        churn: float = 0.5
) -> None:
    """Generates a graph instance and saves it as an edge list (or turnstile file) with a JSON sidecar.

    :param gen: Name of the generator.
    :param out: Path to the edge-list file. The sidecar is written next to it with a .json suffix.
    :param n: Number of vertices (layer size for the hard instance).
    :param p: Pass parameter of the hard instance.
    :param degree: Out-degree of random graphs and of the hard instance's middle layers.
    :param tau: Side length of the gadget.
    :param bits: Bit string of the gadget (random if None).
    :param seed: Random seed.
    :param turnstile: Whether to write a turnstile stream with insert/delete churn instead of an edge list.
    :param churn: Fraction of edges that are inserted and deleted once before their final insertion.
    """
    print(f'Generating "{gen}" instance (available: {", ".join(get_available_generators())})')
    source = resolve_source(gen=gen, n=n, p=p, degree=degree, tau=tau, bits=bits, seed=seed)
    print(f'Number of vertices = {source.graph.n:,}')
    print(f'Number of edges = {source.graph.num_edges:,}')

    stream = to_turnstile(source.graph, churn=churn, seed=seed) if turnstile else source.stream
    print(f'Stream length = {len(stream):,}')

    print('Saving instance')
    write_instance(stream, sidecar=source.sidecar, save_path=out)
