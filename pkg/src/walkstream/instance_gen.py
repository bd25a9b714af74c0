"""Graph generators: stars, cycles, complete and random graphs, the layered hard instances and the
string-encoding gadgets with their walk-to-string recovery map."""
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from walkstream.constants import Walk
from walkstream.graph_stream import DirectedGraph, EdgeStream, from_graph, write_edge_list, write_turnstile
from walkstream.seeding import derive_rng
from walkstream.walk_oracle import random_walks


def gen_star(n: int) -> DirectedGraph:
    """A star with center 0 joined to every leaf 1, ..., n - 1 by edges in both directions."""
    if n < 2:
        raise ValueError(f'A star needs at least 2 vertices but got {n}.')

    edges = [edge for leaf in range(1, n) for edge in ((0, leaf), (leaf, 0))]

    return DirectedGraph(n=n, edges=tuple(edges))


def gen_cycle(n: int) -> DirectedGraph:
    """The directed cycle 0 -> 1 -> ... -> n - 1 -> 0 (a self-loop when n = 1)."""
    if n < 1:
        raise ValueError(f'A cycle needs at least 1 vertex but got {n}.')

    return DirectedGraph(n=n, edges=tuple((vertex, (vertex + 1) % n) for vertex in range(n)))


def gen_complete(n: int, self_loops: bool = False) -> DirectedGraph:
    """The complete directed graph on n vertices."""
    if n < 1:
        raise ValueError(f'A complete graph needs at least 1 vertex but got {n}.')

    edges = [(u, v) for u in range(n) for v in range(n) if self_loops or u != v]

    return DirectedGraph(n=n, edges=tuple(edges))


def gen_random_graph(n: int, degree: int, seed: int = 0) -> DirectedGraph:
    """A random graph in which every vertex picks a uniform set of `degree` out-neighbors (self included).

    :param n: Number of vertices.
    :param degree: Out-degree of every vertex.
    :param seed: Seed.
    :return: The graph.
    """
    if not 0 <= degree <= n:
        raise ValueError(f'Out-degree must be in [0, {n}] but got {degree}.')

    rng = derive_rng(seed, 'random-graph')
    edges = [
        (vertex, int(neighbor))
        for vertex in range(n)
        for neighbor in np.sort(rng.choice(n, size=degree, replace=False))
    ]

    return DirectedGraph(n=n, edges=tuple(edges))


def gen_small_corpus(max_n: int = 5, num_random: int = 20, seed: int = 0) -> list[DirectedGraph]:
    """Small graphs without dead ends for exhaustive checks against the exact oracles.

    :param max_n: Largest number of vertices.
    :param num_random: Number of seeded random graphs.
    :param seed: Seed of the random graphs.
    :return: Every cycle, star and complete graph (with and without self-loops) on at most max_n vertices,
             followed by random graphs with uniform sizes and out-degrees.
    """
    graphs = [gen_cycle(n) for n in range(1, max_n + 1)]
    graphs += [gen_star(n) for n in range(2, max_n + 1)]
    graphs += [gen_complete(n, self_loops=self_loops) for n in range(2, max_n + 1) for self_loops in (False, True)]

    rng = derive_rng(seed, 'small-corpus')
    for index in range(num_random):
        n = int(rng.integers(2, max_n + 1))
        graphs.append(gen_random_graph(n, int(rng.integers(1, n + 1)), seed=seed * num_random + index))

    return graphs


@dataclass(frozen=True)
class HardInstanceParams:
    """Parameters of the layered hard instance.

    :param n: Size of every layer after the first.
    :param p: Pass parameter; the instance has p + 2 layers.
    :param degree: Out-degree of every middle-layer vertex.
    :param seed: Seed.
    """
    n: int
    p: int
    degree: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f'Layer size must be at least 1 but got {self.n}.')

        if self.p < 1:
            raise ValueError(f'p must be at least 1 but got {self.p}.')

        if not 1 <= self.degree <= self.n:
            raise ValueError(f'Middle-layer degree must be in [1, {self.n}] but got {self.degree}.')

    @property
    def num_layers(self) -> int:
        return self.p + 2


@dataclass(frozen=True)
class HardInstance:
    graph: DirectedGraph
    stream: EdgeStream
    start: int
    layers: tuple[range, ...]
    params: HardInstanceParams

    def sidecar(self) -> dict:
        return {
            'kind': 'hard',
            'n': self.params.n,
            'p': self.params.p,
            'degree': self.params.degree,
            'seed': self.params.seed,
            'start': self.start,
            'layers': [[layer.start, layer.stop] for layer in self.layers]
        }


def gen_hard_instance(params: HardInstanceParams) -> HardInstance:
    """Generates the layered instance whose walks from s chase pointers through p + 2 layers.

    Layer 1 is the start vertex s = 0 and layer i >= 2 holds vertices 1 + (i - 2) n, ..., (i - 1) n.
    s points to one uniform vertex of layer 2, every middle-layer vertex points to a uniform set of `degree`
    vertices of the next layer, and every last-layer vertex points back to s. The stream lists the edges
    out of the last layer first and the edge out of s last.

    :param params: The instance parameters.
    :return: The HardInstance.
    """
    n, p, degree = params.n, params.p, params.degree
    rng = derive_rng(params.seed, 'hard-instance')
    layers = (range(0, 1),) + tuple(range(1 + (i - 2) * n, 1 + (i - 1) * n) for i in range(2, p + 3))

    # Edges out of layer i, for i = 1..p+2
    layer_edges = [[(0, layers[1][int(rng.integers(n))])]]
    for i in range(1, p + 1):
        layer_edges.append([
            (vertex, layers[i + 1][int(target)])
            for vertex in layers[i]
            for target in np.sort(rng.choice(n, size=degree, replace=False))
        ])
    layer_edges.append([(vertex, 0) for vertex in layers[-1]])

    edges = [edge for edges_out in reversed(layer_edges) for edge in edges_out]
    graph = DirectedGraph(n=1 + (p + 1) * n, edges=tuple(edges))

    return HardInstance(
        graph=graph,
        stream=from_graph(graph, ordering='as_given'),
        start=0,
        layers=layers,
        params=params
    )


def check_hard_instance(instance: HardInstance, num_walks: int = 1_000, seed: int = 0) -> list[str]:
    """Checks the structural facts of a hard instance.

    Out-degree 1 on the first and last layers, `degree` on middle layers, the stream order, and that
    sampled walks from s are back at s at every multiple of p + 2 steps.

    :return: A list of violations (empty when the instance is well formed).
    """
    graph, params, layers = instance.graph, instance.params, instance.layers
    violations = []

    for layer_index, layer in enumerate(layers):
        expected = 1 if layer_index in (0, len(layers) - 1) else params.degree
        for vertex in layer:
            if graph.out_degrees[vertex] != expected:
                violations.append(f'Vertex {vertex} has out-degree {graph.out_degrees[vertex]} instead of {expected}.')

    updates = instance.stream.updates()
    if [u for u, _, _ in updates[:params.n]] != list(layers[-1]):
        violations.append('The stream does not start with the edges out of the last layer.')

    if updates[-1][0] != instance.start:
        violations.append('The stream does not end with the edge out of the start vertex.')

    period = params.num_layers
    walks = random_walks(graph, instance.start, L=3 * period, trials=num_walks, seed=seed)
    if np.any(walks[:, ::period] != instance.start):
        violations.append(f'A walk was away from the start vertex at a multiple of {period} steps.')

    return violations


@dataclass(frozen=True)
class GadgetParams:
    """Parameters of the string-encoding gadget.

    :param tau: Side length; the gadget encodes tau^2 bits.
    :param bits: The string X of length tau^2. Bit (i, j), 1-indexed, is character (i - 1) tau + (j - 1).
    """
    tau: int
    bits: str

    def __post_init__(self) -> None:
        if self.tau < 1:
            raise ValueError(f'tau must be at least 1 but got {self.tau}.')

        if len(self.bits) != self.tau ** 2 or set(self.bits) - {'0', '1'}:
            raise ValueError(f'Expected a bit string of length {self.tau ** 2} but got "{self.bits}".')

    def bit(self, i: int, j: int) -> bool:
        return self.bits[(i - 1) * self.tau + (j - 1)] == '1'

    @property
    def num_vertices(self) -> int:
        return 2 * self.tau + 1


@dataclass(frozen=True)
class Gadget:
    """A gadget graph. Left vertex V_{1,i} has id i - 1, right vertex V_{2,j} has id tau + j - 1."""
    graph: DirectedGraph
    start: int
    params: GadgetParams

    def sidecar(self) -> dict:
        return {'kind': 'gadget', 'tau': self.params.tau, 'bits': self.params.bits, 'start': self.start}


def _gadget_edges(params: GadgetParams, offset: int = 0) -> list[tuple[int, int]]:
    tau = params.tau
    hub = offset + 2 * tau
    edges = []

    for i in range(1, tau + 1):
        left = offset + i - 1
        edges += [(left, hub), (hub, left)]

        for j in range(1, tau + 1):
            right = offset + tau + j - 1
            edges.append((right, left))

            if params.bit(i, j):
                edges.append((left, right))

    return sorted(edges)


def gen_index_gadget(params: GadgetParams) -> Gadget:
    """Builds the gadget H_tau(X).

    Every right vertex V_{2,j} (j <= tau) points to every left vertex, left vertex V_{1,i} points to V_{2,j}
    iff bit (i, j) is set, and every left vertex is joined to the hub V_{2,tau+1} in both directions.
    Walks start at the hub.

    :param params: Side length and bit string.
    :return: The Gadget, with edges in lexicographic order.
    """
    graph = DirectedGraph(n=params.num_vertices, edges=tuple(_gadget_edges(params)))

    return Gadget(graph=graph, start=2 * params.tau, params=params)


@dataclass(frozen=True)
class GadgetUnion:
    """Disjoint gadget copies; copy c occupies the vertex ids offsets[c], ..., offsets[c] + 2 tau_c."""
    graph: DirectedGraph
    starts: tuple[int, ...]
    offsets: tuple[int, ...]
    params: tuple[GadgetParams, ...]

    def sidecar(self) -> dict:
        return {
            'kind': 'gadget_union',
            'copies': [
                {'tau': params.tau, 'bits': params.bits, 'offset': offset, 'start': start}
                for params, offset, start in zip(self.params, self.offsets, self.starts)
            ]
        }


def gen_gadget_union(params_list: list[GadgetParams]) -> GadgetUnion:
    """Places several gadgets side by side as one graph, one copy per encoded string."""
    if not params_list:
        raise ValueError('At least one gadget is needed.')

    offsets = np.concatenate([[0], np.cumsum([params.num_vertices for params in params_list])]).tolist()
    edges = [edge for params, offset in zip(params_list, offsets) for edge in _gadget_edges(params, offset)]

    return GadgetUnion(
        graph=DirectedGraph(n=offsets[-1], edges=tuple(edges)),
        starts=tuple(offset + 2 * params.tau for params, offset in zip(params_list, offsets)),
        offsets=tuple(offsets[:-1]),
        params=tuple(params_list)
    )


def _recover_bits(walks: np.ndarray, tau: int, offset: int = 0) -> np.ndarray:
    """Marks, per walk, every bit (i, j) whose edge V_{1,i} -> V_{2,j} the walk traverses.

    :param walks: A (trials, L + 1) array of walks.
    :return: A (trials, tau^2) boolean array.
    """
    sources, targets = walks[:, :-1] - offset, walks[:, 1:] - offset
    crossing = (sources >= 0) & (sources < tau) & (targets >= tau) & (targets < 2 * tau)
    rows, steps = np.nonzero(crossing)

    bits = np.zeros((walks.shape[0], tau * tau), dtype=bool)
    bits[rows, sources[rows, steps] * tau + targets[rows, steps] - tau] = True

    return bits


def recover_string(walk: Walk, params: GadgetParams, offset: int = 0) -> str:
    """Recovers X from a walk: bit (i, j) is 1 iff the walk passes the edge V_{1,i} -> V_{2,j}.

    :param walk: A walk in the gadget (or in the copy at `offset` of a gadget union).
    :param params: The gadget's parameters.
    :param offset: First vertex id of the gadget copy.
    :return: The recovered bit string.
    """
    walks = np.asarray(walk, dtype=np.int64)[None, :]
    if walks.shape[1] < 2:
        return '0' * params.tau ** 2

    return ''.join('1' if bit else '0' for bit in _recover_bits(walks, params.tau, offset)[0])


def gadget_walk_length(tau: int, error: float = 0.01) -> int:
    """A walk length after which a walk from the hub recovers every set bit except with probability error."""
    if not 0 < error < 1:
        raise ValueError(f'Error must be in (0, 1) but got {error}.')

    return math.ceil(8 * tau ** 2 * math.log(tau ** 2 / error))


def recovery_rate(params: GadgetParams, L: int | None = None, trials: int = 1_000, seed: int = 0) -> float:
    """Fraction of exact random walks from the hub whose recovered string equals X.

    :param params: The gadget's parameters.
    :param L: Walk length (default gadget_walk_length(tau)).
    :param trials: Number of walks.
    :param seed: Seed.
    :return: The recovery rate.
    """
    if L is None:
        L = gadget_walk_length(params.tau)

    gadget = gen_index_gadget(params)
    walks = random_walks(gadget.graph, gadget.start, L=L, trials=trials, seed=seed)
    target = np.array([bit == '1' for bit in params.bits])

    return float(np.mean(np.all(_recover_bits(walks, params.tau) == target, axis=1)))


def random_bits(tau: int, seed: int = 0) -> str:
    """A uniformly random bit string of length tau^2."""
    return ''.join(map(str, derive_rng(seed, 'gadget-bits').integers(0, 2, size=tau * tau)))


def write_instance(graph: DirectedGraph | EdgeStream, sidecar: dict, save_path: Path) -> None:
    """Writes an instance as an edge list (or turnstile file) plus a JSON sidecar next to it (same name, .json suffix).

    :param graph: The graph or stream (its order is kept).
    :param sidecar: Instance metadata such as layers and the start vertex.
    :param save_path: Path of the edge-list file.
    """
    if save_path.suffix == '.json':
        raise ValueError('The instance path must not end in .json since that suffix is used by the sidecar.')

    if isinstance(graph, EdgeStream) and graph.turnstile:
        write_turnstile(graph, save_path=save_path)
    else:
        write_edge_list(graph, save_path=save_path)

    save_path.with_suffix('.json').write_text(json.dumps(sidecar, sort_keys=True, indent=2) + '\n')
