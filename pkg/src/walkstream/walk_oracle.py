"""Exact reference computations on small graphs: visit probabilities, walk distributions, heavy/light classes."""
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal

import numpy as np
from scipy import sparse

from walkstream.constants import (
    DEFAULT_VISIT_CAP,
    DEFAULT_WALK_BUDGET,
    HEAVY_THRESHOLD,
    LIGHT_THRESHOLD,
    MONTE_CARLO_CHUNK_SIZE,
    Walk
)
from walkstream.errors import BudgetExceeded, CapExceeded, DeadEnd
from walkstream.graph_stream import DirectedGraph
from walkstream.seeding import derive_rng

VertexClass = Literal['heavy', 'light', 'both']
CLASS_TOLERANCE = 1e-12


def transition_matrix(graph: DirectedGraph) -> sparse.csr_matrix:
    """Builds the sparse transition matrix P with P[u, v] = 1 / d_out(u) for every edge (u, v).

    Rows of dead ends are all zero.
    """
    if graph.num_edges == 0:
        return sparse.csr_matrix((graph.n, graph.n), dtype=np.float64)

    rows, cols = np.array(graph.edges, dtype=np.int64).T
    weights = 1.0 / graph.out_degrees[rows]

    return sparse.csr_matrix((weights, (rows, cols)), shape=(graph.n, graph.n))


def _check_no_dead_end(graph: DirectedGraph, u_start: int, steps: int) -> None:
    """Raises DeadEnd if a walk from u_start can sit on a dead end at any of positions 0..steps - 1."""
    out_degrees = graph.out_degrees
    frontier = {u_start}
    visited = set()

    for _ in range(steps):
        for vertex in frontier:
            if out_degrees[vertex] == 0:
                raise DeadEnd(vertex, f'Dead end {vertex} is reachable from {u_start} within {steps} steps.')

        visited |= frontier
        frontier = {
            neighbor
            for vertex in frontier
            for neighbor in graph.out_neighbors[vertex]
        } - visited

        if not frontier:
            break


def _check_vertex(graph: DirectedGraph, vertex: int) -> None:
    if not 0 <= vertex < graph.n:
        raise ValueError(f'Vertex {vertex} is outside [0, {graph.n}).')


def _check_window(a: int, b: int, cap: int) -> None:
    if not 0 <= a <= b:
        raise ValueError(f'Step window must satisfy 0 <= a <= b but got a = {a}, b = {b}.')

    if b > cap:
        raise CapExceeded(f'Step {b} exceeds the configured cap of {cap:,}.')


def visit_prob(
        graph: DirectedGraph,
        u: int,
        v: int,
        a: int,
        b: int,
        cap: int = DEFAULT_VISIT_CAP
) -> float:
    """Computes visit_[a,b](u, v): the probability that a b-step walk from u has v at some position in [a, b].

    Uses a forward dynamic program over step-indexed probability vectors in which v absorbs from step a on.

    :param graph: The graph.
    :param u: Start vertex.
    :param v: Target vertex.
    :param a: First position that counts as a visit.
    :param b: Last position that counts as a visit (the walk length).
    :param cap: Largest allowed b.
    :return: The visit probability.
    """
    _check_vertex(graph, u)
    _check_vertex(graph, v)
    _check_window(a, b, cap)
    _check_no_dead_end(graph, u, b)

    if a == 0 and u == v:
        return 1.0

    transition_transpose = transition_matrix(graph).T.tocsr()
    distribution = np.zeros(graph.n)
    distribution[u] = 1.0
    hit = 0.0

    for step in range(1, b + 1):
        distribution = transition_transpose @ distribution

        if step >= a:
            hit += distribution[v]
            distribution[v] = 0.0

    return float(hit)


def visit_prob_matrix(graph: DirectedGraph, a: int, b: int, cap: int = DEFAULT_VISIT_CAP) -> np.ndarray:
    """Computes visit_[a,b](u, v) for every pair by a backward dynamic program over all targets at once.

    :return: An (n, n) array whose (u, v) entry is visit_[a,b](u, v).
    """
    _check_window(a, b, cap)

    if b > 0 and graph.dead_ends:
        raise DeadEnd(graph.dead_ends[0])

    transition = transition_matrix(graph)
    identity = np.eye(graph.n, dtype=bool)

    # Column v holds, for every vertex x at position t, the probability of a visit to v in [max(a, t), b]
    hits = identity.astype(np.float64) if b >= a else np.zeros((graph.n, graph.n))
    for step in range(b - 1, -1, -1):
        hits = transition @ hits

        if step >= a:
            hits[identity] = 1.0

    return np.asarray(hits)


def revisit_probabilities(graph: DirectedGraph, ell: int, cap: int = DEFAULT_VISIT_CAP) -> np.ndarray:
    """Computes visit_[1,ell](u, u) for every vertex u (the probability of returning within ell steps).

    :return: A 1D array of length n.
    """
    _check_window(1, ell, cap)

    if graph.dead_ends:
        raise DeadEnd(graph.dead_ends[0])

    transition_transpose = transition_matrix(graph).T.tocsr()

    # Column u is the distribution of a walk from u that has not yet returned to u
    distributions = np.eye(graph.n)
    diagonal = np.arange(graph.n)
    returned = np.zeros(graph.n)

    for _ in range(ell):
        distributions = transition_transpose @ distributions
        returned += distributions[diagonal, diagonal]
        distributions[diagonal, diagonal] = 0.0

    return returned


def classify_exact(graph: DirectedGraph, ell: int, cap: int = DEFAULT_VISIT_CAP) -> list[VertexClass]:
    """Classifies every vertex as heavy, light or both from its exact revisit probability within ell steps.

    Heavy means revisit probability >= 1/3, light means <= 2/3, and both means it lies in [1/3, 2/3].

    :return: A list with one class per vertex.
    """
    classes = []
    for probability in revisit_probabilities(graph, ell, cap):
        heavy = probability >= HEAVY_THRESHOLD - CLASS_TOLERANCE
        light = probability <= LIGHT_THRESHOLD + CLASS_TOLERANCE

        if heavy and light:
            classes.append('both')
        elif heavy:
            classes.append('heavy')
        else:
            classes.append('light')

    return classes


def exact_heavy_vertices(classes: list[VertexClass]) -> set[int]:
    """Vertices that are heavy (including those that are both heavy and light)."""
    return {vertex for vertex, vertex_class in enumerate(classes) if vertex_class in ('heavy', 'both')}


def exact_light_vertices(classes: list[VertexClass]) -> set[int]:
    """Vertices that are light (including those that are both heavy and light)."""
    return {vertex for vertex, vertex_class in enumerate(classes) if vertex_class in ('light', 'both')}


def heavy_out_degree_bound(graph: DirectedGraph, ell: int) -> tuple[int, int]:
    """Computes the total out-degree of exactly-heavy vertices and its structural bound 6 * n * (ell + 1).

    :return: A tuple (total heavy out-degree, bound).
    """
    heavy = exact_heavy_vertices(classify_exact(graph, ell))
    total = int(sum(graph.out_degrees[vertex] for vertex in heavy))

    return total, 6 * graph.n * (ell + 1)


@dataclass(frozen=True)
class WalkDistribution:
    """The exact distribution of length-L walks from a start vertex."""
    start: int
    length: int
    probabilities: dict[Walk, float]

    @property
    def total_mass(self) -> float:
        return float(sum(self.probabilities.values()))

    def to_dict(self) -> dict:
        return {
            'start': self.start,
            'length': self.length,
            'total_mass': self.total_mass,
            'probabilities': {
                ' '.join(map(str, walk)): probability
                for walk, probability in sorted(self.probabilities.items())
            }
        }


def count_walks(graph: DirectedGraph, u_start: int, L: int) -> int:
    """Counts the length-L walks from u_start (a walk stops early only at a dead end)."""
    adjacency_transpose = sparse.csr_matrix(
        (np.ones(graph.num_edges), tuple(np.array(graph.edges, dtype=np.int64).T[::-1])),
        shape=(graph.n, graph.n)
    ) if graph.num_edges > 0 else sparse.csr_matrix((graph.n, graph.n))

    counts = np.zeros(graph.n)
    counts[u_start] = 1.0
    for _ in range(L):
        counts = adjacency_transpose @ counts

    return int(round(counts.sum()))


def exact_walk_distribution(
        graph: DirectedGraph,
        u_start: int,
        L: int,
        budget: int = DEFAULT_WALK_BUDGET
) -> WalkDistribution:
    """Enumerates every length-L walk from u_start with its exact probability.

    :param graph: The graph.
    :param u_start: The start vertex.
    :param L: Number of steps.
    :param budget: Largest number of walks that may be enumerated.
    :return: The exact WalkDistribution.
    """
    _check_vertex(graph, u_start)

    if L < 0:
        raise ValueError(f'Walk length must be non-negative but got {L}.')

    _check_no_dead_end(graph, u_start, L)

    num_walks = count_walks(graph, u_start, L)
    if num_walks > budget:
        raise BudgetExceeded(f'Enumerating {num_walks:,} walks exceeds the budget of {budget:,}.')

    probabilities = {(u_start,): 1.0}
    for _ in range(L):
        probabilities = {
            walk + (neighbor,): probability / len(graph.out_neighbors[walk[-1]])
            for walk, probability in probabilities.items()
            for neighbor in graph.out_neighbors[walk[-1]]
        }

    return WalkDistribution(start=u_start, length=L, probabilities=probabilities)


def marginalize_last_step(distribution: WalkDistribution) -> WalkDistribution:
    """Sums out the last vertex of every walk, giving the distribution of one fewer step."""
    if distribution.length == 0:
        raise ValueError('Cannot marginalize a distribution of length-0 walks.')

    probabilities: dict[Walk, float] = {}
    for walk, probability in distribution.probabilities.items():
        probabilities[walk[:-1]] = probabilities.get(walk[:-1], 0.0) + probability

    return WalkDistribution(start=distribution.start, length=distribution.length - 1, probabilities=probabilities)


def empirical_distribution(samples: Iterable[Walk]) -> dict[Walk, float]:
    """Converts a multiset of walks to empirical frequencies."""
    counts = Counter(tuple(walk) for walk in samples)
    total = sum(counts.values())

    return {walk: count / total for walk, count in counts.items()}


@dataclass(frozen=True)
class TVEstimate:
    """A plug-in total variation estimate with the confidence radius reported alongside it.

    paired is True when the reference was itself an empirical sample rather than an exact distribution.
    """
    estimate: float
    radius: float
    num_samples: int
    support_size: int
    paired: bool = False

    def to_dict(self) -> dict:
        return {
            'estimate': self.estimate,
            'radius': self.radius,
            'num_samples': self.num_samples,
            'support_size': self.support_size,
            'paired': self.paired
        }


def tv_distance(reference: WalkDistribution | Iterable[Walk], samples: Iterable[Walk]) -> TVEstimate:
    """Estimates the total variation distance between a reference and an empirical sample of walks.

    :param reference: The exact distribution, or an independent reference sample when exact enumeration
                      is infeasible (the estimate is then flagged as paired).
    :param samples: The sampler's walks.
    :return: The plug-in estimate 1/2 * sum |p(w) - q(w)| over the union support, with radius
             sqrt(|support| / (2 N)) per empirical side.
    """
    samples = [tuple(walk) for walk in samples]
    if not samples:
        raise ValueError('Cannot estimate total variation distance from an empty sample.')

    sample_frequencies = empirical_distribution(samples)

    if isinstance(reference, WalkDistribution):
        paired = False
        reference_frequencies = reference.probabilities
        reference_size = None
    else:
        paired = True
        reference = [tuple(walk) for walk in reference]
        if not reference:
            raise ValueError('Cannot estimate total variation distance from an empty reference sample.')
        reference_frequencies = empirical_distribution(reference)
        reference_size = len(reference)

    support = set(reference_frequencies) | set(sample_frequencies)
    estimate = 0.5 * sum(
        abs(reference_frequencies.get(walk, 0.0) - sample_frequencies.get(walk, 0.0))
        for walk in support
    )

    radius = math.sqrt(len(support) / (2 * len(samples)))
    if reference_size is not None:
        radius += math.sqrt(len(support) / (2 * reference_size))

    return TVEstimate(
        estimate=float(estimate),
        radius=radius,
        num_samples=len(samples),
        support_size=len(support),
        paired=paired
    )


def _csr_neighbors(graph: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Returns (indptr, indices) of the out-neighbor lists."""
    indptr = np.concatenate([[0], np.cumsum(graph.out_degrees)]).astype(np.int64)
    indices = np.array([neighbor for neighbors in graph.out_neighbors for neighbor in neighbors], dtype=np.int64)

    return indptr, indices


def _walk_chunks(
        graph: DirectedGraph,
        u_start: int,
        L: int,
        trials: int,
        seed: int,
        chunk_size: int = MONTE_CARLO_CHUNK_SIZE
) -> Iterator[np.ndarray]:
    """Yields (chunk, L + 1) arrays of exact random walks; chunk c draws from its own derived seed."""
    indptr, indices = _csr_neighbors(graph)
    out_degrees = graph.out_degrees

    for chunk_index, chunk_start in enumerate(range(0, trials, chunk_size)):
        rng = derive_rng(seed, 'random-walks', chunk_index)
        size = min(chunk_size, trials - chunk_start)

        walks = np.empty((size, L + 1), dtype=np.int64)
        walks[:, 0] = u_start
        for step in range(1, L + 1):
            current = walks[:, step - 1]
            offsets = (rng.random(size) * out_degrees[current]).astype(np.int64)
            walks[:, step] = indices[indptr[current] + offsets]

        yield walks


def random_walks(graph: DirectedGraph, u_start: int, L: int, trials: int, seed: int = 0) -> np.ndarray:
    """Simulates independent exact random walks (the reference sampler for Monte-Carlo checks).

    :return: A (trials, L + 1) array whose rows are walks.
    """
    _check_vertex(graph, u_start)
    _check_no_dead_end(graph, u_start, L)

    if trials == 0:
        return np.empty((0, L + 1), dtype=np.int64)

    return np.concatenate(list(_walk_chunks(graph, u_start, L, trials, seed)))


def visit_count_distribution(
        graph: DirectedGraph,
        u_start: int,
        v: int,
        L: int,
        trials: int,
        seed: int = 0
) -> np.ndarray:
    """Monte-Carlo histogram of the number of times an L-step walk from u_start visits v (positions 1..L).

    :return: An array of length L + 1 whose entry k counts the walks with exactly k visits to v.
    """
    _check_vertex(graph, u_start)
    _check_vertex(graph, v)
    _check_no_dead_end(graph, u_start, L)

    histogram = np.zeros(L + 1, dtype=np.int64)
    for walks in _walk_chunks(graph, u_start, L, trials, seed):
        visits = (walks[:, 1:] == v).sum(axis=1)
        histogram += np.bincount(visits, minlength=L + 1)

    return histogram


def histogram_to_dict(histogram: np.ndarray) -> dict[str, int]:
    """Converts a visit histogram to a JSON-friendly dict with only non-zero entries."""
    return {str(visits): int(count) for visits, count in enumerate(histogram) if count > 0}
