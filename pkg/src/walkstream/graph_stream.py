"""Replayable edge streams over directed simple graphs, with insertion-only and turnstile flavors."""
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Literal, Sequence

import numpy as np

from walkstream.constants import Edge
from walkstream.errors import (
    DuplicateEdge,
    InvalidTurnstile,
    OrderingMismatch,
    ParseError,
    PassBudgetExceeded
)
from walkstream.seeding import derive_rng

EdgeUpdate = tuple[int, int, int]
Ordering = Literal['as_given', 'as-given', 'lexicographic', 'shuffle', 'uniform-shuffle'] | Sequence[Edge]
ORDERING_ALIASES = {'as-given': 'as_given', 'uniform-shuffle': 'shuffle'}


@dataclass(frozen=True)
class DirectedGraph:
    """A directed graph without multi-edges on the vertices 0, ..., n - 1. Self-loops are allowed.

    :param n: Number of vertices.
    :param edges: The edges (u, v) in the order they were given.
    """
    n: int
    edges: tuple[Edge, ...] = ()

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f'Number of vertices must be non-negative but got {self.n}.')

        object.__setattr__(self, 'edges', tuple((int(u), int(v)) for u, v in self.edges))

        for u, v in self.edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f'Edge ({u}, {v}) has an endpoint outside [0, {self.n}).')

        if len(self.edge_set) != len(self.edges):
            duplicate = next(edge for edge, count in Counter(self.edges).items() if count > 1)
            raise DuplicateEdge(f'Edge {duplicate} appears more than once.')

    @cached_property
    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def out_neighbors(self) -> tuple[tuple[int, ...], ...]:
        """Out-neighbors of every vertex, in edge order."""
        neighbors = [[] for _ in range(self.n)]
        for u, v in self.edges:
            neighbors[u].append(v)

        return tuple(tuple(vertex_neighbors) for vertex_neighbors in neighbors)

    @cached_property
    def out_degrees(self) -> np.ndarray:
        return np.array([len(neighbors) for neighbors in self.out_neighbors], dtype=np.int64)

    @property
    def dead_ends(self) -> list[int]:
        """Vertices with out-degree 0."""
        return [int(vertex) for vertex in np.flatnonzero(self.out_degrees == 0)]


class EdgeStream:
    """A replayable stream of directed edges (insertion-only) or signed edge updates (turnstile).

    Every replay yields the identical sequence. Each call to replay() or replay_updates() is one pass and is
    counted in pass_count; a handle created with a pass budget refuses to start a pass beyond the budget.
    """

    def __init__(
            self,
            n: int,
            updates: Iterable[EdgeUpdate] = (),
            turnstile: bool = False,
            path: Path | None = None,
            max_passes: int | None = None
    ) -> None:
        """
        :param n: Number of vertices.
        :param updates: The (u, v, delta) updates of the stream. Insertion-only streams use delta = +1.
        :param turnstile: Whether the stream carries signed updates.
        :param path: If given, the stream is backed by this file and re-reads it on every replay.
        :param max_passes: Maximum number of passes this handle may make (None means unlimited).
        """
        self.n = n
        self.turnstile = turnstile
        self.path = path
        self.max_passes = max_passes
        self.pass_count = 0
        self._updates = tuple(updates) if path is None else None

        if self._updates is not None and not turnstile and any(delta != 1 for _, _, delta in self._updates):
            raise ValueError('Insertion-only streams cannot contain deletions.')

    @classmethod
    def from_file(cls, path: Path) -> 'EdgeStream':
        """Opens a file-backed stream. The file is validated once here and re-read on every replay.

        :param path: Path to an edge-list or turnstile file.
        :return: A file-backed EdgeStream.
        """
        text = path.read_text()
        n, updates, turnstile = _parse_stream_text(text)

        if turnstile:
            _check_net_counts(updates)
        else:
            read_edge_list(text)

        return cls(n=n, turnstile=turnstile, path=path)

    def handle(self, max_passes: int | None = None) -> 'EdgeStream':
        """Creates an independent replay handle over the same data with a fresh pass counter.

        :param max_passes: Pass budget of the new handle.
        :return: A new EdgeStream sharing this stream's data.
        """
        stream = EdgeStream(n=self.n, turnstile=self.turnstile, path=self.path, max_passes=max_passes)
        stream._updates = self._updates

        return stream

    def _read(self) -> Iterator[EdgeUpdate]:
        if self._updates is not None:
            yield from self._updates
        else:
            yield from _parse_stream_text(self.path.read_text())[1]

    def _start_pass(self) -> None:
        if self.max_passes is not None and self.pass_count >= self.max_passes:
            raise PassBudgetExceeded(f'Stream handle allows {self.max_passes} passes; a further pass was requested.')

        self.pass_count += 1

    def replay_updates(self) -> Iterator[EdgeUpdate]:
        """Makes one pass over the stream, yielding (u, v, delta) updates."""
        self._start_pass()
        yield from self._read()

    def replay(self) -> Iterator[Edge]:
        """Makes one pass over an insertion-only stream, yielding (u, v) edges."""
        if self.turnstile:
            raise ValueError('Turnstile streams must be replayed with replay_updates().')

        self._start_pass()
        for u, v, _ in self._read():
            yield u, v

    def updates(self) -> list[EdgeUpdate]:
        """Returns the stream contents without counting a pass (for oracles and serialization)."""
        return list(self._read())

    def __len__(self) -> int:
        return len(self._updates) if self._updates is not None else sum(1 for _ in self._read())

    def materialize(self) -> DirectedGraph:
        """Returns the graph that the stream describes (the net result of all updates)."""
        counts = _net_counts(self._read())
        edges = [edge for edge, count in counts.items() if count == 1]

        return DirectedGraph(n=self.n, edges=tuple(edges))


def _net_counts(updates: Iterable[EdgeUpdate]) -> dict[Edge, int]:
    counts: dict[Edge, int] = {}
    for u, v, delta in updates:
        counts[(u, v)] = counts.get((u, v), 0) + delta

    return counts


def _check_net_counts(updates: Iterable[EdgeUpdate]) -> None:
    for edge, count in _net_counts(updates).items():
        if count not in (0, 1):
            raise InvalidTurnstile(f'Edge {edge} has net count {count} at the end of the stream.')


def _parse_header(lines: list[str]) -> int:
    if not lines:
        raise ParseError('Input is empty; expected the vertex count on the first line.')

    try:
        n = int(lines[0])
    except ValueError:
        raise ParseError(f'Expected the vertex count on the first line but got "{lines[0]}".')

    if n < 0:
        raise ParseError(f'Vertex count must be non-negative but got {n}.')

    return n


def _parse_vertex(token: str, n: int, line_number: int) -> int:
    try:
        vertex = int(token)
    except ValueError:
        raise ParseError(f'Line {line_number}: "{token}" is not a vertex id.')

    if not 0 <= vertex < n:
        raise ParseError(f'Line {line_number}: vertex {vertex} is outside [0, {n}).')

    return vertex


def _parse_stream_text(text: str) -> tuple[int, list[EdgeUpdate], bool]:
    """Parses either file format into (n, updates, is_turnstile)."""
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    n = _parse_header(lines)
    body = lines[1:]
    turnstile = bool(body) and body[0][0] in '+-'

    updates = []
    for line_number, line in enumerate(body, start=2):
        tokens = line.split()

        if turnstile:
            if len(tokens) != 3 or tokens[0] not in ('+', '-'):
                raise ParseError(f'Line {line_number}: expected "+ u v" or "- u v" but got "{line}".')
            sign, tokens = (1 if tokens[0] == '+' else -1), tokens[1:]
        elif len(tokens) != 2:
            raise ParseError(f'Line {line_number}: expected "u v" but got "{line}".')
        else:
            sign = 1

        updates.append((_parse_vertex(tokens[0], n, line_number), _parse_vertex(tokens[1], n, line_number), sign))

    return n, updates, turnstile


def read_edge_list(text: str) -> DirectedGraph:
    """Parses an edge list: the vertex count on the first line, then one "u v" line per edge.

    :param text: Contents of the edge-list file.
    :return: The parsed graph (edges in file order).
    """
    n, updates, turnstile = _parse_stream_text(text)

    if turnstile:
        raise ParseError('Expected an edge list but found turnstile updates.')

    edges = [(u, v) for u, v, _ in updates]
    if len(set(edges)) != len(edges):
        duplicate = next(edge for edge, count in Counter(edges).items() if count > 1)
        raise DuplicateEdge(f'Edge {duplicate} appears more than once.')

    return DirectedGraph(n=n, edges=tuple(edges))


def read_edge_stream(text: str) -> EdgeStream:
    """Parses an edge list into an insertion-only stream that keeps the file order."""
    graph = read_edge_list(text)

    return from_graph(graph, ordering='as_given')


def read_turnstile(text: str) -> EdgeStream:
    """Parses a turnstile file: the vertex count on the first line, then "+ u v" / "- u v" lines.

    :param text: Contents of the turnstile file.
    :return: A turnstile EdgeStream.
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    n = _parse_header(lines)

    updates = []
    for line_number, line in enumerate(lines[1:], start=2):
        tokens = line.split()
        if len(tokens) != 3 or tokens[0] not in ('+', '-'):
            raise ParseError(f'Line {line_number}: expected "+ u v" or "- u v" but got "{line}".')

        sign = 1 if tokens[0] == '+' else -1
        updates.append((_parse_vertex(tokens[1], n, line_number), _parse_vertex(tokens[2], n, line_number), sign))

    _check_net_counts(updates)

    return EdgeStream(n=n, updates=updates, turnstile=True)


def load_stream(path: Path) -> EdgeStream:
    """Loads an edge-list or turnstile file into an in-memory stream, detecting the format."""
    text = path.read_text()
    _, _, turnstile = _parse_stream_text(text)

    return read_turnstile(text) if turnstile else read_edge_stream(text)


def from_graph(graph: DirectedGraph, ordering: Ordering = 'as_given', seed: int = 0) -> EdgeStream:
    """Builds an insertion-only stream containing every edge of a graph exactly once.

    :param graph: The graph to stream.
    :param ordering: Edge-order policy.
                     as_given (or as-given): the graph's own edge order.
                     lexicographic: edges sorted by (u, v).
                     shuffle (or uniform-shuffle): a uniformly random permutation drawn from the seed.
                     A sequence of edges: used as-is; must be a permutation of the edge set.
    :param seed: Seed for the shuffle ordering.
    :return: An insertion-only EdgeStream.
    """
    if isinstance(ordering, str):
        ordering = ORDERING_ALIASES.get(ordering, ordering)

        if ordering == 'as_given':
            edges = list(graph.edges)
        elif ordering == 'lexicographic':
            edges = sorted(graph.edges)
        elif ordering == 'shuffle':
            permutation = derive_rng(seed, 'edge-order').permutation(graph.num_edges)
            edges = [graph.edges[index] for index in permutation]
        else:
            raise ValueError(f'Ordering "{ordering}" is not supported.')
    else:
        edges = [(int(u), int(v)) for u, v in ordering]

        if len(edges) != graph.num_edges or Counter(edges) != Counter(graph.edges):
            raise OrderingMismatch('Custom ordering is not a permutation of the graph\'s edges.')

    return EdgeStream(n=graph.n, updates=[(u, v, 1) for u, v in edges])


def to_turnstile(graph: DirectedGraph, churn: float = 0.5, seed: int = 0) -> EdgeStream:
    """Builds a valid turnstile stream for a graph by interleaving insert/delete churn with the real edges.

    Every edge ends with net count 1. With probability churn, an edge is also inserted and deleted once
    before its final insertion, and a matching number of non-edges is inserted and later deleted.

    :param graph: The graph the stream must describe.
    :param churn: Probability that an edge gets an extra insert/delete pair.
    :param seed: Seed for the churn and the interleaving.
    :return: A turnstile EdgeStream whose materialized graph equals the input graph.
    """
    if not 0.0 <= churn <= 1.0:
        raise ValueError(f'Churn must be between 0.0 and 1.0 but got {churn}.')

    rng = derive_rng(seed, 'turnstile-churn')

    # Number of +/- events per edge key
    event_counts = {edge: 1 + 2 * int(rng.random() < churn) for edge in graph.edges}

    num_spurious = sum(count > 1 for count in event_counts.values())
    non_edges = [(u, v) for u in range(graph.n) for v in range(graph.n) if (u, v) not in graph.edge_set]
    for index in rng.permutation(len(non_edges))[:num_spurious]:
        event_counts[non_edges[index]] = 2

    # Shuffle all events, then assign alternating signs per edge in order of occurrence
    events = [edge for edge, count in event_counts.items() for _ in range(count)]
    events = [events[index] for index in rng.permutation(len(events))]

    seen: Counter = Counter()
    updates = []
    for u, v in events:
        sign = 1 if seen[(u, v)] % 2 == 0 else -1
        seen[(u, v)] += 1
        updates.append((u, v, sign))

    return EdgeStream(n=graph.n, updates=updates, turnstile=True)


def write_edge_list(source: DirectedGraph | EdgeStream, save_path: Path | None = None) -> str:
    """Serializes a graph or insertion-only stream in the edge-list format (stream order is kept).

    :param source: A graph or an insertion-only stream.
    :param save_path: Optional path where the text is written.
    :return: The edge-list text.
    """
    if isinstance(source, EdgeStream):
        if source.turnstile:
            raise ValueError('Turnstile streams must be written with write_turnstile.')
        edges = [(u, v) for u, v, _ in source.updates()]
    else:
        edges = list(source.edges)

    text = '\n'.join([str(source.n)] + [f'{u} {v}' for u, v in edges]) + '\n'

    if save_path is not None:
        save_path.parent.mkdir(parents=True, exist_ok=True)
        save_path.write_text(text)

    return text


def write_turnstile(stream: EdgeStream, save_path: Path | None = None) -> str:
    """Serializes a stream in the turnstile format.

    :param stream: Any EdgeStream (insertion-only streams are written as all-insertion updates).
    :param save_path: Optional path where the text is written.
    :return: The turnstile text.
    """
    lines = [str(stream.n)] + [f'{"+" if delta > 0 else "-"} {u} {v}' for u, v, delta in stream.updates()]
    text = '\n'.join(lines) + '\n'

    if save_path is not None:
        save_path.parent.mkdir(parents=True, exist_ok=True)
        save_path.write_text(text)

    return text
