"""Shared plumbing of the command-line tools: graph sources, sampler and generator registries, trials, reports."""
import json
from dataclasses import dataclass, field
from functools import partial
from multiprocessing import Pool
from pathlib import Path
from typing import Callable, Literal

import pandas as pd
from tqdm import tqdm

from walkstream.constants import BENCH_COLUMNS, Walk
from walkstream.graph_stream import DirectedGraph, EdgeStream, from_graph
from walkstream.instance_gen import (
    GadgetParams,
    HardInstanceParams,
    gen_complete,
    gen_cycle,
    gen_hard_instance,
    gen_index_gadget,
    gen_random_graph,
    gen_star,
    random_bits
)
from walkstream.one_pass_sampler import Failure, folklore_preprocess, sample_walk
from walkstream.seeding import derive_seed
from walkstream.turnstile import run_turnstile_pipeline
from walkstream.two_pass_sampler import HeavyLightEstimate, SpaceReport, TwoPassConfig, run_pipeline

ReportFormat = Literal['json', 'csv']
TWO_PASS_SAMPLERS = ('two-pass', 'turnstile')


@dataclass(frozen=True)
class GraphSource:
    """A resolved graph source: the stream to run on, its graph, the default start vertex and metadata."""
    graph: DirectedGraph
    stream: EdgeStream
    start: int
    sidecar: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SamplerRun:
    """The outcome of one sampler invocation."""
    walk: Walk | Failure
    report: SpaceReport
    estimate: HeavyLightEstimate | None = None

    @property
    def failed(self) -> bool:
        return isinstance(self.walk, Failure)


@dataclass(frozen=True)
class ExperimentSpec:
    """The fully resolved configuration of a command, stored in every report."""
    command: str
    algo: str | None = None
    start: int | None = None
    steps: int | list[int] | None = None
    delta: float | None = None
    c1: float | None = None
    c2: int | None = None
    trials: int | None = None
    seed: int = 0
    source: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.trials is not None and self.trials < 0:
            raise ValueError(f'Number of trials must be non-negative but got {self.trials}.')

    def derived_parameters(self, L: int) -> dict[str, int]:
        """The gamma and ell a two-pass sampler derives for walk length L under this configuration."""
        two_pass_config = TwoPassConfig(L=L, delta=self.delta, c1=self.c1, c2=self.c2, seed=self.seed)

        return {'gamma': two_pass_config.gamma, 'ell': two_pass_config.ell}

    def to_dict(self) -> dict:
        config = {
            'command': self.command,
            'algo': self.algo,
            'start': self.start,
            'steps': self.steps,
            'delta': self.delta,
            'c1': self.c1,
            'c2': self.c2,
            'trials': self.trials,
            'seed': self.seed,
            'source': self.source
        }

        two_pass = self.algo is not None and bool(set(self.algo.split(',')) & set(TWO_PASS_SAMPLERS))

        if two_pass and isinstance(self.steps, int):
            config.update(self.derived_parameters(self.steps))
        elif two_pass and isinstance(self.steps, list):
            config['derived'] = {str(L): self.derived_parameters(L) for L in self.steps}

        return config


GeneratorFunction = Callable[..., GraphSource]
GENERATOR_REGISTRY = {}


def register_generator(generator_name: str) -> Callable[[GeneratorFunction], GeneratorFunction]:
    """Creates a decorator which registers a graph generator in a global dictionary to enable access by name.

    :param generator_name: The name to use to access the generator.
    :return: A decorator which will add a generator to the registry using the specified name.
    """

    def decorator(generator: GeneratorFunction) -> GeneratorFunction:
        GENERATOR_REGISTRY[generator_name] = generator
        return generator

    return decorator


def get_generator(generator_name: str) -> GeneratorFunction:
    """Gets a registered graph generator by name.

    :param generator_name: The name of the generator.
    :return: The desired generator.
    """
    if generator_name not in GENERATOR_REGISTRY:
        raise ValueError(f'Generator "{generator_name}" could not be found.')

    return GENERATOR_REGISTRY[generator_name]


def get_available_generators() -> list[str]:
    """Returns a list of names of available graph generators."""
    return sorted(GENERATOR_REGISTRY)


def _simple_source(graph: DirectedGraph, kind: str, **params) -> GraphSource:
    return GraphSource(
        graph=graph,
        stream=from_graph(graph),
        start=0,
        sidecar={'kind': kind, 'start': 0, **params}
    )


@register_generator('star')
def generate_star(n: int = 5, **_) -> GraphSource:
    return _simple_source(gen_star(n), 'star', n=n)


@register_generator('cycle')
def generate_cycle(n: int = 3, **_) -> GraphSource:
    return _simple_source(gen_cycle(n), 'cycle', n=n)


@register_generator('complete')
def generate_complete(n: int = 4, **_) -> GraphSource:
    return _simple_source(gen_complete(n), 'complete', n=n)


@register_generator('random')
def generate_random(n: int = 5, degree: int = 2, seed: int = 0, **_) -> GraphSource:
    return _simple_source(gen_random_graph(n, degree, seed=seed), 'random', n=n, degree=degree, seed=seed)


@register_generator('hard')
def generate_hard(n: int = 3, p: int = 1, degree: int = 2, seed: int = 0, **_) -> GraphSource:
    instance = gen_hard_instance(HardInstanceParams(n=n, p=p, degree=degree, seed=seed))

    return GraphSource(graph=instance.graph, stream=instance.stream, start=instance.start, sidecar=instance.sidecar())


@register_generator('gadget')
def generate_gadget(tau: int = 2, bits: str | None = None, seed: int = 0, **_) -> GraphSource:
    if bits is None:
        bits = random_bits(tau, seed=seed)

    gadget = gen_index_gadget(GadgetParams(tau=tau, bits=bits))

    return GraphSource(
        graph=gadget.graph,
        stream=from_graph(gadget.graph),
        start=gadget.start,
        sidecar=gadget.sidecar()
    )


def resolve_source(
        graph: Path | None = None,
        gen: str | None = None,
        n: int = 5,
        p: int = 1,
        degree: int = 2,
        tau: int = 2,
        bits: str | None = None,
        seed: int = 0
) -> GraphSource:
    """Loads a graph file or runs a named generator. Exactly one of graph and gen must be given.

    A file's start vertex is read from its JSON sidecar when one exists and is 0 otherwise.
    """
    if (graph is None) == (gen is None):
        raise ValueError('Exactly one of --graph and --gen must be provided.')

    if gen is not None:
        return get_generator(gen)(n=n, p=p, degree=degree, tau=tau, bits=bits, seed=seed)

    stream = EdgeStream.from_file(graph)
    sidecar_path = graph.with_suffix('.json')
    sidecar = json.loads(sidecar_path.read_text()) if sidecar_path.exists() else {}

    return GraphSource(
        graph=stream.materialize(),
        stream=stream,
        start=sidecar.get('start', 0),
        sidecar={'path': str(graph), **sidecar}
    )


def _insertion_only(stream: EdgeStream) -> EdgeStream:
    return from_graph(stream.materialize()) if stream.turnstile else stream


def _as_turnstile(stream: EdgeStream) -> EdgeStream:
    return stream if stream.turnstile else EdgeStream(n=stream.n, updates=stream.updates(), turnstile=True)


SamplerFunction = Callable[[EdgeStream, int, int, float, float, int, int], SamplerRun]
SAMPLER_REGISTRY = {}


def register_sampler(sampler_name: str) -> Callable[[SamplerFunction], SamplerFunction]:
    """Creates a decorator which registers a sampler in a global dictionary to enable access by name.

    :param sampler_name: The name to use to access the sampler.
    :return: A decorator which will add a sampler to the registry using the specified name.
    """

    def decorator(sampler: SamplerFunction) -> SamplerFunction:
        SAMPLER_REGISTRY[sampler_name] = sampler
        return sampler

    return decorator


def get_sampler(sampler_name: str) -> SamplerFunction:
    """Gets a registered sampler by name.

    :param sampler_name: The name of the sampler.
    :return: The desired sampler.
    """
    if sampler_name not in SAMPLER_REGISTRY:
        raise ValueError(f'Sampler "{sampler_name}" could not be found.')

    return SAMPLER_REGISTRY[sampler_name]


def get_available_samplers() -> list[str]:
    """Returns a list of names of available samplers."""
    return sorted(SAMPLER_REGISTRY)


@register_sampler('folklore')
def run_folklore(stream: EdgeStream, u_start: int, L: int, delta: float, c1: float, c2: int, seed: int) -> SamplerRun:
    """One pass with L reservoir samples per vertex."""
    if not 0 <= u_start < stream.n:
        raise ValueError(f'Start vertex {u_start} is outside [0, {stream.n}).')

    handle = _insertion_only(stream).handle(max_passes=1)
    table = folklore_preprocess(handle, L=L, seed=seed)
    walk = sample_walk(stream.n, u_start, L, table.full_vertices, table, seed=seed)

    report = SpaceReport(
        pass_count=handle.pass_count,
        pass1_peak_words=table.stored_words,
        pass2_peak_words=0,
        heavy_count=0,
        gamma=1,
        ell=table.tau,
        operated_correctly=table.operated_correctly
    )

    return SamplerRun(walk=walk, report=report)


@register_sampler('two-pass')
def run_two_pass(stream: EdgeStream, u_start: int, L: int, delta: float, c1: float, c2: int, seed: int) -> SamplerRun:
    """Heavy/light estimation, then heavy-light recording."""
    config = TwoPassConfig(L=L, delta=delta, c1=c1, c2=c2, seed=seed)
    result = run_pipeline(_insertion_only(stream), u_start, config)

    return SamplerRun(walk=result.walk, report=result.report, estimate=result.estimate)


@register_sampler('turnstile')
def run_turnstile(stream: EdgeStream, u_start: int, L: int, delta: float, c1: float, c2: int, seed: int) -> SamplerRun:
    """The two-pass sampler on signed updates, with l1 samplers and a heavy-hitter sketch."""
    config = TwoPassConfig(L=L, delta=delta, c1=c1, c2=c2, seed=seed)
    result = run_turnstile_pipeline(_as_turnstile(stream), u_start, config)

    return SamplerRun(walk=result.walk, report=result.report, estimate=result.estimate)


def _run_trial(
        trial: int,
        algo: str,
        stream: EdgeStream,
        u_start: int,
        L: int,
        delta: float,
        c1: float,
        c2: int,
        seed: int
) -> SamplerRun:
    return get_sampler(algo)(stream, u_start, L, delta, c1, c2, derive_seed(seed, algo, trial))


def run_trials(
        algo: str,
        stream: EdgeStream,
        u_start: int,
        L: int,
        delta: float,
        c1: float,
        c2: int,
        trials: int,
        seed: int = 0,
        num_workers: int = 1
) -> list[SamplerRun]:
    """Runs a sampler `trials` times with per-trial derived seeds. Results are in trial order.

    :param num_workers: Number of worker processes (1 runs in this process).
    :return: One SamplerRun per trial.
    """
    trial_fn = partial(
        _run_trial, algo=algo, stream=stream, u_start=u_start, L=L, delta=delta, c1=c1, c2=c2, seed=seed
    )

    if num_workers > 1:
        with Pool(num_workers) as pool:
            return list(tqdm(pool.imap(trial_fn, range(trials)), total=trials, desc=algo))

    return [trial_fn(trial) for trial in tqdm(range(trials), desc=algo)]


def walk_to_text(walk: Walk) -> str:
    return ' '.join(map(str, walk))


def write_report(report: dict | list[dict], save_path: Path, format: ReportFormat = 'json') -> None:
    """Writes a report as JSON with sorted keys, or as CSV rows with the fixed benchmark column order."""
    save_path.parent.mkdir(parents=True, exist_ok=True)

    if format == 'json':
        save_path.write_text(json.dumps(report, sort_keys=True, indent=2) + '\n')
    elif format == 'csv':
        rows = report if isinstance(report, list) else [report]
        pd.DataFrame(rows, columns=BENCH_COLUMNS).to_csv(save_path, index=False)
    else:
        raise ValueError(f'Report format "{format}" is not supported.')
