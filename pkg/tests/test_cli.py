"""Tests for the walkstream command line and the experiment plumbing behind it."""
import json
from pathlib import Path

import pandas as pd
import pytest

from walkstream.constants import BENCH_COLUMNS
from walkstream.errors import CapExceeded, ParseError, SketchFailure, WalkFailure
from walkstream.experiment import (
    SAMPLER_REGISTRY,
    SamplerRun,
    get_available_generators,
    get_available_samplers,
    get_generator,
    get_sampler,
    resolve_source,
    run_trials
)
from walkstream.graph_stream import from_graph
from walkstream.instance_gen import gen_cycle
from walkstream.main import exit_code, main
from walkstream.one_pass_sampler import Failure
from walkstream.turnstile import HeavyHitterSketch
from walkstream.two_pass_sampler import SpaceReport


def run_cli(*args) -> int:
    """Runs the command line and returns its exit code."""
    try:
        main([str(arg) for arg in args])
    except SystemExit as error:
        return error.code

    return 0


def write_graph(path: Path, text: str) -> Path:
    path.write_text(text)

    return path


def test_registries() -> None:
    assert get_available_samplers() == ['folklore', 'turnstile', 'two-pass']
    assert get_available_generators() == ['complete', 'cycle', 'gadget', 'hard', 'random', 'star']

    with pytest.raises(ValueError, match='could not be found'):
        get_sampler('three-pass')

    with pytest.raises(ValueError, match='could not be found'):
        get_generator('grid')


def test_resolve_source_needs_exactly_one_source(tmp_path: Path) -> None:
    with pytest.raises(ValueError):
        resolve_source()

    with pytest.raises(ValueError):
        resolve_source(graph=tmp_path / 'graph.txt', gen='star')


def test_run_trials_is_deterministic() -> None:
    stream = from_graph(gen_cycle(4))
    first = run_trials('folklore', stream, 0, 6, 0.1, 1, 8, trials=5, seed=3)
    second = run_trials('folklore', stream, 0, 6, 0.1, 1, 8, trials=5, seed=3)

    assert [run.walk for run in first] == [run.walk for run in second]
    assert all(run.walk == (0, 1, 2, 3, 0, 1, 2) for run in first)


def test_exit_code_mapping() -> None:
    assert exit_code(WalkFailure(vertex=0, step=1)) == 4
    assert exit_code(SketchFailure(0)) == 6
    assert exit_code(CapExceeded('cap')) == 7
    assert exit_code(ParseError('bad')) == 3
    assert exit_code(ValueError('bad')) == 2
    assert exit_code(RuntimeError('bad')) is None


def test_gen_and_sample_from_file(tmp_path: Path, capsys: pytest.CaptureFixture) -> None:
    graph_path = tmp_path / 'hard.txt'
    report_path = tmp_path / 'walk.json'

    assert run_cli('gen', '--gen', 'hard', '--n', 3, '--p', 2, '--degree', 2, '--out', graph_path) == 0
    assert json.loads(graph_path.with_suffix('.json').read_text())['start'] == 0

    assert run_cli('sample', '--graph', graph_path, '--algo', 'folklore', '--steps', 8, '--out', report_path) == 0
    report = json.loads(report_path.read_text())
    walk = [int(vertex) for vertex in report['walk'].split()]

    assert len(walk) == 9
    assert walk[0] == walk[4] == walk[8] == 0
    assert report['space']['pass_count'] == 1
    assert report['failure'] is None
    assert report['walk'] in capsys.readouterr().out


def test_gen_turnstile(tmp_path: Path) -> None:
    graph_path = tmp_path / 'star.txt'

    assert run_cli('gen', '--gen', 'star', '--n', 5, '--turnstile', '--out', graph_path) == 0
    assert graph_path.read_text().splitlines()[1][0] in '+-'
    assert run_cli('sample', '--graph', graph_path, '--algo', 'turnstile', '--steps', 4, '--delta', 0.1) == 0


def test_sample_reports_are_reproducible(tmp_path: Path) -> None:
    for name in ('first.json', 'second.json'):
        assert run_cli(
            'sample', '--gen', 'random', '--n', 12, '--degree', 3, '--steps', 25, '--delta', 0.05, '--seed', 4,
            '--out', tmp_path / name
        ) == 0

    first = (tmp_path / 'first.json').read_text()
    assert first == (tmp_path / 'second.json').read_text()

    report = json.loads(first)
    assert report['config']['ell'] == 5
    assert report['space']['pass_count'] == 2
    assert report['estimate']['ell'] == 5
    assert len(report['estimate']['fractions']) == 12


def test_sample_failure_exit_code(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    report = SpaceReport(pass_count=1, pass1_peak_words=3, pass2_peak_words=0, heavy_count=0, gamma=1, ell=3,
                         operated_correctly=True)
    monkeypatch.setitem(
        SAMPLER_REGISTRY, 'folklore', lambda *args: SamplerRun(walk=Failure(vertex=2, step=3), report=report)
    )
    report_path = tmp_path / 'walk.json'

    assert run_cli('sample', '--gen', 'cycle', '--algo', 'folklore', '--steps', 3, '--out', report_path) == 4
    assert json.loads(report_path.read_text())['failure'] == {'vertex': 2, 'step': 3}


@pytest.mark.parametrize('text', ['three\n0 1\n', '2\n0 1\n0 1\n', '2\n0 2\n'])
def test_input_format_exit_code(tmp_path: Path, text: str) -> None:
    graph_path = write_graph(tmp_path / 'graph.txt', text)

    assert run_cli('sample', '--graph', graph_path, '--algo', 'folklore', '--steps', 2) == 3


def test_invalid_turnstile_exit_code(tmp_path: Path) -> None:
    graph_path = write_graph(tmp_path / 'graph.txt', '2\n+ 0 1\n- 0 1\n- 0 1\n')

    assert run_cli('oracle', '--graph', graph_path, '--steps', 1) == 3


def test_dead_end_exit_code(tmp_path: Path) -> None:
    graph_path = write_graph(tmp_path / 'graph.txt', '2\n0 1\n')

    assert run_cli('sample', '--graph', graph_path, '--algo', 'folklore', '--steps', 2) == 5
    assert run_cli('sample', '--graph', graph_path, '--algo', 'folklore', '--steps', 1) == 0


def test_sketch_failure_exit_code(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(HeavyHitterSketch, 'query', lambda self, candidates=None: set())

    assert run_cli('sample', '--gen', 'star', '--n', 5, '--algo', 'turnstile', '--steps', 4, '--delta', 0.1) == 6


def test_oracle_limit_exit_codes() -> None:
    assert run_cli('oracle', '--gen', 'complete', '--n', 4, '--steps', 3, '--budget', 10) == 7
    assert run_cli('oracle', '--gen', 'complete', '--n', 4, '--steps', 3, '--ell', 20, '--cap', 10) == 7


def test_invalid_argument_exit_codes(tmp_path: Path) -> None:
    graph_path = write_graph(tmp_path / 'graph.txt', '3\n0 1\n1 2\n2 0\n')

    assert run_cli('sample', '--gen', 'star', '--graph', graph_path, '--steps', 2) == 2
    assert run_cli('sample', '--gen', 'star', '--steps', 0, '--algo', 'two-pass') == 2
    assert run_cli('sample', '--gen', 'star', '--steps', 2, '--start', 7) == 2
    assert run_cli('verify', '--gen', 'star', '--steps', 2, '--trials', 0) == 2
    assert run_cli('sample', '--gen', 'star', '--steps', 2, '--algo', 'three-pass') == 2


def test_oracle_report(tmp_path: Path) -> None:
    report_path = tmp_path / 'oracle.json'

    assert run_cli('oracle', '--gen', 'star', '--n', 5, '--steps', 4, '--out', report_path) == 0
    report = json.loads(report_path.read_text())

    assert report['config']['ell'] == 2
    assert report['revisit']['classes'] == ['heavy', 'light', 'light', 'light', 'light']
    assert report['revisit']['probabilities'][1] == pytest.approx(0.25)
    assert len(report['distribution']['probabilities']) == 16
    assert report['distribution']['total_mass'] == pytest.approx(1.0)


def test_oracle_skips_revisits_with_dead_ends(tmp_path: Path) -> None:
    graph_path = write_graph(tmp_path / 'graph.txt', '3\n0 1\n1 2\n')
    report_path = tmp_path / 'oracle.json'

    assert run_cli('oracle', '--graph', graph_path, '--steps', 2, '--out', report_path) == 0
    report = json.loads(report_path.read_text())

    assert report['revisit'] is None
    assert report['distribution']['probabilities'] == {'0 1 2': 1.0}


def test_verify_folklore(tmp_path: Path) -> None:
    report_path = tmp_path / 'verify.json'

    assert run_cli(
        'verify', '--gen', 'complete', '--n', 4, '--algo', 'folklore', '--steps', 2, '--trials', 2_000,
        '--out', report_path
    ) == 0
    report = json.loads(report_path.read_text())

    assert report['passed']
    assert report['tv_tolerance'] == 0.0
    assert report['failure_rate'] == 0.0
    assert report['pass_counts'] == [1]
    assert report['classification'] is None


def test_verify_two_pass_classification(tmp_path: Path) -> None:
    report_path = tmp_path / 'verify.json'

    assert run_cli(
        'verify', '--gen', 'star', '--n', 5, '--steps', 4, '--delta', 0.1, '--c1', 1, '--trials', 200,
        '--out', report_path
    ) == 0
    report = json.loads(report_path.read_text())

    assert report['pass_counts'] == [2]
    assert report['classification']['ell'] == 2
    assert report['classification']['vertices'][0]['exact'] == 'heavy'
    assert report['classification']['vertices'][0]['estimated_heavy_rate'] == 1.0


def test_bench_csv(tmp_path: Path) -> None:
    paths = [tmp_path / 'first.csv', tmp_path / 'second.csv']

    for path in paths:
        assert run_cli(
            'bench', '--gen', 'star', '--n', 101, '--steps', 64, 256, '--delta', 0.1, '--c1', 1, '--out', path
        ) == 0

    assert paths[0].read_text() == paths[1].read_text()

    rows = pd.read_csv(paths[0])
    assert list(rows.columns) == BENCH_COLUMNS
    assert len(rows) == 4
    assert rows['wall_time'].isna().all()

    words = rows.set_index(['algorithm', 'L'])['peak_words']
    assert words['folklore', 64] == 101 * 64
    assert words['two-pass', 64] < words['folklore', 64]
    assert words['two-pass', 256] < words['folklore', 256]
    assert rows.set_index('algorithm')['pass_count'].to_dict() == {'folklore': 1, 'two-pass': 2}

    derived = rows.set_index(['algorithm', 'L'])[['gamma', 'ell']]
    assert derived.loc[('two-pass', 64)].tolist() == [4, 8]
    assert derived.loc[('two-pass', 256)].tolist() == [4, 16]
    assert derived.loc['folklore'].isna().all().all()


def test_bench_json_with_trials(tmp_path: Path) -> None:
    report_path = tmp_path / 'bench.json'

    assert run_cli(
        'bench', '--gen', 'complete', '--n', 4, '--steps', 2, 3, '--algo', 'folklore', '--trials', 50,
        '--format', 'json', '--timing', '--out', report_path
    ) == 0
    report = json.loads(report_path.read_text())

    assert report['config']['steps'] == [2, 3]
    assert [row['L'] for row in report['rows']] == [2, 3]
    assert all(row['empirical_tv'] is not None and row['wall_time'] is not None for row in report['rows'])
    assert 'derived' not in report['config']
    assert all(row['gamma'] is None and row['ell'] is None for row in report['rows'])


def test_bench_json_carries_derived_parameters(tmp_path: Path) -> None:
    report_path = tmp_path / 'bench.json'

    assert run_cli(
        'bench', '--gen', 'complete', '--n', 4, '--steps', 2, 9, '--algo', 'two-pass', 'turnstile',
        '--delta', 0.1, '--c1', 1, '--format', 'json', '--out', report_path
    ) == 0
    report = json.loads(report_path.read_text())

    assert report['config']['derived'] == {'2': {'gamma': 4, 'ell': 2}, '9': {'gamma': 4, 'ell': 3}}
    assert [(row['algorithm'], row['L'], row['gamma'], row['ell']) for row in report['rows']] == [
        ('two-pass', 2, 4, 2), ('turnstile', 2, 4, 2), ('two-pass', 9, 4, 3), ('turnstile', 9, 4, 3)
    ]


@pytest.mark.slow
def test_bench_tv_falls_back_to_paired_walks(tmp_path: Path) -> None:
    report_path = tmp_path / 'bench.json'

    assert run_cli(
        'bench', '--gen', 'complete', '--n', 4, '--steps', 4, '--algo', 'folklore', '--trials', 2_000,
        '--budget', 10, '--format', 'json', '--out', report_path
    ) == 0
    row = json.loads(report_path.read_text())['rows'][0]

    assert row['empirical_tv'] < 0.5
