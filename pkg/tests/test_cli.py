import json

import pandas as pd
import pytest

from udnsim.__main__ import main, parse_set_values, EXIT_OK, EXIT_CONFIG, EXIT_IO
from udnsim.config import ConfigError

SHORT = ['--set', 'run_time_ms=1000']


def test_validate_prints_the_effective_config(capsys):
    assert main(['validate']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'den_gnb = 10\n' in out
    assert 'route = A\n' in out
    assert out.endswith('# velocity = 13.89 m/s\n')


def test_flags_override_set_values(capsys):
    assert main(['validate', '--set', 'velocity_kmh=20', '--velocity', '36', '--case', 'b']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'route = B\n' in out
    assert '# velocity = 10.00 m/s' in out


def test_config_file_layer(tmp_path, capsys):
    path = tmp_path / 'exp.cfg'
    path.write_text("den_gnb = 30\nttt_tics = inf\n")
    assert main(['validate', '--config', str(path), '--set', 'den_gnb=40']) == EXIT_OK
    out = capsys.readouterr().out
    assert 'den_gnb = 40\n' in out
    assert 'ttt_tics = inf\n' in out


@pytest.mark.parametrize("argv", [
    ['run', '--bogus'],
    ['frobnicate'],
    [],
    ['-v', 'loud', 'validate'],
    ['validate', '--density', '0'],
    ['validate', '--set', 'speed=3'],
    ['validate', '--set', 'no-equals-sign'],
    ['validate', '--ttt', '0'],
    ['sweep', '--ttt-list', '0'],
    ['sweep', '--density-list', 'x,y'],
    ['sweep', '--workers', '0'],
    ['sweep', '--preset', 'fig9'],
])
def test_invalid_arguments(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert capsys.readouterr().err


def test_invalid_value_names_the_field(capsys):
    assert main(['validate', '--density', '0']) == EXIT_CONFIG
    assert 'den_gnb' in capsys.readouterr().err


def test_missing_config_file(tmp_path):
    assert main(['validate', '--config', str(tmp_path / 'missing.cfg')]) == EXIT_IO


def test_unwritable_log_file(tmp_path):
    assert main(['--log', str(tmp_path / 'no' / 'such' / 'dir.log'), 'validate']) == EXIT_IO


def test_unwritable_output(tmp_path):
    argv = ['run', *SHORT, '--iterations', '1', '--out', str(tmp_path / 'no' / 'such' / 'out.csv')]
    assert main(argv) == EXIT_IO


def test_parse_set_values():
    assert parse_set_values(['a=1', ' b = x=y ']) == {'a': '1', 'b': 'x=y'}
    with pytest.raises(ConfigError):
        parse_set_values(['=1'])


def test_run_writes_one_row(tmp_path):
    path = tmp_path / 'out.csv'
    argv = ['run', *SHORT, '--case', 'B', '--ttt', '2', '--iterations', '2', '--seed', '3', '--out', str(path)]
    assert main(argv) == EXIT_OK
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith('case,ttt_tics,den_gnb,velocity_kmh,iterations,mean_ho_rate,')
    assert lines[1].startswith('B,2,10,50.0,2,')


def test_run_is_reproducible(tmp_path):
    outputs = []
    for name in ('a.csv', 'b.csv'):
        path = tmp_path / name
        assert main(['run', *SHORT, '--iterations', '2', '--seed', '9', '--out', str(path)]) == EXIT_OK
        outputs.append(path.read_text())
    assert outputs[0] == outputs[1]


def test_run_json_to_stdout(capsys):
    assert main(['run', *SHORT, '--iterations', '1', '--format', 'json']) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert len(doc['rows']) == 1
    assert doc['rows'][0]['case'] == 'A'
    assert doc['provenance']['iterations'] == 1
    assert doc['provenance']['config']['run_time_ms'] == 1000


def test_run_trace(tmp_path):
    trace = tmp_path / 'trace.csv'
    argv = ['run', *SHORT, '--iterations', '2', '--out', str(tmp_path / 'out.csv'), '--trace', str(trace)]
    assert main(argv) == EXIT_OK
    df = pd.read_csv(trace)
    assert len(df) == 2 * 101
    assert sorted(df['iteration'].unique()) == [0, 1]


def test_sweep(tmp_path):
    out, tables = tmp_path / 'out.csv', tmp_path / 'tables.csv'
    argv = ['sweep', *SHORT, '--iterations', '1', '--cases', 'A,B', '--ttt-list', '1,inf', '--density-list', '10',
            '--workers', '1', '--out', str(out), '--table-out', str(tables)]
    assert main(argv) == EXIT_OK
    rows = out.read_text().splitlines()
    assert len(rows) == 5
    assert [r.split(',')[:2] for r in rows[1:]] == [['A', '1'], ['A', 'inf'], ['B', '1'], ['B', 'inf']]
    table_lines = tables.read_text().splitlines()
    assert table_lines[0] == 'case,ttt_tics,den_gnb=10'
    assert len(table_lines) == 5


def test_sweep_defaults_to_the_config_point(tmp_path):
    out = tmp_path / 'out.json'
    argv = ['sweep', *SHORT, '--set', 'route=B', '--iterations', '1', '--workers', '1', '--format', 'json',
            '--out', str(out)]
    assert main(argv) == EXIT_OK
    doc = json.loads(out.read_text())
    assert [(r['case'], r['ttt_tics'], r['den_gnb']) for r in doc['rows']] == [('B', '1', 10)]
    assert doc['provenance']['preset'] is None
