import json
import logging
import os
import subprocess
import sys

import pytest
from click.testing import CliRunner

from main import cli, main
from src.config import config
from tests.conftest import L_TROMINO, SQUARE, polygon_json

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

COLUMN_SHIFT = json.dumps({'type': 'periodic', 'base': [[0, 0], [1, '1/2']], 'periods': [[2, 0], [0, 1]]})
Z2 = json.dumps({'type': 'periodic', 'base': [[0, 0]], 'periods': [[1, 0], [0, 1]]})
SPARSE_SQUARES = json.dumps({'type': 'periodic', 'base': [[0, 0]], 'periods': [[2, 0], [0, 2]]})
SQUARE_CERTIFICATE = json.dumps({'lattice': [[7, 0], [0, 7]], 'translates': [[0, 0]], 'scale': 7})


@pytest.fixture(autouse=True)
def quiet_logging(monkeypatch):
    monkeypatch.setenv('POLYTILE_LOG_LEVEL', 'ERROR')
    monkeypatch.delenv('POLYTILE_LOG_DIR', raising=False)
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def square_json(write_file):
    return write_file('square.json', polygon_json(SQUARE))


@pytest.fixture
def tromino_json(write_file):
    return write_file('tromino.json', polygon_json(L_TROMINO))


@pytest.fixture
def row_file(write_file):
    return write_file('row.tile', '# three cells in a row\n0 0\n1 0\n3 0\n')


class TestDiscretize:
    def test_stdout(self, runner, square_json):
        result = runner.invoke(cli, ['discretize', square_json])
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == 'scale 7'
        assert len(lines) == 50

    def test_files(self, runner, square_json, tmp_path):
        out = tmp_path / 'tiles' / 'square.tile'
        svg = tmp_path / 'square.svg'
        result = runner.invoke(cli, ['discretize', square_json, '--out', str(out), '--svg', str(svg)])
        assert result.exit_code == 0
        assert out.read_text(encoding='utf-8').startswith('scale 7\n')
        assert '<svg' in svg.read_text(encoding='utf-8')

    def test_invalid_polygon(self, runner, write_file):
        path = write_file('bad.json', '{"polygons": [{"outer": [[0, 0], [1.5, 0], [0, 1]]}]}')
        assert runner.invoke(cli, ['discretize', path]).exit_code == 65

    def test_notched_square_faces_are_coloured(self, runner, tmp_path):
        sample = os.path.join(ROOT, 'docs', 'samples', 'notched_square.json')
        svg = tmp_path / 'notched.svg'
        result = runner.invoke(cli, ['discretize', sample, '--out', str(tmp_path / 'notched.tile'),
                                     '--svg', str(svg)])
        assert result.exit_code == 0
        text = svg.read_text(encoding='utf-8')
        palette = config.get_palette()
        assert text.count('data-label="P_') == 4
        assert all(f'fill="{colour}"' in text for colour in palette[:4])
        assert f'fill="{palette[4]}"' not in text


class TestDecide:
    def test_square_certificate(self, runner, square_json, tmp_path):
        certificate = tmp_path / 'square.cert.json'
        result = runner.invoke(cli, ['decide', square_json, '--emit-certificate', str(certificate)])
        assert result.exit_code == 0
        document = json.loads(result.output)
        assert document == {'lattice': [[7, 0], [0, 7]], 'translates': [[0, 0]], 'scale': 7}
        assert json.loads(certificate.read_text(encoding='utf-8')) == document

    def test_row_tile_is_refuted(self, runner, row_file):
        result = runner.invoke(cli, ['decide', row_file])
        assert result.exit_code == 1
        assert json.loads(result.output) == {'radius': 2}

    @pytest.mark.slow
    def test_right_triangle_is_refuted(self, runner):
        sample = os.path.join(ROOT, 'docs', 'samples', 'triangle.json')
        result = runner.invoke(cli, ['decide', sample])
        assert result.exit_code == 1
        assert json.loads(result.output) == {'radius': 4}

    def test_repeated_runs_print_the_same_output(self, runner, tromino_json):
        first = runner.invoke(cli, ['decide', tromino_json])
        second = runner.invoke(cli, ['decide', tromino_json, '--threads', '3'])
        assert first.exit_code == second.exit_code == 0
        assert first.output == second.output

    def test_budget_and_resume(self, runner, tromino_json, tmp_path):
        state = tmp_path / 'tromino.state'
        first = runner.invoke(cli, ['decide', tromino_json, '--budget', '1', '--save-state', str(state)])
        assert first.exit_code == 2
        assert json.loads(first.output) == {'state': str(state), 'undecided': True}
        assert state.exists()

        second = runner.invoke(cli, ['decide', tromino_json, '--resume', str(state), '--threads', '2'])
        assert second.exit_code == 0
        assert json.loads(second.output)['lattice'] == [[21, 7], [0, 7]]

    def test_resume_for_another_tile(self, runner, tromino_json, square_json, tmp_path):
        state = tmp_path / 'tromino.state'
        runner.invoke(cli, ['decide', tromino_json, '--budget', '0', '--save-state', str(state)])
        assert runner.invoke(cli, ['decide', square_json, '--resume', str(state)]).exit_code == 65

    def test_bad_budget(self, runner, square_json):
        assert runner.invoke(cli, ['decide', square_json, '--budget', '-3']).exit_code == 64


class TestVerify:
    def test_accepts_certificate(self, runner, square_json, write_file):
        cert = write_file('cert.json', SQUARE_CERTIFICATE)
        result = runner.invoke(cli, ['verify', square_json, cert])
        assert result.exit_code == 0
        assert result.output.strip() == 'accepted'

    def test_rejects_scale_mismatch(self, runner, square_json, write_file):
        cert = write_file('cert.json', json.dumps({'lattice': [[7, 0], [0, 7]], 'translates': [[0, 0]], 'scale': 3}))
        assert runner.invoke(cli, ['verify', square_json, cert]).exit_code == 1

    def test_rejects_sparse_lattice(self, runner, square_json, write_file):
        cert = write_file('cert.json', json.dumps({'lattice': [[14, 0], [0, 14]], 'translates': [[0, 0]], 'scale': 7}))
        result = runner.invoke(cli, ['verify', square_json, cert])
        assert result.exit_code == 1
        assert result.output.strip() == 'rejected'

    def test_periodic_descriptions(self, runner, square_json, row_file, write_file):
        squares = write_file('squares.json', json.dumps({'type': 'periodic', 'base': [[0, 0]],
                                                         'periods': [[7, 0], [0, 7]]}))
        assert runner.invoke(cli, ['verify', square_json, squares]).exit_code == 0
        rows = write_file('rows.json', json.dumps({'type': 'periodic', 'base': [[0, 0], [2, 0]],
                                                   'periods': [[4, 0], [0, 1]]}))
        assert runner.invoke(cli, ['verify', row_file, rows]).exit_code == 1

    @pytest.mark.parametrize('text', ['{"lattice": [[2, 5], [0, 1]], "translates": []}', 'not json'])
    def test_malformed_certificate(self, runner, square_json, write_file, text):
        cert = write_file('cert.json', text)
        assert runner.invoke(cli, ['verify', square_json, cert]).exit_code == 65

    def test_script_entry_point(self, square_json, write_file):
        cert = write_file('cert.json', SQUARE_CERTIFICATE)
        env = dict(os.environ, POLYTILE_LOG_LEVEL='ERROR')
        completed = subprocess.run([sys.executable, 'main.py', 'verify', square_json, cert],
                                   cwd=ROOT, capture_output=True, text=True, env=env)
        assert completed.returncode == 0
        assert completed.stdout.strip() == 'accepted'


class TestAnalyze:
    def test_column_shift_report(self, runner, square_json, write_file, tmp_path):
        tiling = write_file('columns.json', COLUMN_SHIFT)
        svg = tmp_path / 'plates.svg'
        result = runner.invoke(cli, ['analyze', square_json, tiling, '--earthquake', '0,1', '--svg', str(svg)])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report['tiling'] == {'scale': 2, 'verified': True}
        assert len(report['classes']) == 2
        assert report['sliding_direction'] == [0, 1]
        assert [o['offset'] for o in report['merge']['offsets']] == ['0', '-1/2']
        assert ['1', '1/2'] in [p for c in report['classes'] for p in c['positions']]
        assert report['periodicity']['classification'] == 'doubly_periodic'
        assert len(report['earthquake']['plates']) == 2
        assert report['earthquake']['refines_classes'] is True
        assert report['earthquake']['violations'] == []
        assert svg.exists()

    def test_single_class(self, runner, tromino_json, write_file):
        tiling = write_file('staircase.json', json.dumps({'type': 'periodic', 'base': [[0, 0]],
                                                          'periods': [[3, 0], [1, 1]]}))
        report = json.loads(runner.invoke(cli, ['analyze', tromino_json, tiling]).output)
        assert report['sliding_direction'] is None
        assert report['periodicity']['periods'] == [['3', '0'], ['1', '1']]
        assert report['earthquake'] is None

    def test_square_columns_are_plates(self, runner, square_json, write_file):
        tiling = write_file('z2.json', Z2)
        result = runner.invoke(cli, ['analyze', square_json, tiling, '--earthquake', '0,1'])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report['sliding_direction'] is None
        earthquake = report['earthquake']
        assert earthquake['step'] == [0, 7]
        assert earthquake['plates'] == [{'period_subgroup': [[0, 7]], 'plate_count': None,
                                         'representative': [[0, 0]]}]
        assert earthquake['refines_classes'] is True

    def test_repeated_runs_print_the_same_report(self, runner, square_json, write_file):
        tiling = write_file('columns.json', COLUMN_SHIFT)
        args = ['analyze', square_json, tiling, '--earthquake', '0,1']
        first, second = runner.invoke(cli, args), runner.invoke(cli, args)
        assert first.exit_code == second.exit_code == 0
        assert first.output == second.output

    def test_half_planes_are_weakly_periodic(self, runner, square_json):
        tiling = os.path.join(ROOT, 'docs', 'samples', 'half_planes.json')
        result = runner.invoke(cli, ['analyze', square_json, tiling])
        assert result.exit_code == 0
        report = json.loads(result.output)
        assert report['classes'] is None
        assert report['periodicity']['classification'] == 'weakly_periodic'
        assert len(report['periodicity']['pieces']) == 2

    def test_not_a_tiling(self, runner, square_json, write_file):
        tiling = write_file('sparse.json', SPARSE_SQUARES)
        assert runner.invoke(cli, ['analyze', square_json, tiling]).exit_code == 1

    def test_bad_direction(self, runner, square_json, write_file):
        tiling = write_file('columns.json', COLUMN_SHIFT)
        assert runner.invoke(cli, ['analyze', square_json, tiling, '--earthquake', '0,0']).exit_code == 64


class TestRender:
    def test_polygon_to_stdout(self, runner, square_json):
        result = runner.invoke(cli, ['render', square_json, '--cell-pixels', '8'])
        assert result.exit_code == 0
        assert 'width="8"' in result.output

    def test_tiling_needs_description(self, runner, square_json):
        assert runner.invoke(cli, ['render', square_json, '--target', 'tiling']).exit_code == 64

    def test_partition_needs_polygon(self, runner, row_file):
        assert runner.invoke(cli, ['render', row_file, '--target', 'partition']).exit_code == 64

    def test_tile_file(self, runner, row_file):
        result = runner.invoke(cli, ['render', row_file, '--target', 'tile'])
        assert result.exit_code == 0
        assert result.output.count('<path') == 3

    def test_plates_file(self, runner, square_json, write_file, tmp_path):
        tiling = write_file('columns.json', COLUMN_SHIFT)
        out = tmp_path / 'plates.svg'
        result = runner.invoke(cli, ['render', square_json, '--target', 'plates', '--tiling', tiling,
                                     '--earthquake', '0,1', '--viewport', '0,0,4,2', '--out', str(out)])
        assert result.exit_code == 0
        assert 'id="plates"' in out.read_text(encoding='utf-8')


def test_main_returns_usage_code():
    assert main(['decide']) == 64
    assert main(['no-such-command']) == 64
