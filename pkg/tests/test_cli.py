"""
Test the Command-Line Front End
Exit codes, output formats, config merging and file output
"""

import io
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src' / 'cli'))
sys.path.insert(0, str(Path(__file__).parent.parent / 'src' / 'geometry'))
sys.path.insert(0, str(Path(__file__).parent.parent / 'config'))

from run_tubes import THREADS_ENV, UsageError, parse_grid, parse_int_list, run

PRODUCT_TUBE = ['tube', '--kappa', '1', '--tau', '0', '--a', '1', '--H', '2']


def write_config(path, **fields):
    path.write_text(json.dumps({'schema': 'cmc-tubes/1', **fields}))
    return str(path)


class TestOutput:
    def test_x0(self, capsys):
        assert run(['x0']) == 0
        out = capsys.readouterr().out
        assert out.startswith("0.8335") and out.endswith("\n")
        assert len(out.strip().split(".")[1]) == 12

    def test_product_tube(self, capsys):
        assert run(PRODUCT_TUBE) == 0
        record = json.loads(capsys.readouterr().out)
        assert record['J_tube'] == -4.0
        assert record['residual'] == 0.0
        assert record['multiplicity'] == 1

    def test_classify_text_and_json(self, capsys):
        args = ['classify', '--kappa', '1', '--tau', '0', '--a', '1', '--H', '1', '--J', '-2']
        assert run(args) == 0
        assert capsys.readouterr().out == "Tube\n"
        assert run(['--json'] + args) == 0
        assert json.loads(capsys.readouterr().out)['surface_class'] == "Tube"

    def test_embed_berger_sequence_end(self, capsys):
        assert run(['embed', '--kappa', '4', '--tau', '0.5', '--m', '5', '--H', '1']) == 0
        record = json.loads(capsys.readouterr().out)
        assert record['embedded'] is False
        assert record['compact'] is True
        assert record['m'] == 5

    def test_foliation(self, capsys):
        assert run(['foliation', '--kappa', '1', '--tau', '0', '--a', '1']) == 0
        assert json.loads(capsys.readouterr().out)['foliates'] is True

    def test_h0_symmetric_pitch_row(self, capsys):
        assert run(['h0', '--kappa', '1', '--tau', '1', '--a-grid', '2:2:1']) == 0
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(frame.columns) == ['a', 'H0', 'roots', 'status', 'error']
        assert frame.loc[0, 'status'] == 'not_applicable'
        assert frame.loc[0, 'H0'] == 0.0

    def test_profile_csv(self, capsys):
        assert run(['profile', '--kappa', '0', '--tau', '1', '--a', '1', '--H', '2', '--J', '-0.9',
                    '--nodes', '9']) == 0
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(frame.columns) == ['sigma', 'r', 'h']
        assert len(frame) == 9

    def test_family_csv(self, capsys):
        assert run(['family', '--kappa', '1', '--tau', '0', '--a', '1', '--H-grid', '1:2:3']) == 0
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        np.testing.assert_allclose(frame['J_tube'], [-2.0, -3.0, -4.0])

    def test_deterministic(self, capsys):
        run(PRODUCT_TUBE)
        first = capsys.readouterr().out
        run(PRODUCT_TUBE)
        assert capsys.readouterr().out == first

    def test_out_file(self, capsys, tmp_path):
        target = tmp_path / "tube.json"
        assert run(['--out', str(target)] + PRODUCT_TUBE) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())['J_tube'] == -4.0

    def test_mesh(self, capsys, tmp_path):
        target = tmp_path / "tube.obj"
        assert run(['--json', '--out', str(target), 'mesh', '--kappa', '4', '--tau', '0.5', '--a', '0.25',
                    '--H', '1', '--res-sigma', '9', '--res-theta', '9']) == 0
        record = json.loads(capsys.readouterr().out)
        assert record['path'] == str(target)
        assert target.read_text().startswith("v ")

    def test_mesh_out_after_subcommand(self, capsys, tmp_path):
        target = tmp_path / "tube.obj"
        assert run(['mesh', '--kappa', '4', '--tau', '0.5', '--a', '0.25', '--H', '1',
                    '--res-sigma', '9', '--res-theta', '9', '--out', str(target)]) == 0
        assert target.read_text().startswith("v ")

    def test_json_after_subcommand(self, capsys):
        args = ['classify', '--kappa', '1', '--tau', '0', '--a', '1', '--H', '1', '--J', '-2', '--json']
        assert run(args) == 0
        assert json.loads(capsys.readouterr().out)['surface_class'] == "Tube"

    def test_flag_after_subcommand_wins(self, capsys, tmp_path):
        before, after = tmp_path / "before.json", tmp_path / "after.json"
        assert run(['--out', str(before)] + PRODUCT_TUBE + ['--out', str(after)]) == 0
        assert not before.exists()
        assert json.loads(after.read_text())['J_tube'] == -4.0

    def test_flag_before_subcommand_kept(self, capsys, tmp_path):
        target = tmp_path / "tube.json"
        assert run(['--out', str(target)] + PRODUCT_TUBE + ['--tol', '1e-10']) == 0
        assert json.loads(target.read_text())['J_tube'] == -4.0


class TestExitCodes:
    def test_unknown_command(self):
        assert run(['bogus']) == 64

    def test_help(self, capsys):
        assert run(['--help']) == 0

    def test_missing_flag(self):
        assert run(['tube', '--kappa', '1', '--tau', '0', '--a', '1']) == 64

    def test_outside_classified_region(self):
        assert run(['classify', '--kappa', '1', '--tau', '0', '--a', '1', '--H', '1', '--J', '0.5']) == 1

    def test_space_form_rejected(self):
        assert run(['tube', '--kappa', '4', '--tau', '1', '--a', '1', '--H', '1']) == 1

    def test_mesh_requires_out(self):
        assert run(['mesh', '--kappa', '4', '--tau', '0.5', '--a', '0.25', '--H', '1']) == 64

    def test_bad_tolerance(self):
        assert run(['--quad-tol', '-1'] + PRODUCT_TUBE) == 64

    def test_thread_env(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, "zero")
        assert run(['x0']) == 64
        monkeypatch.setenv(THREADS_ENV, "0")
        assert run(['x0']) == 64

    def test_unwritable_out(self, tmp_path):
        assert run(['--out', str(tmp_path / "missing" / "x.json")] + PRODUCT_TUBE) == 2


class TestConfig:
    def test_flags_win(self, capsys, tmp_path):
        config = write_config(tmp_path / "run.json", kappa=1.0, tau=0.0, a=1.0, H=1.0)
        assert run(['--config', config, 'tube', '--H', '2']) == 0
        assert json.loads(capsys.readouterr().out)['J_tube'] == -4.0

    def test_config_fills_json_flag(self, capsys, tmp_path):
        config = write_config(tmp_path / "run.json", json=True)
        assert run(['--config', config, 'classify', '--kappa', '1', '--tau', '0', '--a', '1',
                    '--H', '1', '--J', '-2']) == 0
        assert json.loads(capsys.readouterr().out)['surface_class'] == "Tube"

    def test_wrong_schema(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({'schema': 'cmc-tubes/0'}))
        assert run(['--config', str(path), 'x0']) == 64

    def test_unknown_key(self, tmp_path):
        config = write_config(tmp_path / "run.json", colour='red')
        assert run(['--config', config, 'x0']) == 64

    def test_missing_file(self, tmp_path):
        assert run(['--config', str(tmp_path / "absent.json"), 'x0']) == 64


class TestParsing:
    def test_linear_grid(self):
        np.testing.assert_allclose(parse_grid("1:3:3"), [1.0, 2.0, 3.0])

    def test_log_grid(self):
        np.testing.assert_allclose(parse_grid("1:100:3:log"), [1.0, 10.0, 100.0])

    @pytest.mark.parametrize("text", ["1:2", "1:2:x", "1:2:3:lin", "0:2:3:log", "1:2:0"])
    def test_bad_grid(self, text):
        with pytest.raises(UsageError):
            parse_grid(text)

    def test_int_list(self):
        assert parse_int_list("1,2, 5") == [1, 2, 5]
        with pytest.raises(UsageError):
            parse_int_list("0,1")
