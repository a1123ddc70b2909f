"""
Tests for the command-line runner: configuration loading, profile
resolution, artifact writers and exit codes.
"""
import csv
import json
import logging
import os
from dataclasses import replace

import numpy as np
import pytest

from backend.maslov.api import cli
from backend.maslov.api.cli import (build_parser, curve_lambda_grid, emit_error, load_run_config, main,
                                    resolve_profile, trace_curves, write_curve_csv, write_plot_script)
from backend.maslov.bundles import detection_function, integrate_unstable
from backend.maslov.models.report import CurvePoint, CurveTable, RunConfig
from backend.maslov.systems import LinearSystem, SystemKind, stable_frame
from backend.maslov.utils.curves import build_curve_graph, order_curves
from backend.maslov.utils.errors import ConfigError


@pytest.fixture(autouse=True)
def keep_test_logging(monkeypatch):
    """main() would otherwise rebind the root handler to the captured stdout."""
    monkeypatch.setattr(cli, 'configure_logging', lambda **kwargs: None)


def _last_json_line(text):
    return json.loads(text.strip().splitlines()[-1])


def test_missing_output_directory(tmp_path, capsys):
    """A missing --out is a configuration error with exit code 2."""
    missing = str(tmp_path / 'nowhere')
    assert main(['--profile', 'kh', '--out', missing]) == 2
    payload = _last_json_line(capsys.readouterr().out)
    assert payload['error'] == 'ConfigError'
    assert payload['details']['path'] == missing


def test_missing_profile_file_exit_code(tmp_path, capsys):
    """A profile path that does not exist fails before any computation."""
    assert main(['--profile', str(tmp_path / 'absent.txt'), '--beta', '0.16', '--out', str(tmp_path)]) == 2
    payload = _last_json_line(capsys.readouterr().out)
    assert 'absent.txt' in payload['message']
    assert json.loads((tmp_path / 'error.json').read_text())['error'] == 'ConfigError'


def test_config_file_rejects_unknown_keys(tmp_path):
    """Run configuration files are validated strictly."""
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'profile': 'kh', 'lambda_infinity': 3.0}))
    with pytest.raises(ConfigError) as exc:
        load_run_config(build_parser().parse_args(['--config', str(path)]))
    assert 'lambda_infinity' in exc.value.details['messages']


def test_flags_override_config_file(tmp_path):
    """Command-line flags take precedence over the config file."""
    path = tmp_path / 'run.json'
    path.write_text(json.dumps({'profile': 'kh', 'ell': 7.0, 'epsilon': 1e-2, 'out': 'elsewhere'}))
    run_config = load_run_config(build_parser().parse_args(['--config', str(path), '--ell', '8',
                                                            '--out', str(tmp_path)]))
    assert isinstance(run_config, RunConfig)
    assert run_config.ell == 8.0
    assert run_config.epsilon == 1e-2
    assert run_config.out == str(tmp_path)
    assert run_config.box_overrides()['ell'] == 8.0


def test_unreadable_config_file(tmp_path):
    """Broken JSON is a configuration error."""
    path = tmp_path / 'run.json'
    path.write_text('{not json')
    with pytest.raises(ConfigError):
        load_run_config(build_parser().parse_args(['--config', str(path)]))


def test_profile_file_requires_beta():
    """A sampled profile carries no parameters, so beta must be given."""
    with pytest.raises(ConfigError) as exc:
        load_run_config(build_parser().parse_args(['--profile', 'data/profile.txt']))
    assert 'beta' in exc.value.details['messages']


def test_sigma2_choices():
    """Only −1, 0 and 1 are accepted for sigma2."""
    with pytest.raises(SystemExit):
        build_parser().parse_args(['--sigma2', '2'])


def test_resolve_builtin_profiles():
    """kh, the power-law family and parameter overrides."""
    assert resolve_profile(RunConfig()).name == 'kh'
    assert resolve_profile(RunConfig(power=2)).params.power_p == 2
    overridden = resolve_profile(RunConfig(beta=0.2))
    assert overridden.params.beta == 0.2
    assert overridden.params.sigma2 == -1


def test_resolve_missing_profile_file(tmp_path):
    with pytest.raises(ConfigError):
        resolve_profile(RunConfig(profile=str(tmp_path / 'absent.txt'), beta=0.16))


def test_resolve_sampled_profile(kh, write_profile, caplog):
    """A file profile gets σ₂ = −1 and p = 1 by default, and says so in the log."""
    xs = np.arange(-70.0, 70.0 + 1e-9, 0.1)
    path = write_profile(xs, kh.value(xs))
    with caplog.at_level(logging.INFO, logger=cli.__name__):
        profile = resolve_profile(RunConfig(profile=path, beta=0.16))
    assert profile.params.sigma2 == -1
    assert profile.params.power_p == 1
    assert profile.value(0.0) == pytest.approx(kh.value(0.0), abs=1e-9)
    assert 'using sigma2 = -1' in caplog.text
    assert 'using power = 1' in caplog.text

    caplog.clear()
    with caplog.at_level(logging.INFO, logger=cli.__name__):
        explicit = resolve_profile(RunConfig(profile=path, beta=0.16, sigma2=0, power=1))
    assert explicit.params.sigma2 == 0
    assert 'using sigma2' not in caplog.text


def test_curve_lambda_grid(kh):
    """L± curve grids start just right of the essential spectrum."""
    grid = curve_lambda_grid(SystemKind.LPLUS, kh)
    assert grid[0] == pytest.approx(-0.16 + 0.06)
    assert grid[-1] == pytest.approx(1.5)
    assert len(grid) == 33
    custom = curve_lambda_grid(SystemKind.LMINUS, kh, RunConfig(curve_lambda_points=5, curve_lambda_max=0.5))
    assert len(custom) == 5
    assert custom[-1] == 0.5


def test_order_curves_links_nearest_neighbours():
    """Mutual nearest neighbours in adjacent columns form one curve."""
    columns = [(0.0, [1.0, 5.0]), (0.1, [1.1, 5.2]), (0.2, [1.3])]
    table = order_curves(columns, 'LPlus')
    assert len(table) == 5
    assert table.curve_count == 2
    first = [p for p in table.points if p.curve == 0]
    assert [p.lam for p in first] == [0.0, 0.1, 0.2]
    assert [p.x for p in first] == [1.0, 1.1, 1.3]


def test_curve_graph_respects_max_jump():
    """Roots farther apart than max_jump are not linked."""
    g = build_curve_graph([(0.0, [0.0]), (0.1, [3.0])], max_jump=1.0)
    assert g.number_of_nodes() == 2
    assert g.number_of_edges() == 0
    assert order_curves([(0.0, [0.0]), (0.1, [3.0])], 'LMinus').curve_count == 2


def test_write_curve_csv(tmp_path):
    """Header lambda,x,operator; values written at full precision."""
    table = CurveTable('LMinus', [CurvePoint(0.1, -2.5, 'LMinus'), CurvePoint(0.2, 1.0 / 3.0, 'LMinus', 1)])
    path = tmp_path / 'curves_lminus.csv'
    write_curve_csv(str(path), table)
    with open(path, newline='') as f:
        rows = list(csv.reader(f))
    assert rows[0] == ['lambda', 'x', 'operator']
    assert rows[1] == ['0.1', '-2.5', 'LMinus']
    assert float(rows[2][1]) == 1.0 / 3.0


def test_write_plot_script(tmp_path, kh):
    """The gnuplot script reads only the CSV files next to it."""
    path = tmp_path / 'plot.gp'
    write_plot_script(str(path), kh, 6.0, [SystemKind.LPLUS, SystemKind.LMINUS])
    script = path.read_text()
    assert "set multiplot layout 1,2" in script
    assert "'curves_lplus.csv'" in script
    assert "'curves_lminus.csv'" in script
    assert 'beta = 0.16' in script


def test_emit_error_writes_error_json(tmp_path, capsys):
    """The error goes to stdout and, when the directory exists, to error.json."""
    emit_error(ConfigError('bad setting', {'key': 'ell'}), str(tmp_path))
    printed = _last_json_line(capsys.readouterr().out)
    assert printed == {'error': 'ConfigError', 'message': 'bad setting', 'details': {'key': 'ell'}}
    assert json.loads((tmp_path / 'error.json').read_text()) == printed


def test_render_curves_png(tmp_path):
    """The optional matplotlib rendering writes a PNG."""
    from backend.maslov.utils.plotting import render_curves

    table = CurveTable('LPlus', [CurvePoint(0.1, -1.0, 'LPlus'), CurvePoint(0.2, -0.5, 'LPlus')])
    path = render_curves([table], str(tmp_path / 'curves.png'), ell=6.0)
    assert os.path.getsize(path) > 0


@pytest.mark.slow
def test_trace_curves_stay_inside_box(kh, box_config):
    """Curve points lie left of ℓ at the requested λ values."""
    table = trace_curves(SystemKind.LMINUS, kh, box_config, [0.5, 0.6])
    assert table.operator == 'LMinus'
    assert all(p.x < 6.0 for p in table.points)
    assert {p.lam for p in table.points} <= {0.5, 0.6}


@pytest.mark.slow
def test_full_run_is_deterministic(tmp_path, kh_report):
    """Two KH runs write byte-identical report.json files matching the in-process report."""
    second = tmp_path / 'second'
    second.mkdir()
    assert main(['--profile', 'kh', '--out', str(tmp_path)]) == 0
    assert main(['--profile', 'kh', '--out', str(second)]) == 0
    assert (tmp_path / 'report.json').read_bytes() == (second / 'report.json').read_bytes()
    assert (tmp_path / 'consistency.json').read_bytes() == (second / 'consistency.json').read_bytes()
    report = json.loads((tmp_path / 'report.json').read_text())
    assert report == json.loads(json.dumps(kh_report.to_dict()))
    assert report['P'] == 1
    assert report['valid'] is True
    consistency = json.loads((tmp_path / 'consistency.json').read_text())
    assert consistency['suite'] is None
    assert consistency['identities']['identities']['N']['ok']
    assert not (tmp_path / 'curves_lplus.csv').exists()


def test_curve_points_above_tolerance_are_dropped(kh, box_config, caplog):
    """A point whose detection value exceeds the row tolerance never reaches the table."""
    cfg = replace(box_config, workers=1)
    with caplog.at_level(logging.WARNING, logger=cli.__name__):
        table = trace_curves(SystemKind.LPLUS, kh, cfg, [-0.05], row_tol=0.0)
    assert len(table) == 0
    assert 'dropping curve point' in caplog.text


@pytest.mark.slow
def test_curve_rows_are_detection_zeros(kh, box_config):
    """Every curve row re-evaluates under the detection function to at most 1e-8."""
    cfg = replace(box_config, workers=1)
    lambdas = [-0.05, 0.3, 0.9]
    table = trace_curves(SystemKind.LPLUS, kh, cfg, lambdas)
    assert len(table) > 0
    system = LinearSystem(SystemKind.LPLUS, kh)
    ell = cfg.resolved(kh).ell
    for lam in lambdas:
        path = integrate_unstable(system, lam, x_end=ell, control=cfg.control)
        detector = detection_function(path, stable_frame(lam, system.kind, system.params))
        for point in table.points:
            if point.lam == lam:
                assert abs(detector(point.x)) <= 1e-8
