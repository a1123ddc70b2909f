"""
Command-line runner: stability report, eigenvalue curves and plot script.

Usage:
    python run.py --profile kh --out out --curves
    python run.py --profile data/profile.txt --beta 0.16 --sigma2 -1 --out out --check

Exit codes: 0 ok, 1 computation error, 2 configuration or I/O error.
"""
import argparse
import csv
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from jinja2 import Environment, FileSystemLoader
from marshmallow import ValidationError

from .. import configure_logging
from ..bundles import detection_function, integrate_unstable, locate_conjugate_points
from ..config.config import get_config
from ..maslovbox import MaslovBoxConfig, assemble_report, consistency_suite
from ..models.report import CurveTable, RunConfig
from ..profiles import Parameters, WaveProfile, kh_profile, load_sampled_profile, power_law_profile
from ..systems import LinearSystem, SystemKind, essential_spectrum, stable_frame
from ..utils.curves import order_curves
from ..utils.errors import ConfigError, MaslovError
from ..utils.parallel import ordered_map
from .schemas import RunConfigSchema

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), 'templates')
CURVE_FILES = {SystemKind.LPLUS: 'curves_lplus.csv', SystemKind.LMINUS: 'curves_lminus.csv'}
CURVE_COLORS = {SystemKind.LPLUS: 'blue', SystemKind.LMINUS: 'red'}
DEFAULT_SIGMA2 = -1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Maslov-index spectral stability of fourth-order NLS solitons')
    parser.add_argument('--config', help='JSON run configuration; flags override it')
    parser.add_argument('--profile', help="'kh' or a path to a sampled profile (x phi per line)")
    parser.add_argument('--beta', type=float, help='Frequency beta')
    parser.add_argument('--sigma2', type=int, choices=[-1, 0, 1], help='Second-order dispersion sign')
    parser.add_argument('--power', type=int, help='Nonlinearity exponent p')
    parser.add_argument('--ell', type=float, help='Right edge of the Maslov box')
    parser.add_argument('--lambda-inf', dest='lambda_inf', type=float, help='Top edge of the Maslov box')
    parser.add_argument('--epsilon', type=float, help='Corner excision')
    parser.add_argument('--out', help='Existing output directory')
    parser.add_argument('--curves', action='store_true', default=None, help='Trace eigenvalue curves')
    parser.add_argument('--check', action='store_true', default=None, help='Run the consistency suite')
    parser.add_argument('--png', action='store_true', default=None, help='Also render curves.png')
    parser.add_argument('--quiet', action='store_true', default=None, help='Only log warnings')
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """RunConfig from the optional --config file, then flags.

    Raises:
        ConfigError: unreadable or invalid config file.
    """
    data: Dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, 'r') as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config file {args.config}: {e}", {'path': args.config})
        if not isinstance(data, dict):
            raise ConfigError(f"config file {args.config} must hold a JSON object", {'path': args.config})
    for key in ('profile', 'beta', 'sigma2', 'power', 'ell', 'lambda_inf', 'epsilon', 'out',
                'curves', 'check', 'png', 'quiet'):
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    try:
        return RunConfigSchema().load(data)
    except ValidationError as e:
        raise ConfigError('invalid run configuration', {'messages': e.messages})


def resolve_profile(run_config: RunConfig) -> WaveProfile:
    """The built-in family member or a sampled profile file.

    Raises:
        ConfigError: missing profile file or parameters.
    """
    if run_config.profile == 'kh':
        profile = power_law_profile(run_config.power) if run_config.power not in (None, 1) else kh_profile()
        if run_config.beta is not None or run_config.sigma2 is not None:
            p = profile.params
            params = Parameters(run_config.beta if run_config.beta is not None else p.beta,
                                run_config.sigma2 if run_config.sigma2 is not None else p.sigma2, p.power_p)
            if params != p:
                logger.warning(f"Overriding built-in parameters {p.to_dict()} with {params.to_dict()}; "
                               "the profile no longer solves the standing wave equation")
                profile = profile.with_params(params)
        return profile
    path = run_config.profile
    if not os.path.isfile(path):
        raise ConfigError(f"profile file not found: {path}", {'path': path})
    sigma2 = run_config.sigma2
    if sigma2 is None:
        sigma2 = DEFAULT_SIGMA2
        logger.info(f"No sigma2 given for {path}; using sigma2 = {sigma2}")
    power = run_config.power
    if power is None:
        power = 1
        logger.info(f"No power given for {path}; using power = {power}")
    params = Parameters(run_config.beta, sigma2, power)
    return load_sampled_profile(path, params)


def curve_lambda_grid(kind, profile: WaveProfile, run_config: Optional[RunConfig] = None, config=None) -> np.ndarray:
    """[ess_right + offset, λ_max] for the L± curve plots."""
    config = config or get_config()
    run_config = run_config or RunConfig()
    start = essential_spectrum(kind, profile.params).endpoint + config.CURVE_LAMBDA_OFFSET
    stop = run_config.curve_lambda_max if run_config.curve_lambda_max is not None else config.CURVE_LAMBDA_MAX
    points = run_config.curve_lambda_points or config.CURVE_LAMBDA_POINTS
    return np.linspace(start, stop, points)


def _curve_column(args):
    system, lam, ell, control, scan_step, xtol, touch_tol, row_tol = args
    path = integrate_unstable(system, lam, x_end=ell, control=control)
    crossings = locate_conjugate_points(system, ell, 0.0, lam, path=path, control=control,
                                        scan_step=scan_step, xtol=xtol, touch_tol=touch_tol)
    detector = detection_function(path, stable_frame(lam, system.kind, system.params))
    kept = []
    for crossing in crossings:
        value = abs(detector(crossing.coordinate))
        if value > row_tol:
            logger.warning(f"{system.kind.value}: dropping curve point x = {crossing.coordinate:.10f} at "
                           f"lambda = {lam} (detection {value:.1e} > {row_tol:.0e})")
            continue
        kept.append(crossing.coordinate)
    return kept


def trace_curves(kind, profile: WaveProfile, cfg: MaslovBoxConfig, lambda_grid: Sequence[float],
                 max_jump: Optional[float] = None, row_tol: Optional[float] = None) -> CurveTable:
    """Zeros of det(S(λ)X(x, λ) − Y(x, λ)) on [x_start, ℓ] for every λ in the grid.

    Every kept point re-evaluates under the detection function to at most
    row_tol; points above it are dropped with a warning.
    """
    kind = SystemKind(kind)
    cfg = cfg.resolved(profile)
    row_tol = row_tol if row_tol is not None else get_config().CURVE_ROW_TOL
    system = LinearSystem(kind, profile)
    tasks = [(system, float(lam), cfg.ell, cfg.control, cfg.x_scan_step, cfg.root_xtol, cfg.touch_tol, row_tol)
             for lam in lambda_grid]
    roots = ordered_map(_curve_column, tasks, cfg.workers)
    columns = list(zip([float(lam) for lam in lambda_grid], roots))
    table = order_curves(columns, kind.value, max_jump if max_jump is not None else get_config().CURVE_MAX_JUMP)
    logger.info(f"{kind.value}: {len(table)} curve point(s) over {len(columns)} lambda values")
    return table


def write_json(path: str, payload: Dict[str, Any]) -> None:
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')


def write_curve_csv(path: str, table: CurveTable) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(CurveTable.HEADER)
        for point in table.points:
            writer.writerow(point.to_row())


def write_plot_script(path: str, profile: WaveProfile, ell: float, kinds: Sequence[SystemKind]) -> None:
    env = Environment(loader=FileSystemLoader(TEMPLATE_DIR), keep_trailing_newline=True)
    template = env.get_template('plot.gp.j2')
    panels = [{'operator': k.value, 'csv': CURVE_FILES[k], 'color': CURVE_COLORS[k]} for k in kinds]
    p = profile.params
    with open(path, 'w') as f:
        f.write(template.render(profile_name=profile.name, beta=p.beta, sigma2=p.sigma2, power=p.power_p,
                                ell=ell, panels=panels))


def emit_error(exc: MaslovError, out_dir: Optional[str]) -> None:
    """Structured error on stdout and, when possible, in out/error.json."""
    payload = exc.to_dict()
    print(json.dumps(payload, sort_keys=True))
    if out_dir and os.path.isdir(out_dir):
        try:
            write_json(os.path.join(out_dir, 'error.json'), payload)
        except OSError:
            logger.warning(f"could not write error.json to {out_dir}")


def run(run_config: RunConfig) -> List[str]:
    """Execute one run and write its artifacts.

    Returns:
        Paths of the files written.

    Raises:
        ConfigError: output directory missing or not writable.
        MaslovError: any computation failure.
    """
    out_dir = run_config.out
    if not os.path.isdir(out_dir):
        raise ConfigError(f"output directory does not exist: {out_dir}", {'path': out_dir})
    if not os.access(out_dir, os.W_OK):
        raise ConfigError(f"output directory is not writable: {out_dir}", {'path': out_dir})

    profile = resolve_profile(run_config)
    logger.info(f"Profile {profile.name}: {profile.params.to_dict()}, support {profile.support_halfwidth:.3f}")
    cfg = MaslovBoxConfig.from_config(**run_config.box_overrides()).resolved(profile)

    written = []
    report = assemble_report(profile, cfg)
    report_path = os.path.join(out_dir, 'report.json')
    write_json(report_path, report.to_dict())
    written.append(report_path)
    logger.info(f"Wrote {report_path}")

    suite = consistency_suite(profile, cfg, report) if run_config.check else None
    consistency_path = os.path.join(out_dir, 'consistency.json')
    write_json(consistency_path, {'identities': report.consistency, 'suite': suite})
    written.append(consistency_path)

    if run_config.curves:
        kinds = (SystemKind.LPLUS, SystemKind.LMINUS)
        tables = []
        for kind in kinds:
            table = trace_curves(kind, profile, cfg, curve_lambda_grid(kind, profile, run_config))
            csv_path = os.path.join(out_dir, CURVE_FILES[kind])
            write_curve_csv(csv_path, table)
            written.append(csv_path)
            tables.append(table)
        if run_config.plot:
            script_path = os.path.join(out_dir, 'plot.gp')
            write_plot_script(script_path, profile, cfg.ell, kinds)
            written.append(script_path)
        if run_config.png:
            from ..utils.plotting import render_curves
            written.append(render_curves(tables, os.path.join(out_dir, 'curves.png'), cfg.ell))

    if not report.valid:
        logger.warning(f"Report written with failed checks: {report.failures}")
    return written


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(level='WARNING' if args.quiet else None)
    out_dir = args.out
    try:
        run_config = load_run_config(args)
        out_dir = run_config.out
        if run_config.quiet:
            configure_logging(level='WARNING')
        run(run_config)
    except MaslovError as exc:
        logger.error(f"{type(exc).__name__}: {exc.message}")
        emit_error(exc, out_dir)
        return exc.exit_code
    except Exception as exc:
        logger.exception('Unexpected failure')
        emit_error(MaslovError(str(exc), {'type': type(exc).__name__}), out_dir)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
