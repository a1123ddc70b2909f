"""
The Maslov box [−∞, ℓ] × [0, λ∞]: edge indices, Morse indices counted two
ways, the corner contribution, and the stability report.

Edges:
    Γ₁  λ = 0, x from −∞ to ℓ (conjugate points)
    Γ₂  x = ℓ, λ from 0 to λ∞ (eigenvalues)
    Γ₃  λ = λ∞ (must be empty)
    Γ₄  x = −∞ (must be empty)
"""
import logging
from dataclasses import dataclass, field, fields, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .bundles import (BundlePath, CrossingLocation, Edge, LambdaSweep, StepControl, bundle_pair,
                      count_with_multiplicity, intersection_dimension, integrate_unstable,
                      locate_conjugate_points, locate_lambda_crossings)
from .config.config import get_config
from .forms import (CrossingFormSeries, Role, crossing_form_series, maslov_contribution,
                    partial_signatures, relative_crossing_form_lambda)
from .models.report import StabilityReport, Verdicts
from .profiles import WaveProfile
from .solves import CorrectionData, Discretization, correction_term, key_integrals
from .systems import LinearSystem, SystemKind, essential_spectrum, stable_frame, unstable_frame
from .utils.errors import (ConfigError, InconsistencyError, MaslovError, NonconvergenceError,
                           PreconditionError, UnsupportedCaseError)
from .utils.linalg import positive_qr

logger = logging.getLogger(__name__)

KH_ELL = 6.0


def default_lambda_inf(profile: WaveProfile, margin: float = 1.0) -> float:
    """β + (2p+1)·max φ^{2p} + margin, a bound on the potential part of L±."""
    p = profile.params
    return float(p.beta + (2 * p.power_p + 1) * profile.max_potential() + margin)


def default_ell(profile: WaveProfile, margin: float = 2.0) -> float:
    if profile.name == 'kh':
        return KH_ELL
    return float(profile.support_halfwidth + margin)


@dataclass
class MaslovBoxConfig:
    """Box geometry, grids and tolerances for one run."""
    ell: Optional[float] = None
    lambda_inf: Optional[float] = None
    epsilon: float = 1e-3
    lambda_points: int = 64
    x_scan_step: float = 0.05
    root_xtol: float = 1e-10
    touch_tol: float = 1e-7
    intersection_tol: float = 1e-6
    form_tol: float = 1e-8
    max_form_order: int = 9
    ell_margin: float = 2.0
    lambda_inf_margin: float = 1.0
    max_escalations: int = 3
    control: StepControl = field(default_factory=StepControl)
    disc: Discretization = field(default_factory=Discretization)
    workers: Optional[int] = None

    @classmethod
    def from_config(cls, config=None, **overrides) -> 'MaslovBoxConfig':
        """Class defaults of the active Config, then non-None overrides.

        `renorm_threshold` is routed to the step control.

        Raises:
            ConfigError: unknown override.
        """
        config = config or get_config()
        overrides = {k: v for k, v in overrides.items() if v is not None}
        control = overrides.pop('control', None) or StepControl.from_config(
            config, renorm_threshold=overrides.pop('renorm_threshold', None))
        overrides.pop('renorm_threshold', None)
        values = dict(ell=config.ELL, lambda_inf=config.LAMBDA_INF, epsilon=config.EPSILON,
                      lambda_points=config.LAMBDA_POINTS, x_scan_step=config.X_SCAN_STEP,
                      root_xtol=config.ROOT_XTOL, touch_tol=config.TOUCH_TOL,
                      intersection_tol=config.INTERSECTION_TOL, form_tol=config.FORM_TOL,
                      max_form_order=config.MAX_FORM_ORDER, ell_margin=config.ELL_MARGIN,
                      lambda_inf_margin=config.LAMBDA_INF_MARGIN, max_escalations=config.MAX_ESCALATIONS,
                      workers=config.THREADS)
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(overrides) - known)
        if unknown:
            raise ConfigError(f"unknown box settings: {', '.join(unknown)}", {'unknown': unknown})
        values.update(overrides)
        values.setdefault('disc', Discretization.from_config(config))
        return cls(control=control, **values)

    def resolved(self, profile: WaveProfile) -> 'MaslovBoxConfig':
        """Fill in ℓ and λ∞ from the profile and validate the box.

        Raises:
            ConfigError: ℓ, λ∞ or ε outside their ranges.
        """
        cfg = replace(self,
                      ell=self.ell if self.ell is not None else default_ell(profile, self.ell_margin),
                      lambda_inf=(self.lambda_inf if self.lambda_inf is not None
                                  else default_lambda_inf(profile, self.lambda_inf_margin)))
        if not cfg.ell > 0:
            raise ConfigError(f"ell must be positive, got {cfg.ell}", {'ell': cfg.ell})
        if not 0 < cfg.epsilon < min(cfg.ell, cfg.lambda_inf):
            raise ConfigError(f"epsilon must lie in (0, min(ell, lambda_inf)), got {cfg.epsilon}",
                              {'epsilon': cfg.epsilon})
        if cfg.lambda_points < 3:
            raise ConfigError("lambda_points must be at least 3", {'lambda_points': cfg.lambda_points})
        return cfg

    def to_dict(self) -> Dict[str, Any]:
        return {
            'ell': self.ell,
            'lambda_inf': self.lambda_inf,
            'epsilon': self.epsilon,
            'lambda_points': self.lambda_points,
            'x_scan_step': self.x_scan_step,
            'rtol': self.control.rtol,
            'atol': self.control.atol,
            'renorm_threshold': self.control.renorm_threshold,
            'form_tol': self.form_tol,
            'touch_tol': self.touch_tol,
            'solver_h': self.disc.h,
        }


@dataclass
class EdgeCheck:
    """Outcome of an emptiness check on Γ₃ or Γ₄."""
    edge: Edge
    kind: SystemKind
    ok: bool
    crossings: List[CrossingLocation] = field(default_factory=list)
    min_gap: Optional[float] = None

    def to_dict(self):
        return {'kind': self.kind.value, 'ok': self.ok, 'min_gap': self.min_gap,
                'crossings': [c.to_dict() for c in self.crossings]}


def check_gamma3(system: LinearSystem, cfg: MaslovBoxConfig) -> EdgeCheck:
    """𝔼ᵘ(x, λ∞) against 𝔼ˢ(ℓ, λ∞) for x in [x_start, ℓ]."""
    unstable, stable = bundle_pair(system, cfg.lambda_inf, cfg.ell, cfg.control)
    crossings = locate_conjugate_points(system, cfg.ell, 0.0, cfg.lambda_inf, reference=stable.end_frame,
                                        path=unstable, control=cfg.control, scan_step=cfg.x_scan_step,
                                        xtol=cfg.root_xtol, touch_tol=cfg.touch_tol)
    for c in crossings:
        c.which_edge = Edge.GAMMA3
    check = EdgeCheck(Edge.GAMMA3, system.kind, not crossings, crossings)
    logger.debug(f"Gamma3 {system.kind.value} at lambda_inf = {cfg.lambda_inf}: {len(crossings)} crossing(s)")
    return check


def check_gamma4(system: LinearSystem, sweep: LambdaSweep, cfg: MaslovBoxConfig) -> EdgeCheck:
    """𝕌(λ) against 𝔼ˢ(ℓ, λ) on the sweep grid."""
    dets, gaps = [], []
    for lam, q_stable in zip(sweep.grid, sweep.stable_frames):
        q_unstable = positive_qr(unstable_frame(float(lam), system.kind, system.params).matrix)[0]
        pair = np.hstack([q_unstable, q_stable])
        dets.append(np.linalg.det(pair))
        gaps.append(np.linalg.svd(pair, compute_uv=False)[-1])
    dets = np.array(dets)
    sign_changes = np.nonzero(dets[:-1] * dets[1:] <= 0)[0]
    crossings = [CrossingLocation(float(sweep.grid[i]), 1, Edge.GAMMA4, detection='sign_change')
                 for i in sign_changes]
    min_gap = float(np.min(gaps))
    ok = not crossings and min_gap > cfg.intersection_tol
    return EdgeCheck(Edge.GAMMA4, system.kind, ok, crossings, min_gap)


@dataclass
class MorseIndex:
    """A Morse index counted by conjugate points and by the Γ₂ sweep."""
    kind: SystemKind
    conjugate_points: List[CrossingLocation]
    sweep: LambdaSweep
    path: BundlePath

    @property
    def count_via_conjugate_points(self) -> int:
        return count_with_multiplicity(self.conjugate_points)

    @property
    def count_via_lambda_sweep(self) -> int:
        return count_with_multiplicity([c for c in self.sweep.crossings if not c.endpoint])

    @property
    def counts(self) -> Tuple[int, int]:
        return self.count_via_conjugate_points, self.count_via_lambda_sweep


def _sweep(system: LinearSystem, cfg: MaslovBoxConfig) -> LambdaSweep:
    return locate_lambda_crossings(system, cfg.ell, (cfg.epsilon, cfg.lambda_inf), cfg.lambda_points,
                                   cfg.control, cfg.workers, cfg.root_xtol, cfg.touch_tol,
                                   cfg.intersection_tol)


def morse_index(kind, profile: WaveProfile, cfg: MaslovBoxConfig,
                sweep: Optional[LambdaSweep] = None) -> MorseIndex:
    """P (kind LPlus) or Q (kind LMinus), two ways.

    Raises:
        PreconditionError: kind is N.
        InconsistencyError: the two counts differ.
    """
    kind = SystemKind(kind)
    if kind is SystemKind.N:
        raise PreconditionError("Morse indices are defined for LPlus and LMinus only", {'kind': kind.value})
    cfg = cfg if cfg.ell is not None and cfg.lambda_inf is not None else cfg.resolved(profile)
    system = LinearSystem(kind, profile)
    path = integrate_unstable(system, 0.0, x_end=cfg.ell, control=cfg.control)
    conjugate = locate_conjugate_points(system, cfg.ell, cfg.epsilon, 0.0, path=path, control=cfg.control,
                                        scan_step=cfg.x_scan_step, xtol=cfg.root_xtol, touch_tol=cfg.touch_tol)
    sweep = sweep or _sweep(system, cfg)
    result = MorseIndex(kind, conjugate, sweep, path)
    via_points, via_sweep = result.counts
    if via_points != via_sweep:
        raise InconsistencyError(
            f"{kind.value}: {via_points} conjugate point(s) but {via_sweep} positive eigenvalue(s)",
            {'kind': kind.value, 'conjugate_points': [c.to_dict() for c in conjugate],
             'lambda_crossings': [c.to_dict() for c in sweep.crossings], 'ell': cfg.ell,
             'lambda_inf': cfg.lambda_inf})
    logger.info(f"{kind.value}: Morse index {via_points} (conjugate points and sweep agree)")
    return result


def corner_from_forms(I1: float, I2: float, form_tol: float = 1e-8) -> int:
    """Arrival 1 along Γ₁ plus departure −n₋(diag(2I₁, −2I₂)).

    Equal to correction_term for every sign pair by construction.
    """
    _, n_minus, _ = partial_signatures(np.diag([2.0 * I1, -2.0 * I2]), form_tol)
    return 1 - n_minus


def corner_contribution(I1: float, I2: float, zero_tol: float = 1e-10,
                        series: Optional[CrossingFormSeries] = None) -> int:
    """𝔠 from the sign table, checked against the crossing-form computation.

    The second-order corner form is diag(2I₁, −2I₂) built from the same two
    integrals, so agreement only confirms the bookkeeping: the computed
    first-order form vanished and arrival plus departure follow the table's
    convention. The independent check of 𝔠 is the N homotopy identity in
    assemble_report.

    Args:
        series: The computed relative λ-form series of N at the corner; when
            omitted the second-order form is built from I₁ and I₂ directly.

    Raises:
        UnsupportedCaseError: I₁ or I₂ vanishes.
        InconsistencyError: table and forms disagree.
    """
    table = correction_term(I1, I2, zero_tol)
    if series is None:
        via_forms = corner_from_forms(I1, I2)
    else:
        via_forms = 1 + maslov_contribution(series, Role.INITIAL).value
    if table != via_forms:
        raise InconsistencyError(f"corner term: table gives {table}, crossing forms give {via_forms}",
                                 {'I1': I1, 'I2': I2, 'table': table, 'forms': via_forms})
    return table


def verdicts(P: int, Q: int, I2: Optional[float]) -> Verdicts:
    """Jones–Grillakis flag for |P − Q| ≥ 2; Vakhitov–Kolokolov rule for P = 1, Q = 0."""
    jg = abs(P - Q) >= 2
    if P == 1 and Q == 0 and I2 is not None and I2 != 0:
        stable = I2 < 0
        return Verdicts(jg, 'stable' if stable else 'unstable', True if stable else None)
    return Verdicts(jg, 'not_applicable', None)


def _x_contributions(system: LinearSystem, morse: MorseIndex, cfg: MaslovBoxConfig) -> List[Dict[str, Any]]:
    reference = stable_frame(0.0, system.kind, system.params)
    out = []
    for crossing in morse.conjugate_points:
        series = crossing_form_series(system, morse.path, reference, crossing.coordinate, 'x',
                                      cfg.form_tol, cfg.max_form_order, cfg.control)
        entry = series.to_dict()
        entry['contribution'] = maslov_contribution(series, Role.INTERIOR).value
        out.append(entry)
    return out


def _lambda_contributions(system: LinearSystem, sweep: LambdaSweep, cfg: MaslovBoxConfig) -> List[Dict[str, Any]]:
    out = []
    for crossing in sweep.crossings:
        if crossing.endpoint:
            continue
        series = relative_crossing_form_lambda(system, cfg.ell, crossing.coordinate, control=cfg.control,
                                               x_far=sweep.x_far, form_tol=cfg.form_tol,
                                               intersection_tol=cfg.intersection_tol)
        entry = series.to_dict()
        entry['contribution'] = maslov_contribution(series, Role.INTERIOR).value
        out.append(entry)
    return out


def _corner_dimension(system: LinearSystem, cfg: MaslovBoxConfig) -> int:
    unstable, stable = bundle_pair(system, 0.0, cfg.ell, cfg.control)
    return intersection_dimension(unstable.end_frame, stable.end_frame, cfg.intersection_tol)


def _lpm_corner(system: LinearSystem, cfg: MaslovBoxConfig) -> Dict[str, Any]:
    """Arrival by the sign of the x-form (L₊: 0, L₋: dim), departure −n₋ of the λ-form."""
    dim = _corner_dimension(system, cfg)
    if dim == 0:
        return {'dim': 0, 'arrival': 0, 'departure': 0, 'value': 0}
    series = relative_crossing_form_lambda(system, cfg.ell, 0.0, control=cfg.control, form_tol=cfg.form_tol,
                                           intersection_tol=cfg.intersection_tol)
    arrival = 0 if system.kind is SystemKind.LPLUS else dim
    departure = maslov_contribution(series, Role.INITIAL).value
    return {'dim': dim, 'arrival': arrival, 'departure': departure, 'value': arrival + departure}


def _identity(gamma1: int, corner: int, gamma2: int) -> Dict[str, Any]:
    total = gamma1 + corner + gamma2
    return {'gamma1': gamma1, 'corner': corner, 'gamma2': gamma2, 'sum': total, 'ok': total == 0}


def _escalate(profile: WaveProfile, cfg: MaslovBoxConfig):
    """Grow ℓ until Γ₄ is empty and λ∞ until Γ₃ is empty, then sweep Γ₂.

    Raises:
        InconsistencyError: an edge is still occupied after max_escalations.
    """
    systems = {kind: LinearSystem(kind, profile) for kind in SystemKind}
    ell_steps = lambda_steps = 0
    while True:
        sweeps = {kind: _sweep(system, cfg) for kind, system in systems.items()}
        gamma4 = {kind: check_gamma4(systems[kind], sweeps[kind], cfg) for kind in SystemKind}
        failed = [k.value for k, check in gamma4.items() if not check.ok]
        if failed:
            if ell_steps >= cfg.max_escalations:
                raise InconsistencyError(f"Gamma4 not empty for {failed} up to ell = {cfg.ell}",
                                         {'edge': 'Gamma4', 'ell': cfg.ell, 'kinds': failed})
            ell_steps += 1
            logger.warning(f"Gamma4 occupied for {failed}; ell {cfg.ell} -> {cfg.ell + 1}")
            cfg = replace(cfg, ell=cfg.ell + 1.0)
            continue
        gamma3 = {kind: check_gamma3(systems[kind], cfg) for kind in SystemKind}
        failed = [k.value for k, check in gamma3.items() if not check.ok]
        if failed:
            if lambda_steps >= cfg.max_escalations:
                raise InconsistencyError(f"Gamma3 not empty for {failed} up to lambda_inf = {cfg.lambda_inf}",
                                         {'edge': 'Gamma3', 'lambda_inf': cfg.lambda_inf, 'kinds': failed})
            lambda_steps += 1
            logger.warning(f"Gamma3 occupied for {failed}; lambda_inf {cfg.lambda_inf} -> {2 * cfg.lambda_inf}")
            cfg = replace(cfg, lambda_inf=2.0 * cfg.lambda_inf)
            continue
        return cfg, systems, sweeps, gamma3, gamma4


def assemble_report(profile: WaveProfile, cfg: Optional[MaslovBoxConfig] = None) -> StabilityReport:
    """Run the whole box for one profile.

    Raises:
        InconsistencyError: P ≠ p_c, Q ≠ q_c, or an edge cannot be emptied.
    """
    cfg = (cfg or MaslovBoxConfig.from_config()).resolved(profile)
    logger.info(f"Maslov box for {profile.name}: ell = {cfg.ell}, lambda_inf = {cfg.lambda_inf}, "
                f"epsilon = {cfg.epsilon}")
    cfg, systems, sweeps, gamma3, gamma4 = _escalate(profile, cfg)
    failures: List[str] = []

    plus = morse_index(SystemKind.LPLUS, profile, cfg, sweeps[SystemKind.LPLUS])
    minus = morse_index(SystemKind.LMINUS, profile, cfg, sweeps[SystemKind.LMINUS])
    P, Q = plus.count_via_lambda_sweep, minus.count_via_lambda_sweep
    p_c, q_c = plus.count_via_conjugate_points, minus.count_via_conjugate_points

    x_forms = {kind: _x_contributions(systems[kind], m, cfg) for kind, m in
               ((SystemKind.LPLUS, plus), (SystemKind.LMINUS, minus))}
    lam_forms = {kind: _lambda_contributions(systems[kind], sweeps[kind], cfg)
                 for kind in (SystemKind.LPLUS, SystemKind.LMINUS)}
    corners = {kind: _lpm_corner(systems[kind], cfg) for kind in (SystemKind.LPLUS, SystemKind.LMINUS)}

    I1, I2 = key_integrals(profile, cfg.disc, cfg.workers)
    n_corner = _corner_dimension(systems[SystemKind.N], cfg)
    corner_n: Dict[str, Any] = {'dim': n_corner}
    if n_corner == 0:
        c = 0
    elif n_corner == 2:
        series = relative_crossing_form_lambda(systems[SystemKind.N], cfg.ell, 0.0,
                                               integrals=CorrectionData(I1, I2, 0), control=cfg.control,
                                               form_tol=cfg.form_tol, intersection_tol=cfg.intersection_tol)
        c = corner_contribution(I1, I2, cfg.disc.zero_tol, series)
        corner_n['form'] = series.to_dict()
    else:
        raise UnsupportedCaseError(f"N corner crossing of dimension {n_corner}", {'dim': n_corner})
    corner_n['value'] = c

    n_sweep = sweeps[SystemKind.N]
    n_plus = count_with_multiplicity([x for x in n_sweep.crossings if not x.endpoint])
    try:
        n_forms = _lambda_contributions(systems[SystemKind.N], n_sweep, cfg)
        gamma2_n: Optional[int] = sum(f['contribution'] for f in n_forms)
    except (UnsupportedCaseError, NonconvergenceError) as exc:
        logger.warning(f"N Gamma2 crossing forms unavailable: {exc.message}")
        n_forms, gamma2_n = [], None
        failures.append('gamma2_N_forms')

    gamma1 = {kind: sum(f['contribution'] for f in x_forms[kind]) for kind in x_forms}
    gamma2 = {kind: sum(f['contribution'] for f in lam_forms[kind]) for kind in lam_forms}
    identities = {
        'LPlus': _identity(gamma1[SystemKind.LPLUS], corners[SystemKind.LPLUS]['value'], gamma2[SystemKind.LPLUS]),
        'LMinus': _identity(gamma1[SystemKind.LMINUS], corners[SystemKind.LMINUS]['value'],
                            gamma2[SystemKind.LMINUS]),
    }
    # Γ₁ of N by symplectic additivity
    gamma1_n = gamma1[SystemKind.LPLUS] + gamma1[SystemKind.LMINUS]
    if gamma2_n is not None:
        identities['N'] = _identity(gamma1_n, c, gamma2_n)
    for name, identity in identities.items():
        if not identity['ok']:
            failures.append(f"homotopy_sum_{name}")
    if gamma1[SystemKind.LPLUS] != -p_c:
        failures.append('gamma1_LPlus_equals_minus_p_c')
    if gamma1[SystemKind.LMINUS] != q_c:
        failures.append('gamma1_LMinus_equals_q_c')

    interchange = {}
    for kind, morse in ((SystemKind.LPLUS, plus), (SystemKind.LMINUS, minus)):
        _, stable = bundle_pair(systems[kind], 0.0, cfg.ell, cfg.control)
        swapped = locate_conjugate_points(systems[kind], cfg.ell, cfg.epsilon, 0.0, reference=stable.end_frame,
                                          path=morse.path, control=cfg.control, scan_step=cfg.x_scan_step,
                                          xtol=cfg.root_xtol, touch_tol=cfg.touch_tol)
        count = count_with_multiplicity(swapped)
        interchange[kind.value] = {'asymptotic_reference': morse.count_via_conjugate_points,
                                   'bundle_reference': count,
                                   'ok': count == morse.count_via_conjugate_points}
        if not interchange[kind.value]['ok']:
            failures.append(f"reference_interchange_{kind.value}")

    lower_bound = abs(P - Q - c)
    if n_plus < lower_bound:
        failures.append('n_plus_N_detected_at_least_lower_bound')

    report = StabilityReport(
        profile={'name': profile.name, 'params': profile.params.to_dict(),
                 'support_halfwidth': profile.support_halfwidth},
        config=cfg.to_dict(),
        P=P, Q=Q, p_c=p_c, q_c=q_c, I1=I1, I2=I2, c=c,
        lower_bound=lower_bound,
        n_plus_N_detected=n_plus,
        verdicts=verdicts(P, Q, I2),
        consistency={
            'identities': identities,
            'gamma3': {k.value: v.to_dict() for k, v in gamma3.items()},
            'gamma4': {k.value: v.to_dict() for k, v in gamma4.items()},
            'reference_interchange': interchange,
            'corners': {**{k.value: v for k, v in corners.items()}, 'N': corner_n},
        },
        crossings={
            'conjugate_points': {k.value: x_forms[k] for k in x_forms},
            'lambda_crossings': {k.value: lam_forms[k] for k in lam_forms},
            'N_lambda_crossings': n_forms if n_forms else [x.to_dict() for x in n_sweep.crossings],
        },
        essential_spectrum={k.value: essential_spectrum(k, profile.params).to_dict() for k in SystemKind},
        failures=failures,
    )
    if failures:
        logger.warning(f"Report for {profile.name} failed: {failures}")
    logger.info(f"{profile.name}: P={P} Q={Q} c={c} lower_bound={lower_bound} "
                f"vk={report.verdicts.vk_verdict}")
    return report


CONSISTENCY_VARIANTS = (
    ('ell_plus_one', lambda cfg: {'ell': cfg.ell + 1.0}),
    ('epsilon_1e-2', lambda cfg: {'epsilon': 1e-2}),
    ('epsilon_1e-4', lambda cfg: {'epsilon': 1e-4}),
    ('renorm_threshold_1e3', lambda cfg: {'control': replace(cfg.control, renorm_threshold=1e3)}),
)


def consistency_suite(profile: WaveProfile, cfg: Optional[MaslovBoxConfig] = None,
                      base: Optional[StabilityReport] = None) -> Dict[str, Any]:
    """Rerun under ℓ+1, two other ε and a lower renormalization threshold.

    Returns:
        Per-variant headline integers, whether they match the base run, and
        an overall flag. A variant that raises is recorded as a mismatch.
    """
    cfg = (cfg or MaslovBoxConfig.from_config()).resolved(profile)
    base = base or assemble_report(profile, cfg)
    expected = base.headline()
    runs = []
    for label, change in CONSISTENCY_VARIANTS:
        variant = replace(cfg, **change(cfg))
        entry: Dict[str, Any] = {'variant': label}
        try:
            headline = assemble_report(profile, variant).headline()
            entry.update(headline=headline, matches=headline == expected)
        except MaslovError as exc:
            entry.update(error=exc.to_dict(), matches=False)
        logger.info(f"consistency {label}: {'match' if entry['matches'] else 'MISMATCH'}")
        runs.append(entry)
    return {'base': expected, 'runs': runs, 'all_match': all(r['matches'] for r in runs)}
