"""
Tests for the Maslov box: configuration, Morse indices, corner terms,
verdicts, and full stability reports for KH and a synthetic profile.
"""
import json
import logging
import time
from dataclasses import replace

import numpy as np
import pytest

from backend.maslov.api.schemas import StabilityReportSchema
from backend.maslov.config.config import DevelopmentConfig
from backend.maslov.forms import CrossingFormSeries, Signature
from backend.maslov.maslovbox import (MaslovBoxConfig, assemble_report, consistency_suite, corner_contribution,
                                      corner_from_forms, default_lambda_inf, morse_index, verdicts)
from backend.maslov.profiles import load_sampled_profile, zero_profile
from backend.maslov.systems import SystemKind
from backend.maslov.utils.errors import ConfigError, InconsistencyError, PreconditionError, UnsupportedCaseError

logger = logging.getLogger(__name__)


def test_kh_box_defaults(kh, box_config):
    """KH resolves to ℓ = 6 and λ∞ = β + 3·max φ² + 1 = 2.06."""
    cfg = box_config.resolved(kh)
    assert cfg.ell == 6.0
    assert cfg.lambda_inf == pytest.approx(2.06, abs=1e-12)
    assert default_lambda_inf(kh) == pytest.approx(2.06, abs=1e-12)
    assert cfg.epsilon == 1e-3


def test_box_config_overrides():
    """Known overrides replace defaults; renorm_threshold goes to the step control."""
    cfg = MaslovBoxConfig.from_config(ell=5.0, renorm_threshold=1e3, lambda_points=8, epsilon=None)
    assert cfg.ell == 5.0
    assert cfg.control.renorm_threshold == 1e3
    assert cfg.lambda_points == 8
    assert cfg.epsilon == 1e-3


def test_box_config_rejects_unknown_setting():
    """Misspelled settings are configuration errors."""
    with pytest.raises(ConfigError) as exc:
        MaslovBoxConfig.from_config(lambda_infinity=3.0)
    assert exc.value.details['unknown'] == ['lambda_infinity']


@pytest.mark.parametrize('overrides', [
    {'ell': -1.0},
    {'epsilon': 0.0},
    {'epsilon': 7.0},
    {'lambda_points': 2},
])
def test_box_config_validation(kh, overrides):
    """ℓ > 0, 0 < ε < min(ℓ, λ∞) and at least three sweep points."""
    with pytest.raises(ConfigError):
        MaslovBoxConfig.from_config(**overrides).resolved(kh)


def test_morse_index_rejects_n(kh, box_config):
    """Morse indices are only defined for L±."""
    with pytest.raises(PreconditionError):
        morse_index(SystemKind.N, kh, box_config)


@pytest.mark.slow
def test_kh_morse_indices(kh, box_config):
    """Conjugate points and the Γ₂ sweep both give P = 1 and Q = 0."""
    cfg = box_config.resolved(kh)
    assert morse_index(SystemKind.LPLUS, kh, cfg).counts == (1, 1)
    assert morse_index(SystemKind.LMINUS, kh, cfg).counts == (0, 0)


def test_zero_profile_morse_indices(kh, box_config):
    """The trivial profile has no conjugate points and no positive eigenvalues."""
    profile = zero_profile(kh.params)
    cfg = box_config.resolved(profile)
    result = morse_index(SystemKind.LPLUS, profile, cfg)
    assert result.counts == (0, 0)
    assert result.sweep.crossings == []


@pytest.mark.parametrize('i1,i2,expected', [
    (1.0, -1.0, 1),
    (1.0, 1.0, 0),
    (-1.0, -1.0, 0),
    (-1.0, 1.0, -1),
])
def test_corner_table_matches_forms(i1, i2, expected):
    """The sign table equals arrival 1 minus n₋ of diag(2I₁, −2I₂)."""
    assert corner_from_forms(i1, i2) == expected
    assert corner_contribution(i1, i2) == expected


def test_corner_inconsistency_detected():
    """A computed form series disagreeing with the table is an inconsistency."""
    series = CrossingFormSeries(0.0, 2, forms=[np.zeros((2, 2)), np.eye(2)],
                                signatures=[Signature(0, 0), Signature(2, 0)], variable='lambda')
    assert corner_contribution(1.0, -1.0, series=series) == 1
    with pytest.raises(InconsistencyError):
        corner_contribution(1.0, 1.0, series=series)


def test_corner_degenerate():
    """Vanishing I₂ is unsupported."""
    with pytest.raises(UnsupportedCaseError):
        corner_contribution(1.0, 0.0)


def test_verdicts():
    """Jones–Grillakis for |P − Q| ≥ 2; Vakhitov–Kolokolov only for P = 1, Q = 0."""
    unstable = verdicts(4, 1, -0.3)
    assert unstable.jones_grillakis_unstable
    assert unstable.vk_verdict == 'not_applicable'

    stable = verdicts(1, 0, -0.2)
    assert not stable.jones_grillakis_unstable
    assert stable.vk_verdict == 'stable'
    assert stable.spectrum_on_imaginary_axis is True

    vk_unstable = verdicts(1, 0, 0.2)
    assert vk_unstable.vk_verdict == 'unstable'
    assert vk_unstable.spectrum_on_imaginary_axis is None


@pytest.mark.slow
def test_kh_report_headline(kh_report):
    """KH is spectrally stable: P = 1, Q = 0, 𝔠 = 1 and no real unstable eigenvalues."""
    assert kh_report.valid, kh_report.failures
    assert (kh_report.P, kh_report.Q) == (1, 0)
    assert (kh_report.p_c, kh_report.q_c) == (1, 0)
    assert kh_report.I1 > 0
    assert kh_report.I2 < 0
    assert kh_report.c == 1
    assert kh_report.lower_bound == 0
    assert kh_report.n_plus_N_detected == 0
    assert kh_report.verdicts.vk_verdict == 'stable'
    assert not kh_report.verdicts.jones_grillakis_unstable


@pytest.mark.slow
def test_kh_homotopy_identities(kh_report):
    """Γ₁ + corner + Γ₂ = 0 for L₊, L₋ and N, with the expected terms."""
    identities = kh_report.consistency['identities']
    assert identities['LPlus'] == {'gamma1': -1, 'corner': 0, 'gamma2': 1, 'sum': 0, 'ok': True}
    assert identities['LMinus'] == {'gamma1': 0, 'corner': 0, 'gamma2': 0, 'sum': 0, 'ok': True}
    assert identities['N'] == {'gamma1': -1, 'corner': 1, 'gamma2': 0, 'sum': 0, 'ok': True}
    corners = kh_report.consistency['corners']
    assert corners['LPlus']['arrival'] + corners['LPlus']['departure'] == 0
    assert corners['LMinus'] == {'dim': 1, 'arrival': 1, 'departure': -1, 'value': 0}
    assert corners['N']['dim'] == 2
    assert corners['N']['value'] == 1


@pytest.mark.slow
def test_n_identity_pins_the_corner_value(kh_report):
    """Only 𝔠 = 1 closes the N identity; the corner forms cannot disagree with the table."""
    identity = kh_report.consistency['identities']['N']
    assert identity['corner'] == kh_report.c
    closing = [c for c in (-1, 0, 1) if identity['gamma1'] + c + identity['gamma2'] == 0]
    assert closing == [kh_report.c]
    for i1, i2 in ((kh_report.I1, kh_report.I2), (-kh_report.I1, kh_report.I2)):
        assert corner_from_forms(i1, i2) == corner_contribution(i1, i2)


@pytest.mark.slow
def test_kh_edges_empty(kh_report):
    """Γ₃ and Γ₄ carry no crossings and both bundle references agree."""
    for edge in ('gamma3', 'gamma4'):
        for kind, check in kh_report.consistency[edge].items():
            assert check['ok'], (edge, kind)
            assert check['crossings'] == []
    for entry in kh_report.consistency['reference_interchange'].values():
        assert entry['ok']


@pytest.mark.slow
def test_kh_report_serializes(kh_report):
    """report.json content is plain JSON and matches its schema."""
    payload = json.loads(json.dumps(kh_report.to_dict()))
    assert StabilityReportSchema().validate(payload) == {}
    assert payload['valid'] is True
    assert payload['config']['ell'] == 6.0
    assert set(payload['essential_spectrum']) == {'LPlus', 'LMinus', 'N'}


@pytest.mark.slow
def test_synthetic_profile_identities(kh, box_config, write_profile):
    """A scaled KH profile has no kernel; every identity still holds."""
    xs = np.arange(-70.0, 70.0 + 1e-9, 0.05)
    profile = load_sampled_profile(write_profile(xs, 0.9 * kh.value(xs), name='scaled.txt'), kh.params)
    report = assemble_report(profile, replace(box_config, ell=6.0))
    logger.info(f"synthetic report: {report.headline()}")
    assert report.valid, report.failures
    assert report.c == 0
    assert report.P == report.p_c
    assert report.Q == report.q_c
    for identity in report.consistency['identities'].values():
        assert identity['ok'], identity
    assert report.consistency['corners']['N']['dim'] == 0
    assert report.n_plus_N_detected >= report.lower_bound


@pytest.mark.slow
def test_kh_consistency_suite(kh, box_config, kh_report):
    """ℓ + 1, ε = 1e-2 and 1e-4 and a lower renormalization threshold all reproduce the headline."""
    suite = consistency_suite(kh, box_config, kh_report)
    assert suite['base'] == kh_report.headline()
    assert len(suite['runs']) == 4
    assert suite['all_match'], suite['runs']


@pytest.mark.slow
def test_kh_default_run_within_a_minute(kh):
    """A KH run with the development defaults on one worker finishes within 60 s."""
    cfg = MaslovBoxConfig.from_config(DevelopmentConfig, workers=1)
    assert cfg.lambda_points == DevelopmentConfig.LAMBDA_POINTS
    start = time.perf_counter()
    report = assemble_report(kh, cfg)
    elapsed = time.perf_counter() - start
    logger.info(f"KH default run: {elapsed:.1f} s")
    assert report.headline() == {'P': 1, 'Q': 0, 'c': 1, 'lower_bound': 0, 'n_plus_N_detected': 0}
    assert elapsed <= 60.0
