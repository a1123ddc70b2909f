"""
Tests for the wave profiles: closed-form solitons, polynomial and sampled
profiles, and profile file validation.
"""
import math

import numpy as np
import pytest

from backend.maslov.profiles import (Parameters, kh_profile, load_sampled_profile, polynomial_profile,
                                     power_law_profile, residual_norm, zero_profile)
from backend.maslov.utils.errors import DomainError, ProfileParseError, ProfileValidationError

KH_PARAMS = Parameters(beta=0.16, sigma2=-1, power_p=1)


def test_kh_solves_standing_wave_equation(kh):
    """The KH profile satisfies the standing wave equation to roundoff."""
    grid = np.linspace(-30.0, 30.0, 2401)
    assert residual_norm(kh, grid) <= 1e-10
    assert kh.params == Parameters(beta=4.0 / 25.0, sigma2=-1, power_p=1)


def test_kh_closed_form_values(kh):
    """φ(0) = √(3/10) and φ decays like sech²(x/(2√5))."""
    assert kh.value(0.0) == pytest.approx(math.sqrt(0.3), abs=1e-15)
    x = 3.7
    expected = math.sqrt(0.3) / math.cosh(x / (2.0 * math.sqrt(5.0))) ** 2
    assert kh.value(x) == pytest.approx(expected, rel=1e-13)
    # derivatives against central differences
    h = 1e-4
    phi, d1, d2 = kh.derivatives(x, 2)
    assert d1 == pytest.approx((kh.value(x + h) - kh.value(x - h)) / (2 * h), rel=1e-7)
    assert d2 == pytest.approx((kh.value(x + h) - 2 * phi + kh.value(x - h)) / h ** 2, rel=1e-5)


def test_kh_support_halfwidth(kh):
    """|φ| drops below the decay tolerance at the support edge."""
    assert kh.support_halfwidth == pytest.approx(63.54, abs=0.01)
    assert abs(kh.value(kh.support_halfwidth)) == pytest.approx(1e-12, rel=1e-6)


def test_power_law_family():
    """p = 1 reproduces KH; p = 2 has β = 9/100 and solves its own equation."""
    kh = kh_profile()
    cubic = power_law_profile(1)
    grid = np.linspace(-20.0, 20.0, 801)
    np.testing.assert_allclose(cubic.value(grid), kh.value(grid), rtol=1e-13, atol=1e-16)
    assert cubic.params.beta == pytest.approx(0.16, abs=1e-15)

    quintic = power_law_profile(2)
    assert quintic.params.beta == pytest.approx(0.09, abs=1e-15)
    assert quintic.params.power_p == 2
    assert residual_norm(quintic, grid) <= 1e-10


def test_power_law_rejects_bad_exponent():
    """Only positive integer exponents are accepted."""
    with pytest.raises(DomainError):
        power_law_profile(0)


@pytest.mark.parametrize('beta,sigma2', [(0.2, 1), (0.0, -1), (-0.1, 0), (0.25, -1)])
def test_parameters_outside_domain(beta, sigma2):
    """Parameters outside the admissible set raise DomainError."""
    with pytest.raises(DomainError):
        Parameters(beta=beta, sigma2=sigma2)


def test_parameters_reject_bad_sigma2():
    """σ₂ must be one of −1, 0, 1."""
    with pytest.raises(DomainError):
        Parameters(beta=0.5, sigma2=2)


def test_nonlinearity_derivatives_of_polynomial():
    """For φ = 1 + x the potential φ² has derivatives 1, 2, 2, 0."""
    profile = polynomial_profile([1.0, 1.0], 0.0, KH_PARAMS)
    np.testing.assert_allclose(profile.nonlinearity_derivatives(0.0, 3), [1.0, 2.0, 2.0, 0.0], atol=1e-15)


def test_nonlinearity_derivatives_of_kh(kh):
    """Derivatives of φ² match differences of the potential."""
    x0, h = 1.3, 1e-3
    derivs = kh.nonlinearity_derivatives(x0, 2)
    assert derivs[0] == pytest.approx(kh.potential(x0), rel=1e-14)
    assert derivs[1] == pytest.approx((kh.potential(x0 + h) - kh.potential(x0 - h)) / (2 * h), rel=1e-5)


def test_zero_profile():
    """The trivial profile has no potential."""
    profile = zero_profile(KH_PARAMS)
    assert profile.max_potential() == 0.0
    assert np.all(profile.derivatives(np.linspace(-1, 1, 5), 4) == 0.0)


def test_with_params_keeps_shape(kh):
    """Swapping parameters keeps the profile values."""
    other = kh.with_params(Parameters(beta=0.5, sigma2=1))
    assert other.params.sigma2 == 1
    assert other.value(0.4) == kh.value(0.4)
    assert kh.params.sigma2 == -1


def test_sampled_profile_interpolates_kh(kh, write_profile):
    """A densely sampled KH profile reproduces values and derivatives."""
    xs = np.arange(-70.0, 70.0 + 1e-9, 0.05)
    path = write_profile(xs, kh.value(xs))
    sampled = load_sampled_profile(path, KH_PARAMS)
    grid = np.linspace(-10.0, 10.0, 41)
    np.testing.assert_allclose(sampled.value(grid), kh.value(grid), atol=1e-9)
    np.testing.assert_allclose(sampled.derivatives(grid, 2)[2], kh.derivatives(grid, 2)[2], atol=1e-6)
    assert residual_norm(sampled, grid) <= 1e-4
    assert sampled.value(80.0) == 0.0


def test_sampled_profile_is_c4(kh, write_profile):
    """A quintic spline has no continuous fifth derivative."""
    xs = np.linspace(-40.0, 40.0, 801)
    sampled = load_sampled_profile(write_profile(xs, kh.value(xs)), KH_PARAMS)
    assert sampled.max_derivative == 4
    with pytest.raises(DomainError):
        sampled.nonlinearity_derivatives(0.0, 5)


def test_sampled_profile_accepts_commas_and_comments(tmp_path):
    """Comma separators, blank lines and comments are accepted."""
    path = tmp_path / 'commas.txt'
    xs = np.linspace(-5.0, 5.0, 21)
    lines = ['# header', ''] + [f"{float(x)!r}, {math.exp(-x * x)!r}" for x in xs]
    path.write_text('\n'.join(lines), encoding='utf-8')
    profile = load_sampled_profile(str(path), KH_PARAMS)
    assert profile.value(0.0) == pytest.approx(1.0, abs=1e-6)


def test_sampled_profile_parse_errors(write_profile, tmp_path):
    """Non-finite entries and wrong column counts are parse errors."""
    xs = np.linspace(-5.0, 5.0, 21)
    values = np.exp(-xs ** 2)
    values[3] = np.nan
    with pytest.raises(ProfileParseError) as exc:
        load_sampled_profile(write_profile(xs, values), KH_PARAMS)
    assert exc.value.exit_code == 2

    path = tmp_path / 'three.txt'
    path.write_text('0.0 1.0 2.0\n', encoding='utf-8')
    with pytest.raises(ProfileParseError):
        load_sampled_profile(str(path), KH_PARAMS)

    with pytest.raises(ProfileParseError):
        load_sampled_profile(str(tmp_path / 'missing.txt'), KH_PARAMS)


def test_sampled_profile_validation_errors(write_profile):
    """Too few rows and non-increasing x are rejected."""
    with pytest.raises(ProfileValidationError):
        load_sampled_profile(write_profile([0.0, 1.0, 2.0], [0.0, 1.0, 0.0]), KH_PARAMS)

    xs = np.linspace(-5.0, 5.0, 21)
    xs[10] = xs[9]
    with pytest.raises(ProfileValidationError) as exc:
        load_sampled_profile(write_profile(xs, np.exp(-xs ** 2), name='repeat.txt'), KH_PARAMS)
    assert exc.value.exit_code == 2


def test_scalar_potential_matches_array_potential(kh):
    """potential_at agrees with the vectorized potential for every profile type."""
    profiles = [kh, power_law_profile(2), zero_profile(KH_PARAMS),
                polynomial_profile([0.2, 0.0, -0.01], 0.5, KH_PARAMS)]
    for profile in profiles:
        for x in (-70.0, -3.3, 0.0, 1.7, 12.0):
            assert profile.potential_at(x) == pytest.approx(float(profile.potential(x)), rel=1e-13, abs=1e-300)
