"""
Wave profiles φ for the standing wave equation

    φ'''' + σ₂φ'' + βφ − φ^{2p+1} = 0,

exact (the sech-power family, KH is its cubic member), engineered
polynomial profiles, the trivial profile and spline-backed sampled data.
"""
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Iterable, List, Optional, Sequence

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import make_interp_spline

from .utils.errors import DomainError, ProfileParseError, ProfileValidationError

logger = logging.getLogger(__name__)

DECAY_TOL = 1e-12
MIN_SAMPLE_ROWS = 16
SPLINE_DEGREE = 5


@dataclass(frozen=True)
class Parameters:
    """Frequency β, dispersion sign σ₂ and nonlinearity exponent p."""
    beta: float
    sigma2: int
    power_p: int = 1

    def __post_init__(self):
        if self.sigma2 not in (-1, 0, 1):
            raise DomainError(f"sigma2 must be -1, 0 or 1, got {self.sigma2}",
                              {'sigma2': self.sigma2})
        if int(self.power_p) != self.power_p or self.power_p < 1:
            raise DomainError(f"power_p must be a positive integer, got {self.power_p}",
                              {'power_p': self.power_p})
        beta = self.beta
        if self.sigma2 == 1 and not beta > 0.25:
            raise DomainError("sigma2 = +1 requires beta > 1/4", self.to_dict())
        if self.sigma2 in (-1, 0) and not beta > 0.0:
            raise DomainError("beta must be positive", self.to_dict())
        if self.sigma2 == -1 and abs(beta - 0.25) < 1e-12:
            raise DomainError("beta = 1/4 is excluded for sigma2 = -1 (coincident spatial eigenvalues)",
                              self.to_dict())

    def to_dict(self):
        return {'beta': self.beta, 'sigma2': self.sigma2, 'power_p': self.power_p}


class WaveProfile(ABC):
    """A soliton profile together with its parameters.

    Subclasses provide derivatives of φ; everything the linearization needs
    (the potential φ^{2p} and its x-derivatives) is derived here.
    """

    name = 'profile'
    #: highest derivative order of φ that is continuous
    max_derivative = math.inf

    def __init__(self, params: Parameters, support_halfwidth: float):
        self.params = params
        self.support_halfwidth = float(support_halfwidth)

    @abstractmethod
    def derivatives(self, x, order: int = 4) -> np.ndarray:
        """Return φ, φ', ..., φ^{(order)} at x, stacked along the first axis."""

    def eval(self, x):
        """(φ, φ', φ'', φ''', φ'''') at x."""
        return tuple(self.derivatives(x, 4))

    def value(self, x):
        return self.derivatives(x, 0)[0]

    def potential(self, x):
        """φ^{2p}(x), the coefficient entering C(x; λ)."""
        return self.value(x) ** (2 * self.params.power_p)

    def potential_at(self, x: float) -> float:
        """φ^{2p} at a single float x."""
        return float(self.potential(x))

    def nonlinearity_derivatives(self, x0: float, order: int) -> np.ndarray:
        """d^k/dx^k φ^{2p} at x0 for k = 0..order.

        Built as a truncated power of the Taylor series of φ at x0.
        """
        self._check_order(order)
        derivs = self.derivatives(float(x0), order)
        taylor = np.array([derivs[k] / math.factorial(k) for k in range(order + 1)])
        series = np.zeros(order + 1)
        series[0] = 1.0
        for _ in range(2 * self.params.power_p):
            series = np.convolve(series, taylor)[:order + 1]
        return np.array([series[k] * math.factorial(k) for k in range(order + 1)])

    def max_potential(self) -> float:
        """max φ^{2p} over the numerical support."""
        grid = np.linspace(-self.support_halfwidth, self.support_halfwidth, 4001)
        return float(np.max(self.potential(grid)))

    def with_params(self, params: Parameters) -> 'WaveProfile':
        """Same shape, different parameters."""
        clone = object.__new__(type(self))
        clone.__dict__.update(self.__dict__)
        clone.params = params
        return clone

    def _check_order(self, order: int) -> None:
        if order > self.max_derivative:
            raise DomainError(
                f"{self.name} profile is only C^{self.max_derivative}; order {order} requested",
                {'order': order, 'max_derivative': self.max_derivative})

    def __repr__(self):
        return f"{type(self).__name__}(name={self.name!r}, params={self.params})"


def _sech(y):
    a = np.abs(y)
    e = np.exp(-a)
    return 2.0 * e / (1.0 + e * e)


class SechPowerProfile(WaveProfile):
    """φ(x) = A·sech^s(Bx), the closed-form σ₂ = −1 family with s = 2/p."""

    def __init__(self, params: Parameters, amplitude: float, rate: float,
                 exponent: float, name: str = 'sech-power', decay_tol: float = DECAY_TOL):
        self.amplitude = amplitude
        self.rate = rate
        self.exponent = exponent
        self.name = name
        self._polys: List[Polynomial] = [Polynomial([1.0])]
        support = math.acosh((amplitude / decay_tol) ** (1.0 / exponent)) / rate
        super().__init__(params, support)

    def _poly(self, k: int) -> Polynomial:
        # d/dx[S^s P(T)] = B S^s [−s T P(T) + (1 − T²) P'(T)]
        s, b = self.exponent, self.rate
        t = Polynomial([0.0, 1.0])
        while len(self._polys) <= k:
            p = self._polys[-1]
            self._polys.append(b * (-s * t * p + (1 - t * t) * p.deriv()))
        return self._polys[k]

    def derivatives(self, x, order: int = 4) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.rate * x
        envelope = self.amplitude * _sech(y) ** self.exponent
        t = np.tanh(y)
        return np.array([envelope * self._poly(k)(t) for k in range(order + 1)])

    def potential(self, x):
        # A^{2p} sech^{s·2p} with s·2p = 4
        return self.amplitude ** (2 * self.params.power_p) * _sech(self.rate * np.asarray(x, dtype=float)) ** 4

    def potential_at(self, x: float) -> float:
        e = math.exp(-abs(self.rate * x))
        sech = 2.0 * e / (1.0 + e * e)
        return self.amplitude ** (2 * self.params.power_p) * sech ** 4

    def max_potential(self) -> float:
        return self.amplitude ** (2 * self.params.power_p)


class PolynomialProfile(WaveProfile):
    """φ(x) = Σ c_k (x − center)^k with exact derivatives.

    Not a soliton; used to build crossings with prescribed local data.
    """

    name = 'polynomial'

    def __init__(self, coefficients: Sequence[float], center: float,
                 params: Parameters, support_halfwidth: float = 10.0):
        self.poly = Polynomial(list(coefficients))
        self.center = float(center)
        super().__init__(params, support_halfwidth)

    def derivatives(self, x, order: int = 4) -> np.ndarray:
        shifted = np.asarray(x, dtype=float) - self.center
        return np.array([self.poly.deriv(k)(shifted) if k else self.poly(shifted)
                         for k in range(order + 1)])


class ZeroProfile(WaveProfile):
    """The trivial solution φ ≡ 0; the linearization is the constant system."""

    name = 'zero'

    def __init__(self, params: Parameters, support_halfwidth: float = 1.0):
        super().__init__(params, support_halfwidth)

    def derivatives(self, x, order: int = 4) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.zeros((order + 1,) + x.shape)

    def potential(self, x):
        return np.zeros_like(np.asarray(x, dtype=float))

    def potential_at(self, x: float) -> float:
        return 0.0

    def max_potential(self) -> float:
        return 0.0


class SampledProfile(WaveProfile):
    """Quintic-spline interpolant of sampled (x, φ) data, zero outside the samples."""

    name = 'sampled'
    # a degree-5 spline has four continuous derivatives
    max_derivative = SPLINE_DEGREE - 1

    def __init__(self, xs: np.ndarray, values: np.ndarray, params: Parameters,
                 decay_tol: float = DECAY_TOL, source: Optional[str] = None):
        self.xs = xs
        self.samples = values
        self.source = source
        self.spline = make_interp_spline(xs, values, k=SPLINE_DEGREE)
        self._derivs = [self.spline] + [self.spline.derivative(k) for k in range(1, SPLINE_DEGREE)]
        self.lo, self.hi = float(xs[0]), float(xs[-1])
        super().__init__(params, self._support_from_samples(xs, values, decay_tol))

    def _support_from_samples(self, xs, values, decay_tol) -> float:
        cap = max(abs(self.lo), abs(self.hi))
        significant = np.abs(values) >= decay_tol
        if not significant.any():
            return min(1.0, cap)
        return float(min(np.max(np.abs(xs[significant])), cap))

    def derivatives(self, x, order: int = 4) -> np.ndarray:
        self._check_order(order)
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        clipped = np.clip(x, self.lo, self.hi)
        return np.array([np.where(inside, self._derivs[k](clipped), 0.0)
                         for k in range(order + 1)])

    def potential(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.lo) & (x <= self.hi)
        phi = self.spline(np.clip(x, self.lo, self.hi))
        return np.where(inside, phi ** (2 * self.params.power_p), 0.0)

    def max_potential(self) -> float:
        return float(np.max(self.samples ** (2 * self.params.power_p)))


def power_law_profile(power_p: int = 1) -> SechPowerProfile:
    """Closed-form σ₂ = −1 soliton for the nonlinearity φ^{2p+1}.

    Args:
        power_p: Nonlinearity exponent p (1 is cubic).

    Returns:
        φ = A sech^s(Bx) with s = 2/p, B = 1/√(s² + (s+2)²),
        β = B²s² − B⁴s⁴ and A^{2p} = B⁴ s(s+1)(s+2)(s+3).
    """
    if int(power_p) != power_p or power_p < 1:
        raise DomainError(f"power_p must be a positive integer, got {power_p}", {'power_p': power_p})
    s = 2.0 / power_p
    b = 1.0 / math.sqrt(s * s + (s + 2.0) ** 2)
    beta = b * b * s * s - b ** 4 * s ** 4
    amplitude = (b ** 4 * s * (s + 1) * (s + 2) * (s + 3)) ** (1.0 / (2 * power_p))
    params = Parameters(beta=beta, sigma2=-1, power_p=int(power_p))
    name = 'kh' if power_p == 1 else f'sech-power-p{power_p}'
    return SechPowerProfile(params, amplitude, b, s, name=name)


def kh_profile() -> SechPowerProfile:
    """φ(x) = √(3/10)·sech²(x/(2√5)) with β = 4/25, σ₂ = −1, p = 1."""
    params = Parameters(beta=4.0 / 25.0, sigma2=-1, power_p=1)
    return SechPowerProfile(params, math.sqrt(3.0 / 10.0), 1.0 / (2.0 * math.sqrt(5.0)), 2.0, name='kh')


def zero_profile(params: Parameters) -> ZeroProfile:
    return ZeroProfile(params)


def polynomial_profile(coefficients: Sequence[float], center: float, params: Parameters,
                       support_halfwidth: float = 10.0) -> PolynomialProfile:
    return PolynomialProfile(coefficients, center, params, support_halfwidth)


def _parse_rows(lines: Iterable[str], path: str) -> np.ndarray:
    rows = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith('#'):
            continue
        fields = stripped.replace(',', ' ').split()
        if len(fields) != 2:
            raise ProfileParseError(f"{path}:{lineno}: expected two columns, got {len(fields)}",
                                    {'path': path, 'line': lineno})
        try:
            row = [float(fields[0]), float(fields[1])]
        except ValueError as e:
            raise ProfileParseError(f"{path}:{lineno}: {e}", {'path': path, 'line': lineno})
        if not all(np.isfinite(row)):
            raise ProfileParseError(f"{path}:{lineno}: non-finite entry", {'path': path, 'line': lineno})
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, 2)


def load_sampled_profile(path: str, params: Parameters, decay_tol: float = DECAY_TOL) -> SampledProfile:
    """Load a two-column `x value` file into a spline-backed profile.

    Args:
        path: UTF-8 text file, whitespace- or comma-separated, '#' comments.
        params: Parameters the samples are claimed to solve.
        decay_tol: Threshold defining the numerical support.

    Returns:
        SampledProfile. The residual is reported by residual_norm, not enforced.
    """
    try:
        with open(path, encoding='utf-8') as handle:
            data = _parse_rows(handle, path)
    except OSError as e:
        raise ProfileParseError(f"Cannot read profile file {path}: {e}", {'path': path})

    if data.shape[0] < MIN_SAMPLE_ROWS:
        raise ProfileValidationError(
            f"{path}: {data.shape[0]} rows do not cover the support (need at least {MIN_SAMPLE_ROWS})",
            {'path': path, 'rows': int(data.shape[0])})
    xs, values = data[:, 0], data[:, 1]
    if np.any(np.diff(xs) <= 0):
        raise ProfileValidationError(f"{path}: x column is not strictly increasing", {'path': path})

    profile = SampledProfile(xs, values, params, decay_tol=decay_tol, source=path)
    logger.info(f"Loaded sampled profile {path}: {len(xs)} rows, support {profile.support_halfwidth:.3f}")
    return profile


def residual_norm(profile: WaveProfile, grid) -> float:
    """max over grid of |φ'''' + σ₂φ'' + βφ − φ^{2p+1}|."""
    grid = np.asarray(grid, dtype=float)
    phi, _, d2, _, d4 = profile.derivatives(grid, 4)
    p = profile.params
    residual = d4 + p.sigma2 * d2 + p.beta * phi - phi ** (2 * p.power_p + 1)
    return float(np.max(np.abs(residual))) if residual.size else 0.0
