"""
Infinitesimally symplectic first-order systems p' = A(x; λ)p,
A = (0, B; C(x; λ), 0), for the operators L₊, L₋ and N, with their
asymptotic data.

State conventions:
    L₊: (u'' + σ₂u, u, u', u''')
    L₋: (−v'' − σ₂v, v, v', −v''')
    N:  (u₁, v₁, u₂, v₂, u₃, v₃, u₄, v₄), the L₊ state of u interleaved
        with the L₋ state of −v.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional

import numpy as np
import scipy.linalg as sla

from .profiles import Parameters, WaveProfile
from .utils.errors import DegeneracyError, DomainError
from .utils.linalg import LagrangianFrame

logger = logging.getLogger(__name__)

DEGENERACY_TOL = 1e-12


class SystemKind(str, Enum):
    LPLUS = 'LPlus'
    LMINUS = 'LMinus'
    N = 'N'

    @property
    def n(self) -> int:
        return 4 if self is SystemKind.N else 2

    @property
    def dim(self) -> int:
        return 2 * self.n


def _kind(kind) -> SystemKind:
    return kind if isinstance(kind, SystemKind) else SystemKind(kind)


def b_matrix(kind, sigma2: int) -> np.ndarray:
    kind = _kind(kind)
    if kind is SystemKind.LPLUS:
        return np.array([[sigma2, 1.0], [1.0, 0.0]])
    if kind is SystemKind.LMINUS:
        return np.array([[-sigma2, 1.0], [1.0, 0.0]])
    return np.array([[sigma2, 0.0, 1.0, 0.0],
                     [0.0, -sigma2, 0.0, 1.0],
                     [1.0, 0.0, 0.0, 0.0],
                     [0.0, 1.0, 0.0, 0.0]])


def c_matrix(kind, params: Parameters, potential: float, lam: float) -> np.ndarray:
    """C(x; λ) given the potential value φ^{2p}(x)."""
    kind = _kind(kind)
    s = params.sigma2
    alpha = (2 * params.power_p + 1) * potential - params.beta + s * s
    eta = -potential + params.beta - s * s
    if kind is SystemKind.LPLUS:
        return np.array([[1.0, -s], [-s, alpha - lam]])
    if kind is SystemKind.LMINUS:
        return np.array([[-1.0, -s], [-s, eta + lam]])
    return np.array([[1.0, 0.0, -s, 0.0],
                     [0.0, -1.0, 0.0, -s],
                     [-s, 0.0, alpha, lam],
                     [0.0, -s, lam, eta]])


def c_lambda_derivative(kind) -> np.ndarray:
    """∂C/∂λ, a constant matrix."""
    kind = _kind(kind)
    if kind is SystemKind.LPLUS:
        return np.array([[0.0, 0.0], [0.0, -1.0]])
    if kind is SystemKind.LMINUS:
        return np.array([[0.0, 0.0], [0.0, 1.0]])
    dc = np.zeros((4, 4))
    dc[2, 3] = dc[3, 2] = 1.0
    return dc


def potential_weights(kind, power_p: int) -> np.ndarray:
    """Diagonal W with C(x; λ) = C(±∞; λ) + φ^{2p}(x)·W."""
    kind = _kind(kind)
    k = 2 * power_p + 1
    if kind is SystemKind.LPLUS:
        return np.diag([0.0, float(k)])
    if kind is SystemKind.LMINUS:
        return np.diag([0.0, -1.0])
    return np.diag([0.0, 0.0, float(k), -1.0])


def assemble(b: np.ndarray, c: np.ndarray) -> np.ndarray:
    n = b.shape[0]
    zero = np.zeros((n, n))
    return np.block([[zero, b], [c, zero]])


@dataclass
class LinearSystem:
    """Coefficient generator A(x; λ) for one of L₊, L₋, N.

    B, the weight W and the constant part of C for the last λ are cached;
    `apply` and `rhs` act blockwise without assembling A.
    """
    kind: SystemKind
    profile: WaveProfile

    def __post_init__(self):
        self.kind = _kind(self.kind)
        self.B = b_matrix(self.kind, self.params.sigma2)
        self.W = potential_weights(self.kind, self.params.power_p)
        self._c_lam: Optional[float] = None
        self._c_inf: Optional[np.ndarray] = None

    @property
    def params(self) -> Parameters:
        return self.profile.params

    @property
    def n(self) -> int:
        return self.kind.n

    @property
    def dim(self) -> int:
        return self.kind.dim

    def C(self, x: float, lam: float) -> np.ndarray:
        return self.C_infinity(lam) + self.profile.potential_at(float(x)) * self.W

    def C_infinity(self, lam: float) -> np.ndarray:
        if lam != self._c_lam:
            self._c_inf = c_matrix(self.kind, self.params, 0.0, lam)
            self._c_lam = lam
        return self._c_inf

    def apply(self, x: float, lam: float, z: np.ndarray) -> np.ndarray:
        """A(x; λ)·Z for Z of shape (2n, k): (B·Y; C(x; λ)·X)."""
        n = self.n
        out = np.empty_like(z)
        np.matmul(self.B, z[n:], out=out[:n])
        np.matmul(self.C(x, lam), z[:n], out=out[n:])
        return out

    def rhs(self, x: float, z: np.ndarray, lam: float) -> np.ndarray:
        """Flattened right-hand side for solve_ivp."""
        return self.apply(x, lam, z.reshape(self.dim, -1)).ravel()

    def coefficient_derivatives(self, x0: float, lam: float, order: int) -> List[np.ndarray]:
        """[C, C', ..., C^{(order)}] at x0; λ only enters C itself."""
        potential = self.profile.nonlinearity_derivatives(x0, order)
        derivs = [self.C_infinity(lam) + potential[0] * self.W]
        derivs.extend(potential[j] * self.W for j in range(1, order + 1))
        return derivs

    def lambda_derivative(self) -> np.ndarray:
        return c_lambda_derivative(self.kind)


def coefficient_matrix(system: LinearSystem, x: float, lam: float) -> np.ndarray:
    """A(x; λ) = (0, B; C(x; λ), 0)."""
    return assemble(system.B, system.C(x, lam))


def asymptotic_matrix(kind, params: Parameters, lam: float) -> np.ndarray:
    kind = _kind(kind)
    return assemble(b_matrix(kind, params.sigma2), c_matrix(kind, params, 0.0, lam))


@dataclass(frozen=True)
class EssentialSpectrum:
    """(−∞, endpoint] for L±; ±i[endpoint, ∞) for N."""
    kind: SystemKind
    endpoint: float

    def contains(self, lam: complex) -> bool:
        lam = complex(lam)
        if self.kind is SystemKind.N:
            return abs(lam.real) < 1e-14 and abs(lam.imag) >= self.endpoint
        return abs(lam.imag) < 1e-14 and lam.real <= self.endpoint

    def to_dict(self):
        if self.kind is SystemKind.N:
            return {'kind': self.kind.value, 'rays': 'imaginary', 'gap_endpoint': self.endpoint}
        return {'kind': self.kind.value, 'interval': [None, self.endpoint]}


def essential_spectrum(kind, params: Parameters) -> EssentialSpectrum:
    """Essential spectrum from the dispersion relation −k⁴ + σ₂k² − β."""
    kind = _kind(kind)
    # max over k of −k⁴ + σ₂k² is 1/4 at k² = 1/2 when σ₂ = +1, else 0 at k = 0
    peak = 0.25 if params.sigma2 == 1 else 0.0
    if kind is SystemKind.N:
        return EssentialSpectrum(kind, params.beta - peak)
    return EssentialSpectrum(kind, peak - params.beta)


def _sorted(mus: np.ndarray) -> np.ndarray:
    order = sorted(range(len(mus)), key=lambda i: (round(mus[i].real, 12), round(mus[i].imag, 12)))
    return mus[order]


def spatial_eigen(lam: float, params: Parameters, kind) -> np.ndarray:
    """Spatial eigenvalues of A_∞(λ), sorted by real then imaginary part.

    μ⁴ + σ₂μ² + β + λ = 0 for L±; μ⁴ + σ₂μ² + β = ±iλ for N.
    """
    kind = _kind(kind)
    ess = essential_spectrum(kind, params)
    if kind is not SystemKind.N and lam <= ess.endpoint:
        raise DomainError(f"lambda = {lam} lies in the essential spectrum (-inf, {ess.endpoint}]",
                          {'lambda': lam, 'endpoint': ess.endpoint, 'kind': kind.value})
    s = params.sigma2
    if kind is SystemKind.N:
        constants = [params.beta - 1j * lam, params.beta + 1j * lam]
    else:
        constants = [complex(params.beta + lam)]

    mus = []
    for c in constants:
        disc = s * s - 4.0 * c
        if abs(disc) < DEGENERACY_TOL:
            raise DegeneracyError(f"coincident spatial eigenvalues at lambda = {lam}",
                                  {'lambda': lam, 'params': params.to_dict()})
        root = np.sqrt(complex(disc))
        for z in ((-s + root) / 2.0, (-s - root) / 2.0):
            mu = np.sqrt(complex(z))
            mus.extend([mu, -mu])
    mus = np.array(mus, dtype=complex)
    if np.any(np.abs(mus.real) < 1e-14):
        raise DomainError(f"non-hyperbolic asymptotic matrix at lambda = {lam}",
                          {'lambda': lam, 'kind': kind.value})
    return _sorted(mus)


def _invariant_graph(kind, params: Parameters, lam: float, sort: str) -> np.ndarray:
    kind = _kind(kind)
    n = kind.n
    spatial_eigen(lam, params, kind)
    a = asymptotic_matrix(kind, params, lam)
    _, z, sdim = sla.schur(a, output='real', sort=sort)
    if sdim != n:
        raise DomainError(f"expected {n} {sort} eigenvalues at lambda = {lam}, found {sdim}",
                          {'lambda': lam, 'kind': kind.value})
    z1, z2 = z[:n, :n], z[n:, :n]
    s_matrix = sla.solve(z1.T, z2.T).T
    return 0.5 * (s_matrix + s_matrix.T)


def stable_matrix(lam: float, kind, params: Parameters) -> np.ndarray:
    """Symmetric S(λ) with (I; S(λ)) spanning the stable subspace of A_∞(λ)."""
    return _invariant_graph(kind, params, lam, 'lhp')


def unstable_matrix(lam: float, kind, params: Parameters) -> np.ndarray:
    """Symmetric U(λ) with (I; U(λ)) spanning the unstable subspace of A_∞(λ)."""
    return _invariant_graph(kind, params, lam, 'rhp')


def stable_frame(lam: float, kind, params: Parameters) -> LagrangianFrame:
    return LagrangianFrame.graph(stable_matrix(lam, kind, params), lam=lam)


def unstable_frame(lam: float, kind, params: Parameters) -> LagrangianFrame:
    return LagrangianFrame.graph(unstable_matrix(lam, kind, params), lam=lam)


def closed_form_stable_matrix(params: Parameters, kind) -> np.ndarray:
    """S(0) in closed form.

    S±(0) = (2√β − σ₂)^{-1/2} [[∓1, σ₂ − √β], [σ₂ − √β, ±(√βσ₂ + β − σ₂²)]];
    for N the L₊ and L₋ blocks interleave.
    """
    kind = _kind(kind)
    s, beta = params.sigma2, params.beta
    root = math.sqrt(beta)
    scale = 1.0 / math.sqrt(2.0 * root - s)
    off = s - root
    corner = root * s + beta - s * s
    s_plus = scale * np.array([[-1.0, off], [off, corner]])
    s_minus = scale * np.array([[1.0, off], [off, -corner]])
    if kind is SystemKind.LPLUS:
        return s_plus
    if kind is SystemKind.LMINUS:
        return s_minus
    s_n = np.zeros((4, 4))
    s_n[np.ix_([0, 2], [0, 2])] = s_plus
    s_n[np.ix_([1, 3], [1, 3])] = s_minus
    return s_n


@dataclass
class AsymptoticData:
    lam: float
    mus: np.ndarray
    stable_frame: LagrangianFrame
    unstable_frame: LagrangianFrame


def asymptotic_data(lam: float, params: Parameters, kind) -> AsymptoticData:
    return AsymptoticData(lam, spatial_eigen(lam, params, kind),
                          stable_frame(lam, kind, params), unstable_frame(lam, kind, params))


def decay_rates(lam: float, params: Parameters, kind) -> tuple:
    """(slowest, fastest) positive real parts of the spatial eigenvalues."""
    mus = spatial_eigen(lam, params, kind)
    positive = mus.real[mus.real > 0]
    return float(np.min(positive)), float(np.max(positive))
