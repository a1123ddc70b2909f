"""
Inhomogeneous problems −L₋v̂ = φₓ and −L₊û = φ on a truncated line, the
integrals I₁ = ∫φₓv̂, I₂ = ∫φû and the corner correction 𝔠.

Both problems are posed with H± = −L± = ∂⁴ + σ₂∂² + β − k±φ^{2p}, which is
positive at infinity; the discrete near-kernel (φₓ for H₊, φ for H₋) is
removed by bordering the system with the kernel vector.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.integrate import simpson
from scipy.sparse.linalg import spsolve

from .config.config import get_config
from .profiles import WaveProfile
from .utils.errors import AccuracyError, FredholmError, SolverError, UnsupportedCaseError
from .utils.parallel import ordered_map

logger = logging.getLogger(__name__)

# sixth-order central stencils
D2_STENCIL = np.array([1 / 90, -3 / 20, 3 / 2, -49 / 18, 3 / 2, -3 / 20, 1 / 90])
D4_STENCIL = np.array([7 / 240, -2 / 5, 169 / 60, -122 / 15, 91 / 8, -122 / 15, 169 / 60, -2 / 5, 7 / 240])


class InhomogeneousKind(str, Enum):
    LPLUS_PHI = 'LPlusPhi'
    LMINUS_PHIX = 'LMinusPhiX'


@dataclass
class Discretization:
    """Finite-difference grid and solver tolerances."""
    h: float = 0.04
    pad: float = 10.0
    solver_tol: float = 1e-8
    fredholm_tol: float = 1e-8
    zero_tol: float = 1e-10

    @classmethod
    def from_config(cls, config=None, **overrides) -> 'Discretization':
        config = config or get_config()
        values = dict(h=config.SOLVER_H, pad=config.SOLVER_PAD, solver_tol=config.SOLVER_TOL,
                      fredholm_tol=config.FREDHOLM_TOL, zero_tol=config.ZERO_TOL)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)

    def grid(self, profile: WaveProfile) -> np.ndarray:
        half = math.ceil((profile.support_halfwidth + self.pad) / self.h)
        return np.linspace(-half * self.h, half * self.h, 2 * half + 1)


@dataclass
class InhomogeneousSolution:
    kind: InhomogeneousKind
    grid: np.ndarray
    values: np.ndarray
    residual_norm: float
    kernel_overlap: float


@dataclass
class CorrectionData:
    I1: float
    I2: float
    c: int

    def to_dict(self):
        return {'I1': self.I1, 'I2': self.I2, 'c': self.c}


def _banded(stencil: np.ndarray, size: int, h_power: float) -> sparse.csr_matrix:
    half = len(stencil) // 2
    offsets = list(range(-half, half + 1))
    return sparse.diags([np.full(size - abs(k), w) for k, w in zip(offsets, stencil)], offsets,
                        shape=(size, size), format='csr') / h_power


def operator_matrix(kind: InhomogeneousKind, profile: WaveProfile, grid: np.ndarray) -> sparse.csr_matrix:
    """H₊ (for LPlusPhi) or H₋ (for LMinusPhiX) on the grid, zero outside."""
    h = grid[1] - grid[0]
    size = len(grid)
    p = profile.params
    weight = 2 * p.power_p + 1 if kind is InhomogeneousKind.LPLUS_PHI else 1
    diagonal = p.beta - weight * profile.potential(grid)
    return (_banded(D4_STENCIL, size, h ** 4) + p.sigma2 * _banded(D2_STENCIL, size, h ** 2)
            + sparse.diags(diagonal, 0, format='csr'))


def discrete_residual(matrix: sparse.spmatrix, values: np.ndarray, rhs: np.ndarray) -> float:
    """‖H·values − rhs‖_∞ on the grid."""
    return float(np.max(np.abs(matrix @ values - rhs))) if len(rhs) else 0.0


def solve_inhomogeneous(kind, profile: WaveProfile, disc: Optional[Discretization] = None,
                        rhs: Optional[np.ndarray] = None) -> InhomogeneousSolution:
    """Solve H₊û = φ (LPlusPhi) or H₋v̂ = φₓ (LMinusPhiX).

    Args:
        kind: Which problem.
        profile: Wave profile.
        disc: Grid and tolerances.
        rhs: Optional right-hand side on the grid replacing the default.

    Raises:
        FredholmError: rhs not orthogonal to the kernel element.
        SolverError: bordered system singular.
        AccuracyError: residual above solver_tol.
    """
    kind = InhomogeneousKind(kind)
    disc = disc or Discretization.from_config()
    grid = disc.grid(profile)
    phi, dphi = profile.derivatives(grid, 1)
    if rhs is None:
        rhs = phi if kind is InhomogeneousKind.LPLUS_PHI else dphi
    rhs = np.asarray(rhs, dtype=float)
    kernel = dphi if kind is InhomogeneousKind.LPLUS_PHI else phi

    matrix = operator_matrix(kind, profile, grid)
    kernel_norm = np.linalg.norm(kernel)
    rhs_norm = np.linalg.norm(rhs)
    overlap = 0.0
    if kernel_norm > 0 and rhs_norm > 0:
        overlap = abs(float(rhs @ kernel)) / (rhs_norm * kernel_norm)
    if overlap > disc.fredholm_tol:
        raise FredholmError(f"{kind.value}: right-hand side overlaps the kernel ({overlap:.3e})",
                            {'kind': kind.value, 'overlap': overlap})

    if kernel_norm > 0:
        k = (kernel / kernel_norm)[:, None]
        bordered = sparse.bmat([[matrix, sparse.csr_matrix(k)], [sparse.csr_matrix(k.T), None]], format='csc')
        solution = spsolve(bordered, np.append(rhs, 0.0))
        values = solution[:-1]
    else:
        values = spsolve(matrix.tocsc(), rhs)

    if not np.all(np.isfinite(values)):
        raise SolverError(f"{kind.value}: discretized system is singular", {'kind': kind.value})
    residual = discrete_residual(matrix, values, rhs)
    if residual > disc.solver_tol:
        raise AccuracyError(f"{kind.value}: residual {residual:.3e} exceeds {disc.solver_tol:.0e}",
                            {'kind': kind.value, 'residual': residual})
    logger.debug(f"{kind.value}: {len(grid)} points, residual {residual:.2e}, overlap {overlap:.2e}")
    return InhomogeneousSolution(kind, grid, values, residual, overlap)


def compute_integrals(profile: WaveProfile, solutions: Tuple[InhomogeneousSolution, InhomogeneousSolution]
                      ) -> Tuple[float, float]:
    """I₁ = ∫φₓv̂ and I₂ = ∫φû by Simpson's rule on the solver grid.

    Args:
        solutions: Any order; matched by kind.
    """
    by_kind = {s.kind: s for s in solutions}
    v_hat = by_kind[InhomogeneousKind.LMINUS_PHIX]
    u_hat = by_kind[InhomogeneousKind.LPLUS_PHI]
    _, dphi = profile.derivatives(v_hat.grid, 1)
    phi = profile.value(u_hat.grid)
    i1 = float(simpson(dphi * v_hat.values, x=v_hat.grid))
    i2 = float(simpson(phi * u_hat.values, x=u_hat.grid))
    return i1, i2


def correction_term(I1: float, I2: float, zero_tol: float = 1e-10) -> int:
    """𝔠 = 1 if I₁ > 0 > I₂; 0 if I₁I₂ > 0; −1 if I₁ < 0 < I₂."""
    if abs(I1) <= zero_tol or abs(I2) <= zero_tol:
        raise UnsupportedCaseError(
            "I1 or I2 vanishes; the corner needs a higher-order lambda-form, which is not supported",
            {'I1': I1, 'I2': I2, 'zero_tol': zero_tol})
    if I1 > 0 > I2:
        return 1
    if I1 * I2 > 0:
        return 0
    return -1


def _solve_kind(args) -> InhomogeneousSolution:
    kind, profile, disc = args
    return solve_inhomogeneous(kind, profile, disc)


def key_integrals(profile: WaveProfile, disc: Optional[Discretization] = None,
                  workers: Optional[int] = None) -> Tuple[float, float]:
    """Run both solves and return (I₁, I₂)."""
    disc = disc or Discretization.from_config()
    solutions = ordered_map(_solve_kind, [(kind, profile, disc) for kind in InhomogeneousKind],
                            workers=min(2, workers) if workers else None)
    return compute_integrals(profile, solutions)


def correction_data(profile: WaveProfile, disc: Optional[Discretization] = None,
                    workers: Optional[int] = None) -> CorrectionData:
    """Both solves, the two integrals and the table value of 𝔠."""
    disc = disc or Discretization.from_config()
    i1, i2 = key_integrals(profile, disc, workers)
    c = correction_term(i1, i2, disc.zero_tol)
    logger.info(f"I1 = {i1:.10g}, I2 = {i2:.10g}, c = {c}")
    return CorrectionData(i1, i2, c)
