"""
Symplectic linear algebra: the standard J, Lagrangian frames and
orientation-preserving orthonormalization.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np
import scipy.linalg as sla


def standard_j(n: int) -> np.ndarray:
    """J = (0, −I; I, 0) on ℝ^{2n}."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, -eye], [eye, zero]])


def positive_qr(matrix: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Thin QR with the diagonal of R forced positive.

    Right multiplication by R⁻¹ then has positive determinant, so the
    orientation of the frame (and every determinant sign) is preserved.
    """
    q, r = sla.qr(matrix, mode='economic')
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs, r * signs[:, None]


@dataclass
class LagrangianFrame:
    """A 2n×n frame (X; Y) of a Lagrangian plane.

    log_scale accumulates the logarithm of the renormalization factors
    divided out along an integration.
    """
    X: np.ndarray
    Y: np.ndarray
    log_scale: float = 0.0
    x: float = float('nan')
    lam: float = float('nan')

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.X, self.Y])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, **kwargs) -> 'LagrangianFrame':
        half = matrix.shape[0] // 2
        return cls(np.array(matrix[:half]), np.array(matrix[half:]), **kwargs)

    @classmethod
    def graph(cls, s_matrix: np.ndarray, **kwargs) -> 'LagrangianFrame':
        """The frame (I; S)."""
        return cls(np.eye(s_matrix.shape[0]), np.array(s_matrix, dtype=float), **kwargs)

    def orthonormal(self) -> np.ndarray:
        return positive_qr(self.matrix)[0]

    def lagrangian_drift(self) -> float:
        """‖XᵀY − YᵀX‖ / ‖(X; Y)‖²."""
        gap = self.X.T @ self.Y - self.Y.T @ self.X
        scale = np.linalg.norm(self.matrix, 2) ** 2
        return float(np.linalg.norm(gap, 2) / scale) if scale > 0 else 0.0
