"""
Symplectic form, k-th order crossing forms, partial signatures and the
Maslov index of a path with respect to a reference plane.

A crossing form of order k is evaluated on W_k, the starting vectors h₀ of
root-function chains h₀, ..., h_{k−1} satisfying

    Σ_{j≤i} C(i, j) E_{i−j} h_j = 0,  i = 0..k−1,   E_m = VᵀJ Z⁽ᵐ⁾(t₀),

and equals ω(Σ_{j<k} C(k, j) Z^{(k−j)} h_j, Z₀h₀).
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as sla
from scipy.integrate import simpson

from .bundles import (BundlePath, StepControl, bundle_pair, intersection_basis,
                      lambda_frame_derivatives)
from .systems import LinearSystem, SystemKind, assemble
from .utils.errors import (NonconvergenceError, PreconditionError,
                           UnsupportedCaseError)
from .utils.linalg import LagrangianFrame, positive_qr, standard_j

logger = logging.getLogger(__name__)

NULL_RCOND = 1e-7
CHAIN_TOL = 1e-6
QUADRATURE_STEP = 0.02


class SymplecticSpace:
    """ℝ^{2n} with ω(u, v) = ⟨Ju, v⟩."""

    def __init__(self, n: int):
        self.n = n
        self.J = standard_j(n)

    def omega(self, u, v) -> float:
        return float(np.asarray(v) @ (self.J @ np.asarray(u)))


def omega(u, v) -> float:
    """ω(u, v) = ⟨Ju, v⟩ for J = (0, −I; I, 0)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape or u.ndim != 1 or u.size % 2:
        raise PreconditionError(f"omega needs equal even-dimensional vectors, got {u.shape} and {v.shape}",
                                {'u': list(u.shape), 'v': list(v.shape)})
    return SymplecticSpace(u.size // 2).omega(u, v)


@dataclass(frozen=True)
class Signature:
    n_plus: int
    n_minus: int

    @property
    def signature(self) -> int:
        return self.n_plus - self.n_minus

    def as_tuple(self) -> Tuple[int, int, int]:
        return self.n_plus, self.n_minus, self.signature


def partial_signatures(form, tol: float = 1e-8, scale: Optional[float] = None) -> Tuple[int, int, int]:
    """(n₊, n₋, n₊ − n₋) counting eigenvalues beyond ±tol·max(‖form‖, scale)."""
    return _signature(form, tol, scale).as_tuple()


def _signature(form, tol: float, scale: Optional[float] = None) -> Signature:
    form = np.atleast_2d(np.asarray(form, dtype=float))
    if form.size == 0:
        return Signature(0, 0)
    sym = 0.5 * (form + form.T)
    eigs = np.linalg.eigvalsh(sym)
    threshold = tol * max(np.linalg.norm(sym, 2), scale or 0.0)
    return Signature(int(np.sum(eigs > threshold)), int(np.sum(eigs < -threshold)))


class Role(str, Enum):
    INITIAL = 'initial'
    INTERIOR = 'interior'
    FINAL = 'final'


@dataclass
class CrossingFormSeries:
    """Per-order crossing forms at one crossing."""
    location: float
    dim: int
    forms: List[np.ndarray] = field(default_factory=list)
    signatures: List[Signature] = field(default_factory=list)
    W_spaces: List[np.ndarray] = field(default_factory=list)
    variable: str = 'x'

    @property
    def counted(self) -> int:
        return sum(s.n_plus + s.n_minus for s in self.signatures)

    @property
    def closed(self) -> bool:
        return self.counted == self.dim

    @property
    def order(self) -> int:
        return len(self.forms)

    def to_dict(self):
        return {
            'location': self.location,
            'dim': self.dim,
            'variable': self.variable,
            'signatures': [list(s.as_tuple()) for s in self.signatures],
            'forms': [np.atleast_2d(f).tolist() for f in self.forms],
        }


@dataclass(frozen=True)
class MaslovContribution:
    position: Role
    value: int


def maslov_contribution(series: CrossingFormSeries, role: Union[Role, str]) -> MaslovContribution:
    """Endpoint conventions for one crossing.

    interior: Σ sign 𝔪^(2k−1); initial: −Σ n₋(𝔪⁽ᵏ⁾);
    final: Σ n₊(𝔪^(2k−1)) + n₋(𝔪^(2k)).
    """
    role = Role(role)
    sigs = series.signatures
    if role is Role.INTERIOR:
        value = sum(s.signature for k, s in enumerate(sigs, start=1) if k % 2)
    elif role is Role.INITIAL:
        value = -sum(s.n_minus for s in sigs)
    else:
        value = sum(s.n_plus if k % 2 else s.n_minus for k, s in enumerate(sigs, start=1))
    return MaslovContribution(role, int(value))


def maslov_index(crossings: Sequence[Tuple[CrossingFormSeries, Optional[Union[Role, str]]]]) -> int:
    """Sum of the contributions of classified crossings."""
    total = 0
    for series, role in crossings:
        if role is None:
            raise PreconditionError(f"crossing at {series.location} is not classified",
                                    {'location': series.location})
        total += maslov_contribution(series, role).value
    return total


def frame_derivatives(system: LinearSystem, frame: LagrangianFrame, max_order: int) -> List[np.ndarray]:
    """[Z, Z', ..., Z^{(max_order)}] at frame.x from the ODE recursion.

    Z^{(m+1)} = Σ_j C(m, j) A^{(j)} Z^{(m−j)}, where A^{(j)} for j ≥ 1 only
    carries the x-derivatives of C.
    """
    needed = max_order - 1
    if needed > system.profile.max_derivative:
        raise PreconditionError(
            f"order {max_order} needs C^{needed} coefficients; profile is C^{system.profile.max_derivative}",
            {'max_order': max_order, 'max_derivative': system.profile.max_derivative})
    lam = 0.0 if math.isnan(frame.lam) else frame.lam
    c_derivs = system.coefficient_derivatives(frame.x, lam, max(needed, 0))
    zero = np.zeros_like(system.B)
    a_derivs = [assemble(system.B, c_derivs[0])] + [assemble(zero, c) for c in c_derivs[1:]]
    z = [frame.matrix]
    for m in range(max_order):
        z.append(sum(math.comb(m, j) * (a_derivs[j] @ z[m - j]) for j in range(m + 1)))
    return z


def _chain_matrix(e_blocks: Sequence[np.ndarray], order: int) -> np.ndarray:
    n = e_blocks[0].shape[0]
    m = np.zeros((order * n, order * n))
    for i in range(order):
        for j in range(i + 1):
            m[i * n:(i + 1) * n, j * n:(j + 1) * n] = math.comb(i, j) * e_blocks[i - j]
    return m


def _chains(e_blocks: Sequence[np.ndarray], order: int, n_cols: int,
            floor: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of W_order and one chain per basis vector.

    Singular values below NULL_RCOND·max(σ_max, floor) count as zero; the
    floor is the size of the path derivatives, so blocks that vanish up to
    roundoff are not mistaken for rank.
    """
    if order == 0:
        return np.eye(n_cols), np.eye(n_cols)[None]
    _, s, vt = np.linalg.svd(_chain_matrix(e_blocks, order))
    rank = int(np.sum(s > NULL_RCOND * max(s[0], floor)))
    null = vt[rank:].T
    if null.shape[1] == 0:
        return np.zeros((n_cols, 0)), np.zeros((order, n_cols, 0))
    head = null[:n_cols]
    u, s, vt = np.linalg.svd(head, full_matrices=False)
    rank = int(np.sum(s > CHAIN_TOL))
    basis = u[:, :rank]
    chains = null @ vt[:rank].T / s[:rank]
    return basis, chains.reshape(order, n_cols, rank)


def crossing_form_series_from_derivatives(derivatives: Sequence[np.ndarray], V, location: float,
                                          form_tol: float = 1e-8, max_order: int = 9,
                                          variable: str = 'x') -> CrossingFormSeries:
    """Crossing forms of the path t ↦ span Z(t) at t₀ relative to V.

    Args:
        derivatives: Z(t₀), Z'(t₀), ..., at least max_order + 1 matrices.
        V: Reference Lagrangian frame (2n×n).
        location: t₀, recorded in the series.

    Raises:
        NonconvergenceError: dimension not accounted for by order max_order.
        PreconditionError: t₀ is not a crossing.
    """
    v_matrix = V.matrix if isinstance(V, LagrangianFrame) else np.asarray(V, dtype=float)
    n = v_matrix.shape[1]
    j = standard_j(n)
    available = min(max_order, len(derivatives) - 1)
    e_blocks = [v_matrix.T @ j @ z for z in derivatives[:available + 1]]
    # size of each E_m had the crossing been transversal
    v_norm = np.linalg.norm(v_matrix, 2)
    motion = [v_norm * np.linalg.norm(z, 2) for z in derivatives[:available + 1]]

    basis, _ = _chains(e_blocks, 1, n, max(motion[:2]))
    dim = basis.shape[1]
    if dim == 0:
        raise PreconditionError(f"no crossing at {location}", {'location': location})
    series = CrossingFormSeries(location, dim, variable=variable)

    for order in range(1, available + 1):
        basis, chains = _chains(e_blocks, order, n, max(motion[:order + 1]))
        if basis.shape[1] == 0:
            break
        scale = max(math.comb(order, m) * motion[m] for m in range(1, order + 1))
        pushed = sum(math.comb(order, k) * (derivatives[order - k] @ chains[k]) for k in range(order))
        start = derivatives[0] @ chains[0]
        form = start.T @ (j @ pushed)
        form = 0.5 * (form + form.T)
        sig = _signature(form, form_tol, scale)
        series.W_spaces.append(basis)
        series.forms.append(form)
        series.signatures.append(sig)
        logger.debug(f"order {order} at {location}: dim W = {basis.shape[1]}, signature {sig.as_tuple()}")
        if series.closed:
            return series
        if series.counted > dim:
            break

    raise NonconvergenceError(
        f"crossing form series at {location} did not close by order {available} "
        f"(counted {series.counted} of {dim})",
        {'location': location, 'counted': series.counted, 'dim': dim, 'max_order': available})


def crossing_form_series(system: LinearSystem, path: BundlePath, V, t0: float, variable: str = 'x',
                         form_tol: float = 1e-8, max_order: int = 9,
                         control: Optional[StepControl] = None) -> CrossingFormSeries:
    """Crossing forms of a bundle path at t₀ in x (fixed λ) or in λ (at x = path end).

    For variable 'x' the frame derivatives come from the ODE recursion; for
    'lambda' from the variational equations.
    """
    if variable == 'x':
        order = max_order
        if system.profile.max_derivative < max_order - 1:
            order = int(system.profile.max_derivative) + 1
        q, _ = positive_qr(path.frame_at(t0).matrix)
        frame = LagrangianFrame.from_matrix(q, x=t0, lam=path.lam)
        derivatives = frame_derivatives(system, frame, order)
    elif variable == 'lambda':
        derivatives = lambda_frame_derivatives(system, t0, path.x_end, max_order, path.side, control,
                                               x_far=abs(path.x_start))
        _, r = positive_qr(derivatives[0])
        derivatives = [sla.solve_triangular(r.T, d.T, lower=True).T for d in derivatives]
    else:
        raise PreconditionError(f"unknown crossing variable {variable!r}", {'variable': variable})
    return crossing_form_series_from_derivatives(derivatives, V, t0, form_tol, max_order, variable)


def translation_vector(system: LinearSystem, x: float) -> np.ndarray:
    """State of (φ', 0) for N, or of φ' for L₊."""
    _, d1, d2, d3, d4 = system.profile.derivatives(x, 4)
    s = system.params.sigma2
    u_state = np.array([d3 + s * d1, d1, d2, d4])
    if system.kind is SystemKind.LPLUS:
        return u_state
    out = np.zeros(8)
    out[[0, 2, 4, 6]] = u_state
    return out


def phase_vector(system: LinearSystem, x: float) -> np.ndarray:
    """State of (0, φ) for N, or of φ for L₋."""
    phi, d1, d2, d3 = system.profile.derivatives(x, 3)
    s = system.params.sigma2
    if system.kind is SystemKind.LMINUS:
        return np.array([-d2 - s * phi, phi, d1, -d3])
    # N carries the L₋ state of −v
    out = np.zeros(8)
    out[[1, 3, 5, 7]] = [d2 + s * phi, -phi, -d1, d3]
    return out


def _quadrature_grid(a: float, b: float, step: float = QUADRATURE_STEP) -> np.ndarray:
    count = int(math.ceil(abs(b - a) / step))
    count += count % 2
    return np.linspace(a, b, count + 1)


def lambda_form_integrand(system: LinearSystem, samples: np.ndarray) -> np.ndarray:
    """−⟨∂λC p_X, p_X⟩ for every pair of sampled solutions.

    samples has shape (points, 2n, k); returns (points, k, k).
    """
    n = system.n
    dc = system.lambda_derivative()
    px = samples[:, :n, :]
    return -np.einsum('pia,ij,pjb->pab', px, dc, px)


def first_order_lambda_form(system: LinearSystem, unstable: BundlePath, stable: BundlePath,
                            a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, float]:
    """Quadrature of the first relative λ-form over ℝ.

    Returns:
        The symmetric form and the L² mass of the eigenfunctions, used as
        the scale for its signature.
    """
    xs_u = _quadrature_grid(unstable.x_start, unstable.x_end)
    xs_s = _quadrature_grid(stable.x_end, stable.x_start)
    left = unstable.solution(a, xs_u)
    right = stable.solution(b, xs_s)
    form = (simpson(lambda_form_integrand(system, left), x=xs_u, axis=0)
            + simpson(lambda_form_integrand(system, right), x=xs_s, axis=0))
    mass = (simpson(np.einsum('pia,pia->p', left, left), x=xs_u)
            + simpson(np.einsum('pia,pia->p', right, right), x=xs_s))
    return 0.5 * (form + form.T), float(mass)


def relative_crossing_form_lambda(system: LinearSystem, ell: float, lambda0: float,
                                  integrals=None, control: Optional[StepControl] = None,
                                  x_far: Optional[float] = None, form_tol: float = 1e-8,
                                  intersection_tol: float = 1e-6, solver_config=None) -> CrossingFormSeries:
    """Relative crossing form of λ ↦ (𝔼ᵘ(ℓ, λ), 𝔼ˢ(ℓ, λ)) at λ₀.

    The first-order form is the quadrature of the eigenfunction; for N at
    λ₀ = 0, where it vanishes, the second-order form diag(2I₁, −2I₂) on the
    translation/phase basis follows. That form is inserted from I₁ and I₂,
    not computed from the bundles.

    Args:
        integrals: CorrectionData with I1, I2; computed on demand for the N corner.
    """
    unstable, stable = bundle_pair(system, lambda0, ell, control, x_far)
    a, b = intersection_basis(unstable.end_frame, stable.end_frame, intersection_tol)
    dim = a.shape[1]
    if dim == 0:
        raise PreconditionError(f"lambda = {lambda0} is not a crossing of {system.kind.value} at x = {ell}",
                                {'lambda': lambda0, 'ell': ell})

    form, mass = first_order_lambda_form(system, unstable, stable, a, b)
    w1 = unstable.end_frame.matrix @ a
    series = CrossingFormSeries(lambda0, dim, [form], [_signature(form, form_tol, mass)], [w1], 'lambda')
    if series.closed:
        return series

    if system.kind is SystemKind.N and abs(lambda0) < 1e-12 and series.counted == 0 and dim == 2:
        if integrals is None:
            from .solves import correction_data
            integrals = correction_data(system.profile, solver_config)
        second = np.diag([2.0 * integrals.I1, -2.0 * integrals.I2])
        basis = np.column_stack([translation_vector(system, ell), phase_vector(system, ell)])
        series.forms.append(second)
        series.signatures.append(_signature(second, form_tol))
        series.W_spaces.append(basis)
        logger.info(f"N corner: first-order form {np.abs(form).max():.2e} (mass {mass:.2e}), "
                    f"second order diag({second[0, 0]:.6g}, {second[1, 1]:.6g})")
        if series.closed:
            return series

    raise UnsupportedCaseError(
        f"{system.kind.value} lambda-crossing at {lambda0} is degenerate beyond the supported orders",
        {'lambda': lambda0, 'dim': dim, 'signatures': [list(s.as_tuple()) for s in series.signatures]})
