"""
Unstable and stable bundles 𝔼ᵘ(x, λ), 𝔼ˢ(x, λ) as integrated Lagrangian
frames, detection functions, and crossing location in x and in λ.
"""
import bisect
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

from .config.config import get_config
from .systems import LinearSystem, decay_rates, stable_matrix, unstable_matrix
from .utils.errors import GridResolutionError, IntegrationError, PreconditionError
from .utils.linalg import LagrangianFrame, positive_qr
from .utils.parallel import ordered_map

logger = logging.getLogger(__name__)

FAR_FIELD_CAP = 400.0
AMBIGUITY_FACTOR = 1e3
DIP_SCREEN = 1e-2

FrameLike = Union[LagrangianFrame, np.ndarray]


class Edge(str, Enum):
    GAMMA1 = 'Gamma1'
    GAMMA2 = 'Gamma2'
    GAMMA3 = 'Gamma3'
    GAMMA4 = 'Gamma4'


@dataclass
class StepControl:
    """Integrator tolerances and renormalization policy."""
    rtol: float = 1e-10
    atol: float = 1e-12
    renorm_threshold: float = 1e6
    max_chunk: float = 5.0
    drift_tol: float = 1e-8

    @classmethod
    def from_config(cls, config=None, **overrides) -> 'StepControl':
        config = config or get_config()
        values = dict(rtol=config.RTOL, atol=config.ATOL,
                      renorm_threshold=config.RENORM_THRESHOLD, drift_tol=config.DRIFT_TOL)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


@dataclass
class CrossingLocation:
    """A located crossing on one edge of the Maslov box."""
    coordinate: float
    dim: int
    which_edge: Edge
    endpoint: bool = False
    detection: str = 'sign_change'

    def to_dict(self):
        return {
            'coordinate': self.coordinate,
            'dim': self.dim,
            'edge': self.which_edge.value,
            'endpoint': self.endpoint,
            'detection': self.detection,
        }


@dataclass
class PathChunk:
    x0: float
    x1: float
    solution: object
    log_scale: float
    transfer: Optional[np.ndarray] = None


class BundlePath:
    """Frames of one bundle along x for fixed λ.

    Chunks are stored in integration order; `transfer` is the triangular
    factor divided out at the end of a chunk (Z_next = Z_end R⁻¹).
    """

    def __init__(self, system: LinearSystem, lam: float, side: str, chunks: List[PathChunk],
                 renorm_events: List[Tuple[float, float]], max_drift: float):
        self.system = system
        self.lam = lam
        self.side = side
        self.chunks = chunks
        self.renorm_events = renorm_events
        self.max_drift = max_drift
        self._direction = 1.0 if chunks[-1].x1 >= chunks[0].x0 else -1.0
        self._starts = [self._direction * (c.x0 - chunks[0].x0) for c in chunks]

    @property
    def x_start(self) -> float:
        return self.chunks[0].x0

    @property
    def x_end(self) -> float:
        return self.chunks[-1].x1

    def _chunk_index(self, x: float) -> int:
        t = self._direction * (x - self.x_start)
        span = self._direction * (self.x_end - self.x_start)
        if t < -1e-9 or t > span + 1e-9:
            raise PreconditionError(f"x = {x} outside path [{self.x_start}, {self.x_end}]",
                                    {'x': x, 'side': self.side})
        return min(max(bisect.bisect_right(self._starts, t) - 1, 0), len(self.chunks) - 1)

    def _matrix(self, index: int, x: float) -> np.ndarray:
        chunk = self.chunks[index]
        x = min(max(x, min(chunk.x0, chunk.x1)), max(chunk.x0, chunk.x1))
        return chunk.solution(x).reshape(self.system.dim, self.system.n)

    def frame_at(self, x: float) -> LagrangianFrame:
        index = self._chunk_index(x)
        return LagrangianFrame.from_matrix(self._matrix(index, x), log_scale=self.chunks[index].log_scale,
                                           x=float(x), lam=self.lam)

    @property
    def samples(self) -> List[LagrangianFrame]:
        """Frames at the chunk boundaries."""
        frames = [self.frame_at(c.x0) for c in self.chunks]
        frames.append(self.end_frame)
        return frames

    @property
    def end_frame(self) -> LagrangianFrame:
        return self.frame_at(self.x_end)

    def chunk_coefficients(self, coefficients: np.ndarray) -> List[np.ndarray]:
        """Coefficients of a fixed solution in each chunk's basis.

        `coefficients` refer to the basis of the end frame.
        """
        result = [np.asarray(coefficients, dtype=float)]
        for chunk in reversed(self.chunks[:-1]):
            current = result[0]
            if chunk.transfer is not None:
                current = sla.solve_triangular(chunk.transfer, current)
            result.insert(0, current)
        return result

    def solution(self, coefficients: np.ndarray, xs: Sequence[float]) -> np.ndarray:
        """Samples of the solution Z(x)c, c given in the end-frame basis."""
        per_chunk = self.chunk_coefficients(coefficients)
        out = np.empty((len(xs), self.system.dim) + per_chunk[0].shape[1:])
        for i, x in enumerate(xs):
            index = self._chunk_index(x)
            out[i] = self._matrix(index, x) @ per_chunk[index]
        return out


def far_field(system: LinearSystem, lam: float, cap: float = FAR_FIELD_CAP) -> float:
    """|x_start| = max(L + 10, 40/Re μ₁(λ)), capped."""
    slow, _ = decay_rates(lam, system.params, system.kind)
    return min(max(system.profile.support_halfwidth + 10.0, 40.0 / slow), cap)


def _chunk_length(system: LinearSystem, lam: float, control: StepControl) -> float:
    _, fastest = decay_rates(lam, system.params, system.kind)
    return min(math.log(control.renorm_threshold) / fastest, control.max_chunk)


def _integrate(system: LinearSystem, lam: float, frame0: np.ndarray, x_start: float, x_end: float,
               control: StepControl, side: str) -> BundlePath:
    n = system.n
    length = _chunk_length(system, lam, control)
    direction = 1.0 if x_end >= x_start else -1.0
    chunks: List[PathChunk] = []
    events: List[Tuple[float, float]] = []
    z = np.array(frame0, dtype=float)
    x = x_start
    log_scale = 0.0
    max_drift = LagrangianFrame.from_matrix(z).lagrangian_drift()

    while direction * (x_end - x) > 1e-14:
        xe = x_end if abs(x_end - x) <= length else x + direction * length
        sol = solve_ivp(system.rhs, (x, xe), z.ravel(), method='DOP853', rtol=control.rtol,
                        atol=control.atol, dense_output=True, args=(lam,))
        if sol.status != 0:
            raise IntegrationError(f"{side} integration failed at x = {x}: {sol.message}",
                                   {'lambda': lam, 'x': x, 'kind': system.kind.value})
        z_end = sol.y[:, -1].reshape(system.dim, n)
        max_drift = max(max_drift, LagrangianFrame.from_matrix(z_end).lagrangian_drift())

        transfer = None
        next_scale = log_scale
        if np.max(np.linalg.norm(z_end, axis=0)) > control.renorm_threshold:
            z_end, transfer = positive_qr(z_end)
            next_scale += float(np.sum(np.log(np.diag(transfer))))
            events.append((xe, float(np.sign(np.prod(np.diag(transfer))))))
        chunks.append(PathChunk(x, xe, sol.sol, log_scale, transfer))
        z, x, log_scale = z_end, xe, next_scale

    if max_drift > control.drift_tol:
        logger.warning(f"Lagrangian drift {max_drift:.2e} exceeds {control.drift_tol:.0e} "
                       f"({system.kind.value}, {side}, lambda={lam})")
    logger.debug(f"{system.kind.value} {side} path at lambda={lam}: {len(chunks)} chunks, "
                 f"{len(events)} renormalizations, drift {max_drift:.2e}")
    return BundlePath(system, lam, side, chunks, events, max_drift)


def integrate_unstable(system: LinearSystem, lam: float, x_start: Optional[float] = None,
                       x_end: float = 0.0, control: Optional[StepControl] = None) -> BundlePath:
    """Frame of 𝔼ᵘ(x, λ) on [x_start, x_end], initialized at (I; U(λ)).

    Raises:
        DomainError: λ inside the essential spectrum.
        PreconditionError: x_start inside the profile's support.
        IntegrationError: the integrator failed.
    """
    control = control or StepControl.from_config()
    if x_start is None:
        x_start = -far_field(system, lam)
    if x_start > -system.profile.support_halfwidth or x_start >= x_end:
        raise PreconditionError(f"unstable integration must start left of the support, got x_start = {x_start}",
                                {'x_start': x_start, 'support': system.profile.support_halfwidth})
    frame0 = LagrangianFrame.graph(unstable_matrix(lam, system.kind, system.params)).matrix
    return _integrate(system, lam, frame0, x_start, x_end, control, 'unstable')


def integrate_stable(system: LinearSystem, lam: float, x_start: Optional[float] = None,
                     x_end: float = 0.0, control: Optional[StepControl] = None) -> BundlePath:
    """Frame of 𝔼ˢ(x, λ), initialized at (I; S(λ)) at x_start > 0 and integrated leftward."""
    control = control or StepControl.from_config()
    if x_start is None:
        x_start = far_field(system, lam)
    if x_start < system.profile.support_halfwidth or x_start <= x_end:
        raise PreconditionError(f"stable integration must start right of the support, got x_start = {x_start}",
                                {'x_start': x_start, 'support': system.profile.support_halfwidth})
    frame0 = LagrangianFrame.graph(stable_matrix(lam, system.kind, system.params)).matrix
    return _integrate(system, lam, frame0, x_start, x_end, control, 'stable')


def _matrix_of(frame: FrameLike) -> np.ndarray:
    return frame.matrix if isinstance(frame, LagrangianFrame) else np.asarray(frame, dtype=float)


def pair_matrix(frame_a: FrameLike, frame_b: FrameLike) -> np.ndarray:
    """[Q_A | Q_B] with orientation-preserving orthonormal factors."""
    return np.hstack([positive_qr(_matrix_of(frame_a))[0], positive_qr(_matrix_of(frame_b))[0]])


def pair_determinant(frame_a: FrameLike, frame_b: FrameLike) -> float:
    return float(np.linalg.det(pair_matrix(frame_a, frame_b)))


def smallest_singular_value(frame_a: FrameLike, frame_b: FrameLike) -> float:
    return float(np.linalg.svd(pair_matrix(frame_a, frame_b), compute_uv=False)[-1])


def intersection_dimension(frame_a: FrameLike, frame_b: FrameLike, tol: float = 1e-6) -> int:
    """dim(span A ∩ span B) from the singular values of [Q_A | Q_B]."""
    sv = np.linalg.svd(pair_matrix(frame_a, frame_b), compute_uv=False)
    return int(np.sum(sv < tol * sv[0]))


def intersection_basis(frame_a: FrameLike, frame_b: FrameLike, tol: float = 1e-6) -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients (a, b) with Z_A a = Z_B b spanning the intersection.

    Returns:
        a (n×k) in the basis of frame_a, b (n×k) in the basis of frame_b;
        the vectors Z_A a are orthonormal.
    """
    za, zb = _matrix_of(frame_a), _matrix_of(frame_b)
    qa, ra = positive_qr(za)
    qb, rb = positive_qr(zb)
    _, sv, vt = np.linalg.svd(np.hstack([qa, -qb]))
    k = int(np.sum(sv < tol * sv[0]))
    if k == 0:
        return np.zeros((za.shape[1], 0)), np.zeros((zb.shape[1], 0))
    null = vt[-k:].T
    n = za.shape[1]
    ca, cb = null[:n], null[n:]
    # orthonormalize the intersection vectors Q_A ca
    vectors = qa @ ca
    q, r = np.linalg.qr(vectors)
    ca = ca @ np.linalg.inv(r)
    cb = cb @ np.linalg.inv(r)
    return sla.solve_triangular(ra, ca), sla.solve_triangular(rb, cb)


class DetectionFunction:
    """x ↦ det(S X(x) − Y(x)) / √det(XᵀX + YᵀY) / √det(I + S²).

    The scale is invariant under right multiplication by positive-determinant
    matrices, so zeros and signs do not depend on renormalization.
    """

    def __init__(self, path: BundlePath, reference: FrameLike):
        ref = _matrix_of(reference)
        n = ref.shape[1]
        s_matrix = sla.solve(ref[:n].T, ref[n:].T).T
        self.path = path
        self.S = 0.5 * (s_matrix + s_matrix.T)
        self.reference = np.vstack([np.eye(n), self.S])
        self._scale = math.sqrt(np.linalg.det(np.eye(n) + self.S @ self.S))

    def __call__(self, x: float) -> float:
        frame = self.path.frame_at(x)
        gram = frame.X.T @ frame.X + frame.Y.T @ frame.Y
        value = np.linalg.det(self.S @ frame.X - frame.Y)
        return float(value / math.sqrt(np.linalg.det(gram)) / self._scale)

    def gap(self, x: float) -> float:
        return smallest_singular_value(self.path.frame_at(x), self.reference)


class PairDetection:
    """x ↦ det[Q(x) | Q_ref] for a reference not in graph form."""

    def __init__(self, path: BundlePath, reference: FrameLike):
        self.path = path
        self.reference = _matrix_of(reference)

    def __call__(self, x: float) -> float:
        return pair_determinant(self.path.frame_at(x), self.reference)

    def gap(self, x: float) -> float:
        return smallest_singular_value(self.path.frame_at(x), self.reference)


def detection_function(path: BundlePath, reference: FrameLike) -> DetectionFunction:
    return DetectionFunction(path, reference)


@dataclass
class _Root:
    coordinate: float
    detection: str
    endpoint: bool = False


def _roots_on_grid(grid: np.ndarray, values: np.ndarray, gaps: np.ndarray,
                   func: Callable[[float], float], gap_func: Callable[[float], float],
                   xtol: float, touch_tol: float) -> List[_Root]:
    """Sign changes refined by brentq plus singular-value dips refined by minimize_scalar."""
    roots: List[_Root] = []
    last = len(grid) - 1
    for end in (0, last):
        if gaps[end] <= touch_tol:
            roots.append(_Root(float(grid[end]), 'endpoint', endpoint=True))

    for i in range(last):
        a, b = values[i], values[i + 1]
        if a * b < 0:
            roots.append(_Root(brentq(func, grid[i], grid[i + 1], xtol=xtol), 'sign_change'))
        elif a == 0 and 0 < i:
            roots.append(_Root(float(grid[i]), 'sign_change'))

    for i in range(1, last):
        if not (gaps[i] < gaps[i - 1] and gaps[i] <= gaps[i + 1] and gaps[i] < DIP_SCREEN):
            continue
        if values[i - 1] * values[i] <= 0 or values[i] * values[i + 1] <= 0:
            continue
        lo, hi = float(grid[i - 1]), float(grid[i + 1])
        res = minimize_scalar(gap_func, bounds=(lo, hi), method='bounded', options={'xatol': xtol})
        if res.fun <= touch_tol:
            if np.sign(func(res.x)) != np.sign(values[i]):
                roots.append(_Root(brentq(func, lo, res.x, xtol=xtol), 'sign_change'))
                roots.append(_Root(brentq(func, res.x, hi, xtol=xtol), 'sign_change'))
            else:
                roots.append(_Root(float(res.x), 'touch'))
        elif res.fun <= AMBIGUITY_FACTOR * touch_tol:
            fine = np.linspace(lo, hi, 17)
            fine_values = np.array([func(t) for t in fine])
            changes = np.nonzero(fine_values[:-1] * fine_values[1:] < 0)[0]
            if len(changes) == 0:
                raise GridResolutionError(
                    f"unresolved near-crossing in [{lo}, {hi}] (gap {res.fun:.2e})",
                    {'interval': [lo, hi], 'gap': float(res.fun)})
            for j in changes:
                roots.append(_Root(brentq(func, fine[j], fine[j + 1], xtol=xtol), 'sign_change'))
    roots.sort(key=lambda r: r.coordinate)
    return roots


def locate_x_crossings(path: BundlePath, reference: FrameLike, interval: Tuple[float, float],
                       edge: Edge = Edge.GAMMA1, scan_step: float = 0.05, xtol: float = 1e-10,
                       touch_tol: float = 1e-7, intersection_tol: float = 1e-6,
                       graph_form: bool = True) -> List[CrossingLocation]:
    """All x in the interval where the path meets the reference plane."""
    lo, hi = interval
    count = max(int(math.ceil((hi - lo) / scan_step)), 2) + 1
    grid = np.linspace(lo, hi, count)
    detector = DetectionFunction(path, reference) if graph_form else PairDetection(path, reference)
    values = np.array([detector(x) for x in grid])
    gaps = np.array([detector.gap(x) for x in grid])
    roots = _roots_on_grid(grid, values, gaps, detector, detector.gap, xtol, touch_tol)
    crossings = []
    ref = _matrix_of(reference)
    for root in roots:
        dim = intersection_dimension(path.frame_at(root.coordinate), ref, intersection_tol)
        if root.endpoint:
            logger.warning(f"{edge.value}: crossing at interval endpoint x = {root.coordinate}")
        crossings.append(CrossingLocation(root.coordinate, max(dim, 1), edge, root.endpoint, root.detection))
    return crossings


def locate_conjugate_points(system: LinearSystem, ell: float, epsilon: float = 1e-3,
                            lam: float = 0.0, reference: Optional[FrameLike] = None,
                            path: Optional[BundlePath] = None, control: Optional[StepControl] = None,
                            scan_step: float = 0.05, xtol: float = 1e-10,
                            touch_tol: float = 1e-7) -> List[CrossingLocation]:
    """Conjugate points: x₀ in [x_start, ℓ − ε] with 𝔼ᵘ(x₀, λ) ∩ 𝕊(λ) ≠ {0}.

    Args:
        reference: Reference plane; defaults to the asymptotic (I; S(λ)).
            A reference not in graph form is scanned with the pair determinant.
        path: Pre-integrated unstable path reaching at least ℓ − ε.
    """
    path = path or integrate_unstable(system, lam, x_end=ell, control=control)
    graph_form = reference is None
    if reference is None:
        reference = LagrangianFrame.graph(stable_matrix(lam, system.kind, system.params))
    crossings = locate_x_crossings(path, reference, (path.x_start, ell - epsilon), Edge.GAMMA1,
                                   scan_step, xtol, touch_tol, graph_form=graph_form)
    logger.info(f"{system.kind.value}: {len(crossings)} conjugate point(s) on "
                f"[{path.x_start:.1f}, {ell - epsilon}]: {[round(c.coordinate, 6) for c in crossings]}")
    return crossings


def count_with_multiplicity(crossings: Sequence[CrossingLocation]) -> int:
    return int(sum(c.dim for c in crossings))


def bundle_pair(system: LinearSystem, lam: float, ell: float, control: Optional[StepControl] = None,
                x_far: Optional[float] = None) -> Tuple[BundlePath, BundlePath]:
    """Unstable path on [−x_far, ℓ] and stable path on [x_far, ℓ]."""
    x_far = x_far or far_field(system, lam)
    return (integrate_unstable(system, lam, -x_far, ell, control),
            integrate_stable(system, lam, x_far, ell, control))


def propagate_frame(system: LinearSystem, lam: float, frame0: np.ndarray, x_start: float, x_end: float,
                    control: StepControl) -> np.ndarray:
    """Orthonormal frame at x_end of the bundle started from frame0.

    Same chunking and renormalization as a full path, but only the end
    frame is kept and no dense output is built.
    """
    n = system.n
    length = _chunk_length(system, lam, control)
    direction = 1.0 if x_end >= x_start else -1.0
    z = np.array(frame0, dtype=float)
    x = x_start
    while direction * (x_end - x) > 1e-14:
        xe = x_end if abs(x_end - x) <= length else x + direction * length
        sol = solve_ivp(system.rhs, (x, xe), z.ravel(), method='DOP853', rtol=control.rtol,
                        atol=control.atol, args=(lam,))
        if sol.status != 0:
            raise IntegrationError(f"integration failed at x = {x}: {sol.message}",
                                   {'lambda': lam, 'x': x, 'kind': system.kind.value})
        z = sol.y[:, -1].reshape(system.dim, n)
        if np.max(np.linalg.norm(z, axis=0)) > control.renorm_threshold:
            z = positive_qr(z)[0]
        x = xe
    return positive_qr(z)[0]


def _sweep_point(args) -> Tuple[np.ndarray, np.ndarray]:
    system, lam, ell, control, x_far = args
    unstable0 = LagrangianFrame.graph(unstable_matrix(lam, system.kind, system.params)).matrix
    stable0 = LagrangianFrame.graph(stable_matrix(lam, system.kind, system.params)).matrix
    return (propagate_frame(system, lam, unstable0, -x_far, ell, control),
            propagate_frame(system, lam, stable0, x_far, ell, control))


@dataclass
class LambdaSweep:
    """Grid data of det[𝔼ᵘ(ℓ, λ) | 𝔼ˢ(ℓ, λ)] and the located crossings."""
    system: LinearSystem
    ell: float
    grid: np.ndarray
    values: np.ndarray
    gaps: np.ndarray
    unstable_frames: List[np.ndarray]
    stable_frames: List[np.ndarray]
    crossings: List[CrossingLocation] = field(default_factory=list)
    x_far: float = 0.0


def locate_lambda_crossings(system: LinearSystem, ell: float, lambda_interval: Tuple[float, float],
                            points: int = 64, control: Optional[StepControl] = None,
                            workers: Optional[int] = None, xtol: float = 1e-10,
                            touch_tol: float = 1e-7, intersection_tol: float = 1e-6,
                            x_far: Optional[float] = None) -> LambdaSweep:
    """λ₀ in the interval with 𝔼ᵘ(ℓ, λ₀) ∩ 𝔼ˢ(ℓ, λ₀) ≠ {0}.

    The far field is fixed at the left end of the interval so every
    column integrates over the same x-range.
    """
    control = control or StepControl.from_config()
    lo, hi = lambda_interval
    x_far = x_far or far_field(system, lo)
    grid = np.linspace(lo, hi, points)
    frames = ordered_map(_sweep_point, [(system, float(lam), ell, control, x_far) for lam in grid], workers)
    values = np.array([np.linalg.det(np.hstack(f)) for f in frames])
    gaps = np.array([np.linalg.svd(np.hstack(f), compute_uv=False)[-1] for f in frames])

    refined = {float(lam): f for lam, f in zip(grid, frames)}

    def frames_at(lam):
        lam = float(lam)
        if lam not in refined:
            refined[lam] = _sweep_point((system, lam, ell, control, x_far))
        return refined[lam]

    def func(lam):
        return float(np.linalg.det(np.hstack(frames_at(lam))))

    def gap_func(lam):
        return float(np.linalg.svd(np.hstack(frames_at(lam)), compute_uv=False)[-1])

    roots = _roots_on_grid(grid, values, gaps, func, gap_func, xtol, touch_tol)
    crossings = []
    for root in roots:
        qu, qs = frames_at(root.coordinate)
        dim = intersection_dimension(qu, qs, intersection_tol)
        crossings.append(CrossingLocation(root.coordinate, max(dim, 1), Edge.GAMMA2, root.endpoint,
                                          root.detection))
    logger.info(f"{system.kind.value}: {len(crossings)} lambda-crossing(s) on [{lo}, {hi}] at x = {ell}: "
                f"{[round(c.coordinate, 8) for c in crossings]}")
    return LambdaSweep(system, ell, grid, values, gaps, [f[0] for f in frames], [f[1] for f in frames],
                       crossings, x_far)


def _variational_rhs(x, z, system, lam, n, order, c_lambda):
    dim = system.dim
    blocks = z.reshape(order + 1, dim, n)
    stacked = blocks.transpose(1, 0, 2).reshape(dim, (order + 1) * n)
    out = system.apply(x, lam, stacked).reshape(dim, order + 1, n).transpose(1, 0, 2).copy()
    for m in range(1, order + 1):
        out[m, n:] += m * (c_lambda @ blocks[m - 1, :n])
    return out.ravel()


def lambda_frame_derivatives(system: LinearSystem, lam: float, ell: float, order: int, side: str = 'unstable',
                             control: Optional[StepControl] = None,
                             x_far: Optional[float] = None) -> List[np.ndarray]:
    """∂ᵏ/∂λᵏ of the bundle frame at ℓ, k = 0..order.

    Integrates Z⁽ᵐ⁾' = A Z⁽ᵐ⁾ + m A_λ Z⁽ᵐ⁻¹⁾ from a λ-independent initial
    frame; renormalizations divide every block by the same factor.
    """
    control = control or StepControl.from_config()
    x_far = x_far or far_field(system, lam)
    n, dim = system.n, system.dim
    if side == 'unstable':
        x0, s_matrix = -x_far, unstable_matrix(lam, system.kind, system.params)
    else:
        x0, s_matrix = x_far, stable_matrix(lam, system.kind, system.params)
    c_lambda = system.lambda_derivative()

    blocks = np.zeros((order + 1, dim, n))
    blocks[0] = LagrangianFrame.graph(s_matrix).matrix
    length = _chunk_length(system, lam, control)
    direction = 1.0 if ell >= x0 else -1.0
    x = x0
    while direction * (ell - x) > 1e-14:
        xe = ell if abs(ell - x) <= length else x + direction * length
        sol = solve_ivp(_variational_rhs, (x, xe), blocks.ravel(), method='DOP853', rtol=control.rtol,
                        atol=control.atol, args=(system, lam, n, order, c_lambda))
        if sol.status != 0:
            raise IntegrationError(f"variational integration failed at x = {x}: {sol.message}",
                                   {'lambda': lam, 'x': x})
        blocks = sol.y[:, -1].reshape(order + 1, dim, n)
        if np.max(np.linalg.norm(blocks[0], axis=0)) > control.renorm_threshold:
            _, r = positive_qr(blocks[0])
            blocks = np.array([sla.solve_triangular(r.T, b.T, lower=True).T for b in blocks])
        x = xe
    return [b for b in blocks]
