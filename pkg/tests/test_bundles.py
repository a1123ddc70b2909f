"""
Tests for bundle integration, detection functions and crossing location.
"""
import numpy as np
import pytest

from backend.maslov.bundles import (DetectionFunction, Edge, StepControl, bundle_pair, count_with_multiplicity,
                                    far_field, integrate_stable, integrate_unstable, intersection_basis,
                                    intersection_dimension, locate_conjugate_points, locate_lambda_crossings,
                                    pair_determinant, propagate_frame)
from backend.maslov.profiles import zero_profile
from backend.maslov.systems import LinearSystem, SystemKind, stable_frame, unstable_matrix
from backend.maslov.utils.errors import PreconditionError
from backend.maslov.utils.linalg import LagrangianFrame, positive_qr

KH_ELL = 6.0


def test_unstable_path_stays_lagrangian(kh):
    """Drift of the integrated frame stays at integrator accuracy."""
    path = integrate_unstable(LinearSystem(SystemKind.LPLUS, kh), 0.0, x_end=KH_ELL)
    assert path.max_drift <= 1e-8
    assert path.x_start < -kh.support_halfwidth
    assert path.x_end == KH_ELL
    assert path.renorm_events


def test_stable_path_runs_leftward(kh):
    """The stable bundle starts right of the support and ends at x_end."""
    path = integrate_stable(LinearSystem(SystemKind.LMINUS, kh), 0.2, x_end=KH_ELL)
    assert path.x_start > kh.support_halfwidth
    assert path.end_frame.x == KH_ELL
    assert path.max_drift <= 1e-8


def test_integration_must_start_outside_support(kh):
    """Starting inside the support violates the asymptotic initialization."""
    system = LinearSystem(SystemKind.LPLUS, kh)
    with pytest.raises(PreconditionError):
        integrate_unstable(system, 0.0, x_start=-10.0)
    with pytest.raises(PreconditionError):
        integrate_stable(system, 0.0, x_start=10.0)


def test_kh_conjugate_points(kh):
    """L₊ has one conjugate point on (−∞, ℓ); L₋ has none."""
    plus = locate_conjugate_points(LinearSystem(SystemKind.LPLUS, kh), KH_ELL)
    minus = locate_conjugate_points(LinearSystem(SystemKind.LMINUS, kh), KH_ELL)
    assert count_with_multiplicity(plus) == 1
    assert plus[0].which_edge is Edge.GAMMA1
    assert not plus[0].endpoint
    assert -kh.support_halfwidth < plus[0].coordinate < KH_ELL
    assert minus == []


def test_detection_function_vanishes_at_conjugate_point(kh):
    """The normalized determinant is zero at the located root."""
    system = LinearSystem(SystemKind.LPLUS, kh)
    path = integrate_unstable(system, 0.0, x_end=KH_ELL)
    crossing = locate_conjugate_points(system, KH_ELL, path=path)[0]
    detector = DetectionFunction(path, stable_frame(0.0, SystemKind.LPLUS, kh.params))
    assert abs(detector(crossing.coordinate)) <= 1e-8
    assert abs(detector(crossing.coordinate - 0.5)) > 1e-4
    assert intersection_dimension(path.frame_at(crossing.coordinate), detector.reference) == 1


def test_conjugate_points_independent_of_renormalization(kh):
    """Lowering the renormalization threshold does not move the root."""
    system = LinearSystem(SystemKind.LPLUS, kh)
    default = locate_conjugate_points(system, KH_ELL, control=StepControl(renorm_threshold=1e6))
    frequent = locate_conjugate_points(system, KH_ELL, control=StepControl(renorm_threshold=1e3))
    assert len(default) == len(frequent) == 1
    assert default[0].coordinate == pytest.approx(frequent[0].coordinate, abs=1e-6)


def test_zero_profile_has_no_conjugate_points(kh):
    """The constant-coefficient system never meets its own stable plane."""
    system = LinearSystem(SystemKind.LPLUS, zero_profile(kh.params))
    assert locate_conjugate_points(system, KH_ELL) == []


@pytest.mark.parametrize('kind,dim', [(SystemKind.LPLUS, 1), (SystemKind.LMINUS, 1), (SystemKind.N, 2)])
def test_kernel_intersection_dimension(kh, kind, dim):
    """At λ = 0 the bundles share the translation and phase modes."""
    unstable, stable = bundle_pair(LinearSystem(kind, kh), 0.0, KH_ELL)
    assert intersection_dimension(unstable.end_frame, stable.end_frame) == dim


def test_kernel_eigenfunction_is_translation_mode(kh):
    """The L₊ intersection reconstructs to a multiple of φ'."""
    unstable, stable = bundle_pair(LinearSystem(SystemKind.LPLUS, kh), 0.0, KH_ELL)
    a, _ = intersection_basis(unstable.end_frame, stable.end_frame)
    xs = np.linspace(-5.0, 5.0, 21)
    u = unstable.solution(a[:, 0], xs)[:, 1]
    dphi = kh.derivatives(xs, 1)[1]
    scale = float(u @ dphi) / float(dphi @ dphi)
    np.testing.assert_allclose(u, scale * dphi, atol=1e-5 * np.max(np.abs(u)))


def test_pair_determinant_of_equal_planes():
    """A plane meets itself fully and the pair determinant vanishes."""
    frame = LagrangianFrame.graph(np.array([[1.0, 0.3], [0.3, -2.0]]))
    assert abs(pair_determinant(frame, frame)) <= 1e-12
    assert intersection_dimension(frame, frame) == 2


def test_positive_qr_preserves_orientation():
    """R has a positive diagonal, so det Q has the sign of det of the frame."""
    rng = np.random.default_rng(7)
    m = rng.standard_normal((4, 4))
    q, r = positive_qr(m)
    assert np.all(np.diag(r) > 0)
    assert np.sign(np.linalg.det(q)) == np.sign(np.linalg.det(m))
    np.testing.assert_allclose(q @ r, m, atol=1e-13)


def test_kh_lambda_crossings(kh):
    """L₊ has one positive eigenvalue below λ∞; L₋ has none."""
    plus = locate_lambda_crossings(LinearSystem(SystemKind.LPLUS, kh), KH_ELL, (1e-3, 2.06), points=32)
    minus = locate_lambda_crossings(LinearSystem(SystemKind.LMINUS, kh), KH_ELL, (1e-3, 2.06), points=32)
    assert count_with_multiplicity(plus.crossings) == 1
    assert plus.crossings[0].which_edge is Edge.GAMMA2
    assert 1e-3 < plus.crossings[0].coordinate < 2.06
    assert minus.crossings == []
    assert len(plus.unstable_frames) == len(plus.grid) == 32


def test_propagated_end_frame_matches_path(kh):
    """The end-frame-only integration spans the same plane as the stored path."""
    system = LinearSystem(SystemKind.LPLUS, kh)
    lam = 0.3
    x_far = far_field(system, lam)
    path = integrate_unstable(system, lam, -x_far, KH_ELL)
    frame0 = LagrangianFrame.graph(unstable_matrix(lam, system.kind, system.params)).matrix
    q = propagate_frame(system, lam, frame0, -x_far, KH_ELL, StepControl.from_config())
    np.testing.assert_allclose(q, path.end_frame.orthonormal(), atol=1e-8)


@pytest.mark.parametrize('kind', [SystemKind.LMINUS, SystemKind.N])
def test_left_limit_reproduces_unstable_graph(kh, kind):
    """Where φ is truncated to zero the unstable frame is the graph of U(λ)."""
    lam = 0.2
    for profile in (zero_profile(kh.params), kh):
        system = LinearSystem(kind, profile)
        path = integrate_unstable(system, lam, x_end=KH_ELL)
        u = unstable_matrix(lam, kind, kh.params)
        for x in (path.x_start, 0.5 * path.x_start):
            frame = path.frame_at(x)
            graph = np.linalg.solve(frame.X.T, frame.Y.T).T
            np.testing.assert_allclose(graph, u, atol=1e-8)


@pytest.mark.slow
def test_lambda_crossings_independent_of_ell(kh):
    """Γ₂ crossings at ℓ and ℓ + 1 agree to 1e-8; N has none at either."""
    for kind in (SystemKind.LPLUS, SystemKind.N):
        system = LinearSystem(kind, kh)
        at_ell = locate_lambda_crossings(system, KH_ELL, (1e-3, 2.06), points=32)
        at_next = locate_lambda_crossings(system, KH_ELL + 1.0, (1e-3, 2.06), points=32)
        assert len(at_ell.crossings) == len(at_next.crossings)
        for a, b in zip(at_ell.crossings, at_next.crossings):
            assert a.coordinate == pytest.approx(b.coordinate, abs=1e-8)
            assert a.dim == b.dim
    assert at_ell.crossings == []
