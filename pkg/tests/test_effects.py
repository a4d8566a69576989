import numpy as np
import pytest

from effectkit.common.errors import OrderingError, ValidationError
from effectkit.controller.effects import (
    below,
    commutativity_projection,
    dilation_lower_bound_witness,
    dominating_scale_bisection,
    douglas_scale,
    effects_disjoint,
    factor_contraction,
    factor_pure_operation,
    luders_operation,
    min_dominating_scale,
    noncommutativity_spectrum,
    order_effect,
    projection_join,
    projection_meet,
    random_effect,
    random_ordered_pair,
    range_inclusion,
    restricted_inverse_sqrt,
    shorted_effect,
    spectral_support_disjoint,
    support_bound_check,
    support_overlap,
    support_projection,
    weak_atom_bound,
    weak_atom_bound_bisection,
)
from effectkit.models.effects import Contraction, Effect, Projection, PureOperation
from effectkit.models.numerics import SpectralDecomposition


def test_effect_validation():
    with pytest.raises(ValueError):
        Effect(matrix=np.diag([1.5, 0.0]))
    with pytest.raises(ValueError):
        Effect(matrix=np.array([[0, 1], [0, 0]]))
    E = Effect(matrix=np.diag([1.0 + 1e-12, -1e-12]))
    assert np.allclose(E.matrix, np.diag([1.0, 0.0]))


def test_projection_and_contraction_validation():
    with pytest.raises(ValueError):
        Projection(matrix=np.diag([0.5, 1.0]))
    with pytest.raises(ValueError):
        Contraction(matrix=np.array([[2.0, 0.0]]))
    assert Projection(matrix=np.diag([1.0, 0.0, 1.0])).rank == 2


def test_below():
    assert below(np.diag([0.2, 0.1]), np.diag([0.5, 0.1]))
    assert not below(np.diag([0.6, 0.1]), np.diag([0.5, 0.1]))
    with pytest.raises(ValidationError):
        below(np.eye(2), np.eye(3))


def test_restricted_inverse_sqrt():
    E = np.diag([0.25, 0.0])
    assert np.allclose(restricted_inverse_sqrt(E), np.diag([2.0, 0.0]))
    with pytest.raises(ValidationError):
        restricted_inverse_sqrt(np.zeros((2, 2)))


def test_factor_contraction_random_pairs(rng, policy):
    for _ in range(25):
        dim = int(rng.integers(2, 9))
        M, K = random_ordered_pair(dim, rng)
        C = factor_contraction(M, K, policy)
        assert np.linalg.norm(C.matrix @ K - M, "fro") <= 1e-7
        assert abs(C.norm ** 2 - dominating_scale_bisection(M, K)) <= 1e-6


def test_factor_contraction_vanishes_off_range(policy):
    K = np.diag([1.0, 0.0])
    M = np.diag([0.5, 0.0])
    C = factor_contraction(M, K, policy)
    assert np.allclose(C.matrix, np.diag([0.5, 0.0]))
    assert min_dominating_scale(M, K, policy) == pytest.approx(0.25)
    assert np.allclose(order_effect(M, K, policy).matrix, np.diag([0.25, 0.0]))


def test_factor_contraction_ordering_error():
    K = np.diag([0.5, 0.5])
    with pytest.raises(OrderingError) as excinfo:
        factor_contraction(2 * K, K)
    assert excinfo.value.min_eigenvalue < 0
    assert excinfo.value.exit_code == 2


def test_factor_contraction_rejects_range_leak_within_slack(policy):
    # K*K - M*M has min eigenvalue -9e-10, inside psd_slack, yet ran M* leaves ran K*
    M = np.diag([0.0, 3e-5])
    K = np.diag([1.0, 0.0])
    with pytest.raises(OrderingError, match="residual") as excinfo:
        factor_contraction(M, K, policy)
    assert -policy.psd_slack <= excinfo.value.min_eigenvalue < 0
    assert excinfo.value.exit_code == 2
    with pytest.raises(OrderingError):
        order_effect(M, K, policy)


@pytest.mark.slow
def test_factor_contraction_suite(rng, policy):
    for _ in range(500):
        dim = int(rng.integers(2, 33))
        M, K = random_ordered_pair(dim, rng)
        C = factor_contraction(M, K, policy)
        assert np.linalg.norm(C.matrix @ K - M, "fro") <= 1e-7
        assert abs(C.norm ** 2 - dominating_scale_bisection(M, K)) <= 1e-6


def test_douglas_scale_and_range_inclusion():
    M = np.diag([1.0, 0.0])
    K = 0.5 * np.eye(2)
    assert douglas_scale(M, K) == pytest.approx(4.0)
    assert range_inclusion(M, K)
    assert not range_inclusion(np.diag([0.0, 1.0]), np.diag([1.0, 0.0]))
    assert douglas_scale(np.diag([0.0, 1.0]), np.diag([1.0, 0.0])) == float("inf")


def test_range_inclusion_matches_douglas_scale(rng, policy):
    K = np.zeros((4, 4), dtype=complex)
    K[:2] = rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4))
    K /= np.linalg.norm(K, 2)
    inside = 0.5 * K
    assert range_inclusion(inside, K, policy)
    assert douglas_scale(inside, K, policy) == pytest.approx(0.25)
    assert douglas_scale(inside, K, policy) == pytest.approx(dominating_scale_bisection(inside, K), abs=1e-6)

    leak = inside.copy()
    leak[3] = 1e-3 * (rng.standard_normal(4) + 1j * rng.standard_normal(4))
    assert not range_inclusion(leak, K, policy)
    assert douglas_scale(leak, K, policy) == float("inf")


def test_weak_atom_worked_value(policy):
    E = np.diag([1.0, 0.25])
    phi = np.array([1.0, 1.0]) / np.sqrt(2)
    assert abs(weak_atom_bound(E, phi, policy) - 0.4) <= 1e-10
    assert abs(weak_atom_bound_bisection(E, phi) - 0.4) <= 1e-6


def test_weak_atom_outside_support(policy):
    E = np.diag([1.0, 0.0])
    assert weak_atom_bound(E, np.array([0.6, 0.8]), policy) == 0.0
    with pytest.raises(ValidationError):
        weak_atom_bound(E, np.array([1.0, 1.0]), policy)


def test_weak_atom_random_agreement(rng, policy):
    for _ in range(25):
        dim = int(rng.integers(2, 7))
        E = random_effect(dim, rng)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        assert abs(weak_atom_bound(E, v, policy) - weak_atom_bound_bisection(E, v)) <= 1e-6


@pytest.mark.slow
def test_weak_atom_formula_suite(rng, policy):
    for _ in range(500):
        dim = int(rng.integers(2, 9))
        E = random_effect(dim, rng)
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        assert abs(weak_atom_bound(E, v, policy) - weak_atom_bound_bisection(E, v)) <= 1e-6


def test_projection_lattice():
    P = np.diag([1.0, 1.0, 0.0])
    R = np.diag([0.0, 1.0, 1.0])
    assert projection_meet(P, R).rank == 1
    assert projection_join([np.diag([1.0, 0, 0]), np.diag([0, 1.0, 0])]).rank == 2
    assert np.allclose(commutativity_projection(P, R).matrix, np.eye(3))


def test_commutativity_of_qubit_bases():
    Pz = np.diag([1.0, 0.0])
    Px = 0.5 * np.ones((2, 2))
    assert commutativity_projection(Pz, Px).rank == 0
    assert np.allclose(noncommutativity_spectrum(Pz, Px), [0.5])


def test_support_overlap():
    E = np.diag([1.0, 0.3, 0.0])
    F = np.diag([0.0, 0.7, 1.0])
    overlap = support_overlap(E, F)
    assert overlap.dimension == 1
    assert overlap.max_cosine == pytest.approx(1.0)
    assert effects_disjoint(np.diag([1.0, 0, 0]), F)
    assert support_projection(E).rank == 2


def test_support_bound_and_spectral_disjointness():
    A = SpectralDecomposition(eigenvalues=[0.0, 1.0, 2.0], eigenvectors=np.eye(3))
    assert support_bound_check([0.5, 0.0, 1.0], A)
    assert spectral_support_disjoint([1.0, 0, 0], A, [0, 1.0, 0], A)
    assert not spectral_support_disjoint([1.0, 1.0, 0], A, [0, 1.0, 0], A)
    with pytest.raises(ValidationError):
        support_bound_check([1.5, 0.0, 0.0], A)


def test_factor_pure_operation(rng):
    M, K = random_ordered_pair(3, rng)
    Lam = PureOperation(kraus=Contraction(matrix=M))
    Phi = PureOperation(kraus=Contraction(matrix=K))
    Psi = factor_pure_operation(Lam, Phi)
    rho = np.diag([0.5, 0.3, 0.2]).astype(complex)
    assert np.allclose(Psi.apply(Phi.apply(rho)), Lam.apply(rho), atol=1e-8)


def test_luders_operation(rng):
    E = random_effect(3, rng)
    assert np.allclose(luders_operation(E).effect.matrix, E.matrix, atol=1e-10)


def test_dilation_witness():
    E = np.diag([1.0, 0.0])
    J = np.eye(2)
    eta = dilation_lower_bound_witness(E, J, E, np.array([0.5, 0.0]))
    assert np.allclose(J.conj().T @ eta, [0.5, 0.0])
    assert dilation_lower_bound_witness(E, J, E, np.array([0.0, 1.0])) is None
    with pytest.raises(ValidationError):
        dilation_lower_bound_witness(np.diag([0.5, 0.0]), J, E, np.array([0.5, 0.0]))


def test_shorted_effect():
    E = np.diag([1.0, 0.5])
    assert np.allclose(shorted_effect(E, np.eye(2)), E)
    phi = np.array([[1.0], [1.0]]) / np.sqrt(2)
    value = float(np.real(shorted_effect(E, phi)[0, 0]))
    assert value == pytest.approx(weak_atom_bound(E, phi.ravel()))
    with pytest.raises(ValidationError):
        shorted_effect(np.diag([1.0, 0.0]), np.array([[0.0], [1.0]]))
