import numpy as np
import pytest

from effectkit.common.errors import ValidationError
from effectkit.controller.numerics import (
    as_hermitian,
    commutator_norm,
    eig_hermitian,
    is_psd,
    matrix_sqrt_psd,
    numerical_rank,
    orthonormal_range_basis,
    principal_cosines,
    projector_from_basis,
    pseudo_inverse_psd,
    spectral_function,
    subspace_intersection,
)
from effectkit.models.numerics import TolerancePolicy


def test_policy_rejects_out_of_range():
    with pytest.raises(ValueError):
        TolerancePolicy(eig_zero=0.0)
    with pytest.raises(ValueError):
        TolerancePolicy(rank_rel=0.1)


def test_as_hermitian_rejects_asymmetric():
    with pytest.raises(ValidationError):
        as_hermitian(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValidationError):
        as_hermitian(np.ones((2, 3)))


def test_eig_roundtrip(rng):
    A = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
    H = A + A.conj().T
    decomp = eig_hermitian(H)
    assert np.all(np.diff(decomp.eigenvalues) >= 0)
    assert np.allclose(decomp.reconstruct(), H, atol=1e-10)


def test_rank_and_range_basis(rng):
    B = rng.standard_normal((6, 2))
    M = B @ B.T
    assert numerical_rank(M) == 2
    U = orthonormal_range_basis(M)
    assert U.shape == (6, 2)
    assert np.allclose(U.conj().T @ U, np.eye(2), atol=1e-10)


def test_sqrt_and_pseudo_inverse():
    M = np.diag([4.0, 1.0, 0.0])
    assert np.allclose(matrix_sqrt_psd(M), np.diag([2.0, 1.0, 0.0]))
    assert np.allclose(pseudo_inverse_psd(M), np.diag([0.25, 1.0, 0.0]))
    assert np.allclose(pseudo_inverse_psd(M, power=0.5), np.diag([0.5, 1.0, 0.0]))


def test_sqrt_rejects_negative():
    with pytest.raises(ValidationError):
        matrix_sqrt_psd(np.diag([1.0, -0.1]))


def test_is_psd_slack(policy):
    assert is_psd(np.diag([1.0, -1e-12]), policy)
    assert not is_psd(np.diag([1.0, -1e-6]), policy)


def test_subspace_intersection():
    I = np.eye(3, dtype=complex)
    U = I[:, [0, 1]]
    V = I[:, [1, 2]]
    W = subspace_intersection(U, V)
    assert W.shape[1] == 1
    assert abs(abs(W[1, 0]) - 1.0) < 1e-12
    assert subspace_intersection(I[:, [0]], I[:, [2]]).shape[1] == 0


def test_principal_cosines_of_tilted_lines():
    theta = 0.3
    U = np.array([[1.0], [0.0]])
    V = np.array([[np.cos(theta)], [np.sin(theta)]])
    assert principal_cosines(U, V)[0] == pytest.approx(np.cos(theta))


def test_commutator_norm():
    Z = np.diag([1.0, -1.0])
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert commutator_norm(Z, Z) == 0.0
    assert commutator_norm(Z, X) == pytest.approx(2 * np.sqrt(2))


def test_spectral_function_and_projector(rng):
    assert np.allclose(spectral_function(np.diag([1.0, 4.0]), np.sqrt), np.diag([1.0, 2.0]))
    A = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    P = projector_from_basis(orthonormal_range_basis(A))
    assert np.allclose(P @ P, P)
    assert np.allclose(P @ A, A)
