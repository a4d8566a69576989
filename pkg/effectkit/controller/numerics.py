from typing import Any, Callable

import numpy as np
import scipy.linalg as la

from ..common.errors import ValidationError
from ..common.logging import get_logger
from ..models.effects import hermitian_array
from ..models.numerics import DEFAULT_POLICY, SpectralDecomposition, TolerancePolicy

logger = get_logger(__name__)


def as_matrix(M: Any) -> np.ndarray:
    """Unwrap Effect/Projection/Contraction models to their complex matrix."""
    return np.asarray(getattr(M, "matrix", M), dtype=complex)


def as_hermitian(M: Any) -> np.ndarray:
    """Validated, symmetrised Hermitian matrix.

    Raises:
        ValidationError: If M is not square or not Hermitian within tol_sym
    """
    try:
        return hermitian_array(as_matrix(M))
    except ValueError as e:
        raise ValidationError(str(e))


def eig_hermitian(M: Any) -> SpectralDecomposition:
    w, V = la.eigh(as_hermitian(M))
    return SpectralDecomposition(eigenvalues=w, eigenvectors=V)


def hermitian_part(M: Any) -> np.ndarray:
    """(M + M*)/2 without the symmetry check, for computed products."""
    A = as_matrix(M)
    return (A + A.conj().T) / 2


def eigvalsh(M: Any) -> np.ndarray:
    return la.eigh(hermitian_part(M), eigvals_only=True)


def min_eigenvalue(M: Any) -> float:
    return float(eigvalsh(M)[0])


def numerical_rank(M: Any, pol: TolerancePolicy = DEFAULT_POLICY) -> int:
    """Count of eigenvalues with |lambda| > rank_rel * max(1, ||M||_2)."""
    w = eigvalsh(M)
    norm = float(np.max(np.abs(w))) if w.size else 0.0
    return int(np.sum(np.abs(w) > pol.rank_rel * max(1.0, norm)))


def orthonormal_range_basis(M: Any, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal columns spanning the numerical range of a general matrix.

    The column count equals numerical_rank(M M*).
    """
    A = as_matrix(M)
    if A.ndim != 2:
        raise ValidationError(f"expected a matrix, got shape {A.shape}")
    if A.size == 0:
        return np.zeros((A.shape[0], 0), dtype=complex)
    U, s, _ = la.svd(A, full_matrices=False)
    ev = s ** 2
    r = int(np.sum(ev > pol.rank_rel * max(1.0, float(ev[0]))))
    return U[:, :r]


def support_basis(M: Any, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Eigenvectors of a PSD matrix with eigenvalue above eig_zero."""
    w, V = la.eigh(hermitian_part(M))
    return V[:, w > pol.eig_zero]


def principal_decomposition(U: np.ndarray, V: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY):
    """Principal cosines (descending) and the intersection basis from one SVD of U*V."""
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    if U.shape[0] != V.shape[0]:
        raise ValidationError(f"dimension mismatch: {U.shape[0]} vs {V.shape[0]}")
    if U.shape[1] == 0 or V.shape[1] == 0:
        return np.zeros(0), np.zeros((U.shape[0], 0), dtype=complex)
    Y, s, _ = la.svd(U.conj().T @ V, full_matrices=False)
    s = np.clip(s, 0.0, 1.0)
    k = int(np.sum(s >= 1.0 - pol.rank_rel))
    return s, U @ Y[:, :k]


def principal_cosines(U: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Cosines of the principal angles between ran U and ran V, descending."""
    return principal_decomposition(U, V)[0]


def subspace_intersection(U: np.ndarray, V: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Orthonormal basis of ran U ∩ ran V from principal angles.

    Singular values of U*V at or above 1 - rank_rel count as angle zero.

    Args:
        U: Orthonormal columns
        V: Orthonormal columns in the same dimension
        pol: Tolerance policy

    Returns:
        Basis matrix with zero columns when the intersection is trivial

    Raises:
        ValidationError: On dimension mismatch
    """
    return principal_decomposition(U, V, pol)[1]


def projector_from_basis(B: np.ndarray) -> np.ndarray:
    B = np.asarray(B, dtype=complex)
    return B @ B.conj().T


def spectral_function(M: Any, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return eig_hermitian(M).apply(f)


def _clamped_spectrum(M: Any, pol: TolerancePolicy):
    w, V = la.eigh(hermitian_part(M))
    if w.size and w[0] < -pol.psd_slack:
        raise ValidationError(f"matrix is not PSD: eigenvalue {w[0]:.3e} below -{pol.psd_slack:.1e}")
    return np.clip(w, 0.0, None), V


def matrix_sqrt_psd(M: Any, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Square root of M+ after clamping eigenvalues in [-psd_slack, 0) to zero."""
    w, V = _clamped_spectrum(as_hermitian(M), pol)
    return (V * np.sqrt(w)) @ V.conj().T


def pseudo_inverse_psd(M: Any, pol: TolerancePolicy = DEFAULT_POLICY, power: float = 1.0) -> np.ndarray:
    """M^(-power) on the eig_zero support, zero on its complement."""
    w, V = _clamped_spectrum(M, pol)
    keep = w > pol.eig_zero
    inv = np.zeros_like(w)
    inv[keep] = w[keep] ** (-power)
    return (V * inv) @ V.conj().T


def psd_part(M: Any) -> np.ndarray:
    """Positive part M+ of a Hermitian matrix (Frobenius projection onto the PSD cone)."""
    w, V = la.eigh(hermitian_part(M))
    return (V * np.clip(w, 0.0, None)) @ V.conj().T


def is_psd(M: Any, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    return min_eigenvalue(M) >= -pol.psd_slack


def commutator_norm(A: Any, B: Any) -> float:
    A = as_matrix(A)
    B = as_matrix(B)
    return float(np.linalg.norm(A @ B - B @ A, "fro"))
