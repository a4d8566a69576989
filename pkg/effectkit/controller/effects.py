"""Effect order, factorisation, weak atoms, projection lattice and support machinery."""
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np
import scipy.linalg as la

from ..common.errors import InternalError, OrderingError, ValidationError
from ..common.logging import get_logger
from ..models.effects import Contraction, Effect, Projection, PureOperation, SupportOverlap
from ..models.numerics import DEFAULT_POLICY, SpectralDecomposition, TolerancePolicy
from .numerics import (
    as_hermitian,
    as_matrix,
    eigvalsh,
    hermitian_part,
    matrix_sqrt_psd,
    min_eigenvalue,
    numerical_rank,
    orthonormal_range_basis,
    principal_decomposition,
    pseudo_inverse_psd,
    subspace_intersection,
    support_basis,
)

logger = get_logger(__name__)

FACTOR_RESIDUAL_TOL = 1e-7
UNIT_TOL = 1e-10
DILATION_IDENTITY_TOL = 1e-8
BISECTION_STEPS = 80

MatrixLike = Union[Effect, Contraction, np.ndarray]


def _check_same_dim(A: np.ndarray, B: np.ndarray) -> None:
    if A.shape != B.shape:
        raise ValidationError(f"dimension mismatch: {A.shape} vs {B.shape}")


def support_projection(E: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> Projection:
    """Projection onto the eigenvectors of E with eigenvalue above eig_zero."""
    return Projection.from_basis(support_basis(E, pol))


def restricted_inverse_sqrt(E: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """E^(-1/2) on ran P_E, zero on the complement.

    Raises:
        ValidationError: For the zero effect
    """
    if numerical_rank(E, pol) == 0:
        raise ValidationError("restricted inverse of the zero effect")
    return pseudo_inverse_psd(E, pol, power=0.5)


def below(A: MatrixLike, E: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """A <= E in the Loewner order, up to psd_slack."""
    A = as_matrix(A)
    E = as_matrix(E)
    _check_same_dim(A, E)
    return min_eigenvalue(E - A) >= -pol.psd_slack


def _contraction_matrix(M: Any) -> np.ndarray:
    A = as_matrix(M)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    return A


def _kernel_compatible(M: np.ndarray, K: np.ndarray, pol: TolerancePolicy):
    """SVD pieces of K and the quotient M K^+ restricted to ran K."""
    if M.shape[1] != K.shape[1]:
        raise ValidationError(f"domain mismatch: M has {M.shape[1]} columns, K has {K.shape[1]}")
    U, s, Vh = la.svd(K, full_matrices=False)
    smax = float(s[0]) if s.size else 0.0
    r = int(np.sum(s > pol.rank_rel * max(1.0, smax)))
    U, s, Vh = U[:, :r], s[:r], Vh[:r]
    C = (M @ Vh.conj().T / s) @ U.conj().T
    return C, Vh


def _ordering_gap(M: np.ndarray, K: np.ndarray) -> float:
    return min_eigenvalue(K.conj().T @ K - M.conj().T @ M)


def factor_contraction(M: MatrixLike, K: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> Contraction:
    """The unique contraction C with M = CK vanishing on (ran K)^perp.

    C is assembled on the SVD image basis of K, mapping K v_i to M v_i.

    Args:
        M: Contraction with M*M <= K*K
        K: Contraction on the same domain
        pol: Tolerance policy

    Returns:
        The factor C

    Raises:
        OrderingError: If M*M <= K*K fails, carrying the most negative eigenvalue,
            or if it holds only within psd_slack and ran M* leaves ran K*
            so that CK misses M by more than FACTOR_RESIDUAL_TOL
    """
    M = _contraction_matrix(M)
    K = _contraction_matrix(K)
    if M.shape[1] != K.shape[1]:
        raise ValidationError(f"domain mismatch: M has {M.shape[1]} columns, K has {K.shape[1]}")
    gap = _ordering_gap(M, K)
    if gap < -pol.psd_slack:
        raise OrderingError(gap)

    C, _ = _kernel_compatible(M, K, pol)
    residual = float(np.linalg.norm(C @ K - M, "fro"))
    if residual > FACTOR_RESIDUAL_TOL:
        raise OrderingError(
            gap,
            detail=f"factorisation residual {residual:.3e} above {FACTOR_RESIDUAL_TOL:.0e}: ran M* is not inside ran K*",
        )
    try:
        return Contraction(matrix=C)
    except ValueError:
        raise OrderingError(gap, detail=f"factor norm {np.linalg.norm(C, 2):.12f} exceeds 1 at resolution limit")


def order_effect(M: MatrixLike, K: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> Effect:
    """Q = C*C on the codomain of K, the unique effect on ran K with M*M = K*QK."""
    C = factor_contraction(M, K, pol)
    return Effect(matrix=C.gram)


def min_dominating_scale(M: MatrixLike, K: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """inf{lambda in [0, 1] : M*M <= lambda K*K} = ||C||^2."""
    return min(1.0, factor_contraction(M, K, pol).norm ** 2)


def douglas_scale(M: MatrixLike, K: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """inf{lambda >= 0 : M*M <= lambda K*K}; infinite when ran M* is not inside ran K*."""
    M = _contraction_matrix(M)
    K = _contraction_matrix(K)
    if not range_inclusion(M, K, pol):
        logger.debug("ran M* not inside ran K*, dominating scale is infinite")
        return float("inf")
    C, _ = _kernel_compatible(M, K, pol)
    return float(np.linalg.norm(C, 2) ** 2) if C.size else 0.0


def _psd_bisection(test: Callable[[float], bool], hi: float, steps: int = BISECTION_STEPS) -> float:
    """Smallest lambda in [0, hi] with test(lambda) true; test is monotone."""
    lo = 0.0
    if test(lo):
        return 0.0
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if test(mid):
            hi = mid
        else:
            lo = mid
    return hi


def dominating_scale_bisection(M: MatrixLike, K: MatrixLike, hi: float = 1.0, steps: int = BISECTION_STEPS) -> float:
    """Bisection oracle for inf{lambda : lambda K*K - M*M PSD}.

    Uses a round-off sized PSD tolerance instead of psd_slack so the bisection
    resolves the infimum itself.
    """
    M = _contraction_matrix(M)
    K = _contraction_matrix(K)
    G_K = K.conj().T @ K
    G_M = M.conj().T @ M
    tiny = 1e-14 * max(1.0, float(np.linalg.norm(G_K, 2)))
    test = lambda lam: float(eigvalsh(lam * G_K - G_M)[0]) >= -tiny
    while not test(hi):
        hi *= 2.0
        if hi > 1e12:
            return float("inf")
    return _psd_bisection(test, hi, steps)


def range_inclusion(M: MatrixLike, K: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """ran M* ⊆ ran K*, decided column-wise by distance to ran K*."""
    M = _contraction_matrix(M)
    K = _contraction_matrix(K)
    if M.shape[1] != K.shape[1]:
        raise ValidationError(f"domain mismatch: M has {M.shape[1]} columns, K has {K.shape[1]}")
    B = orthonormal_range_basis(M.conj().T, pol)
    R = orthonormal_range_basis(K.conj().T, pol)
    if B.shape[1] == 0:
        return True
    residual = B - R @ (R.conj().T @ B)
    dist = float(np.max(np.linalg.norm(residual, axis=0)))
    return dist <= pol.membership


def weak_atom_bound(E: MatrixLike, phi: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """sup{lambda >= 0 : lambda |phi><phi| <= E}.

    Returns 0 when phi leaves ran P_E by more than the membership threshold,
    otherwise ||E0^(-1/2) phi||^-2.

    Raises:
        ValidationError: If phi is not a unit vector
    """
    E = as_hermitian(E)
    phi = np.asarray(phi, dtype=complex).ravel()
    if phi.shape[0] != E.shape[0]:
        raise ValidationError(f"vector of length {phi.shape[0]} for a {E.shape[0]}-dimensional effect")
    if abs(np.linalg.norm(phi) - 1.0) > UNIT_TOL:
        raise ValidationError(f"phi must be a unit vector, has norm {np.linalg.norm(phi):.12f}")
    B = support_basis(E, pol)
    outside = float(np.linalg.norm(phi - B @ (B.conj().T @ phi)))
    if outside > pol.membership:
        return 0.0
    q = float(np.real(np.vdot(phi, pseudo_inverse_psd(E, pol) @ phi)))
    return 1.0 / q if q > 0 else 0.0


def weak_atom_bound_bisection(E: MatrixLike, phi: np.ndarray, steps: int = BISECTION_STEPS) -> float:
    """Bisection oracle: largest lambda in [0, 1] with E - lambda |phi><phi| PSD."""
    E = as_hermitian(E)
    phi = np.asarray(phi, dtype=complex).ravel()
    atom = np.outer(phi, phi.conj())
    tiny = 1e-13
    feasible = lambda lam: float(eigvalsh(E - lam * atom)[0]) >= -tiny
    lo, hi = 0.0, 1.0
    if feasible(hi):
        return hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _projection_basis(P: MatrixLike) -> np.ndarray:
    w, V = la.eigh(hermitian_part(P))
    return V[:, w > 0.5]


def projection_meet(P: MatrixLike, R: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> Projection:
    """P ∧ R, the projection onto ran P ∩ ran R."""
    P = as_matrix(P)
    R = as_matrix(R)
    _check_same_dim(P, R)
    W = subspace_intersection(_projection_basis(P), _projection_basis(R), pol)
    return Projection.from_basis(W)


def projection_join(projections: Sequence[MatrixLike], pol: TolerancePolicy = DEFAULT_POLICY) -> Projection:
    """Projection onto the sum of the ranges."""
    bases = [_projection_basis(P) for P in projections]
    if not bases:
        raise ValidationError("join of an empty family")
    stacked = np.hstack(bases)
    if stacked.shape[1] == 0:
        return Projection.zero(stacked.shape[0])
    return Projection.from_basis(orthonormal_range_basis(stacked, pol))


def complement(P: MatrixLike) -> Projection:
    P = as_matrix(P)
    return Projection(matrix=np.eye(P.shape[0]) - P)


def commutativity_projection(P: MatrixLike, R: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> Projection:
    """com(P, R), the join of P∧R, P∧R⊥, P⊥∧R and P⊥∧R⊥."""
    P = Projection(matrix=as_matrix(P))
    R = Projection(matrix=as_matrix(R))
    Pc, Rc = P.complement(), R.complement()
    meets = [
        projection_meet(P, R, pol),
        projection_meet(P, Rc, pol),
        projection_meet(Pc, R, pol),
        projection_meet(Pc, Rc, pol),
    ]
    return projection_join(meets, pol)


def noncommutativity_spectrum(P: MatrixLike, R: MatrixLike) -> np.ndarray:
    """Spectrum of PRP on ran P, ascending.

    Eigenvalues 0 and 1 belong to P∧R⊥ and P∧R; values strictly inside (0, 1)
    measure how far P and R fail to commute.
    """
    B = _projection_basis(P)
    if B.shape[1] == 0:
        return np.zeros(0)
    R = as_hermitian(R)
    return eigvalsh(B.conj().T @ R @ B)


def support_overlap(E: MatrixLike, F: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> SupportOverlap:
    """ran P_E ∩ ran P_F with the largest principal cosine as certificate."""
    U = support_basis(E, pol)
    V = support_basis(F, pol)
    if U.shape[0] != V.shape[0]:
        raise ValidationError(f"dimension mismatch: {U.shape[0]} vs {V.shape[0]}")
    cosines, W = principal_decomposition(U, V, pol)
    return SupportOverlap(
        dimension=int(W.shape[1]),
        max_cosine=float(cosines[0]) if cosines.size else 0.0,
        basis=W,
    )


def effects_disjoint(E: MatrixLike, F: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """True iff the supports of E and F intersect trivially."""
    return support_overlap(E, F, pol).dimension == 0


def _function_values(f: Union[Callable, Sequence[float], np.ndarray], spectrum: SpectralDecomposition) -> np.ndarray:
    values = np.asarray(f(spectrum.eigenvalues) if callable(f) else f, dtype=float)
    if values.shape != spectrum.eigenvalues.shape:
        raise ValidationError(f"function table of shape {values.shape} for a spectrum of size {spectrum.dim}")
    if values.min() < -1e-12 or values.max() > 1 + 1e-12:
        raise ValidationError("function values must lie in [0, 1]")
    return np.clip(values, 0.0, 1.0)


def _support_set_projection(values: np.ndarray, spectrum: SpectralDecomposition, pol: TolerancePolicy) -> np.ndarray:
    """A(S) for S = {lambda : f(lambda) > 0}, whole eigenspaces included."""
    w = spectrum.eigenvalues
    chosen = w[values > 0]
    mask = np.array([np.any(np.abs(chosen - x) <= pol.eig_zero) for x in w], dtype=bool)
    return spectrum.spectral_projection(mask)


def support_bound_check(
    f: Union[Callable, Sequence[float], np.ndarray],
    A: SpectralDecomposition,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> bool:
    """Verify P_E <= A(supp f) for E = f(A).

    Args:
        f: Values on the eigenvalues of A (or a callable evaluated there), in [0, 1]
        A: Spectral decomposition of a Hermitian matrix
        pol: Tolerance policy

    Returns:
        The verification result

    Raises:
        ValidationError: If f leaves [0, 1]
    """
    values = _function_values(f, A)
    E = A.apply(lambda _: values)
    P_E = support_projection(E, pol)
    return below(P_E, _support_set_projection(values, A, pol), pol)


def spectral_support_disjoint(
    f: Union[Callable, Sequence[float], np.ndarray],
    A: SpectralDecomposition,
    g: Union[Callable, Sequence[float], np.ndarray],
    B: SpectralDecomposition,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> bool:
    """Sufficient test for f(A) and g(B) being disjoint.

    True when A(supp f) ∧ B(supp g) = 0, which forces the supports of f(A) and
    g(B) to meet trivially.
    """
    P = _support_set_projection(_function_values(f, A), A, pol)
    R = _support_set_projection(_function_values(g, B), B, pol)
    return projection_meet(P, R, pol).rank == 0


def factor_pure_operation(Lam: PureOperation, Phi: PureOperation, pol: TolerancePolicy = DEFAULT_POLICY) -> PureOperation:
    """Psi with Lam = Psi ∘ Phi, for Lam = M(.)M* and Phi = K(.)K*."""
    M = Lam.kraus.matrix
    K = Phi.kraus.matrix
    C = factor_contraction(M, K, pol)
    err = float(np.linalg.norm(C.matrix @ K - M, "fro"))
    if err > FACTOR_RESIDUAL_TOL:
        raise InternalError(f"composition check failed: ||CK - M||_F = {err:.3e}")
    return PureOperation(kraus=C)


def luders_operation(E: MatrixLike, pol: TolerancePolicy = DEFAULT_POLICY) -> PureOperation:
    """Pure operation with Kraus element E^(1/2)."""
    return PureOperation(kraus=Contraction(matrix=matrix_sqrt_psd(E, pol)))


def dilation_lower_bound_witness(
    E: MatrixLike,
    J: np.ndarray,
    P: MatrixLike,
    psi: np.ndarray,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> Optional[np.ndarray]:
    """eta in ran PJ with J*eta = psi and ||eta|| <= 1, when |psi><psi| <= E.

    Built by factorising M = <psi| through K = PJ.

    Args:
        E: Effect with E = J*PJ
        J: Isometry into the dilation space
        P: Projection on the dilation space
        psi: Vector with ||psi|| <= 1
        pol: Tolerance policy

    Returns:
        eta, or None when |psi><psi| is not below E

    Raises:
        ValidationError: If E = J*PJ fails or ||psi|| > 1
    """
    E = as_hermitian(E)
    J = np.asarray(J, dtype=complex)
    P = as_hermitian(P)
    psi = np.asarray(psi, dtype=complex).ravel()
    err = float(np.linalg.norm(J.conj().T @ P @ J - E, "fro"))
    if err > DILATION_IDENTITY_TOL:
        raise ValidationError(f"E = J*PJ violated by {err:.3e}")
    norm = float(np.linalg.norm(psi))
    if norm > 1 + UNIT_TOL:
        raise ValidationError(f"psi has norm {norm:.12f} > 1")
    if norm == 0.0:
        return np.zeros(J.shape[0], dtype=complex)
    if not below(np.outer(psi, psi.conj()), E, pol):
        return None

    C = factor_contraction(psi.conj().reshape(1, -1), P @ J, pol)
    eta = C.matrix.conj().ravel()
    err = float(np.linalg.norm(J.conj().T @ eta - psi))
    if err > FACTOR_RESIDUAL_TOL:
        raise InternalError(f"witness check failed: ||J*eta - psi|| = {err:.3e}")
    return eta


def shorted_effect(E: MatrixLike, W: np.ndarray, pol: TolerancePolicy = DEFAULT_POLICY) -> np.ndarray:
    """Largest A <= E with ran A inside ran W, as a matrix on ran W.

    Requires ran W ⊆ ran P_E; the value is (W* E^+ W)^(-1) in the W coordinates.

    Raises:
        ValidationError: If W leaves the support of E
    """
    E = as_hermitian(E)
    W = np.asarray(W, dtype=complex)
    if W.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    B = support_basis(E, pol)
    outside = float(np.max(np.linalg.norm(W - B @ (B.conj().T @ W), axis=0)))
    if outside > np.sqrt(2 * pol.rank_rel) + pol.membership:
        raise ValidationError(f"subspace leaves the support by {outside:.3e}")
    g, V = la.eigh(hermitian_part(W.conj().T @ pseudo_inverse_psd(E, pol) @ W))
    return hermitian_part((V / g) @ V.conj().T)


def random_effect(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> Effect:
    """A A* / ||A A*|| scaled by a uniform factor, for Gaussian A of the given rank."""
    rank = dim if rank is None else rank
    A = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    G = A @ A.conj().T
    return Effect(matrix=rng.uniform(0.2, 1.0) * G / np.linalg.norm(G, 2))


def random_ordered_pair(dim: int, rng: np.random.Generator, rows: Optional[int] = None):
    """Random (M, K) with M = C0 K for a strict contraction C0, so M*M <= K*K."""
    rows = dim if rows is None else rows
    K = rng.standard_normal((rows, dim)) + 1j * rng.standard_normal((rows, dim))
    K /= np.linalg.norm(K, 2)
    C0 = rng.standard_normal((rows, rows)) + 1j * rng.standard_normal((rows, rows))
    C0 *= rng.uniform(0.1, 0.95) / np.linalg.norm(C0, 2)
    return C0 @ K, K
