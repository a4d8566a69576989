from itertools import product
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from ..common.errors import MarginalMismatchError, ValidationError
from ..common.logging import get_logger
from ..models.effects import Contraction, Effect, Projection
from ..models.numerics import DEFAULT_POLICY, TolerancePolicy
from ..models.observables import (
    BinaryObservable,
    ComplementarityVerdict,
    DiscreteObservable,
    NaimarkDilation,
    OutcomeFamily,
)
from .effects import (
    below,
    commutativity_projection,
    factor_contraction,
    projection_meet,
    support_overlap,
    weak_atom_bound,
)
from .numerics import matrix_sqrt_psd, numerical_rank, pseudo_inverse_psd

logger = get_logger(__name__)

MARGINAL_TOL = 1e-7
CELL_ZERO_TOL = 1e-7

PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


# --- Constructors ---

def qubit_effect(e0: float, evec: Sequence[float]) -> Effect:
    """E = (e0 I + e.sigma) / 2."""
    x, y, z = evec
    M = 0.5 * (e0 * np.eye(2) + x * PAULI["x"] + y * PAULI["y"] + z * PAULI["z"])
    return Effect(matrix=M)


def _axis(axis) -> np.ndarray:
    if isinstance(axis, str):
        return {"x": np.array([1.0, 0, 0]), "y": np.array([0, 1.0, 0]), "z": np.array([0, 0, 1.0])}[axis]
    n = np.asarray(axis, dtype=float)
    return n / np.linalg.norm(n)


def smeared_qubit_observable(axis="z", sharpness: float = 1.0) -> DiscreteObservable:
    """Outcomes +1/-1 with effects (I ± sharpness n.sigma)/2."""
    if not 0.0 <= sharpness <= 1.0:
        raise ValidationError(f"sharpness must lie in [0, 1], got {sharpness}")
    n = _axis(axis) * sharpness
    return DiscreteObservable(labels=(1, -1), effects=(qubit_effect(1.0, n), qubit_effect(1.0, -n)))


def qubit_sharp_observable(axis="z") -> DiscreteObservable:
    return smeared_qubit_observable(axis, 1.0)


def trine_povm() -> DiscreteObservable:
    """Three rank-one effects (2/3)|psi_k><psi_k| with Bloch vectors 120 degrees apart."""
    effects = []
    for k in range(3):
        theta = 2 * np.pi * k / 3
        psi = np.array([np.cos(theta / 2), np.sin(theta / 2)], dtype=complex)
        effects.append(Effect(matrix=(2 / 3) * np.outer(psi, psi.conj())))
    return DiscreteObservable(labels=(0, 1, 2), effects=tuple(effects))


def random_povm(
    dim: int,
    n_outcomes: int,
    rng: np.random.Generator,
    rank: Optional[int] = None,
) -> DiscreteObservable:
    """Random POVM from Gaussian Gram matrices normalised by S^(-1/2).

    Args:
        dim: Hilbert space dimension
        n_outcomes: Number of outcomes
        rng: Random generator
        rank: Rank of each effect (default: full)

    Returns:
        The observable, labels 0..n_outcomes-1

    Raises:
        ValidationError: If the effects cannot span the space
    """
    rank = dim if rank is None else rank
    if n_outcomes * rank < dim or rank < 1:
        raise ValidationError(f"{n_outcomes} effects of rank {rank} cannot sum to I in dimension {dim}")
    grams = []
    for _ in range(n_outcomes):
        A = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
        grams.append(A @ A.conj().T)
    S_inv_half = pseudo_inverse_psd(sum(grams), power=0.5)
    effects = [S_inv_half @ G @ S_inv_half for G in grams]
    effects = [(E + E.conj().T) / 2 for E in effects]
    # absorb the round-off of the normalisation into the last effect
    effects[-1] = effects[-1] + (np.eye(dim) - sum(effects))
    return DiscreteObservable.from_matrices(range(n_outcomes), effects)


def product_observable(E: DiscreteObservable, F: DiscreteObservable) -> DiscreteObservable:
    """G(x, y) = E(x)^(1/2) F(y) E(x)^(1/2); a joint observable when E and F commute."""
    labels, effects = [], []
    for (x, Ex), (y, Fy) in product(E.items(), F.items()):
        R = matrix_sqrt_psd(Ex)
        labels.append((x, y))
        effects.append(Effect(matrix=R @ Fy.matrix @ R))
    return DiscreteObservable(labels=tuple(labels), effects=tuple(effects))


def direct_sum_observable(E: DiscreteObservable, F: DiscreteObservable) -> DiscreteObservable:
    """Block-diagonal E(x) ⊕ F(x) on the common label set."""
    if set(E.labels) != set(F.labels):
        raise ValidationError("direct sums need the same outcome labels")
    effects = [Effect(matrix=la.block_diag(Ex.matrix, F.effect(x).matrix)) for x, Ex in E.items()]
    return DiscreteObservable(labels=E.labels, effects=tuple(effects))


def marginals(G: DiscreteObservable) -> Tuple[Dict[Hashable, np.ndarray], Dict[Hashable, np.ndarray]]:
    """Marginal sums of an observable labelled by pairs (x, y)."""
    first: Dict[Hashable, np.ndarray] = {}
    second: Dict[Hashable, np.ndarray] = {}
    for label, Gxy in G.items():
        if not (isinstance(label, tuple) and len(label) == 2):
            raise ValidationError(f"joint observable label {label!r} is not a pair")
        x, y = label
        first[x] = first.get(x, 0) + Gxy.matrix
        second[y] = second.get(y, 0) + Gxy.matrix
    return first, second


# --- Coarse graining and tests ---

def coarse_grain(E: DiscreteObservable, X: Iterable[Hashable]) -> BinaryObservable:
    """Q_{E,X}: yes-effect E(X) = sum over x in X of E(x)."""
    X = list(X)
    yes = np.zeros((E.dim, E.dim), dtype=complex)
    for x in X:
        yes = yes + E.effect(x).matrix
    return BinaryObservable(yes_effect=Effect(matrix=yes))


def is_test(A: BinaryObservable, Q: BinaryObservable, pol: TolerancePolicy = DEFAULT_POLICY) -> bool:
    """A(1) != 0 and A(1) <= Q(1)."""
    return numerical_rank(A.yes_effect, pol) >= 1 and below(A.yes_effect, Q.yes_effect, pol)


def _atom_scale(E: Effect, w: np.ndarray, pol: TolerancePolicy) -> float:
    q = float(np.real(np.vdot(w, pseudo_inverse_psd(E, pol) @ w)))
    return 1.0 / q if q > 0 else 0.0


def common_test_exists(
    Q1: BinaryObservable,
    Q2: BinaryObservable,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> Tuple[bool, Optional[Effect]]:
    """Whether Q1 and Q2 share a test, with a weak-atom witness when they do.

    The witness is lambda |w><w| for w in the support intersection and lambda the
    smaller of the two weak-atom bounds at w.
    """
    overlap = support_overlap(Q1.yes_effect, Q2.yes_effect, pol)
    if overlap.dimension == 0:
        return False, None
    w = overlap.basis[:, 0]
    lam = min(weak_atom_bound(Q1.yes_effect, w, pol), weak_atom_bound(Q2.yes_effect, w, pol))
    if lam == 0.0:
        # w sits in the intersection only up to the principal-angle tolerance
        lam = min(_atom_scale(Q1.yes_effect, w, pol), _atom_scale(Q2.yes_effect, w, pol))
    return True, Effect(matrix=lam * np.outer(w, w.conj()))


def joint_observable_with_test(A: BinaryObservable, Q: BinaryObservable) -> DiscreteObservable:
    """Joint observable of Q (first index) and a test A (second index).

    G11 = A(1), G10 = Q(1) - A(1), G01 = 0, G00 = I - Q(1).
    """
    a, q = A.yes_effect.matrix, Q.yes_effect.matrix
    I = np.eye(A.dim)
    return DiscreteObservable.from_matrices(
        [(1, 1), (1, 0), (0, 1), (0, 0)],
        [a, q - a, np.zeros_like(a), I - q],
    )


def refinement_by_test(A: BinaryObservable, Q: BinaryObservable) -> DiscreteObservable:
    """Three outcomes {A(1), Q(1) - A(1), Q(0)} refining both Q and A."""
    a, q = A.yes_effect.matrix, Q.yes_effect.matrix
    return DiscreteObservable.from_matrices(["test", "rest", "no"], [a, q - a, np.eye(A.dim) - q])


def contraction_for_test(A: BinaryObservable, Q: BinaryObservable, pol: TolerancePolicy = DEFAULT_POLICY) -> Contraction:
    """Contraction C with A(1)^(1/2) = Q(1)^(1/2) C."""
    root_a = matrix_sqrt_psd(A.yes_effect, pol)
    root_q = matrix_sqrt_psd(Q.yes_effect, pol)
    # factor_contraction gives root_a = C' root_q; take adjoints
    C = factor_contraction(root_a, root_q, pol)
    return Contraction(matrix=C.matrix.conj().T)


def binary_convolution(Q: BinaryObservable, p: float) -> BinaryObservable:
    """Yes-effect p Q(0) + (1 - p) Q(1)."""
    if not 0.0 < p < 1.0:
        raise ValidationError(f"p must lie in (0, 1), got {p}")
    return BinaryObservable(
        yes_effect=Effect(matrix=p * Q.no_effect.matrix + (1 - p) * Q.yes_effect.matrix)
    )


# --- Complementarity ---

def _verdict(
    pair,
    cosine: float,
    intersection_dim: int,
    witness: Optional[np.ndarray],
    pol: TolerancePolicy,
    method: str,
) -> ComplementarityVerdict:
    threshold = 1.0 - pol.rank_rel
    cosine = float(min(max(cosine, 0.0), 1.0))
    disjoint = cosine < threshold
    boundary = abs(cosine - threshold) <= pol.rank_rel
    if boundary:
        logger.warning(f"Verdict for {pair} sits on the decision boundary (cosine {cosine:.12f})")
    pairs = None
    if not disjoint and witness is not None:
        w = witness / np.linalg.norm(witness)
        pairs = [(float(z.real), float(z.imag)) for z in w]
    return ComplementarityVerdict(
        pair=pair,
        disjoint=disjoint,
        overlap_cosine=cosine,
        threshold=threshold,
        boundary=boundary,
        intersection_dim=intersection_dim if not disjoint else 0,
        method=method,
        witness=pairs,
    )


def _pair_key(family: OutcomeFamily, s) -> Tuple[Hashable, ...]:
    return family.ordered(s)


def support_verdict(
    E: DiscreteObservable,
    F: DiscreteObservable,
    X: Sequence[Hashable],
    Y: Sequence[Hashable],
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> ComplementarityVerdict:
    """Disjointness of E(X) and F(Y) from their support intersection."""
    overlap = support_overlap(coarse_grain(E, X).yes_effect, coarse_grain(F, Y).yes_effect, pol)
    witness = overlap.basis[:, 0] if overlap.dimension else None
    return _verdict((tuple(X), tuple(Y)), overlap.max_cosine, overlap.dimension, witness, pol, "support")


def complementary_family(
    E: DiscreteObservable,
    F: DiscreteObservable,
    A0: OutcomeFamily,
    B0: OutcomeFamily,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> List[ComplementarityVerdict]:
    """One support verdict per (X, Y) in A0 x B0."""
    if E.dim != F.dim:
        raise ValidationError(f"dimension mismatch: {E.dim} vs {F.dim}")
    verdicts = [
        support_verdict(E, F, _pair_key(A0, X), _pair_key(B0, Y), pol)
        for X in A0.sets
        for Y in B0.sets
    ]
    logger.debug(f"{sum(v.disjoint for v in verdicts)}/{len(verdicts)} pairs disjoint")
    return verdicts


def is_complementary(
    E: DiscreteObservable,
    F: DiscreteObservable,
    A0: OutcomeFamily,
    B0: OutcomeFamily,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> bool:
    return all(v.disjoint for v in complementary_family(E, F, A0, B0, pol))


def strong_complementarity(
    E: DiscreteObservable,
    F: DiscreteObservable,
    X: Sequence[Hashable],
    Y: Sequence[Hashable],
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> Tuple[bool, bool, bool]:
    """Disjointness of (E(X), F(Y)), (E(X), I - F(Y)) and (I - E(X), F(Y))."""
    EX = coarse_grain(E, X)
    FY = coarse_grain(F, Y)
    pairs = [
        (EX.yes_effect, FY.yes_effect),
        (EX.yes_effect, FY.no_effect),
        (EX.no_effect, FY.yes_effect),
    ]
    return tuple(support_overlap(a, b, pol).dimension == 0 for a, b in pairs)


def no_joint_measurement_check(
    E: DiscreteObservable,
    F: DiscreteObservable,
    A0: OutcomeFamily,
    B0: OutcomeFamily,
    G: DiscreteObservable,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> bool:
    """Check a candidate joint observable against the disjointness verdicts.

    Every cell G(X x Y) lies below both E(X) and F(Y), so it has to vanish on
    each disjoint pair.

    Returns:
        True when no disjoint pair carries a nonzero cell

    Raises:
        MarginalMismatchError: If G does not reproduce E and F
    """
    first, second = marginals(G)
    deviation = 0.0
    for obs, marg in ((E, first), (F, second)):
        if set(marg) != set(obs.labels):
            raise MarginalMismatchError(float("inf"), detail="joint labels do not cover the outcome sets")
        for x, Ex in obs.items():
            deviation = max(deviation, float(np.linalg.norm(marg[x] - Ex.matrix, "fro")))
    if deviation > MARGINAL_TOL:
        raise MarginalMismatchError(deviation)

    consistent = True
    for verdict in complementary_family(E, F, A0, B0, pol):
        if not verdict.disjoint:
            continue
        X, Y = verdict.pair
        cell = sum(G.effect((x, y)).matrix for x in X for y in Y)
        if np.linalg.norm(cell, 2) > CELL_ZERO_TOL:
            logger.warning(f"Cell {verdict.pair} is nonzero although the pair is disjoint")
            consistent = False
    return consistent


# --- Naimark dilations ---

def minimal_dilation(F: DiscreteObservable, pol: TolerancePolicy = DEFAULT_POLICY) -> NaimarkDilation:
    """Stack sqrt(lambda) v* over the nonzero eigen-branches of every effect.

    Branches below eig_zero * ||F(y)|| are dropped, so the total block rank is
    the dilation dimension.
    """
    rows: List[np.ndarray] = []
    blocks: Dict[Hashable, Tuple[int, ...]] = {}
    for y, Fy in F.items():
        w, V = la.eigh(Fy.matrix)
        norm = float(np.max(np.abs(w))) if w.size else 0.0
        keep = w > pol.eig_zero * max(norm, pol.eig_zero)
        start = len(rows)
        for lam, v in zip(w[keep], V[:, keep].T):
            rows.append(np.sqrt(lam) * v.conj())
        blocks[y] = tuple(range(start, len(rows)))
    J = np.vstack(rows)
    dilation = NaimarkDilation(isometry=J, blocks=blocks)
    err = dilation.reconstruction_error(F)
    if err > 1e-8:
        raise ValidationError(f"dilation reconstruction error {err:.3e}")
    return dilation


def _compressed_range(dil: NaimarkDilation, labels: Sequence[Hashable], pol: TolerancePolicy) -> np.ndarray:
    """Orthonormal W with Q(X)J = U S W*; ran W is the support of J*Q(X)J."""
    J_X = dil.isometry[dil.rows(labels)]
    if J_X.shape[0] == 0:
        return np.zeros((dil.dim, 0), dtype=complex)
    _, s, Vh = la.svd(J_X, full_matrices=False)
    return Vh[s ** 2 > pol.eig_zero].conj().T


def dilation_complementarity(
    E: DiscreteObservable,
    F: DiscreteObservable,
    X: Sequence[Hashable],
    Y: Sequence[Hashable],
    dil_E: NaimarkDilation,
    dil_F: NaimarkDilation,
    pol: TolerancePolicy = DEFAULT_POLICY,
) -> ComplementarityVerdict:
    """Verdict from the dilation criterion J*eta = K*eta'.

    Solutions pair eta in ran Q(X)J with eta' in ran Q'(Y)K. Writing
    Q(X)J = U S W*, J*U = W S, so a solution exists exactly when the stacked
    orthonormal [W | -W'] has a nullspace. Its smallest singular value gives
    the overlap cosine 1 - sigma_min^2.

    Raises:
        ValidationError: If a dilation does not reproduce its observable
    """
    for obs, dil in ((E, dil_E), (F, dil_F)):
        err = dil.reconstruction_error(obs)
        if err > 1e-8:
            raise ValidationError(f"dilation does not reproduce the observable: error {err:.3e}")
    if E.dim != F.dim:
        raise ValidationError(f"dimension mismatch: {E.dim} vs {F.dim}")

    pair = (tuple(X), tuple(Y))
    W_E = _compressed_range(dil_E, X, pol)
    W_F = _compressed_range(dil_F, Y, pol)
    r, r2 = W_E.shape[1], W_F.shape[1]
    if r == 0 or r2 == 0:
        return _verdict(pair, 0.0, 0, None, pol, "dilation")

    _, sigma, Vh = la.svd(np.hstack([W_E, -W_F]), full_matrices=True)
    # more columns than rows: the missing singular values are zero
    sigma = np.concatenate([sigma, np.zeros(r + r2 - sigma.size)])
    null = sigma ** 2 <= pol.rank_rel
    cosine = 1.0 - float(np.min(sigma ** 2))
    witness = None
    if np.any(null):
        z = Vh[int(np.argmin(sigma))].conj()
        witness = W_E @ z[:r]
    return _verdict(pair, cosine, int(np.sum(null)), witness, pol, "dilation")


def com_observables(E: DiscreteObservable, F: DiscreteObservable, pol: TolerancePolicy = DEFAULT_POLICY) -> Projection:
    """Meet of com(E(x), F(y)) over all singleton pairs.

    Raises:
        ValidationError: If either observable is not projective
    """
    if not (E.is_projective() and F.is_projective()):
        raise ValidationError("com_observables needs projective observables")
    if E.dim != F.dim:
        raise ValidationError(f"dimension mismatch: {E.dim} vs {F.dim}")
    result = Projection.identity(E.dim)
    for Ex in E.effects:
        for Fy in F.effects:
            result = projection_meet(result, commutativity_projection(Ex.matrix, Fy.matrix, pol), pol)
            if result.rank == 0:
                return result
    return result
