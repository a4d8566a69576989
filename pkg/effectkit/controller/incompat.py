"""Joint lower bounds, binary joint measurability and noise thresholds.

Feasibility questions are answered by cyclic Dykstra projections onto matrix
intervals and trace floors. Qubit pairs also have an exact closed form, used as
an independent oracle.
"""
from itertools import product as grid_product
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np
import pydantic

from ..common.errors import InconclusiveOracleError, InternalError, ValidationError
from ..common.logging import get_logger
from ..models.effects import Effect
from ..models.incompat import (
    ConstraintKind,
    FeasibilityProblem,
    FeasibilityResult,
    FeasibilityStatus,
    QubitEffectParams,
    RegionMap,
    SpectrahedralConstraint,
    ThresholdResult,
)
from ..models.numerics import DEFAULT_POLICY, TolerancePolicy
from ..models.observables import BinaryObservable, DiscreteObservable
from .effects import below, shorted_effect, support_basis
from .numerics import as_hermitian, eigvalsh, hermitian_part, principal_decomposition, psd_part
from .observables import PAULI

logger = get_logger(__name__)

DEFAULT_ORACLE = {"tol": 1e-7, "max_iter": 20000, "plateau_window": 200}
PLATEAU_IMPROVEMENT = 0.99
BOUNDARY_FACTOR = 10.0
QUBIT_SLACK_TOL = 1e-10
THRESHOLD_PRECISION = 1e-4
REFINE_ROUNDS = 3
ORACLES = ("auto", "closed_form", "dykstra")

BinaryLike = Union[BinaryObservable, DiscreteObservable]


# --- Dykstra feasibility oracle ---

def _project(c: SpectrahedralConstraint, A: np.ndarray) -> np.ndarray:
    if c.kind == ConstraintKind.LOWER_BOUND:
        return c.datum + psd_part(A - c.datum)
    if c.kind == ConstraintKind.UPPER_BOUND:
        return c.datum - psd_part(c.datum - A)
    shift = max(0.0, c.datum - float(np.real(np.trace(A))))
    return A + (shift / A.shape[0]) * np.eye(A.shape[0])


def _violation(c: SpectrahedralConstraint, A: np.ndarray) -> float:
    if c.kind == ConstraintKind.LOWER_BOUND:
        return max(0.0, -float(eigvalsh(A - c.datum)[0]))
    if c.kind == ConstraintKind.UPPER_BOUND:
        return max(0.0, -float(eigvalsh(c.datum - A)[0]))
    return max(0.0, c.datum - float(np.real(np.trace(A))))


def constraint_residual(constraints: Sequence[SpectrahedralConstraint], A: np.ndarray) -> float:
    """Largest violation of any constraint at A."""
    return max((_violation(c, A) for c in constraints), default=0.0)


def dykstra_feasible(
    constraints: Sequence[SpectrahedralConstraint],
    dim: int,
    tol: float = DEFAULT_ORACLE["tol"],
    max_iter: int = DEFAULT_ORACLE["max_iter"],
    plateau_window: int = DEFAULT_ORACLE["plateau_window"],
    start: Optional[np.ndarray] = None,
) -> FeasibilityResult:
    """Look for a Hermitian A meeting every constraint.

    One cycle projects onto each constraint set in turn with Dykstra
    corrections. The run stops as FEASIBLE once the residual drops to tol.
    It stops on a plateau once the best residual has not improved by 1% for
    plateau_window cycles: INFEASIBLE above 10 * tol, BOUNDARY otherwise.
    Running out of cycles gives INCONCLUSIVE.

    Args:
        constraints: Constraint list
        dim: Matrix dimension
        tol: Feasibility tolerance on the residual
        max_iter: Cycle budget
        plateau_window: Cycles without progress before stopping
        start: Initial iterate (default: zero)

    Returns:
        FeasibilityResult with the final iterate

    Raises:
        ValidationError: On inconsistent dimensions or non-positive tol
    """
    if tol <= 0 or max_iter < 1 or plateau_window < 1:
        raise ValidationError("oracle tol, max_iter and plateau_window must be positive")
    try:
        problem = FeasibilityProblem(dim=dim, constraints=tuple(constraints))
    except pydantic.ValidationError as e:
        raise ValidationError(f"Invalid feasibility problem: {e.errors()[0]['msg']}")
    constraints = problem.constraints

    x = np.zeros((dim, dim), dtype=complex) if start is None else as_hermitian(start)
    increments = [np.zeros((dim, dim), dtype=complex) for _ in constraints]
    best = np.inf
    last_progress = 0
    residual = constraint_residual(constraints, x)
    status = FeasibilityStatus.INCONCLUSIVE
    iterations = 0

    if residual <= tol:
        status = FeasibilityStatus.FEASIBLE
    else:
        for iterations in range(1, max_iter + 1):
            for i, c in enumerate(constraints):
                y = hermitian_part(_project(c, x + increments[i]))
                increments[i] = x + increments[i] - y
                x = y
            residual = constraint_residual(constraints, x)
            if residual <= tol:
                status = FeasibilityStatus.FEASIBLE
                break
            if residual < PLATEAU_IMPROVEMENT * best:
                best = residual
                last_progress = iterations
            elif iterations - last_progress >= plateau_window:
                status = (
                    FeasibilityStatus.INFEASIBLE
                    if best > BOUNDARY_FACTOR * tol
                    else FeasibilityStatus.BOUNDARY
                )
                break

    best = min(best, residual)
    logger.debug(f"Dykstra: {status.value} after {iterations} cycles, residual {residual:.3e}")
    return FeasibilityResult(
        status=status,
        feasible=status == FeasibilityStatus.FEASIBLE,
        iterate=x,
        residual=residual,
        iterations=iterations,
        tol=tol,
        best_residual=best,
    )


def _oracle(options: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    merged = dict(DEFAULT_ORACLE)
    merged.update(options or {})
    unknown = set(merged) - set(DEFAULT_ORACLE)
    if unknown:
        raise ValidationError(f"Unknown oracle options: {sorted(unknown)}")
    return merged


# --- Joint lower bounds ---

def parallel_sum(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A : B = A (A + B)^+ B, a common lower bound of positive A and B."""
    A = as_hermitian(A)
    B = as_hermitian(B)
    return hermitian_part(A @ np.linalg.pinv(A + B, hermitian=True) @ B)


def parallel_sum_bound(E: Any, F: Any, pol: TolerancePolicy = DEFAULT_POLICY) -> float:
    """tr(E_s : F_s) on S = ran P_E ∩ ran P_F, a certified lower bound on max_joint_lower_bound.

    Needs one pseudo-inverse, so it also serves as a cheap bound where the
    oracle would run on a large subspace.
    """
    E = as_hermitian(E)
    F = as_hermitian(F)
    if E.shape != F.shape:
        raise ValidationError(f"dimension mismatch: {E.shape[0]} vs {F.shape[0]}")
    _, W = principal_decomposition(support_basis(E, pol), support_basis(F, pol), pol)
    if W.shape[1] == 0:
        return 0.0
    bound = parallel_sum(shorted_effect(E, W, pol), shorted_effect(F, W, pol))
    return max(0.0, float(np.real(np.trace(bound))))


def joint_lower_bound(
    E: Any,
    F: Any,
    tol: float = 1e-6,
    pol: TolerancePolicy = DEFAULT_POLICY,
    oracle: Optional[Dict[str, Any]] = None,
    strict: bool = True,
) -> ThresholdResult:
    """max{tr A : 0 <= A <= E, A <= F} by bisection on a trace floor.

    Any common lower bound lives on S = ran P_E ∩ ran P_F, so the search runs
    on S against the shorted effects E_s = (W* E^+ W)^(-1) and F_s = (W* F^+ W)^(-1).
    When E_s <= F_s (or the reverse) the smaller one is optimal and no oracle
    runs. Otherwise the bracket starts at the larger of tr(E_s : F_s) and
    k * min(lambda_min), k = dim S, so the value is positive exactly when S is
    nonzero. A non-strict run that meets an undecided oracle call keeps
    bisecting below it and reports status "widened"; the lower end stays
    certified, the upper end does not.

    Args:
        E: First effect
        F: Second effect
        tol: Bracket width at which the bisection stops
        pol: Tolerance policy
        oracle: Dykstra options (tol, max_iter, plateau_window)
        strict: Raise on an inconclusive oracle run instead of widening

    Returns:
        ThresholdResult whose value is the certified lower end of the bracket

    Raises:
        ValidationError: On dimension mismatch
        InconclusiveOracleError: If strict and the oracle cannot decide
    """
    E = as_hermitian(E)
    F = as_hermitian(F)
    if E.shape != F.shape:
        raise ValidationError(f"dimension mismatch: {E.shape[0]} vs {F.shape[0]}")
    options = _oracle(oracle)

    _, W = principal_decomposition(support_basis(E, pol), support_basis(F, pol), pol)
    k = W.shape[1]
    if k == 0:
        return ThresholdResult(value=0.0, bracket=(0.0, 0.0), oracle_stats={"subspace_dim": 0})

    E_s = shorted_effect(E, W, pol)
    F_s = shorted_effect(F, W, pol)
    stats: Dict[str, Any] = {"subspace_dim": k, "oracle_calls": 0, "boundary_calls": 0, "undecided_calls": 0}
    for lower, upper in ((E_s, F_s), (F_s, E_s)):
        if below(lower, upper, pol):
            # A = lower attains min(tr E_s, tr F_s)
            value = max(0.0, float(np.real(np.trace(lower))))
            stats["ordered"] = True
            return ThresholdResult(value=value, bracket=(value, value), oracle_stats=stats)

    floor = max(0.0, min(float(eigvalsh(E_s)[0]), float(eigvalsh(F_s)[0])))
    start = parallel_sum(E_s, F_s)
    lo = float(np.real(np.trace(start)))
    if k * floor > lo:
        lo, start = k * floor, floor * np.eye(k, dtype=complex)
    hi = min(float(np.real(np.trace(E_s))), float(np.real(np.trace(F_s))))
    base = [
        SpectrahedralConstraint.lower(np.zeros((k, k))),
        SpectrahedralConstraint.upper(E_s),
        SpectrahedralConstraint.upper(F_s),
    ]
    status = "decided"

    t = hi
    while True:
        result = dykstra_feasible(base + [SpectrahedralConstraint.trace_floor(t)], k, start=start, **options)
        stats["oracle_calls"] += 1
        stats["last"] = result.stats()
        if result.status == FeasibilityStatus.FEASIBLE:
            lo, start = t, result.iterate
        elif result.status == FeasibilityStatus.INCONCLUSIVE:
            if strict:
                raise InconclusiveOracleError(f"oracle undecided at trace floor {t:.6g}", stats=stats)
            # keep lo certified; the upper end is no longer a certificate
            stats["undecided_calls"] += 1
            status = "widened"
            hi = t
        else:
            # boundary runs miss the floor by at most ~10 tol: count them as infeasible
            stats["boundary_calls"] += result.status == FeasibilityStatus.BOUNDARY
            hi = t
        if hi - lo <= tol:
            break
        t = (lo + hi) / 2

    logger.info(f"Joint lower bound in [{lo:.6g}, {hi:.6g}] after {stats['oracle_calls']} oracle calls")
    return ThresholdResult(value=lo, bracket=(lo, hi), status=status, oracle_stats=stats)


def max_joint_lower_bound(
    E: Any,
    F: Any,
    tol: float = 1e-6,
    pol: TolerancePolicy = DEFAULT_POLICY,
    oracle: Optional[Dict[str, Any]] = None,
    strict: bool = True,
) -> float:
    """Largest trace of a common lower bound of E and F; 0 iff their supports are disjoint."""
    return joint_lower_bound(E, F, tol, pol, oracle, strict).value


# --- Binary joint measurability ---

def _yes(Q: BinaryLike) -> np.ndarray:
    if isinstance(Q, BinaryObservable):
        return Q.yes_effect.matrix
    if isinstance(Q, DiscreteObservable) and len(Q) == 2:
        return Q.effects[0].matrix
    raise ValidationError("expected a binary observable")


def binary_constraints(q1: np.ndarray, q2: np.ndarray) -> List[SpectrahedralConstraint]:
    """0 <= G, G <= Q1(1), G <= Q2(1), Q1(1) + Q2(1) - I <= G."""
    d = q1.shape[0]
    return [
        SpectrahedralConstraint.lower(np.zeros((d, d))),
        SpectrahedralConstraint.upper(q1),
        SpectrahedralConstraint.upper(q2),
        SpectrahedralConstraint.lower(q1 + q2 - np.eye(d)),
    ]


def binary_joint_effects(q1: np.ndarray, q2: np.ndarray, G: np.ndarray, tol: float) -> Dict[Tuple[int, int], np.ndarray]:
    """The four joint effects built from G11 = G; they sum to I by construction.

    Raises:
        InternalError: If any of them is negative beyond 10 * tol
    """
    G = hermitian_part(G)
    joint = {
        (1, 1): G,
        (1, 0): q1 - G,
        (0, 1): q2 - G,
        (0, 0): np.eye(G.shape[0]) - q1 - q2 + G,
    }
    worst = min(float(eigvalsh(M)[0]) for M in joint.values())
    if worst < -BOUNDARY_FACTOR * tol:
        raise InternalError(f"reconstructed joint effect has eigenvalue {worst:.3e}")
    return joint


def binary_joint_feasibility(
    Q1: BinaryLike,
    Q2: BinaryLike,
    oracle: Optional[Dict[str, Any]] = None,
) -> FeasibilityResult:
    q1, q2 = _yes(Q1), _yes(Q2)
    if q1.shape != q2.shape:
        raise ValidationError(f"dimension mismatch: {q1.shape[0]} vs {q2.shape[0]}")
    options = _oracle(oracle)
    result = dykstra_feasible(binary_constraints(q1, q2), q1.shape[0], **options)
    if result.feasible:
        binary_joint_effects(q1, q2, result.iterate, options["tol"])
    return result


def binary_jointly_measurable(
    Q1: BinaryLike,
    Q2: BinaryLike,
    oracle: Optional[Dict[str, Any]] = None,
) -> bool:
    """Whether a joint POVM {G00, G10, G01, G11} with marginals Q1, Q2 exists.

    Raises:
        InconclusiveOracleError: If the oracle ends on a boundary or runs out of cycles
    """
    result = binary_joint_feasibility(Q1, Q2, oracle)
    if not result.status.decisive:
        raise InconclusiveOracleError(
            f"joint measurability undecided ({result.status.value})", stats=result.stats()
        )
    return result.feasible


# --- Qubit closed form ---

def qubit_params(E: Any) -> QubitEffectParams:
    """e0 = tr E and e_k = tr(E sigma_k).

    Raises:
        ValidationError: If E is not 2x2
    """
    M = as_hermitian(E)
    if M.shape != (2, 2):
        raise ValidationError(f"qubit parameters need a 2x2 effect, got {M.shape}")
    e0 = float(np.real(np.trace(M)))
    evec = tuple(float(np.real(np.trace(M @ PAULI[k]))) for k in "xyz")
    rebuilt = 0.5 * (e0 * np.eye(2) + sum(v * PAULI[k] for v, k in zip(evec, "xyz")))
    err = float(np.max(np.abs(rebuilt - M)))
    if err > 1e-12:
        raise InternalError(f"qubit parameters reconstruct E only to {err:.3e}")
    return QubitEffectParams(e0=e0, evec=evec)


def _pairing(a: Tuple[float, np.ndarray], b: Tuple[float, np.ndarray]) -> float:
    return 0.25 * (a[0] * b[0] - float(np.dot(a[1], b[1])))


def _slack_from_params(e0: float, e: np.ndarray, f0: float, f: np.ndarray) -> float:
    E, Ec = (e0, e), (2.0 - e0, -e)
    F, Fc = (f0, f), (2.0 - f0, -f)
    radicand = _pairing(E, E) * _pairing(F, F) * _pairing(Ec, Ec) * _pairing(Fc, Fc)
    lhs = _pairing(E, Ec) * _pairing(F, Fc) - np.sqrt(max(radicand, 0.0))
    rhs = _pairing(E, Fc) * _pairing(Ec, F) + _pairing(E, F) * _pairing(Ec, Fc)
    return float(rhs - lhs)


def qubit_compat_slack(E: Any, F: Any) -> float:
    """RHS - LHS of the qubit joint-measurability inequality; >= 0 means compatible."""
    p, q = qubit_params(E), qubit_params(F)
    return _slack_from_params(p.e0, np.asarray(p.evec), q.e0, np.asarray(q.evec))


def qubit_compat(E: Any, F: Any) -> bool:
    return qubit_compat_slack(E, F) >= -QUBIT_SLACK_TOL


# --- Noise models ---

def _open_unit(name: str, value: float) -> float:
    if not 0.0 < value < 1.0:
        raise ValidationError(f"{name} must lie in the open interval (0, 1), got {value}")
    return float(value)


def noise_add(E: Any, lam: float, p: float) -> Effect:
    """(1 - lam) E + lam p I; full support for every lam, p in (0, 1)."""
    lam = _open_unit("lambda", lam)
    p = _open_unit("p", p)
    M = as_hermitian(E)
    return Effect(matrix=(1 - lam) * M + lam * p * np.eye(M.shape[0]))


def noise_flip(E: Any, p: float) -> Effect:
    """p (I - E) + (1 - p) E."""
    p = _open_unit("p", p)
    M = as_hermitian(E)
    return Effect(matrix=p * np.eye(M.shape[0]) + (1 - 2 * p) * M)


def noisy_joint_observable(
    E1: DiscreteObservable,
    E2: DiscreteObservable,
    lam: float,
    mu: float,
    p: Optional[Dict[Hashable, float]] = None,
    q: Optional[Dict[Hashable, float]] = None,
) -> DiscreteObservable:
    """Joint observable of lam E1 + (1 - lam) p and mu E2 + (1 - mu) q when lam + mu <= 1.

    G(x, y) = lam E1(x) q(y) + mu p(x) E2(y) + (1 - lam - mu) p(x) q(y) I, with
    uniform p and q unless given.
    """
    if lam < 0 or mu < 0 or lam + mu > 1 + 1e-12:
        raise ValidationError(f"(lambda, mu) = ({lam}, {mu}) lies outside the triangle lambda + mu <= 1")
    p = p or {x: 1 / len(E1) for x in E1.labels}
    q = q or {y: 1 / len(E2) for y in E2.labels}
    for dist in (p, q):
        if any(v < 0 for v in dist.values()) or abs(sum(dist.values()) - 1) > 1e-12:
            raise ValidationError("trivial noise must be a probability distribution")
    I = np.eye(E1.dim)
    rest = max(0.0, 1.0 - lam - mu)
    labels, effects = [], []
    for (x, Ex), (y, Fy) in grid_product(E1.items(), E2.items()):
        labels.append((x, y))
        effects.append(lam * q[y] * Ex.matrix + mu * p[x] * Fy.matrix + rest * p[x] * q[y] * I)
    return DiscreteObservable.from_matrices(labels, effects)


# --- Thresholds and region maps ---

class _NoisyPairOracle:
    """Decides joint measurability of lam E1 + (1 - lam) t1 I and mu E2 + (1 - mu) t2 I."""

    def __init__(self, E1: BinaryLike, E2: BinaryLike, oracle: str, options: Optional[Dict[str, Any]]):
        self.e1, self.e2 = _yes(E1), _yes(E2)
        if self.e1.shape != self.e2.shape:
            raise ValidationError(f"dimension mismatch: {self.e1.shape[0]} vs {self.e2.shape[0]}")
        if oracle not in ORACLES:
            raise ValidationError(f"oracle must be one of {ORACLES}, got {oracle!r}")
        dim = self.e1.shape[0]
        if oracle == "auto":
            oracle = "closed_form" if dim == 2 else "dykstra"
        if oracle == "closed_form" and dim != 2:
            raise ValidationError("the closed-form oracle needs qubit observables")
        self.oracle = oracle
        self.options = _oracle(options)
        self.calls = 0
        if oracle == "closed_form":
            p1, p2 = qubit_params(self.e1), qubit_params(self.e2)
            self.p1 = (p1.e0, np.asarray(p1.evec))
            self.p2 = (p2.e0, np.asarray(p2.evec))

    def evaluate(self, lam: float, mu: float, t1: float, t2: float) -> Tuple[FeasibilityStatus, float]:
        """Status and a score where lower is closer to feasible."""
        self.calls += 1
        if self.oracle == "closed_form":
            slack = _slack_from_params(
                lam * self.p1[0] + 2 * (1 - lam) * t1, lam * self.p1[1],
                mu * self.p2[0] + 2 * (1 - mu) * t2, mu * self.p2[1],
            )
            ok = slack >= -QUBIT_SLACK_TOL
            return (FeasibilityStatus.FEASIBLE if ok else FeasibilityStatus.INFEASIBLE), -slack
        I = np.eye(self.e1.shape[0])
        q1 = lam * self.e1 + (1 - lam) * t1 * I
        q2 = mu * self.e2 + (1 - mu) * t2 * I
        result = dykstra_feasible(binary_constraints(q1, q2), I.shape[0], **self.options)
        return result.status, result.best_residual

    def search(self, lam: float, mu: float, grid: int) -> FeasibilityStatus:
        """Grid-and-refine search over the trivial noise (t1, t2) in [0, 1]^2."""
        center, half = (0.5, 0.5), 0.5
        undecided = False
        for _ in range(REFINE_ROUNDS + 1):
            axis1 = np.clip(np.linspace(center[0] - half, center[0] + half, grid), 0.0, 1.0)
            axis2 = np.clip(np.linspace(center[1] - half, center[1] + half, grid), 0.0, 1.0)
            best_score, best_point = np.inf, center
            for t1, t2 in grid_product(np.unique(axis1), np.unique(axis2)):
                status, score = self.evaluate(lam, mu, t1, t2)
                if status == FeasibilityStatus.FEASIBLE:
                    return status
                undecided = undecided or not status.decisive
                if score < best_score:
                    best_score, best_point = score, (t1, t2)
            center = best_point
            half = 2 * half / max(grid - 1, 1)
        return FeasibilityStatus.INCONCLUSIVE if undecided else FeasibilityStatus.INFEASIBLE


def jm_threshold(
    E1: BinaryLike,
    E2: BinaryLike,
    trivial_grid: int = 11,
    oracle: str = "auto",
    oracle_options: Optional[Dict[str, Any]] = None,
    precision: float = THRESHOLD_PRECISION,
) -> ThresholdResult:
    """Sup of lam for which lam E_i + (1 - lam) T_i are jointly measurable for some trivial T_i.

    Bisects on [1/2, 1]; lam = 1/2 always admits a joint observable. An
    undecided search at the active point stops the bisection and reports the
    bracket as widened.

    Args:
        E1: Binary observable
        E2: Binary observable of the same dimension
        trivial_grid: Grid size per axis for the trivial noise (t1, t2)
        oracle: auto | closed_form | dykstra
        oracle_options: Dykstra options
        precision: Bracket width at which the bisection stops

    Returns:
        ThresholdResult with value the bracket midpoint
    """
    if trivial_grid < 2:
        raise ValidationError(f"trivial_grid must be at least 2, got {trivial_grid}")
    pair = _NoisyPairOracle(E1, E2, oracle, oracle_options)
    stats: Dict[str, Any] = {"oracle": pair.oracle}

    if pair.search(1.0, 1.0, trivial_grid) == FeasibilityStatus.FEASIBLE:
        stats["oracle_calls"] = pair.calls
        return ThresholdResult(value=1.0, bracket=(1.0, 1.0), oracle_stats=stats)

    lo, hi, status = 0.5, 1.0, "decided"
    while hi - lo > precision:
        mid = (lo + hi) / 2
        verdict = pair.search(mid, mid, trivial_grid)
        if verdict == FeasibilityStatus.FEASIBLE:
            lo = mid
        elif verdict == FeasibilityStatus.INFEASIBLE:
            hi = mid
        else:
            logger.warning(f"Oracle undecided at lambda = {mid:.6f}; reporting [{lo:.6f}, {hi:.6f}]")
            status = "widened"
            break
    stats["oracle_calls"] = pair.calls
    return ThresholdResult(value=(lo + hi) / 2, bracket=(lo, hi), status=status, oracle_stats=stats)


def region_sample(
    E1: BinaryLike,
    E2: BinaryLike,
    grid_n: int,
    trivial_grid: int = 7,
    oracle: str = "auto",
    oracle_options: Optional[Dict[str, Any]] = None,
) -> RegionMap:
    """Joint-measurability map over (lam, mu) in [0, 1]^2.

    Cells with lam + mu <= 1 are certified by construction: the explicit noisy
    joint observable is built for each and would fail validation if its
    marginals were off. The other cells use the trivial-noise search.
    Undecided cells get status -1.
    """
    if grid_n < 2:
        raise ValidationError(f"grid_n must be at least 2, got {grid_n}")
    pair = _NoisyPairOracle(E1, E2, oracle, oracle_options)
    obs1 = E1.as_observable() if isinstance(E1, BinaryObservable) else E1
    obs2 = E2.as_observable() if isinstance(E2, BinaryObservable) else E2
    axis = [float(v) for v in np.linspace(0.0, 1.0, grid_n)]
    status: List[List[int]] = []
    for lam in axis:
        row = []
        for mu in axis:
            if lam + mu <= 1 + 1e-12:
                certificate = noisy_joint_observable(obs1, obs2, lam, min(mu, 1 - lam))
                logger.debug(f"Cell ({lam:.3f}, {mu:.3f}) certified by a {len(certificate)}-outcome joint observable")
                row.append(1)
                continue
            verdict = pair.search(lam, mu, trivial_grid)
            row.append({FeasibilityStatus.FEASIBLE: 1, FeasibilityStatus.INFEASIBLE: 0}.get(verdict, -1))
        status.append(row)
    logger.info(f"Region map {grid_n}x{grid_n}: {pair.calls} oracle calls")
    return RegionMap(lambdas=axis, mus=axis, status=status, oracle=pair.oracle)
