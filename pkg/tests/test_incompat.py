import numpy as np
import pytest

from effectkit.common.errors import InconclusiveOracleError, ValidationError
from effectkit.controller.effects import random_effect
from effectkit.controller.incompat import (
    binary_joint_effects,
    binary_joint_feasibility,
    binary_jointly_measurable,
    constraint_residual,
    dykstra_feasible,
    jm_threshold,
    joint_lower_bound,
    max_joint_lower_bound,
    noise_add,
    noise_flip,
    noisy_joint_observable,
    parallel_sum,
    parallel_sum_bound,
    qubit_compat,
    qubit_compat_slack,
    qubit_params,
    region_sample,
)
from effectkit.controller.observables import marginals, qubit_effect, smeared_qubit_observable
from effectkit.models.effects import Effect
from effectkit.models.incompat import FeasibilityProblem, FeasibilityStatus, SpectrahedralConstraint
from effectkit.models.observables import BinaryObservable


def _smeared_pair(lam, mu):
    Q1 = BinaryObservable(yes_effect=smeared_qubit_observable("z", lam).effects[0])
    Q2 = BinaryObservable(yes_effect=smeared_qubit_observable("x", mu).effects[0])
    return Q1, Q2


def test_dykstra_interval_feasible():
    constraints = [
        SpectrahedralConstraint.lower(np.diag([0.1, 0.2])),
        SpectrahedralConstraint.upper(np.diag([0.5, 0.9])),
        SpectrahedralConstraint.trace_floor(0.5),
    ]
    result = dykstra_feasible(constraints, 2)
    assert result.status == FeasibilityStatus.FEASIBLE
    assert constraint_residual(constraints, result.iterate) <= result.tol


def test_dykstra_detects_infeasible():
    constraints = [
        SpectrahedralConstraint.lower(np.zeros((2, 2))),
        SpectrahedralConstraint.upper(np.diag([0.2, 0.2])),
        SpectrahedralConstraint.trace_floor(1.0),
    ]
    result = dykstra_feasible(constraints, 2)
    assert result.status == FeasibilityStatus.INFEASIBLE
    assert not result.feasible
    assert result.best_residual > 1e-6


def test_dykstra_budget_exhausted():
    constraints = [
        SpectrahedralConstraint.lower(np.zeros((2, 2))),
        SpectrahedralConstraint.upper(np.diag([0.2, 0.2])),
        SpectrahedralConstraint.trace_floor(1.0),
    ]
    result = dykstra_feasible(constraints, 2, max_iter=1, plateau_window=50)
    assert result.status == FeasibilityStatus.INCONCLUSIVE


def test_dykstra_rejects_bad_input():
    with pytest.raises(ValidationError):
        dykstra_feasible([SpectrahedralConstraint.upper(np.eye(3))], 2)
    with pytest.raises(ValidationError):
        dykstra_feasible([], 2, tol=0.0)
    with pytest.raises(ValidationError, match="Invalid feasibility problem"):
        dykstra_feasible([SpectrahedralConstraint.trace_floor(0.5)], 0)


def test_feasibility_problem_checks_dimensions():
    problem = FeasibilityProblem(
        dim=2,
        constraints=(SpectrahedralConstraint.upper(np.eye(2)), SpectrahedralConstraint.trace_floor(1.0)),
    )
    assert len(problem.constraints) == 2
    with pytest.raises(ValueError, match="dimension 3"):
        FeasibilityProblem(dim=2, constraints=(SpectrahedralConstraint.lower(np.zeros((3, 3))),))


def test_joint_lower_bound_of_disjoint_effects_is_zero():
    result = joint_lower_bound(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert result.value == 0.0
    assert result.oracle_stats["subspace_dim"] == 0


def test_joint_lower_bound_of_commuting_effects():
    E = np.diag([0.5, 0.8, 0.0])
    F = np.diag([0.3, 1.0, 0.6])
    # min(E, F) on the common support {0, 1} has trace 0.3 + 0.8
    value = max_joint_lower_bound(E, F, tol=1e-5)
    assert value == pytest.approx(1.1, abs=1e-3)
    assert value <= 1.1 + 1e-6


def test_joint_lower_bound_strictness():
    E = np.diag([0.5, 0.8])
    F = np.diag([0.3, 1.0])
    tight = {"max_iter": 1, "plateau_window": 50}
    with pytest.raises(InconclusiveOracleError):
        joint_lower_bound(E, F, oracle=tight)
    loose = joint_lower_bound(E, F, oracle=tight, strict=False)
    assert loose.status == "widened"
    assert loose.value >= 2 * 0.3 - 1e-12
    # undecided calls shrink the bracket instead of ending the search
    assert loose.oracle_stats["undecided_calls"] >= 2
    assert loose.oracle_stats["oracle_calls"] > 1
    assert loose.value >= parallel_sum_bound(E, F) - 1e-12
    assert loose.bracket[1] - loose.bracket[0] <= 1e-6


def test_parallel_sum():
    S = parallel_sum(np.diag([0.5, 0.8]), np.diag([0.3, 1.0]))
    assert np.allclose(S, np.diag([0.5 * 0.3 / 0.8, 0.8 / 1.8]))
    assert parallel_sum_bound(np.diag([0.5, 0.8]), np.diag([0.3, 1.0])) == pytest.approx(0.1875 + 0.8 / 1.8)
    assert parallel_sum_bound(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])) == 0.0


def test_parallel_sum_is_a_common_lower_bound(rng):
    for _ in range(10):
        E = random_effect(4, rng).matrix
        F = random_effect(4, rng).matrix
        S = parallel_sum(E, F)
        assert np.linalg.eigvalsh(S)[0] >= -1e-12
        assert np.linalg.eigvalsh(E - S)[0] >= -1e-10
        assert np.linalg.eigvalsh(F - S)[0] >= -1e-10


def test_joint_lower_bound_of_ordered_effects_skips_the_oracle(rng):
    F = random_effect(4, rng).matrix
    result = joint_lower_bound(0.5 * F, F)
    assert result.oracle_stats["ordered"]
    assert result.oracle_stats["oracle_calls"] == 0
    assert result.value == pytest.approx(0.5 * np.trace(F).real)
    assert result.bracket == (result.value, result.value)


def test_binary_joint_measurability_smeared():
    Q1, Q2 = _smeared_pair(0.5, 0.5)
    result = binary_joint_feasibility(Q1, Q2)
    assert result.feasible
    joint = binary_joint_effects(Q1.yes_effect.matrix, Q2.yes_effect.matrix, result.iterate, result.tol)
    assert np.allclose(sum(joint.values()), np.eye(2))
    assert binary_jointly_measurable(Q1, Q2)


def test_sharp_qubit_pair_is_incompatible(sharp_z, sharp_x):
    assert not binary_jointly_measurable(sharp_z, sharp_x)
    assert not qubit_compat(sharp_z.yes_effect, sharp_x.yes_effect)
    assert qubit_compat_slack(sharp_z.yes_effect, sharp_x.yes_effect) == pytest.approx(-0.125)


def test_qubit_closed_form_unbiased_threshold():
    for lam in (0.5, 0.7, 0.7071):
        Q1, Q2 = _smeared_pair(lam, lam)
        assert qubit_compat(Q1.yes_effect, Q2.yes_effect)
    Q1, Q2 = _smeared_pair(0.72, 0.72)
    assert not qubit_compat(Q1.yes_effect, Q2.yes_effect)
    assert qubit_compat_slack(*(q.yes_effect for q in _smeared_pair(0.6, 0.8))) == pytest.approx(0.0, abs=1e-12)


def test_commuting_sharp_pair_sits_on_the_boundary(qubit_effects):
    assert qubit_compat_slack(qubit_effects["z_plus"], qubit_effects["z_plus"]) == pytest.approx(0.0, abs=1e-12)
    assert qubit_compat(qubit_effects["z_plus"], qubit_effects["z_plus"])
    assert qubit_compat(qubit_effects["half"], qubit_effects["x_plus"])


def test_qubit_params(qubit_effects):
    p = qubit_params(qubit_effects["biased"])
    assert p.e0 == pytest.approx(0.8)
    assert p.evec == pytest.approx((0.3, 0.0, 0.2))
    assert p.complement().e0 == pytest.approx(1.2)
    with pytest.raises(ValidationError):
        qubit_params(np.eye(3))


def _random_qubit_effect(rng):
    e = rng.normal(size=3)
    e *= rng.uniform(0, 1) / np.linalg.norm(e)
    r = float(np.linalg.norm(e))
    return qubit_effect(rng.uniform(r, 2 - r), e)


@pytest.mark.slow
def test_closed_form_agrees_with_dykstra(rng):
    tested = decided = 0
    for _ in range(1000):
        E, F = _random_qubit_effect(rng), _random_qubit_effect(rng)
        slack = qubit_compat_slack(E, F)
        if abs(slack) <= 1e-6:
            continue
        tested += 1
        result = binary_joint_feasibility(BinaryObservable(yes_effect=E), BinaryObservable(yes_effect=F))
        if result.status.decisive:
            assert result.feasible == (slack > 0), f"slack {slack:.3e}"
            decided += 1
    assert tested >= 990
    assert decided >= 0.8 * tested


@pytest.mark.slow
def test_jm_threshold_sharp_qubits_through_dykstra(sharp_z, sharp_x):
    result = jm_threshold(sharp_z, sharp_x, trivial_grid=3, oracle="dykstra", precision=1e-3)
    assert abs(result.value - 1 / np.sqrt(2)) <= 1e-3
    assert result.oracle_stats["oracle"] == "dykstra"
    assert result.oracle_stats["oracle_calls"] > 0


def test_noise_models():
    P = np.diag([1.0, 0.0])
    assert np.allclose(noise_add(P, 0.5, 0.5).matrix, np.diag([0.75, 0.25]))
    assert np.allclose(noise_flip(P, 0.1).matrix, np.diag([0.9, 0.1]))
    with pytest.raises(ValidationError):
        noise_add(P, 0.0, 0.5)
    with pytest.raises(ValidationError):
        noise_flip(P, 1.0)


def test_noisy_joint_observable_marginals():
    Z = smeared_qubit_observable("z", 1.0)
    X = smeared_qubit_observable("x", 1.0)
    lam, mu = 0.4, 0.5
    G = noisy_joint_observable(Z, X, lam, mu)
    first, second = marginals(G)
    for x, Ex in Z.items():
        assert np.allclose(first[x], lam * Ex.matrix + (1 - lam) * 0.5 * np.eye(2))
    for y, Fy in X.items():
        assert np.allclose(second[y], mu * Fy.matrix + (1 - mu) * 0.5 * np.eye(2))
    with pytest.raises(ValidationError):
        noisy_joint_observable(Z, X, 0.6, 0.6)


def test_jm_threshold_sharp_qubits(sharp_z, sharp_x):
    result = jm_threshold(sharp_z, sharp_x, trivial_grid=11, oracle="closed_form")
    assert result.status == "decided"
    assert abs(result.value - 1 / np.sqrt(2)) <= 1e-3
    assert result.oracle_stats["oracle"] == "closed_form"


def test_jm_threshold_commuting_pair(sharp_z):
    assert jm_threshold(sharp_z, sharp_z, oracle="closed_form").value == 1.0


def test_jm_threshold_rejects_bad_oracle(sharp_z, sharp_x):
    with pytest.raises(ValidationError):
        jm_threshold(sharp_z, sharp_x, oracle="sdp")
    three = BinaryObservable(yes_effect=Effect(matrix=np.diag([1.0, 0.0, 0.0])))
    with pytest.raises(ValidationError):
        jm_threshold(three, three, oracle="closed_form")


def test_region_sample_qubit(sharp_z, sharp_x):
    region = region_sample(sharp_z, sharp_x, grid_n=11, trivial_grid=5)
    status = np.array(region.status)
    lambdas = np.array(region.lambdas)
    inside = np.add.outer(lambdas, lambdas) <= 1 + 1e-12
    assert np.all(status[inside] == 1)
    disk = np.add.outer(lambdas ** 2, lambdas ** 2)
    assert np.all(status[disk > 1 + 1e-9] == 0)
    assert np.all(status[disk <= 1 - 1e-9] == 1)
    assert not region.inconclusive.any()
    frame = region.to_frame()
    assert list(frame.columns) == ["lambda", "mu", "feasible"]
    assert len(frame) == 121


def test_region_sample_triangle_needs_no_oracle(sharp_z, sharp_x):
    # one Dykstra cycle decides nothing, yet the triangle cells stay certified
    region = region_sample(
        sharp_z, sharp_x, grid_n=5, trivial_grid=3, oracle="dykstra", oracle_options={"max_iter": 1}
    )
    status = np.array(region.status)
    lambdas = np.array(region.lambdas)
    inside = np.add.outer(lambdas, lambdas) <= 1 + 1e-12
    assert np.all(status[inside] == 1)
    assert status[-1, -1] == -1
