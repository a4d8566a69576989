from itertools import chain, combinations

import numpy as np
import pytest
from numpy.polynomial.hermite import hermgauss

from effectkit.common.errors import ValidationError
from effectkit.controller.effects import effects_disjoint, support_overlap
from effectkit.controller.incompat import joint_lower_bound, max_joint_lower_bound, noise_add, parallel_sum_bound
from effectkit.controller.lattice_models import (
    convolution_jauch,
    cyclic_lattice,
    haversine,
    haversine_pair,
    havercosine,
    haversine_trend,
    hermite_rows,
    is_prime,
    lattice_convolution,
    line_grid,
    multislit,
    number_phase,
    number_phase_effect,
    number_phase_trend,
    oscillator_position_number,
    oscillator_trend,
    periodic_commutation,
    periodic_sets,
    support_uncertainty_dimension,
    support_uncertainty_rule,
    trend_non_increasing,
    zero_offset,
)
from effectkit.controller.numerics import numerical_rank
from effectkit.controller.observables import coarse_grain, com_observables, complementary_family, is_complementary
from effectkit.models.lattice import FunctionOnGrid
from effectkit.models.observables import OutcomeFamily


def _subsets(d):
    return chain.from_iterable(combinations(range(d), r) for r in range(d + 1))


def test_cyclic_lattice_is_fourier_covariant():
    lattice = cyclic_lattice(4)
    F = lattice.fourier
    assert np.allclose(F @ F.conj().T, np.eye(4))
    for P, Q in zip(lattice.momentum.effects, lattice.position.effects):
        assert np.allclose(P.matrix, F @ Q.matrix @ F.conj().T, atol=1e-12)
    with pytest.raises(ValidationError):
        cyclic_lattice(1)


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_prime_support_rule_exhaustive_d5():
    d = 5
    for X in _subsets(d):
        for Y in _subsets(d):
            assert support_uncertainty_rule(d, X, Y) == (len(X) + len(Y) >= d + 1)


@pytest.mark.slow
def test_prime_support_rule_exhaustive_d7():
    d = 7
    for X in _subsets(d):
        for Y in _subsets(d):
            dim = support_uncertainty_dimension(d, X, Y)
            assert dim == max(0, len(X) + len(Y) - d)


def test_support_dimension_prediction():
    assert support_uncertainty_dimension(5, [0, 1, 2], [0, 1, 2, 3]) == 2
    assert support_uncertainty_dimension(5, [], [0, 1]) == 0
    with pytest.raises(ValidationError):
        support_uncertainty_dimension(5, [7], [0])


def test_composite_lattice_breaks_the_rule():
    # evens in position and {0, 2} in momentum share the period-2 comb on Z_4
    assert support_uncertainty_rule(4, [0, 2], [0, 2])


def test_periodic_sets():
    sets = periodic_sets(6, 2)
    assert len(sets) == 4
    assert (0, 2, 4) in sets and (1, 3, 5) in sets
    with pytest.raises(ValidationError):
        periodic_sets(6, 4)


@pytest.mark.parametrize("a,b", [(2, 3), (3, 2), (3, 4)])
def test_periodic_pairs_commute(a, b):
    d = a * b
    for X in periodic_sets(d, a):
        for Y in periodic_sets(d, b):
            assert periodic_commutation(d, a, b, X, Y)


@pytest.mark.slow
def test_periodic_pairs_commute_d30():
    for X in periodic_sets(30, 5):
        for Y in periodic_sets(30, 6):
            assert periodic_commutation(30, 5, 6, X, Y)


def test_periodic_commutation_rejects_aperiodic_sets():
    with pytest.raises(ValidationError):
        periodic_commutation(6, 2, 3, [0], [0, 3])
    with pytest.raises(ValidationError):
        periodic_commutation(6, 2, 2, [0, 2, 4], [0])


def test_lattice_convolution():
    lattice = cyclic_lattice(3)
    mu = FunctionOnGrid(values=[0.5, 0.5, 0.0])
    smeared = lattice_convolution(mu, lattice.position)
    assert np.allclose(smeared.effects[0].matrix, np.diag([0.5, 0.0, 0.5]))
    with pytest.raises(ValidationError):
        lattice_convolution(FunctionOnGrid(values=[0.5, 0.2, 0.0]), lattice.position)
    with pytest.raises(ValidationError):
        lattice_convolution(FunctionOnGrid(values=[0.5, 0.5]), lattice.position)


@pytest.mark.parametrize("s,m", [(2, 3), (3, 4), (4, 4)])
def test_multislit(s, m):
    Q, P = multislit(s, m)
    assert Q.dim == s * m
    singles = OutcomeFamily.singletons(Q.labels)
    verdicts = complementary_family(Q, P, singles, singles)
    assert len(verdicts) == s * s
    assert all(v.disjoint for v in verdicts)
    assert is_complementary(Q, P, singles, singles)
    assert com_observables(Q, P).rank == 0


def test_multislit_edge_cases():
    Q2, P2 = multislit(2, 1)
    lattice = cyclic_lattice(2)
    for a, b in zip(P2.effects, lattice.momentum.effects):
        assert np.allclose(a.matrix, b.matrix)
    with pytest.raises(ValidationError):
        multislit(1, 2)


NOISE_GRID = [(lam, p) for lam in (0.01, 0.1, 0.5) for p in (0.01, 0.1, 0.5)]


def _assert_noise_breaks_disjointness(E, F):
    dim = E.shape[0]
    for lam, p in NOISE_GRID:
        En, Fn = noise_add(E, lam, p), noise_add(F, lam, p)
        assert numerical_rank(En.matrix) == dim
        assert numerical_rank(Fn.matrix) == dim
        assert not effects_disjoint(En, Fn)
        assert parallel_sum_bound(En, Fn) >= lam * min(p, 1 - p) * dim * 0.5 * (1 - 1e-9)


@pytest.mark.parametrize("s,m", [(2, 3), (3, 4), (4, 4)])
def test_noise_destroys_multislit_complementarity(s, m):
    Q, P = multislit(s, m)
    for n in Q.labels:
        for k in P.labels:
            E, F = Q.effect(n).matrix, P.effect(k).matrix
            assert effects_disjoint(E, F)
            _assert_noise_breaks_disjointness(E, F)


@pytest.mark.slow
def test_noise_destroys_prime_lattice_disjointness():
    d = 5
    lattice = cyclic_lattice(d)
    pairs = 0
    for X in map(list, _subsets(d)):
        for Y in map(list, _subsets(d)):
            if not X or not Y or len(X) + len(Y) > d:
                continue
            E = coarse_grain(lattice.position, X).yes_effect.matrix
            F = coarse_grain(lattice.momentum, Y).yes_effect.matrix
            assert effects_disjoint(E, F)
            _assert_noise_breaks_disjointness(E, F)
            pairs += 1
    assert pairs == 575


@pytest.mark.slow
def test_noisy_multislit_joint_lower_bound():
    Q, P = multislit(2, 3)
    lam, p = 0.1, 0.5
    En = noise_add(Q.effect(0).matrix, lam, p)
    Fn = noise_add(P.effect(0).matrix, lam, p)
    value = max_joint_lower_bound(En, Fn, tol=1e-3, strict=False)
    assert value >= lam * min(p, 1 - p) * 6 * 0.5
    assert value <= min(np.trace(En.matrix).real, np.trace(Fn.matrix).real) + 1e-9


def test_convolution_jauch_prime():
    mu = FunctionOnGrid(values=[0.5, 0.5, 0, 0, 0, 0, 0])
    check = convolution_jauch(7, mu, [0, 1], [0, 1, 2])
    assert check.smeared_support == [0, 1, 6]
    assert check.support_bound
    assert check.disjoint
    assert check.predicted_disjoint is True

    wide = convolution_jauch(7, mu, [0, 1], [0, 1, 2, 3, 4])
    assert not wide.disjoint
    assert wide.predicted_disjoint is False


def test_haversine_pair_supports_overlap():
    E, F = haversine_pair(32)
    assert support_overlap(E, F).dimension == 2
    with pytest.raises(ValidationError):
        haversine_pair(15)
    with pytest.raises(ValidationError):
        haversine_pair(32, mode="sharp")


def test_zero_offset():
    assert zero_offset(16) == 0.0
    assert zero_offset(32) == pytest.approx(0.1796, abs=1e-3)
    assert zero_offset(64) == pytest.approx(0.0530, abs=1e-3)


def test_compressed_haversine_bound_needs_no_oracle():
    E, F = haversine_pair(32)
    result = joint_lower_bound(E, F)
    assert result.oracle_stats["ordered"]
    assert result.oracle_stats["oracle_calls"] == 0
    assert result.oracle_stats["subspace_dim"] == 2
    assert result.value == pytest.approx(0.0810, rel=1e-2)


def test_haversine_trend_tracks_zero_alignment():
    # d = 64 sits close to the zero set of f0 and d = 96 far from it
    report = haversine_trend([32, 48, 64, 96])
    assert report.measurements == pytest.approx([0.0810, 0.0925, 0.0030, 0.1166], rel=1e-2)
    assert all(report.extra["decided"])
    assert report.extra["zero_offset"][2] < report.extra["zero_offset"][0]
    assert not report.verdict


def test_haversine_trend_on_zero_resolving_sizes():
    d_list = [32, 40, 58, 70, 116, 184]
    report = haversine_trend(d_list)
    assert report.verdict
    assert all(k > 0 for k in report.extra["overlap_dim"])
    assert all(report.extra["decided"])
    offsets = report.extra["zero_offset"]
    assert all(b < a for a, b in zip(offsets, offsets[1:]))
    assert trend_non_increasing(report.measurements)
    assert report.measurements[-1] == pytest.approx(8.559e-6, rel=5e-2)
    assert min(report.extra["control"]) >= 10 * report.measurements[-1]
    assert min(report.extra["control"]) > 1.0
    assert set(report.series()) >= {"d", "value", "overlap_dim", "zero_offset", "control"}


def test_haversine_trend_control_can_be_skipped():
    report = haversine_trend([32, 40, 58, 70], include_control=False)
    assert "control" not in report.extra
    assert report.verdict


def test_number_phase_effects():
    assert np.allclose(number_phase_effect(6, 0.0, 2 * np.pi).matrix, np.eye(6), atol=1e-12)
    effects, number = number_phase(5, [(0.0, np.pi), (np.pi, 2 * np.pi)])
    total = sum(e.matrix for e in effects.values())
    assert np.allclose(total, np.eye(5), atol=1e-12)
    assert len(number) == 5
    with pytest.raises(ValidationError):
        number_phase_effect(5, 1.0, 1.0)
    with pytest.raises(ValidationError):
        number_phase(3, [(0.0, 1.0)])


def test_number_phase_trend():
    report = number_phase_trend([4, 6, 8, 10])
    assert report.verdict
    assert all(d == pytest.approx(0.5) for d in report.extra["diagonal"])
    assert all(0 < v <= 0.5 + 1e-12 for v in report.measurements)
    with pytest.raises(ValidationError):
        number_phase_trend([4, 8, 16])


@pytest.mark.parametrize("n", [0, 1, 2])
def test_number_phase_trend_at_large_truncations(n):
    report = number_phase_trend([8, 16, 32, 64], n=n)
    assert report.verdict
    assert all(0 <= v <= 0.5 + 1e-12 for v in report.measurements)
    assert report.measurements[0] > 0
    # from N = 16 on, |n> leaves the numerical support of E_N
    assert report.measurements[-1] == 0.0


def test_hermite_rows_are_orthonormal():
    nodes, weights = hermgauss(16)
    A = hermite_rows(8, nodes, weights)
    assert np.allclose(A @ A.T, np.eye(8), atol=1e-10)


def test_oscillator_position_number():
    effect, number = oscillator_position_number(8)
    assert np.allclose(effect(-np.inf, np.inf).matrix, np.eye(8), atol=1e-10)
    assert len(number) == 8
    with pytest.raises(ValidationError):
        oscillator_position_number(3)
    with pytest.raises(ValidationError):
        oscillator_position_number(8, n_quad=10)
    with pytest.raises(ValidationError):
        oscillator_position_number(200)
    with pytest.raises(ValidationError):
        effect(1.0, 1.0)


def test_oscillator_trend():
    report = oscillator_trend([4, 6, 8, 10])
    assert report.verdict
    assert report.measurements[0] > 0
    assert all(v <= d + 1e-9 for v, d in zip(report.measurements, report.extra["diagonal"]))


def test_trend_band():
    assert trend_non_increasing([1.0, 0.5, 0.55])
    assert not trend_non_increasing([1.0, 0.5, 0.6])


def test_line_grid_and_profiles():
    x, p, W = line_grid(8)
    assert np.allclose(W.conj().T @ W, np.eye(8))
    assert np.allclose(np.diff(x), np.sqrt(2 * np.pi / 8))
    assert x[4] == 0.0 and np.allclose(x, p)
    assert np.allclose(haversine(np.array([0.0, np.pi])), [0.0, 1.0])
    assert havercosine(np.array([0.0]))[0] == pytest.approx(1.0)
