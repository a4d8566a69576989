import pytest

from effectkit.common.errors import NotFoundError, ValidationError
from effectkit.models.reports import ScenarioConfig

SCENARIOS = (
    "check-order",
    "weak-atom",
    "complementarity",
    "dilation-check",
    "multislit",
    "jm-feasible",
    "qubit-region",
    "noise-threshold",
    "haversine-trend",
    "number-phase-trend",
    "convolution-jauch",
    "prime-uncertainty",
    "periodic-commutation",
    "oscillator-trend",
)


def run(manager, name, seed=1, **params):
    return manager.run(ScenarioConfig(scenario=name, seed=seed, params=params))


def test_all_scenarios_registered(manager):
    names = [name for name, _ in manager.list_scenarios()]
    assert set(SCENARIOS) <= set(names)
    for line in manager.listing().splitlines():
        name, sep, description = line.partition(" — ")
        assert sep and name in names and description


def test_duplicate_registration_rejected(manager):
    scenario = manager.get("weak-atom")
    with pytest.raises(ValueError):
        manager.register("weak-atom", "again", scenario.params_model, scenario.handler)


def test_every_scenario_has_presets(manager):
    for name in SCENARIOS:
        assert manager.presets(name)


def test_unknown_scenario(manager):
    with pytest.raises(NotFoundError):
        run(manager, "no-such-scenario")


def test_bad_params(manager):
    with pytest.raises(ValidationError):
        run(manager, "weak-atom", random_trials=-1)
    with pytest.raises(ValidationError):
        run(manager, "multislit", slits=3)


def test_bad_tolerance_override(manager):
    config = ScenarioConfig(scenario="weak-atom", seed=1, tolerance_overrides={"warp": 1.0})
    with pytest.raises(ValidationError):
        manager.run(config)
    config = ScenarioConfig(scenario="weak-atom", seed=1, tolerance_overrides={"eig_zero": 0.5})
    with pytest.raises(ValidationError):
        manager.run(config)


def test_weak_atom_report(manager):
    report = run(manager, "weak-atom", random_trials=5)
    assert report.status == "ok"
    assert report.values["value"] == pytest.approx(0.4, abs=1e-9)
    assert report.verdicts == {"agrees": True, "random_agree": True}
    assert len(report.series["gap"]) == 5
    assert report.inputs["seed"] == 1
    assert report.inputs["params"]["random_trials"] == 5


def test_tolerance_override_reaches_report(manager):
    config = ScenarioConfig(scenario="weak-atom", seed=1, tolerance_overrides={"eig_zero": 1e-10})
    report = manager.run(config)
    assert report.inputs["tolerances"]["tolerances"]["eig_zero"] == 1e-10


def test_check_order_is_deterministic(manager):
    first = run(manager, "check-order", seed=11, trials=3, dim_min=2, dim_max=4)
    second = run(manager, "check-order", seed=11, trials=3, dim_min=2, dim_max=4)
    assert first.canonical_json() == second.canonical_json()
    assert first.verdicts["factorised"] and first.verdicts["scale_agrees"]
    assert len(first.series["residual"]) == 3


def test_complementarity_lattice(manager):
    report = run(manager, "complementarity", d=5, k_max=2, strong=True)
    assert report.verdicts == {"complementary": True, "strongly_complementary": True}
    assert report.values["pairs"] == report.values["disjoint_pairs"]


def test_dilation_check(manager):
    report = run(manager, "dilation-check", pairs=3, dim_max=3)
    assert report.verdicts == {"criteria_agree": True, "reconstructs": True, "minimal": True}


def test_multislit(manager):
    report = run(manager, "multislit", s=3, m=4)
    assert report.values["dim"] == 12
    assert report.verdicts["all_disjoint"]
    assert report.verdicts["direct_sum_disjoint"]


def test_qubit_region(manager):
    report = run(manager, "qubit-region", grid=11, trivial_grid=5, oracle="closed_form")
    assert report.values["diagonal_edge"] == pytest.approx(0.7)
    assert report.verdicts["triangle_feasible"]
    assert len(report.series["lambda"]) == 121


def test_noise_threshold(manager):
    report = run(manager, "noise-threshold", oracle="closed_form", precision=1e-3)
    assert report.values["value"] == pytest.approx(2 ** -0.5, abs=2e-3)
    assert report.verdicts["maximally_incompatible"] is False


def test_jm_feasible_smeared(manager):
    report = run(manager, "jm-feasible", sharpness=0.5)
    assert report.verdicts["jointly_measurable"] is True


def test_convolution_jauch(manager):
    report = run(manager, "convolution-jauch")
    assert report.values["smeared_support"] == [0, 1, 6]
    assert report.verdicts == {"support_bound": True, "disjoint": True, "rule_agrees": True}
    with pytest.raises(ValidationError):
        run(manager, "convolution-jauch", d=3, mu=[0.25, 0.25, 0.25, 0.25])


def test_prime_uncertainty(manager):
    report = run(manager, "prime-uncertainty", d=3)
    assert report.values["pairs"] == 64
    assert report.verdicts == {"rule_holds": True, "dimension_matches": True}


def test_periodic_commutation(manager):
    report = run(manager, "periodic-commutation", a=2, b=3)
    assert report.values["d"] == 6
    assert report.verdicts["all_commute"]


def test_number_phase_trend(manager):
    report = run(manager, "number-phase-trend", N_list=[4, 6, 8, 10])
    assert report.verdicts["non_increasing"]
    assert report.verdicts["below_diagonal"]
    assert report.series["N"] == [4, 6, 8, 10]


def test_haversine_trend_preset(manager):
    report = run(manager, "haversine-trend")
    assert report.status == "ok"
    assert report.inputs["params"]["d_list"] == [32, 40, 58, 70, 116, 184]
    assert report.verdicts["overlap_nontrivial"]
    assert report.verdicts["non_increasing"]
    assert report.verdicts["control_dominates"]
    assert report.verdicts["trend"]
    assert len(report.series["zero_offset"]) == 6
