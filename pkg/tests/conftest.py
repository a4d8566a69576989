import numpy as np
import pytest

from effectkit.common.config import ConfigManager, Settings
from effectkit.controller.observables import qubit_effect, smeared_qubit_observable
from effectkit.controller.scenario_manager import ScenarioManager
from effectkit.models.numerics import TolerancePolicy
from effectkit.models.observables import BinaryObservable
from effectkit.scenarios import register_all


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def policy():
    return TolerancePolicy()


@pytest.fixture
def sharp_z():
    return BinaryObservable(yes_effect=smeared_qubit_observable("z", 1.0).effects[0])


@pytest.fixture
def sharp_x():
    return BinaryObservable(yes_effect=smeared_qubit_observable("x", 1.0).effects[0])


@pytest.fixture
def qubit_effects():
    """A few named qubit effects (e0, e) for closed-form checks."""
    return {
        "z_plus": qubit_effect(1.0, (0, 0, 1)),
        "x_plus": qubit_effect(1.0, (1, 0, 0)),
        "half": qubit_effect(1.0, (0, 0, 0)),
        "biased": qubit_effect(0.8, (0.3, 0.0, 0.2)),
    }


@pytest.fixture
def settings(tmp_path):
    return Settings(OUTPUT_DIR=str(tmp_path / "out"))


@pytest.fixture
def manager(settings):
    manager = ScenarioManager(settings, ConfigManager(settings))
    register_all(manager)
    manager.load_from_yaml()
    return manager
