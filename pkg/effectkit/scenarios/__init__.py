from ..controller.scenario_manager import ScenarioManager
from . import effects_scenarios, incompat_scenarios, lattice_scenarios, observables_scenarios


def register_all(manager: ScenarioManager) -> ScenarioManager:
    """Register every packaged scenario with the manager"""
    effects_scenarios.register_scenarios(manager)
    observables_scenarios.register_scenarios(manager)
    incompat_scenarios.register_scenarios(manager)
    lattice_scenarios.register_scenarios(manager)
    return manager
