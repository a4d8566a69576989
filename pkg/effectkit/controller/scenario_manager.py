import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Type, Union

import numpy as np
import pydantic
import yaml
from pydantic import BaseModel, ConfigDict

from .. import __version__
from ..common.config import ConfigManager, Settings
from ..common.errors import NotFoundError, ValidationError
from ..common.logging import get_logger
from ..models.numerics import TolerancePolicy
from ..models.reports import Report, ScenarioConfig

logger = get_logger(__name__)

REPORT_SECTIONS = ("values", "verdicts", "certificates", "series", "status")


class ScenarioContext:
    """Everything a scenario handler needs besides its parameters."""

    def __init__(self, settings: Settings, seed: int) -> None:
        self.settings = settings
        self.seed = seed
        self.rng = np.random.default_rng(seed)

    @property
    def policy(self) -> TolerancePolicy:
        return self.settings.tolerance_policy()

    @property
    def oracle(self) -> Dict[str, Any]:
        return self.settings.oracle_options()


Handler = Callable[[BaseModel, ScenarioContext], Dict[str, Any]]


class Scenario(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    name: str
    description: str
    params_model: Type[BaseModel]
    handler: Handler


class ScenarioManager:
    def __init__(self, settings: Settings, config_manager: Optional[ConfigManager] = None):
        self.settings = settings
        self.config_manager = config_manager
        self._scenarios: Dict[str, Scenario] = {}
        self._presets: Dict[str, Dict[str, Any]] = {}

    def register(self, name: str, description: str, params_model: Type[BaseModel], handler: Handler) -> Scenario:
        """Register a scenario under a unique name"""
        if name in self._scenarios:
            raise ValueError(f"Scenario already registered: {name}")
        scenario = Scenario(name=name, description=description, params_model=params_model, handler=handler)
        self._scenarios[name] = scenario
        return scenario

    def get(self, name: str) -> Scenario:
        if name not in self._scenarios:
            raise NotFoundError(f"Unknown scenario: {name}")
        return self._scenarios[name]

    def list_scenarios(self) -> List[Tuple[str, str]]:
        """(name, description) pairs in registration order"""
        return [(s.name, s.description) for s in self._scenarios.values()]

    def listing(self) -> str:
        return "\n".join(f"{name} — {description}" for name, description in self.list_scenarios())

    def load_from_yaml(self, file_path: Optional[Union[str, Path]] = None) -> int:
        """Load per-scenario default parameters.

        Without a path the packaged presets of the config manager are used.

        Returns:
            Number of scenarios with presets
        """
        if file_path is not None:
            with open(file_path) as f:
                data = yaml.safe_load(f) or {}
        elif self.config_manager is not None:
            data = self.config_manager.presets()
        else:
            data = {}
        unknown = sorted(set(data) - set(self._scenarios))
        if unknown:
            logger.warning(f"Presets for unregistered scenarios ignored: {unknown}")
        self._presets = {name: dict(values or {}) for name, values in data.items() if name in self._scenarios}
        logger.info(f"Loaded presets for {len(self._presets)} scenarios")
        return len(self._presets)

    def presets(self, name: str) -> Dict[str, Any]:
        return dict(self._presets.get(name, {}))

    def run(self, config: ScenarioConfig) -> Report:
        """Run one scenario and assemble its report.

        Args:
            config: Validated scenario configuration

        Returns:
            Report with the handler's values, verdicts, certificates and series

        Raises:
            NotFoundError: If the scenario is unknown
            ValidationError: If parameters or tolerance overrides are invalid
        """
        scenario = self.get(config.scenario)
        try:
            settings = self.settings.with_overrides(config.tolerance_overrides)
        except KeyError as e:
            raise ValidationError(str(e.args[0]))
        except pydantic.ValidationError as e:
            raise ValidationError(f"Invalid tolerance override: {e}")

        raw = {**self.presets(scenario.name), **config.params}
        try:
            params = scenario.params_model.model_validate(raw)
        except pydantic.ValidationError as e:
            raise ValidationError(f"Invalid parameters for {scenario.name}: {e}")

        logger.info(f"Running scenario {scenario.name} with seed {config.seed}")
        context = ScenarioContext(settings, config.seed)
        started = time.perf_counter()
        outcome = scenario.handler(params, context)
        wall_time = time.perf_counter() - started

        unexpected = set(outcome) - set(REPORT_SECTIONS)
        if unexpected:
            raise ValueError(f"Scenario {scenario.name} returned unknown sections {sorted(unexpected)}")
        report = Report(
            scenario=scenario.name,
            inputs={
                "seed": config.seed,
                "params": params.model_dump(mode="json"),
                "tolerances": settings.to_dict(),
            },
            wall_time=wall_time,
            version=__version__,
            **outcome,
        )
        logger.info(f"Scenario {scenario.name} finished with status {report.status} in {wall_time:.2f}s")
        return report
