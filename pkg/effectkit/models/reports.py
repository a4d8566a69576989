from typing import Any, Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

RESERVED_KEYS = ("scenario", "seed", "out")
TOL_PREFIX = "tol."


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenario: str = Field(..., description="Registered scenario name")
    seed: int = Field(..., ge=0, lt=2**64, description="Random seed, required for reproducibility")
    params: Dict[str, Any] = Field(default_factory=dict, description="Model parameters")
    tolerance_overrides: Dict[str, float] = Field(default_factory=dict)
    output_dir: Optional[str] = None

    @field_validator("scenario")
    @classmethod
    def strip_name(cls, v: str) -> str:
        return v.strip()

    @classmethod
    def from_flat(cls, data: Dict[str, Any], **overrides: Any) -> "ScenarioConfig":
        """Build from a flat key-value mapping.

        ``scenario``, ``seed`` and ``out`` are top-level, ``tol.<name>`` keys are
        tolerance overrides and every other key is a model parameter.

        Args:
            data: Flat mapping, typically loaded from a config file
            overrides: Top-level values (e.g. from command-line flags) taking precedence

        Returns:
            The scenario configuration
        """
        data = dict(data or {})
        params: Dict[str, Any] = {}
        tolerances: Dict[str, float] = {}
        for key in list(data):
            if key in RESERVED_KEYS:
                continue
            value = data.pop(key)
            if key.startswith(TOL_PREFIX):
                tolerances[key[len(TOL_PREFIX):]] = value
            else:
                params[key] = value
        tolerances.update(overrides.pop("tolerance_overrides", None) or {})
        fields = {
            "scenario": data.get("scenario"),
            "seed": data.get("seed"),
            "output_dir": data.get("out"),
        }
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return cls(params=params, tolerance_overrides=tolerances, **fields)


class Report(BaseModel):
    scenario: str
    inputs: Dict[str, Any] = Field(default_factory=dict)
    values: Dict[str, Any] = Field(default_factory=dict)
    verdicts: Dict[str, Any] = Field(default_factory=dict)
    certificates: Dict[str, Any] = Field(default_factory=dict)
    series: Optional[Dict[str, List[Any]]] = None
    status: str = Field("ok", description="ok | inconclusive")
    wall_time: float = 0.0
    version: str

    def canonical_json(self) -> str:
        """JSON without the wall-time field."""
        return self.model_dump_json(exclude={"wall_time"})
