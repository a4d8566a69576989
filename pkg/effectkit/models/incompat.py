from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .effects import hermitian_array


class ConstraintKind(str, Enum):
    LOWER_BOUND = "lower_bound"
    UPPER_BOUND = "upper_bound"
    TRACE_FLOOR = "trace_floor"


class SpectrahedralConstraint(BaseModel):
    """One of L <= A, A <= U or tr A >= t on an unknown Hermitian A."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: ConstraintKind
    datum: Union[np.ndarray, float]

    @model_validator(mode="before")
    @classmethod
    def check_datum(cls, data: Any) -> Any:
        if isinstance(data, dict) and "kind" in data:
            kind = ConstraintKind(data["kind"])
            datum = data.get("datum")
            if kind == ConstraintKind.TRACE_FLOOR:
                data = {**data, "datum": float(datum)}
            else:
                H = hermitian_array(datum)
                H.setflags(write=False)
                data = {**data, "datum": H}
        return data

    @classmethod
    def lower(cls, L: np.ndarray) -> "SpectrahedralConstraint":
        return cls(kind=ConstraintKind.LOWER_BOUND, datum=L)

    @classmethod
    def upper(cls, U: np.ndarray) -> "SpectrahedralConstraint":
        return cls(kind=ConstraintKind.UPPER_BOUND, datum=U)

    @classmethod
    def trace_floor(cls, t: float) -> "SpectrahedralConstraint":
        return cls(kind=ConstraintKind.TRACE_FLOOR, datum=t)

    @property
    def dim(self) -> Optional[int]:
        if self.kind == ConstraintKind.TRACE_FLOOR:
            return None
        return int(self.datum.shape[0])


class FeasibilityStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    BOUNDARY = "boundary"
    INCONCLUSIVE = "inconclusive"

    @property
    def decisive(self) -> bool:
        return self in (FeasibilityStatus.FEASIBLE, FeasibilityStatus.INFEASIBLE)


class FeasibilityProblem(BaseModel):
    """Constraints on one unknown dim x dim Hermitian A, checked for consistent dimensions."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dim: int = Field(..., gt=0)
    constraints: Tuple[SpectrahedralConstraint, ...]

    @model_validator(mode="after")
    def check_dims(self) -> "FeasibilityProblem":
        for c in self.constraints:
            if c.dim is not None and c.dim != self.dim:
                raise ValueError(f"constraint of dimension {c.dim} in a problem of dimension {self.dim}")
        return self


class FeasibilityResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    status: FeasibilityStatus
    feasible: bool
    iterate: np.ndarray = Field(..., description="Final Hermitian iterate")
    residual: float = Field(..., description="Max constraint violation of the iterate")
    iterations: int
    tol: float
    best_residual: float

    @model_validator(mode="after")
    def check_status(self) -> "FeasibilityResult":
        if self.feasible != (self.status == FeasibilityStatus.FEASIBLE):
            raise ValueError("feasible flag disagrees with status")
        if self.feasible and self.residual > self.tol:
            raise ValueError("feasible result with residual above tol")
        return self

    def stats(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "residual": self.residual,
            "best_residual": self.best_residual,
            "iterations": self.iterations,
        }


class QubitEffectParams(BaseModel):
    """E = (e0 I + e.sigma) / 2."""
    model_config = ConfigDict(frozen=True)

    e0: float
    evec: Tuple[float, float, float]

    @model_validator(mode="after")
    def check_effect(self) -> "QubitEffectParams":
        r = float(np.linalg.norm(self.evec))
        if self.e0 - r < -1e-9 or self.e0 + r > 2 + 1e-9:
            raise ValueError(f"(e0={self.e0}, |e|={r}) is not a qubit effect")
        return self

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.evec))

    def complement(self) -> "QubitEffectParams":
        return QubitEffectParams(e0=2.0 - self.e0, evec=tuple(-x for x in self.evec))


class ThresholdResult(BaseModel):
    value: float
    bracket: Tuple[float, float]
    status: str = Field("decided", description="decided | widened")
    oracle_stats: Dict[str, Any] = Field(default_factory=dict)

    @field_validator("bracket")
    @classmethod
    def check_bracket(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if v[0] > v[1]:
            raise ValueError("bracket lower end exceeds upper end")
        return v


class RegionMap(BaseModel):
    """Feasibility status over a (lambda, mu) grid: 1 feasible, 0 infeasible, -1 inconclusive."""

    lambdas: List[float]
    mus: List[float]
    status: List[List[int]]
    oracle: str = "auto"

    @model_validator(mode="after")
    def check_shape(self) -> "RegionMap":
        if len(self.status) != len(self.lambdas) or any(len(r) != len(self.mus) for r in self.status):
            raise ValueError("status grid does not match the sampled axes")
        if any(v not in (-1, 0, 1) for r in self.status for v in r):
            raise ValueError("status codes must be -1, 0 or 1")
        return self

    @property
    def feasible(self) -> np.ndarray:
        return np.array(self.status) == 1

    @property
    def inconclusive(self) -> np.ndarray:
        return np.array(self.status) == -1

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"lambda": lam, "mu": mu, "feasible": self.status[i][j]}
            for i, lam in enumerate(self.lambdas)
            for j, mu in enumerate(self.mus)
        ]
        return pd.DataFrame(rows, columns=["lambda", "mu", "feasible"])
