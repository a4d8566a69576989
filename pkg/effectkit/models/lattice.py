from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .observables import DiscreteObservable

GRID_TOL = 1e-12


class CyclicLattice(BaseModel):
    """Position/momentum pair on Z_d related by the unitary DFT."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: int = Field(..., ge=2)
    position: DiscreteObservable
    momentum: DiscreteObservable
    fourier: np.ndarray = Field(..., description="F_jk = d^(-1/2) exp(-2 pi i jk/d)")

    @model_validator(mode="after")
    def check_covariance(self) -> "CyclicLattice":
        F = self.fourier
        for k, (P, Q) in enumerate(zip(self.momentum.effects, self.position.effects)):
            err = float(np.max(np.abs(P.matrix - F @ Q.matrix @ F.conj().T)))
            if err > 1e-12:
                raise ValueError(f"momentum effect {k} is not the Fourier image of position effect {k}")
        return self

    def position_projection(self, X) -> np.ndarray:
        diag = np.zeros(self.d)
        diag[list(X)] = 1.0
        return np.diag(diag).astype(complex)

    def momentum_projection(self, Y) -> np.ndarray:
        cols = self.fourier[:, sorted(Y)]
        return cols @ cols.conj().T


class FunctionOnGrid(BaseModel):
    """Values in [0, 1] on a cyclic lattice or on a centred truncated line."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray
    grid: Literal["cyclic", "line"] = "cyclic"
    spacing: Optional[float] = Field(None, gt=0, description="Line spacing delta")

    @field_validator("values", mode="before")
    @classmethod
    def check_values(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("grid function must be a non-empty vector")
        if arr.min() < -GRID_TOL or arr.max() > 1 + GRID_TOL:
            raise ValueError("grid function values must lie in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def check_spacing(self) -> "FunctionOnGrid":
        if self.grid == "line" and self.spacing is None:
            raise ValueError("line grids need a spacing")
        return self

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    @property
    def support(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.values > 0)]


class TrendReport(BaseModel):
    """Measured quantity along an increasing size parameter, with a monotonicity verdict."""

    parameter: str
    values: List[int]
    measurements: List[float]
    verdict: bool = Field(..., description="Non-increasing within the band")
    band: float = 0.10
    floor: float = 1e-9
    extra: Dict[str, List[Any]] = Field(default_factory=dict)
    notes: List[str] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_series(self) -> "TrendReport":
        if len(self.values) < 4:
            raise ValueError("a trend needs at least 4 parameter values")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValueError("parameter values must be strictly increasing")
        if len(self.measurements) != len(self.values):
            raise ValueError("one measurement per parameter value")
        return self

    def series(self) -> Dict[str, List[Any]]:
        out: Dict[str, List[Any]] = {self.parameter: list(self.values), "value": list(self.measurements)}
        out.update({k: list(v) for k, v in self.extra.items() if len(v) == len(self.values)})
        return out


class ConvolutionCheck(BaseModel):
    """Smeared position cell against a sharp momentum cell on Z_d."""

    d: int
    position_cell: List[int]
    momentum_cell: List[int]
    smeared_support: List[int] = Field(..., description="supp of the convolved indicator")
    support_bound: bool = Field(..., description="P_E <= Q(smeared support)")
    predicted_disjoint: Optional[bool] = Field(None, description="Prime-d rule; None for composite d")
    disjoint: bool
    overlap_cosine: float
