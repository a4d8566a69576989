from typing import Callable

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

# Dense complex Hermitian matrix. Symmetry is enforced by controller.numerics.as_hermitian.
HermitianMatrix = np.ndarray

TOL_SYM = 1e-12


class TolerancePolicy(BaseModel):
    """Thresholds behind every numerical verdict."""
    model_config = ConfigDict(frozen=True)

    eig_zero: float = Field(1e-9, description="Eigenvalues at or below this count as zero")
    psd_slack: float = Field(1e-9, description="Allowed negative eigenvalue in order tests")
    rank_rel: float = Field(1e-9, description="Relative rank threshold; also the principal-angle tolerance")
    membership: float = Field(1e-8, description="Distance threshold for subspace membership")

    @field_validator("eig_zero", "psd_slack", "rank_rel", "membership")
    @classmethod
    def check_range(cls, v: float) -> float:
        if not (0.0 < v < 1e-3):
            raise ValueError(f"tolerance must lie in (0, 1e-3), got {v}")
        return v


class SpectralDecomposition(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    eigenvalues: np.ndarray = Field(..., description="Real eigenvalues, ascending")
    eigenvectors: np.ndarray = Field(..., description="Unitary matrix of eigenvector columns")

    @field_validator("eigenvalues", "eigenvectors", mode="before")
    @classmethod
    def as_array(cls, v):
        return np.asarray(v)

    @property
    def dim(self) -> int:
        return int(self.eigenvalues.shape[0])

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def apply(self, f: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Spectral calculus: V f(Λ) V*."""
        values = np.asarray(f(self.eigenvalues), dtype=float)
        V = self.eigenvectors
        return (V * values) @ V.conj().T

    def spectral_projection(self, mask: np.ndarray) -> np.ndarray:
        """Projection onto the eigenvectors selected by a boolean mask."""
        B = self.eigenvectors[:, np.asarray(mask, dtype=bool)]
        return B @ B.conj().T


DEFAULT_POLICY = TolerancePolicy()
