from typing import Any, Optional

import numpy as np
import scipy.linalg as la
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator, model_validator

from .numerics import DEFAULT_POLICY, TOL_SYM, TolerancePolicy

PROJECTION_TOL = 1e-8
CONTRACTION_TOL = 1e-9


def hermitian_array(value: Any) -> np.ndarray:
    """Square complex array, symmetrised after the tol_sym check."""
    A = np.array(value, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
        raise ValueError(f"expected a non-empty square matrix, got shape {A.shape}")
    scale = float(np.max(np.abs(A)))
    asym = float(np.max(np.abs(A - A.conj().T)))
    if asym > TOL_SYM * scale:
        raise ValueError(f"matrix is not Hermitian: asymmetry {asym:.3e} at scale {scale:.3e}")
    return (A + A.conj().T) / 2


def _policy(info: Optional[ValidationInfo]) -> TolerancePolicy:
    if info is not None and info.context:
        return info.context.get("policy", DEFAULT_POLICY)
    return DEFAULT_POLICY


def _frozen(A: np.ndarray) -> np.ndarray:
    A.setflags(write=False)
    return A


class Effect(BaseModel):
    """Hermitian matrix with 0 <= E <= I.

    Eigenvalues within psd_slack outside [0, 1] are clamped; anything further out
    is rejected. Pass ``context={"policy": ...}`` to ``model_validate`` to use a
    non-default slack.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray = Field(..., description="Hermitian matrix with spectrum in [0, 1]")

    @field_validator("matrix", mode="before")
    @classmethod
    def check_effect(cls, v: Any, info: ValidationInfo) -> np.ndarray:
        pol = _policy(info)
        A = hermitian_array(v)
        w, V = la.eigh(A)
        if w[0] < -pol.psd_slack or w[-1] > 1 + pol.psd_slack:
            raise ValueError(
                f"spectrum [{w[0]:.3e}, {w[-1]:.3e}] leaves [0, 1] beyond slack {pol.psd_slack:.1e}"
            )
        if w[0] < 0 or w[-1] > 1:
            A = (V * np.clip(w, 0.0, 1.0)) @ V.conj().T
        return _frozen(A)

    @classmethod
    def from_matrix(cls, matrix: Any, policy: TolerancePolicy = DEFAULT_POLICY) -> "Effect":
        return cls.model_validate({"matrix": matrix}, context={"policy": policy})

    @classmethod
    def zero(cls, dim: int) -> "Effect":
        return cls(matrix=np.zeros((dim, dim), dtype=complex))

    @classmethod
    def identity(cls, dim: int) -> "Effect":
        return cls(matrix=np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return int(self.matrix.shape[0])

    def complement(self) -> "Effect":
        return Effect(matrix=np.eye(self.dim) - self.matrix)


class Projection(Effect):
    """Effect with P^2 = P."""

    @field_validator("matrix")
    @classmethod
    def check_idempotent(cls, v: np.ndarray) -> np.ndarray:
        err = float(np.linalg.norm(v @ v - v, "fro"))
        if err > PROJECTION_TOL:
            raise ValueError(f"matrix is not a projection: ||P^2 - P||_F = {err:.3e}")
        return v

    @classmethod
    def from_basis(cls, basis: np.ndarray) -> "Projection":
        """Projection onto the span of orthonormal columns."""
        B = np.asarray(basis, dtype=complex)
        return cls(matrix=B @ B.conj().T)

    @classmethod
    def zero(cls, dim: int) -> "Projection":
        return cls(matrix=np.zeros((dim, dim), dtype=complex))

    @classmethod
    def identity(cls, dim: int) -> "Projection":
        return cls(matrix=np.eye(dim, dtype=complex))

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))

    def complement(self) -> "Projection":
        return Projection(matrix=np.eye(self.dim) - self.matrix)


class Contraction(BaseModel):
    """Possibly rectangular matrix with operator norm at most one."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    matrix: np.ndarray = Field(..., description="Complex matrix, rows = codomain, columns = domain")

    @field_validator("matrix", mode="before")
    @classmethod
    def check_norm(cls, v: Any) -> np.ndarray:
        C = np.array(v, dtype=complex)
        if C.ndim != 2 or C.size == 0:
            raise ValueError(f"expected a non-empty 2-D matrix, got shape {C.shape}")
        norm = float(np.linalg.norm(C, 2))
        if norm > 1 + CONTRACTION_TOL:
            raise ValueError(f"operator norm {norm:.12f} exceeds 1")
        return _frozen(C)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def gram(self) -> np.ndarray:
        """C*C on the domain."""
        return self.matrix.conj().T @ self.matrix

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))


class PureOperation(BaseModel):
    """Pure operation rho -> K rho K* given by one Kraus element."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kraus: Contraction

    @model_validator(mode="after")
    def check_effect(self) -> "PureOperation":
        # raises if K*K is not an effect
        Effect(matrix=self.kraus.gram)
        return self

    @property
    def effect(self) -> Effect:
        return Effect(matrix=self.kraus.gram)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        K = self.kraus.matrix
        return K @ np.asarray(rho) @ K.conj().T


class SupportOverlap(BaseModel):
    """Intersection of two supports with its principal-angle certificate."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dimension: int = Field(..., description="Dimension of ran P_E ∩ ran P_F")
    max_cosine: float = Field(..., description="Largest principal-angle cosine between the supports")
    basis: np.ndarray = Field(..., description="Orthonormal basis of the intersection")
