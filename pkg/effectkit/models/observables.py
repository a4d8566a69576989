from itertools import combinations
from typing import Any, Dict, FrozenSet, Hashable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..common.errors import NotFoundError
from .effects import Effect, PROJECTION_TOL

NORMALISATION_TOL = 1e-8
DILATION_TOL = 1e-8


class DiscreteObservable(BaseModel):
    """Finite POVM: one effect per outcome label, summing to identity."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    labels: Tuple[Hashable, ...] = Field(..., description="Outcome identifiers")
    effects: Tuple[Effect, ...] = Field(..., description="One effect per label")

    @model_validator(mode="after")
    def check_povm(self) -> "DiscreteObservable":
        if len(self.labels) != len(self.effects) or not self.labels:
            raise ValueError("labels and effects must be non-empty and of equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError("outcome labels must be unique")
        dims = {e.dim for e in self.effects}
        if len(dims) != 1:
            raise ValueError(f"effects have mixed dimensions {sorted(dims)}")
        total = sum(e.matrix for e in self.effects)
        err = float(np.linalg.norm(total - np.eye(self.dim), "fro"))
        if err > NORMALISATION_TOL:
            raise ValueError(f"effects do not sum to identity: error {err:.3e}")
        return self

    @classmethod
    def from_matrices(cls, labels: Sequence[Hashable], matrices: Sequence[Any]) -> "DiscreteObservable":
        return cls(labels=tuple(labels), effects=tuple(Effect(matrix=m) for m in matrices))

    @property
    def dim(self) -> int:
        return self.effects[0].dim

    def __len__(self) -> int:
        return len(self.labels)

    def index(self, label: Hashable) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise NotFoundError(f"Unknown outcome label: {label!r}")

    def effect(self, label: Hashable) -> Effect:
        return self.effects[self.index(label)]

    def items(self):
        return zip(self.labels, self.effects)

    def is_projective(self, tol: float = PROJECTION_TOL) -> bool:
        return all(
            np.linalg.norm(e.matrix @ e.matrix - e.matrix, "fro") <= tol for e in self.effects
        )


class OutcomeFamily(BaseModel):
    """Family of proper, non-empty outcome subsets."""
    model_config = ConfigDict(frozen=True)

    labels: Tuple[Hashable, ...] = Field(..., description="Full outcome set")
    sets: Tuple[FrozenSet[Hashable], ...] = Field(..., description="The subsets in the family")

    @model_validator(mode="after")
    def check_sets(self) -> "OutcomeFamily":
        full = frozenset(self.labels)
        for s in self.sets:
            if not s:
                raise ValueError("outcome family contains the empty set")
            if s == full:
                raise ValueError("outcome family contains the full outcome set")
            if not s <= full:
                raise ValueError(f"outcome set {sorted(map(str, s))} has unknown labels")
        return self

    @classmethod
    def singletons(cls, labels: Sequence[Hashable]) -> "OutcomeFamily":
        labels = tuple(labels)
        sets = [frozenset([x]) for x in labels] if len(labels) > 1 else []
        return cls(labels=labels, sets=tuple(sets))

    @classmethod
    def default(cls, labels: Sequence[Hashable], k_max: int = 2) -> "OutcomeFamily":
        """Singletons plus all proper subsets of size up to k_max."""
        labels = tuple(labels)
        sets: List[FrozenSet[Hashable]] = []
        for k in range(1, min(k_max, len(labels) - 1) + 1):
            sets.extend(frozenset(c) for c in combinations(labels, k))
        return cls(labels=labels, sets=tuple(sets))

    def __len__(self) -> int:
        return len(self.sets)

    def ordered(self, s: FrozenSet[Hashable]) -> Tuple[Hashable, ...]:
        """Members of s in label order."""
        return tuple(x for x in self.labels if x in s)


class BinaryObservable(BaseModel):
    """Yes/no observable; the no-effect is I - yes."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    yes_effect: Effect

    @property
    def dim(self) -> int:
        return self.yes_effect.dim

    @property
    def no_effect(self) -> Effect:
        return self.yes_effect.complement()

    def as_observable(self) -> DiscreteObservable:
        return DiscreteObservable(labels=(1, 0), effects=(self.yes_effect, self.no_effect))


class NaimarkDilation(BaseModel):
    """Isometry J into a diagonal dilation space with label blocks of basis indices."""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    isometry: np.ndarray = Field(..., description="J, shape (dilation dim, dim)")
    blocks: Dict[Hashable, Tuple[int, ...]] = Field(..., description="Label -> dilation basis indices")

    @field_validator("isometry", mode="before")
    @classmethod
    def as_array(cls, v: Any) -> np.ndarray:
        J = np.array(v, dtype=complex)
        if J.ndim != 2:
            raise ValueError("isometry must be a matrix")
        J.setflags(write=False)
        return J

    @model_validator(mode="after")
    def check_dilation(self) -> "NaimarkDilation":
        J = self.isometry
        err = float(np.linalg.norm(J.conj().T @ J - np.eye(J.shape[1]), "fro"))
        if err > DILATION_TOL:
            raise ValueError(f"J*J deviates from identity by {err:.3e}")
        indices = sorted(i for block in self.blocks.values() for i in block)
        if indices != list(range(J.shape[0])):
            raise ValueError("blocks must partition the dilation basis")
        return self

    @property
    def dim(self) -> int:
        return int(self.isometry.shape[1])

    @property
    def dilation_dim(self) -> int:
        return int(self.isometry.shape[0])

    def rows(self, labels: Sequence[Hashable]) -> List[int]:
        out: List[int] = []
        for x in labels:
            if x not in self.blocks:
                raise NotFoundError(f"Unknown outcome label: {x!r}")
            out.extend(self.blocks[x])
        return sorted(out)

    def block_projection(self, labels: Sequence[Hashable]) -> np.ndarray:
        """Diagonal projection Q'(X) on the dilation space."""
        diag = np.zeros(self.dilation_dim)
        diag[self.rows(labels)] = 1.0
        return np.diag(diag).astype(complex)

    def compressed(self, labels: Sequence[Hashable]) -> np.ndarray:
        """J*Q'(X)J."""
        J_X = self.isometry[self.rows(labels)]
        return J_X.conj().T @ J_X

    def reconstruction_error(self, observable: DiscreteObservable) -> float:
        return max(
            float(np.linalg.norm(self.compressed([x]) - e.matrix, "fro"))
            for x, e in observable.items()
        )


class ComplementarityVerdict(BaseModel):
    """Disjointness verdict for one (X, Y) pair."""
    model_config = ConfigDict(frozen=True)

    pair: Tuple[Tuple[Any, ...], Tuple[Any, ...]] = Field(..., description="(X, Y) label subsets")
    disjoint: bool
    overlap_cosine: float = Field(..., ge=0.0, le=1.0)
    threshold: float = Field(..., description="1 - rank_rel used for the decision")
    boundary: bool = Field(False, description="Cosine within rank_rel of the threshold")
    intersection_dim: int = 0
    method: str = Field("support", description="support | dilation")
    witness: Optional[List[Tuple[float, float]]] = Field(
        None, description="Unit vector in the support intersection as [re, im] pairs"
    )

    @model_validator(mode="after")
    def check_consistency(self) -> "ComplementarityVerdict":
        if self.disjoint != (self.overlap_cosine < self.threshold):
            raise ValueError("verdict inconsistent with overlap cosine")
        return self

    def witness_vector(self) -> Optional[np.ndarray]:
        if self.witness is None:
            return None
        return np.array([re + 1j * im for re, im in self.witness])
