from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape
from LaxMilgramPro.errors import ShapeMismatch


class SamplingStrategy(str, Enum):
    GRID = "grid"
    RANDOM = "random"
    EIGEN_DIRECTED = "eigen-directed"


@dataclass(frozen=True, eq=False)
class PureState:
    """Vector state a ↦ v* a_block v on A (block index is 0-based)."""

    shape: AlgebraShape
    block: int
    vector: np.ndarray

    def __post_init__(self) -> None:
        if not 0 <= self.block < self.shape.num_blocks:
            raise ShapeMismatch(f"block {self.block} outside shape {self.shape.block_dims}")
        vector = np.array(self.vector, dtype=complex).reshape(-1)
        n = self.shape.block_dims[self.block]
        if vector.shape != (n,):
            raise ShapeMismatch(f"state vector has length {vector.shape[0]}, block {self.block} needs {n}")
        if abs(np.linalg.norm(vector) - 1.0) > AlgebraConfig.load().unit_tol:
            raise ValueError(f"state vector must have unit norm, got {np.linalg.norm(vector):.15f}")
        vector.setflags(write=False)
        object.__setattr__(self, "vector", vector)

    @classmethod
    def from_vector(cls, shape: AlgebraShape, block: int, vector) -> "PureState":
        """Normalise ``vector`` and wrap it as a state."""
        array = np.asarray(vector, dtype=complex).reshape(-1)
        return cls(shape, block, array / np.linalg.norm(array))

    @classmethod
    def basis(cls, shape: AlgebraShape, block: int, index: int = 0) -> "PureState":
        vector = np.zeros(shape.block_dims[block], dtype=complex)
        vector[index] = 1.0
        return cls(shape, block, vector)

    @property
    def block_dim(self) -> int:
        return self.shape.block_dims[self.block]

    def density(self) -> AlgebraElement:
        """The rank-one projection vv* placed in this state's block."""
        return AlgebraElement.embed(self.shape, self.block, np.outer(self.vector, self.vector.conj()))


@dataclass(frozen=True, eq=False)
class StateSample:
    shape: AlgebraShape
    states: tuple[PureState, ...]
    strategy: SamplingStrategy
    seed: int | None
    count: int

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self):
        return iter(self.states)

    def __getitem__(self, index: int) -> PureState:
        return self.states[index]
