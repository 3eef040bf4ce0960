from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.linalg import null_space, orth

from LaxMilgramPro.Algebra.algebra_config import AlgebraConfig
from LaxMilgramPro.Algebra.algebra_models import AlgebraElement, AlgebraShape
from LaxMilgramPro.errors import ShapeMismatch


@dataclass(frozen=True)
class ModuleSpace:
    """The free Hilbert module Aᵖ with ⟨x, y⟩ = Σₖ xₖ* yₖ."""

    shape: AlgebraShape
    rank: int

    def __post_init__(self) -> None:
        if int(self.rank) < 1:
            raise ShapeMismatch(f"module rank must be at least 1, got {self.rank}")
        object.__setattr__(self, "rank", int(self.rank))

    @property
    def flat_dimension(self) -> int:
        """Complex dimension p·Σ nᵢ² of the flattened space."""
        return self.rank * self.shape.dimension

    def block_offsets(self) -> list[int]:
        offsets, total = [], 0
        for n in self.shape.block_dims:
            offsets.append(total)
            total += self.rank * n * n
        return offsets


@dataclass(frozen=True, eq=False)
class ModuleElement:
    """A p-tuple over A.

    The flattened layout is block-major: for each block i the components are
    stacked into a (p·nᵢ × nᵢ) matrix Xᵢ, vectorised row by row.
    """

    space: ModuleSpace
    components: tuple[AlgebraElement, ...]

    def __post_init__(self) -> None:
        if len(self.components) != self.space.rank:
            raise ShapeMismatch(f"expected {self.space.rank} components, got {len(self.components)}")
        for component in self.components:
            if component.shape != self.space.shape:
                raise ShapeMismatch(
                    f"component shape {component.shape.block_dims} differs from {self.space.shape.block_dims}"
                )
        object.__setattr__(self, "components", tuple(self.components))

    # construction -------------------------------------------------------

    @classmethod
    def of(cls, *components: AlgebraElement) -> "ModuleElement":
        if not components:
            raise ShapeMismatch("a module element needs at least one component")
        return cls(ModuleSpace(components[0].shape, len(components)), tuple(components))

    @classmethod
    def zeros(cls, space: ModuleSpace) -> "ModuleElement":
        return cls(space, tuple(AlgebraElement.zeros(space.shape) for _ in range(space.rank)))

    @classmethod
    def basis(cls, space: ModuleSpace, k: int) -> "ModuleElement":
        """eₖ·1, the k-th standard generator (0-based)."""
        components = [AlgebraElement.zeros(space.shape) for _ in range(space.rank)]
        components[k] = AlgebraElement.identity(space.shape)
        return cls(space, tuple(components))

    @classmethod
    def random(cls, space: ModuleSpace, rng: np.random.Generator) -> "ModuleElement":
        return cls(space, tuple(AlgebraElement.random(space.shape, rng) for _ in range(space.rank)))

    @classmethod
    def from_stacked(cls, space: ModuleSpace, stacked: Sequence[np.ndarray]) -> "ModuleElement":
        p = space.rank
        per_component = [[] for _ in range(p)]
        for n, matrix in zip(space.shape.block_dims, stacked):
            matrix = np.asarray(matrix, dtype=complex)
            if matrix.shape != (p * n, n):
                raise ShapeMismatch(f"stacked block has shape {matrix.shape}, expected {(p * n, n)}")
            for k in range(p):
                per_component[k].append(matrix[k * n : (k + 1) * n, :])
        return cls(space, tuple(AlgebraElement(space.shape, tuple(blocks)) for blocks in per_component))

    @classmethod
    def unflatten(cls, space: ModuleSpace, vector: np.ndarray) -> "ModuleElement":
        vector = np.asarray(vector, dtype=complex).reshape(-1)
        if vector.shape[0] != space.flat_dimension:
            raise ShapeMismatch(f"flat vector has length {vector.shape[0]}, expected {space.flat_dimension}")
        stacked = []
        for offset, n in zip(space.block_offsets(), space.shape.block_dims):
            size = space.rank * n * n
            stacked.append(vector[offset : offset + size].reshape(space.rank * n, n))
        return cls.from_stacked(space, stacked)

    # views ----------------------------------------------------------------

    def stacked(self, block: int) -> np.ndarray:
        return np.vstack([component.blocks[block] for component in self.components])

    def flatten(self) -> np.ndarray:
        return np.concatenate([self.stacked(i).reshape(-1) for i in range(self.space.shape.num_blocks)])

    # module operations ------------------------------------------------------

    def _check(self, other: "ModuleElement") -> None:
        if not isinstance(other, ModuleElement):
            raise TypeError(f"expected ModuleElement, got {type(other).__name__}")
        if other.space != self.space:
            raise ShapeMismatch(f"module spaces differ: {self.space} vs {other.space}")

    def __add__(self, other: "ModuleElement") -> "ModuleElement":
        self._check(other)
        return ModuleElement(self.space, tuple(a + b for a, b in zip(self.components, other.components)))

    def __sub__(self, other: "ModuleElement") -> "ModuleElement":
        self._check(other)
        return ModuleElement(self.space, tuple(a - b for a, b in zip(self.components, other.components)))

    def __neg__(self) -> "ModuleElement":
        return ModuleElement(self.space, tuple(-a for a in self.components))

    def __mul__(self, scalar: complex) -> "ModuleElement":
        if isinstance(scalar, (AlgebraElement, ModuleElement)):
            return NotImplemented
        return ModuleElement(self.space, tuple(a * scalar for a in self.components))

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "ModuleElement":
        return ModuleElement(self.space, tuple(a / scalar for a in self.components))

    def __matmul__(self, a: AlgebraElement) -> "ModuleElement":
        """Right action x·a."""
        if not isinstance(a, AlgebraElement):
            return NotImplemented
        return ModuleElement(self.space, tuple(component @ a for component in self.components))

    def allclose(self, other: "ModuleElement", atol: float = 1e-10) -> bool:
        self._check(other)
        return all(a.allclose(b, atol=atol) for a, b in zip(self.components, other.components))


@dataclass(frozen=True, eq=False)
class DualFunctional:
    """A bounded A-linear functional on a module, given by a representer or a callable."""

    space: ModuleSpace
    representer: ModuleElement | None = None
    fn: Callable[[ModuleElement], AlgebraElement] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if (self.representer is None) == (self.fn is None):
            raise ValueError("a functional needs exactly one of representer or fn")
        if self.representer is not None and self.representer.space != self.space:
            raise ShapeMismatch("representer lives in a different module space")

    @classmethod
    def hat(cls, z: ModuleElement, name: str = "") -> "DualFunctional":
        """ẑ = ⟨z, ·⟩."""
        return cls(space=z.space, representer=z, name=name or "hat")

    @classmethod
    def from_callable(
        cls, space: ModuleSpace, fn: Callable[[ModuleElement], AlgebraElement], name: str = ""
    ) -> "DualFunctional":
        return cls(space=space, fn=fn, name=name or "black-box")

    @classmethod
    def zero(cls, space: ModuleSpace) -> "DualFunctional":
        return cls.hat(ModuleElement.zeros(space), name="zero")

    @property
    def representable(self) -> bool:
        return self.representer is not None

    def __call__(self, y: ModuleElement) -> AlgebraElement:
        if y.space != self.space:
            raise ShapeMismatch(f"functional on {self.space} applied to element of {y.space}")
        if self.representer is not None:
            return sum(
                (zk.adjoint() @ yk for zk, yk in zip(self.representer.components, y.components)),
                AlgebraElement.zeros(self.space.shape),
            )
        return self.fn(y)


@dataclass(frozen=True, eq=False)
class Submodule:
    """The closed submodule generated by ``generators``.

    Block by block it is {X : columns of Xᵢ lie in Wᵢ}, where Wᵢ ⊂ ℂ^{p·nᵢ} is the
    joint column space of the stacked generators. Bases and projections are
    computed once on first use.
    """

    ambient: ModuleSpace
    generators: tuple[ModuleElement, ...] = field(default=())
    rank_tol: float | None = None

    def __post_init__(self) -> None:
        for g in self.generators:
            if g.space != self.ambient:
                raise ShapeMismatch("generator lives in a different module space")
        object.__setattr__(self, "generators", tuple(self.generators))

    @classmethod
    def whole(cls, space: ModuleSpace) -> "Submodule":
        return cls(space, tuple(ModuleElement.basis(space, k) for k in range(space.rank)))

    @classmethod
    def span(cls, *generators: ModuleElement) -> "Submodule":
        return cls(generators[0].space, tuple(generators))

    @cached_property
    def bases(self) -> tuple[np.ndarray, ...]:
        """Orthonormal basis Qᵢ (p·nᵢ × rᵢ) of Wᵢ per block."""
        rank_tol = AlgebraConfig.load().rank_tol if self.rank_tol is None else self.rank_tol
        bases = []
        for i, n in enumerate(self.ambient.shape.block_dims):
            rows = self.ambient.rank * n
            if not self.generators:
                bases.append(np.zeros((rows, 0), dtype=complex))
                continue
            columns = np.hstack([g.stacked(i) for g in self.generators])
            if not np.any(columns):
                bases.append(np.zeros((rows, 0), dtype=complex))
                continue
            bases.append(orth(columns, rcond=rank_tol))
        return tuple(bases)

    @cached_property
    def complement_bases(self) -> tuple[np.ndarray, ...]:
        bases = []
        for q in self.bases:
            rows = q.shape[0]
            if q.shape[1] == 0:
                bases.append(np.eye(rows, dtype=complex))
            elif q.shape[1] == rows:
                bases.append(np.zeros((rows, 0), dtype=complex))
            else:
                bases.append(null_space(q.conj().T))
        return tuple(bases)

    @cached_property
    def projections(self) -> tuple[np.ndarray, ...]:
        return tuple(q @ q.conj().T for q in self.bases)

    @property
    def block_ranks(self) -> tuple[int, ...]:
        return tuple(q.shape[1] for q in self.bases)

    @property
    def flat_dimension(self) -> int:
        return sum(r * n for r, n in zip(self.block_ranks, self.ambient.shape.block_dims))

    @cached_property
    def flat_basis(self) -> np.ndarray:
        """Orthonormal basis of the flattened submodule, blockdiag(Qᵢ ⊗ I_{nᵢ})."""
        basis = np.zeros((self.ambient.flat_dimension, self.flat_dimension), dtype=complex)
        row, col = 0, 0
        for q, n in zip(self.bases, self.ambient.shape.block_dims):
            piece = np.kron(q, np.eye(n))
            basis[row : row + piece.shape[0], col : col + piece.shape[1]] = piece
            row += piece.shape[0]
            col += piece.shape[1]
        return basis

    def project(self, x: ModuleElement) -> ModuleElement:
        if x.space != self.ambient:
            raise ShapeMismatch("element lives in a different module space")
        return ModuleElement.from_stacked(
            self.ambient, [p @ x.stacked(i) for i, p in enumerate(self.projections)]
        )

    def contains(self, x: ModuleElement, atol: float = 1e-9) -> bool:
        return self.project(x).allclose(x, atol=atol)

    def contains_submodule(self, other: "Submodule", atol: float = 1e-9) -> bool:
        return all(
            np.allclose(p @ q, q, rtol=0.0, atol=atol) for p, q in zip(self.projections, other.bases)
        )


class FunctionalNorm(BaseModel):
    value: float
    sampled: bool
    samples: int = 0

    model_config = {"extra": "forbid"}


class ComplementationCheck(BaseModel):
    complemented: bool
    defect: float

    model_config = {"extra": "forbid"}
