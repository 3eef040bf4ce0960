from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from LaxMilgramPro.errors import ShapeMismatch


def _frozen(matrix: np.ndarray) -> np.ndarray:
    array = np.array(matrix, dtype=complex, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class AlgebraShape:
    """Block sizes (n₁, …, n_m) of A = M_{n₁}(ℂ) ⊕ … ⊕ M_{n_m}(ℂ)."""

    block_dims: tuple[int, ...]

    def __post_init__(self) -> None:
        dims = tuple(int(n) for n in self.block_dims)
        if not dims:
            raise ShapeMismatch("an algebra needs at least one block")
        if any(n < 1 for n in dims):
            raise ShapeMismatch(f"block dimensions must be positive, got {dims}")
        object.__setattr__(self, "block_dims", dims)

    @classmethod
    def of(cls, *dims: int) -> "AlgebraShape":
        return cls(tuple(dims))

    @property
    def num_blocks(self) -> int:
        return len(self.block_dims)

    @property
    def dimension(self) -> int:
        """Complex dimension Σ nᵢ²."""
        return sum(n * n for n in self.block_dims)

    def __iter__(self):
        return iter(self.block_dims)

    def __len__(self) -> int:
        return len(self.block_dims)


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Immutable block-diagonal complex matrix, an element of A."""

    shape: AlgebraShape
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        if len(self.blocks) != self.shape.num_blocks:
            raise ShapeMismatch(
                f"expected {self.shape.num_blocks} blocks for shape {self.shape.block_dims}, got {len(self.blocks)}"
            )
        blocks = []
        for index, (n, block) in enumerate(zip(self.shape.block_dims, self.blocks)):
            array = np.asarray(block, dtype=complex)
            if array.shape != (n, n):
                raise ShapeMismatch(f"block {index} has shape {array.shape}, expected {(n, n)}")
            blocks.append(_frozen(array))
        object.__setattr__(self, "blocks", tuple(blocks))

    # construction -------------------------------------------------------

    @classmethod
    def from_blocks(cls, blocks: Sequence[np.ndarray | Sequence]) -> "AlgebraElement":
        arrays = [np.atleast_2d(np.asarray(block, dtype=complex)) for block in blocks]
        return cls(AlgebraShape(tuple(a.shape[0] for a in arrays)), tuple(arrays))

    @classmethod
    def zeros(cls, shape: AlgebraShape) -> "AlgebraElement":
        return cls(shape, tuple(np.zeros((n, n)) for n in shape.block_dims))

    @classmethod
    def identity(cls, shape: AlgebraShape) -> "AlgebraElement":
        return cls(shape, tuple(np.eye(n) for n in shape.block_dims))

    @classmethod
    def scalar(cls, shape: AlgebraShape, value: complex) -> "AlgebraElement":
        return cls(shape, tuple(value * np.eye(n) for n in shape.block_dims))

    @classmethod
    def embed(cls, shape: AlgebraShape, block_index: int, matrix: np.ndarray) -> "AlgebraElement":
        """Element supported on a single block."""
        blocks = [np.zeros((n, n)) for n in shape.block_dims]
        blocks[block_index] = np.asarray(matrix, dtype=complex)
        return cls(shape, tuple(blocks))

    @classmethod
    def random(cls, shape: AlgebraShape, rng: np.random.Generator) -> "AlgebraElement":
        return cls(
            shape,
            tuple(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for n in shape.block_dims),
        )

    @classmethod
    def random_positive(
        cls, shape: AlgebraShape, rng: np.random.Generator, floor: float = 0.0
    ) -> "AlgebraElement":
        base = cls.random(shape, rng)
        return base.adjoint() @ base + cls.scalar(shape, floor)

    # algebra -------------------------------------------------------------

    def _check(self, other: "AlgebraElement") -> None:
        if not isinstance(other, AlgebraElement):
            raise TypeError(f"expected AlgebraElement, got {type(other).__name__}")
        if other.shape != self.shape:
            raise ShapeMismatch(f"shapes differ: {self.shape.block_dims} vs {other.shape.block_dims}")

    def map_blocks(self, fn: Callable[[np.ndarray], np.ndarray]) -> "AlgebraElement":
        return AlgebraElement(self.shape, tuple(fn(block) for block in self.blocks))

    def adjoint(self) -> "AlgebraElement":
        return self.map_blocks(lambda block: block.conj().T)

    @property
    def H(self) -> "AlgebraElement":
        return self.adjoint()

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.shape, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def __neg__(self) -> "AlgebraElement":
        return self.map_blocks(lambda block: -block)

    def __mul__(self, scalar: complex) -> "AlgebraElement":
        if isinstance(scalar, AlgebraElement):
            return NotImplemented
        return self.map_blocks(lambda block: scalar * block)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "AlgebraElement":
        return self.map_blocks(lambda block: block / scalar)

    def __matmul__(self, other: "AlgebraElement") -> "AlgebraElement":
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        return AlgebraElement(self.shape, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    # inspection ----------------------------------------------------------

    def to_dense(self) -> np.ndarray:
        size = sum(self.shape.block_dims)
        dense = np.zeros((size, size), dtype=complex)
        offset = 0
        for block in self.blocks:
            n = block.shape[0]
            dense[offset : offset + n, offset : offset + n] = block
            offset += n
        return dense

    def frobenius_norm(self) -> float:
        return float(np.sqrt(sum(np.sum(np.abs(block) ** 2) for block in self.blocks)))

    def allclose(self, other: "AlgebraElement", atol: float = 1e-10) -> bool:
        self._check(other)
        return all(np.allclose(a, b, rtol=0.0, atol=atol) for a, b in zip(self.blocks, other.blocks))

    def trace(self) -> complex:
        return complex(sum(np.trace(block) for block in self.blocks))


@dataclass(frozen=True, eq=False)
class HermitianEigensystem:
    """Per-block unitary diagonalisation a = U Λ U* with eigenvalues in descending order."""

    shape: AlgebraShape
    eigenvalues: tuple[np.ndarray, ...]
    eigenvectors: tuple[np.ndarray, ...]
    sweeps: tuple[int, ...] = field(default=())

    def apply(self, fn: Callable[[np.ndarray], np.ndarray]) -> AlgebraElement:
        """Functional calculus: U fn(Λ) U* block by block."""
        return AlgebraElement(
            self.shape,
            tuple((u * fn(w)) @ u.conj().T for w, u in zip(self.eigenvalues, self.eigenvectors)),
        )

    def reconstruct(self) -> AlgebraElement:
        return self.apply(lambda w: w)

    @property
    def max_eigenvalue(self) -> float:
        return float(max(w[0] for w in self.eigenvalues))

    @property
    def min_eigenvalue(self) -> float:
        return float(min(w[-1] for w in self.eigenvalues))

    def all_eigenvalues(self) -> np.ndarray:
        return np.concatenate(self.eigenvalues)


@dataclass(frozen=True, eq=False)
class PolarDecomposition:
    """a = u·h with h = |a|; ``unitary`` completes u when a is singular."""

    u: AlgebraElement
    h: AlgebraElement
    unitary: AlgebraElement
    singular: bool
    singular_blocks: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class Inverse:
    element: AlgebraElement
    inverse_norm: float


@dataclass(frozen=True)
class PositivityCheck:
    positive: bool
    margin: float
    hermitian: bool = True

    def __bool__(self) -> bool:
        return self.positive


def stack_shapes(elements: Iterable[AlgebraElement]) -> AlgebraShape:
    shapes = {element.shape for element in elements}
    if len(shapes) != 1:
        raise ShapeMismatch(f"elements do not share one shape: {sorted(s.block_dims for s in shapes)}")
    return shapes.pop()
