from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterator, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.linalg import svdvals

from LaxMilgramPro.Algebra.algebra_models import AlgebraElement
from LaxMilgramPro.errors import ShapeMismatch
from LaxMilgramPro.Forms.forms_config import FormsConfig
from LaxMilgramPro.Module.module_models import ModuleElement, ModuleSpace
from LaxMilgramPro.Module.module_space import inner_product


class CertificationRoute(str, Enum):
    POSITIVE_INVERTIBLE = "positive_invertible"
    INNER_PRODUCT = "inner_product"
    SEARCH = "search"
    INF_SUP = "inf_sup"


class WitnessRoute(str, Enum):
    POLAR = "polar"
    INNER_PRODUCT = "inner_product"
    ASCENT = "ascent"
    VACUOUS = "vacuous"


@dataclass(frozen=True, eq=False)
class SesquilinearForm:
    """B(x, y) = ⟨Tx, y⟩ for an A-linear T: Aᵖ → A^q given as a q×p matrix over A."""

    domain: ModuleSpace
    codomain: ModuleSpace
    operator: tuple[tuple[AlgebraElement, ...], ...]
    name: str = ""

    def __post_init__(self) -> None:
        if self.domain.shape != self.codomain.shape:
            raise ShapeMismatch("domain and codomain must be modules over the same algebra")
        rows = tuple(tuple(row) for row in self.operator)
        if len(rows) != self.codomain.rank or any(len(row) != self.domain.rank for row in rows):
            raise ShapeMismatch(
                f"operator matrix must be {self.codomain.rank}×{self.domain.rank} over A"
            )
        for row in rows:
            for entry in row:
                if entry.shape != self.domain.shape:
                    raise ShapeMismatch("operator entry lives in a different algebra")
        object.__setattr__(self, "operator", rows)

    # construction -------------------------------------------------------

    @classmethod
    def from_block_operators(
        cls, domain: ModuleSpace, codomain: ModuleSpace, blocks: Sequence[np.ndarray], name: str = ""
    ) -> "SesquilinearForm":
        """Assemble T from its per-block scalar matrices Tᵢ of shape (q·nᵢ × p·nᵢ)."""
        p, q = domain.rank, codomain.rank
        dims = domain.shape.block_dims
        entries = [[[None] * len(dims) for _ in range(p)] for _ in range(q)]
        for i, (n, block) in enumerate(zip(dims, blocks)):
            block = np.asarray(block, dtype=complex)
            if block.shape != (q * n, p * n):
                raise ShapeMismatch(f"block operator {i} has shape {block.shape}, expected {(q * n, p * n)}")
            for r in range(q):
                for c in range(p):
                    entries[r][c][i] = block[r * n : (r + 1) * n, c * n : (c + 1) * n]
        operator = tuple(
            tuple(AlgebraElement(domain.shape, tuple(entries[r][c])) for c in range(p)) for r in range(q)
        )
        return cls(domain, codomain, operator, name)

    @classmethod
    def scaled_identity(cls, space: ModuleSpace, scale: complex = 1.0, name: str = "") -> "SesquilinearForm":
        zero = AlgebraElement.zeros(space.shape)
        unit = AlgebraElement.scalar(space.shape, scale)
        operator = tuple(tuple(unit if r == c else zero for c in range(space.rank)) for r in range(space.rank))
        return cls(space, space, operator, name or ("inner-product" if scale == 1.0 else f"{scale}·identity"))

    @classmethod
    def inner_product_form(cls, space: ModuleSpace) -> "SesquilinearForm":
        return cls.scaled_identity(space, 1.0, name="inner-product")

    @classmethod
    def left_multiplication(cls, space: ModuleSpace, a: AlgebraElement, name: str = "") -> "SesquilinearForm":
        """T x = (a·x₁, …, a·x_p); on rank one B(x, y) = (a x)* y."""
        zero = AlgebraElement.zeros(space.shape)
        operator = tuple(tuple(a if r == c else zero for c in range(space.rank)) for r in range(space.rank))
        return cls(space, space, operator, name or "left-multiplication")

    @classmethod
    def random_positive(
        cls, space: ModuleSpace, rng: np.random.Generator, floor: float = 0.1, name: str = ""
    ) -> "SesquilinearForm":
        """T with Tᵢ = GᵢᴴGᵢ/dim + floor·1 per block: positive and invertible."""
        blocks = []
        for n in space.shape.block_dims:
            size = space.rank * n
            g = rng.standard_normal((size, size)) + 1j * rng.standard_normal((size, size))
            blocks.append(g.conj().T @ g / size + floor * np.eye(size))
        return cls.from_block_operators(space, space, blocks, name or "random-positive")

    # structure ------------------------------------------------------------

    def block_operator(self, i: int) -> np.ndarray:
        return np.block([[entry.blocks[i] for entry in row] for row in self.operator])

    def block_operators(self) -> list[np.ndarray]:
        return [self.block_operator(i) for i in range(self.domain.shape.num_blocks)]

    def flat_matrix(self) -> np.ndarray:
        """blockdiag over blocks of kron(Tᵢ, I_{nᵢ}) in the block-major flattened layout."""
        dims = self.domain.shape.block_dims
        matrix = np.zeros((self.codomain.flat_dimension, self.domain.flat_dimension), dtype=complex)
        row = col = 0
        for i, n in enumerate(dims):
            piece = np.kron(self.block_operator(i), np.eye(n))
            matrix[row : row + piece.shape[0], col : col + piece.shape[1]] = piece
            row += piece.shape[0]
            col += piece.shape[1]
        return matrix

    def block_singular_values(self) -> list[np.ndarray]:
        return [svdvals(block) for block in self.block_operators()]

    def norm(self) -> float:
        """‖T‖ = ‖B‖ = max over blocks of the largest singular value."""
        return float(max(s[0] if s.size else 0.0 for s in self.block_singular_values()))

    # action -----------------------------------------------------------------

    def apply(self, x: ModuleElement) -> ModuleElement:
        if x.space != self.domain:
            raise ShapeMismatch(f"form domain is {self.domain}, got element of {x.space}")
        components = []
        for row in self.operator:
            total = AlgebraElement.zeros(self.domain.shape)
            for entry, xk in zip(row, x.components):
                total = total + entry @ xk
            components.append(total)
        return ModuleElement(self.codomain, tuple(components))

    def adjoint(self) -> "SesquilinearForm":
        """B*(y, x) = ⟨T*y, x⟩ = B(x, y)*."""
        operator = tuple(
            tuple(self.operator[r][c].adjoint() for r in range(self.codomain.rank))
            for c in range(self.domain.rank)
        )
        return SesquilinearForm(self.codomain, self.domain, operator, f"{self.name}*" if self.name else "adjoint")

    def __call__(self, x: ModuleElement, y: ModuleElement) -> AlgebraElement:
        return inner_product(self.apply(x), y)

    def allclose(self, other: "SesquilinearForm", atol: float = 1e-10) -> bool:
        if other.domain != self.domain or other.codomain != self.codomain:
            return False
        return all(
            a.allclose(b, atol=atol) for row_a, row_b in zip(self.operator, other.operator) for a, b in zip(row_a, row_b)
        )


@dataclass(frozen=True, eq=False)
class Witness:
    """Witness y for the pair (f, x): ‖y‖ = 1 with lhs = |f(B(x, y))| and rhs = c·f(|x|)·f(|y|)."""

    y: ModuleElement
    lhs: float
    rhs: float
    k_value: float
    route: WitnessRoute

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    @property
    def vacuous(self) -> bool:
        return self.route is WitnessRoute.VACUOUS

    def __iter__(self) -> Iterator[Any]:
        return iter((self.y, self.lhs, self.rhs))


class WitnessRecord(BaseModel):
    condition: str = Field(description="'main' (y para x) ou 'main2' (x para y).")
    state: dict[str, Any]
    given: dict[str, Any]
    witness: dict[str, Any]
    lhs: float
    rhs: float
    k_value: float
    route: WitnessRoute

    model_config = {"extra": "forbid", "use_enum_values": False}

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


class Violation(BaseModel):
    state_index: int
    probe: int
    candidate: str
    state: dict[str, Any]
    x: dict[str, Any]
    y: dict[str, Any]
    lhs: float
    rhs: float
    c: float

    model_config = {"extra": "forbid"}


class CoercivityCertificate(BaseModel):
    """Constants (c, k), the certification route and supporting evidence."""

    c: float = Field(gt=0)
    k: float = Field(gt=0)
    route: CertificationRoute
    sampled: bool = Field(description="True quando a conclusão vem de amostragem, não de construção analítica.")
    seed: int | None = None
    form_norm: float | None = Field(default=None, description="‖B‖, guardado junto de c e k.")
    witnesses: list[WitnessRecord] = Field(default_factory=list)
    violations: list[Violation] = Field(default_factory=list)
    inconclusive: int = Field(default=0, ge=0, description="Pares em que a busca esgotou o orçamento.")
    vacuous: int = Field(default=0, ge=0, description="Pares com f(|x|) = 0, onde a condição é vazia.")

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _witness_slack(self) -> "CoercivityCertificate":
        if not self.violations:
            tol = FormsConfig.load().witness_slack_tol
            for record in self.witnesses:
                if record.slack < -tol:
                    raise ValueError(f"witness slack {record.slack:.3e} below −{tol:g}")
        return self

    @property
    def holds(self) -> bool:
        return not self.violations

    def summary(self) -> dict[str, Any]:
        return {
            "c": self.c,
            "k": self.k,
            "route": self.route.value,
            "violations": [v.model_dump(mode="json") for v in self.violations],
            "sampled": self.sampled,
            "seed": self.seed,
        }


class BoundedBelow(BaseModel):
    constant: float
    required: float
    holds: bool

    model_config = {"extra": "forbid"}
