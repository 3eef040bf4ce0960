from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np
from pydantic import BaseModel, Field, InstanceOf, field_serializer, model_validator

from LaxMilgramPro.Forms.forms_models import CertificationRoute
from LaxMilgramPro.Module.module_models import ModuleElement, ModuleSpace
from LaxMilgramPro.Solver.solver_config import SolverConfig
from LaxMilgramPro.utils.serialization import encode_module_element


@dataclass(frozen=True, eq=False)
class FlattenedSystem:
    """Scalar matrix of an A-linear operator in the block-major flattened coordinates."""

    domain: ModuleSpace
    codomain: ModuleSpace
    matrix: np.ndarray
    linearity_defect: float = 0.0

    @property
    def square(self) -> bool:
        return self.matrix.shape[0] == self.matrix.shape[1]

    def flatten(self, x: ModuleElement) -> np.ndarray:
        return x.flatten()

    def unflatten(self, vector: np.ndarray, codomain: bool = False) -> ModuleElement:
        return ModuleElement.unflatten(self.codomain if codomain else self.domain, vector)

    def apply(self, x: ModuleElement) -> ModuleElement:
        return self.unflatten(self.matrix @ x.flatten(), codomain=True)


class SolveStatus(str, Enum):
    SUCCESS = "success"
    BOUND_VIOLATED = "bound_violated"
    NOT_UNIQUE = "not_unique"


class LevelResult(BaseModel):
    level: int
    dimension_x: int
    dimension_y: int
    constant: float = Field(description="σ_min do operador comprimido K_λ.")
    residual: float = Field(description="Resíduo contra τ restrito a Y_λ.")
    solution_norm: float

    model_config = {"extra": "forbid"}


class SolveResult(BaseModel):
    solution: InstanceOf[ModuleElement]
    residual: float = Field(ge=0, description="sup sobre sondas y de ‖B(x,y) − τ(y)‖ / ‖y‖.")
    norm_bound_ok: bool
    bound_slack: float = Field(description="‖τ‖/c − ‖x‖.")
    solution_norm: float
    functional_norm: float
    functional_norm_sampled: bool = False
    c: float
    route: CertificationRoute
    status: SolveStatus = SolveStatus.SUCCESS
    uniqueness_gap: float | None = None
    nondegenerate: bool | None = None
    levels: list[LevelResult] = Field(default_factory=list)
    cauchy_profile: list[float] = Field(
        default_factory=list, description="‖x_λ − x_{λ+1}‖ entre níveis consecutivos."
    )
    distance_to_final: list[float] = Field(default_factory=list)

    model_config = {"extra": "forbid", "arbitrary_types_allowed": True}

    @field_serializer("solution")
    def _encode_solution(self, solution: ModuleElement) -> dict[str, Any]:
        return encode_module_element(solution)

    @model_validator(mode="after")
    def _bound_flag(self) -> "SolveResult":
        tol = SolverConfig.load().bound_slack_tol
        if self.norm_bound_ok != (self.bound_slack >= -tol):
            raise ValueError(f"norm_bound_ok must match bound_slack ≥ −{tol:g}")
        return self
