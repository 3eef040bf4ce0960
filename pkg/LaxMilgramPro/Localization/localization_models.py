from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, Field

from LaxMilgramPro.Module.module_models import ModuleElement, ModuleSpace
from LaxMilgramPro.States.state_models import PureState

SLOT_CONVENTION = (
    "Localização: (x + N_f, y + N_f)_f = f(⟨y, x⟩) com ⟨·,·⟩ linear no segundo argumento; "
    "o pareamento com τ_f vale diretamente; o produto de funcionais vale na forma f(⟨z_τ, z_ρ⟩) = (ρ_f, τ_f)_f (argumentos trocados)."
)


@dataclass(frozen=True, eq=False)
class LocalizedSpace:
    """H_f = X / N_f with (x + N_f, y + N_f)_f = f(⟨y, x⟩)."""

    source: ModuleSpace
    state: PureState
    basis: tuple[ModuleElement, ...]
    gram: np.ndarray
    evaluation: np.ndarray
    pivots: tuple[int, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)


@dataclass(frozen=True, eq=False)
class LocalizedVector:
    space: LocalizedSpace
    coordinates: np.ndarray

    def norm(self) -> float:
        c = self.coordinates
        return float(np.sqrt(max((c @ self.space.gram @ c.conj()).real, 0.0)))


class PaschkeCheck(BaseModel):
    """Residuals of the localization identities at one (state, τ, ρ) triple."""

    dimension: int
    pairing_residual: float = Field(description="max |(x + N_f, τ_f)_f − f(τ(x))| sobre a base e sondas.")
    representer_residual: float = Field(description="max ‖τ(x) − ⟨z_τ, x⟩‖ sobre sondas.")
    inner_residual: float = Field(description="|f(⟨z_τ, z_ρ⟩) − (ρ_f, τ_f)_f|.")
    inner_unswapped_residual: float = Field(description="|f(⟨z_τ, z_ρ⟩) − (τ_f, ρ_f)_f| sem troca.")
    norm_excess: float = Field(description="‖τ_f‖_f − ‖τ‖ (≤ 0 esperado).")
    convention: str = SLOT_CONVENTION

    model_config = {"extra": "forbid"}

    def holds(self, tol: float = 1e-9) -> bool:
        return max(self.pairing_residual, self.representer_residual, self.inner_residual) <= tol and self.norm_excess <= tol
