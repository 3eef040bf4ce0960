from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import yaml
from pydantic import BaseModel, Field

from LaxMilgramPro import config


class SolverConfig(BaseModel):
    """Tolerâncias e orçamentos do solver de representação."""

    solver_tol: float = Field(default=1e-8, gt=0, description="Resíduo relativo máximo aceito.")
    refinement_steps: int = Field(default=1, ge=0, description="Passos de refinamento iterativo.")
    uniqueness_tol: float = Field(default=1e-9, gt=0, description="Concordância entre os dois caminhos.")
    probes: int = Field(default=100, ge=1, description="Sondas usadas no cálculo do resíduo.")
    bound_slack_tol: float = Field(default=1e-9, ge=0, description="Folga aceita na cota ‖x‖ ≤ ‖τ‖/c.")
    nesting_tol: float = Field(default=1e-9, gt=0, description="Tolerância da verificação de inclusão.")
    level_tol: float = Field(default=1e-9, ge=0, description="Folga aceita na constante de cada nível.")
    workers: int = Field(default=1, ge=1, description="Threads para os níveis da família.")

    model_config = {"extra": "forbid"}

    @classmethod
    @lru_cache(maxsize=1)
    def load(cls, path: Path | None = None) -> "SolverConfig":
        """Carrega a configuração a partir do arquivo YAML."""
        if path is None:
            path = config.template_path("solver_config.yaml")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return cls(**data)
