from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import yaml
from pydantic import BaseModel, Field

from LaxMilgramPro import config


class FormsConfig(BaseModel):
    """Orçamentos e tolerâncias da certificação e falsificação de coercividade."""

    ascent_steps: int = Field(default=200, ge=1, description="Passos da subida projetada por reinício.")
    ascent_restarts: int = Field(default=20, ge=1, description="Número de reinícios da subida.")
    ascent_step: float = Field(default=0.5, gt=0, description="Tamanho do passo da subida.")
    probes: int = Field(default=100, ge=1, description="Sondas (x, y) por estado.")
    linearity_probes: int = Field(default=50, ge=1, description="Sondas de sesquilinearidade.")
    sesquilinear_tol: float = Field(default=1e-9, gt=0, description="Defeito relativo aceito nas sondas.")
    violation_tol: float = Field(default=1e-9, ge=0, description="Margem para registrar uma violação.")
    witness_slack_tol: float = Field(default=1e-9, ge=0, description="Folga mínima de uma testemunha.")
    workers: int = Field(default=1, ge=1, description="Threads usadas na busca.")

    model_config = {"extra": "forbid"}

    @classmethod
    @lru_cache(maxsize=1)
    def load(cls, path: Path | None = None) -> "FormsConfig":
        """Carrega a configuração a partir do arquivo YAML."""
        if path is None:
            path = config.template_path("forms_config.yaml")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return cls(**data)
