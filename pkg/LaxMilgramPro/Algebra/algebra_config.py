from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import yaml
from pydantic import BaseModel, Field

from LaxMilgramPro import config


class AlgebraConfig(BaseModel):
    """Tolerâncias usadas pela aritmética de blocos e pelo cálculo funcional."""

    hermitian_tol: float = Field(default=1e-10, gt=0, description="Tolerância relativa de hermiticidade.")
    positivity_tol: float = Field(default=1e-10, gt=0, description="Tolerância relativa de positividade.")
    rank_tol: float = Field(default=1e-8, gt=0, description="Limiar relativo para o posto (projeção de imagem).")
    eig_tol: float = Field(default=1e-12, gt=0, description="Critério de parada do Jacobi cíclico.")
    jacobi_max_sweeps: int = Field(default=64, ge=1, description="Número máximo de varreduras do Jacobi.")
    unit_tol: float = Field(default=1e-12, gt=0, description="Tolerância de norma unitária dos vetores de estado.")
    linearity_probes: int = Field(default=50, ge=1, description="Entradas aleatórias na checagem de A-linearidade.")
    linearity_tol: float = Field(default=1e-10, gt=0, description="Defeito relativo máximo de A-linearidade.")

    model_config = {"extra": "forbid"}

    @classmethod
    @lru_cache(maxsize=1)
    def load(cls, path: Path | None = None) -> "AlgebraConfig":
        """Carrega a configuração a partir do arquivo YAML."""
        if path is None:
            path = config.template_path("algebra_config.yaml")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return cls(**data)
