from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import yaml
from pydantic import BaseModel, Field

from LaxMilgramPro import config


class ScenarioConfig(BaseModel):
    """Parâmetros do executor de cenários e dos demos."""

    tool_name: str = Field(default="LaxMilgramPro", description="Nome gravado nos relatórios.")
    tool_version: str = Field(default="0.3.0", description="Versão gravada nos relatórios.")
    report_indent: int | None = Field(default=2, description="Indentação do JSON; None gera uma linha.")
    default_seed: int = Field(default=0, ge=0)
    default_samples: int = Field(default=32, ge=1, description="Estados amostrados por padrão.")
    falsify_c_values: list[float] = Field(
        default_factory=lambda: [0.01, 0.1, 1.0], description="Constantes testadas por padrão na falsificação."
    )
    demo_grid_sizes: list[int] = Field(default_factory=lambda: [64, 256, 1024])
    demo_min_points: int = Field(default=2, ge=1, description="Pontos mínimos da malha em (0, δ).")
    demo_probes: int = Field(default=4, ge=1, description="Sondas de resíduo no contraexemplo.")
    localization_tol: float = Field(default=1e-9, gt=0, description="Resíduo máximo na localização.")
    scenario_dir: str = Field(default="scenarios", description="Subpasta com os cenários embutidos.")

    model_config = {"extra": "forbid"}

    @classmethod
    @lru_cache(maxsize=1)
    def load(cls, path: Path | None = None) -> "ScenarioConfig":
        """Carrega a configuração a partir do arquivo YAML."""
        if path is None:
            path = config.template_path("scenario_config.yaml")
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
        return cls(**data)

    def builtin_dir(self) -> Path:
        return config.template_path(self.scenario_dir)
