from __future__ import annotations

from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, Field, model_validator

from LaxMilgramPro.Forms.forms_models import CertificationRoute
from LaxMilgramPro.States.state_models import SamplingStrategy


class ScenarioAction(str, Enum):
    CERTIFY = "certify"
    SOLVE = "solve"
    FALSIFY = "falsify"
    DEMO = "demo"
    FAMILY_SOLVE = "family-solve"
    PASCHKE = "paschke"


class Outcome(str, Enum):
    SUCCESS = "success"
    FALSIFIED = "falsified"
    INCONCLUSIVE = "inconclusive"
    ERROR = "error"


EXIT_CODES: dict[Outcome, int] = {
    Outcome.SUCCESS: 0,
    Outcome.FALSIFIED: 2,
    Outcome.INCONCLUSIVE: 1,
    Outcome.ERROR: 1,
}


class FormKind(str, Enum):
    INNER_PRODUCT = "inner-product"
    SCALED_IDENTITY = "scaled-identity"
    RANDOM_POSITIVE = "random-positive"
    LEFT_MULTIPLICATION = "left-multiplication"
    OPERATOR = "operator"


class FunctionalKind(str, Enum):
    REPRESENTER = "representer"
    RANDOM = "random"
    ZERO = "zero"


class FamilyKind(str, Enum):
    CONSTANT = "constant"
    CHAIN = "chain"
    EXPLICIT = "explicit"


class DemoKind(str, Enum):
    M2_GAP = "m2-gap"
    COUNTEREXAMPLE = "counterexample"


class FormSpec(BaseModel):
    kind: FormKind = Field(default=FormKind.INNER_PRODUCT, description="Forma embutida ou matriz explícita.")
    scale: float = Field(default=1.0, description="Escala para 'scaled-identity'.")
    floor: float = Field(default=0.1, gt=0, description="Piso espectral de 'random-positive'.")
    seed: Optional[int] = Field(default=None, description="Semente própria; por padrão a do cenário.")
    element: Optional[dict[str, Any]] = Field(default=None, description="Elemento a de 'left-multiplication'.")
    operator: Optional[list[list[dict[str, Any]]]] = Field(
        default=None, description="Matriz q×p sobre A, entradas no formato de AlgebraElement."
    )

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _payload(self) -> "FormSpec":
        if self.kind is FormKind.OPERATOR and self.operator is None:
            raise ValueError("kind 'operator' requires the 'operator' matrix")
        if self.kind is FormKind.LEFT_MULTIPLICATION and self.element is None:
            raise ValueError("kind 'left-multiplication' requires 'element'")
        return self


class FunctionalSpec(BaseModel):
    kind: FunctionalKind = FunctionalKind.RANDOM
    representer: Optional[dict[str, Any]] = Field(default=None, description="z em τ = ⟨z, ·⟩.")
    seed: Optional[int] = None

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _payload(self) -> "FunctionalSpec":
        if self.kind is FunctionalKind.REPRESENTER and self.representer is None:
            raise ValueError("kind 'representer' requires 'representer'")
        return self


class FamilySpec(BaseModel):
    """Família dirigida de submódulos.

    ``chain``: Y_λ gerado por e₁, …, e_λ (λ = 1..q); X_λ igual a Y_λ ou o domínio
    inteiro quando ``x_whole``. ``explicit``: geradores por nível.
    """

    kind: FamilyKind = FamilyKind.CONSTANT
    x_whole: bool = False
    x_levels: Optional[list[list[dict[str, Any]]]] = None
    y_levels: Optional[list[list[dict[str, Any]]]] = None

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _levels(self) -> "FamilySpec":
        if self.kind is FamilyKind.EXPLICIT:
            if not self.y_levels:
                raise ValueError("kind 'explicit' requires 'y_levels'")
            if self.x_levels is not None and len(self.x_levels) != len(self.y_levels):
                raise ValueError("'x_levels' and 'y_levels' must have the same length")
        return self


class SamplingSpec(BaseModel):
    strategy: SamplingStrategy = SamplingStrategy.RANDOM
    count: Optional[int] = Field(default=None, ge=1, description="Estados amostrados.")
    probes: int = Field(default=10, ge=1, description="Sondas por estado.")

    model_config = {"extra": "forbid"}


class DemoSpec(BaseModel):
    kind: DemoKind
    grid_sizes: Optional[list[int]] = Field(default=None, description="Malhas do contraexemplo (n ≥ 8).")

    model_config = {"extra": "forbid"}


class Scenario(BaseModel):
    name: str
    description: str = ""
    action: ScenarioAction
    shape: list[int] = Field(min_length=1, description="Blocos (n₁, …, n_m) da álgebra.")
    ranks: tuple[int, int] = Field(default=(1, 1), description="Postos (p, q) do domínio e do contradomínio.")
    form: FormSpec = Field(default_factory=FormSpec)
    functional: FunctionalSpec = Field(default_factory=FunctionalSpec)
    route: Optional[CertificationRoute] = Field(default=None, description="None escolhe a rota automaticamente.")
    c: Optional[float] = Field(default=None, gt=0)
    k: Optional[float] = Field(default=None, gt=0)
    falsify_c: Optional[list[float]] = None
    sampling: SamplingSpec = Field(default_factory=SamplingSpec)
    family: FamilySpec = Field(default_factory=FamilySpec)
    demo: Optional[DemoSpec] = None
    seed: int = Field(default=0, ge=0)
    tol: Optional[float] = Field(default=None, gt=0)

    model_config = {"extra": "forbid"}

    @model_validator(mode="after")
    def _consistency(self) -> "Scenario":
        if any(n < 1 for n in self.shape):
            raise ValueError("block dimensions must be positive")
        if min(self.ranks) < 1:
            raise ValueError("module ranks must be at least 1")
        if self.action is ScenarioAction.DEMO and self.demo is None:
            raise ValueError("action 'demo' requires a 'demo' section")
        if self.route is CertificationRoute.SEARCH and self.c is None:
            raise ValueError("route 'search' requires the constant 'c'")
        return self


class Report(BaseModel):
    scenario: str
    action: ScenarioAction
    outcome: Outcome
    exit_code: int
    tool: str
    version: str
    seed: int
    certificates: list[dict[str, Any]] = Field(default_factory=list)
    solve: Optional[dict[str, Any]] = None
    falsification: list[dict[str, Any]] = Field(default_factory=list)
    localization: list[dict[str, Any]] = Field(default_factory=list, description="Checagens por estado.")
    demo: Optional[dict[str, Any]] = None
    notes: dict[str, str] = Field(default_factory=dict)
    error: Optional[dict[str, Any]] = None
    timing: dict[str, float] = Field(default_factory=dict, description="Única parte não determinística.")

    model_config = {"extra": "forbid"}

    def canonical(self) -> dict[str, Any]:
        """Report data without timing, for byte-level comparisons."""
        return self.model_dump(mode="json", exclude={"timing"})


class BuiltinInfo(BaseModel):
    name: str
    description: str
    action: ScenarioAction

    model_config = {"extra": "forbid"}


class GapViolation(BaseModel):
    c: float
    lhs: float
    rhs: float
    violated: bool


class M2GapDemo(BaseModel):
    state: dict[str, Any]
    x: dict[str, Any]
    y: dict[str, Any]
    lhs: float = Field(description="|f(B(x, y))|.")
    f_abs_x: float
    f_abs_y: float
    witness_c: float
    witness_k: float
    witness_pairs: int
    witness_min_slack: float
    inconclusive: int
    violations: list[GapViolation]
    search_violations: list[dict[str, Any]] = Field(
        default_factory=list, description="Violações achadas por falsify_uniform na amostra."
    )


class OscillationWindow(BaseModel):
    delta: float
    points: int
    oscillation: float


class CounterexampleLevel(BaseModel):
    n: int
    max_error: float = Field(description="max |x(tⱼ) − sin(1/tⱼ)| para tⱼ > 0.")
    residual: float
    windows: list[OscillationWindow]


class CounterexampleDemo(BaseModel):
    levels: list[CounterexampleLevel]
    oscillation_trend: list[float] = Field(description="Oscilação em (0, ¼) para cada n.")
    non_decreasing: bool
    note: str
