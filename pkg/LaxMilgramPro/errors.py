from __future__ import annotations

from typing import Any


class LaxMilgramError(Exception):
    """Base class for every failure raised by the library."""


class ShapeMismatch(LaxMilgramError):
    pass


class NotHermitian(LaxMilgramError):
    def __init__(self, defect: float, tol: float):
        self.defect = defect
        self.tol = tol
        super().__init__(f"element is not Hermitian: ‖a − a*‖ = {defect:.3e} > {tol:.3e}")


class NotPositive(LaxMilgramError):
    def __init__(self, min_eigenvalue: float, tol: float):
        self.min_eigenvalue = min_eigenvalue
        self.tol = tol
        super().__init__(f"element is not positive: min eigenvalue {min_eigenvalue:.3e} < −{tol:.3e}")


class Singular(LaxMilgramError):
    def __init__(self, block_index: int, smallest_singular_value: float):
        self.block_index = block_index
        self.smallest_singular_value = smallest_singular_value
        super().__init__(
            f"block {block_index} is singular (smallest singular value {smallest_singular_value:.3e})"
        )


class ZeroElement(LaxMilgramError):
    pass


class NotLinear(LaxMilgramError):
    def __init__(self, defect: float, probe: int):
        self.defect = defect
        self.probe = probe
        super().__init__(f"functional failed the A-linearity probe #{probe} (defect {defect:.3e})")


class NotFull(LaxMilgramError):
    def __init__(self, missed_dimension: int, blocks: list[int]):
        self.missed_dimension = missed_dimension
        self.blocks = blocks
        super().__init__(
            f"generated module is not full: blocks {blocks} are missed "
            f"(missed subspace dimension {missed_dimension})"
        )


class NotSesquilinear(LaxMilgramError):
    def __init__(self, probe: dict[str, Any]):
        self.probe = probe
        super().__init__(f"black-box form failed a sesquilinearity probe: {probe}")


class NotPositiveOperator(LaxMilgramError):
    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"operator is not positive (min eigenvalue {min_eigenvalue:.3e})")


class NoWitnessFound(LaxMilgramError):
    """Inconclusive search: the inequality was not met within the budget."""

    def __init__(self, best: Any):
        self.best = best
        super().__init__("no witness satisfied the coercivity inequality within the search budget")


class SingularOperator(LaxMilgramError):
    def __init__(self, smallest_pivot: float):
        self.smallest_pivot = smallest_pivot
        super().__init__(
            f"flattened operator is singular (smallest pivot {smallest_pivot:.3e}); "
            "the coercivity certificate does not hold"
        )


class ResidualTooLarge(LaxMilgramError):
    def __init__(self, residual: float, tol: float):
        self.residual = residual
        self.tol = tol
        super().__init__(f"solve residual {residual:.3e} exceeds {tol:.3e}")


class NotNested(LaxMilgramError):
    def __init__(self, level: int):
        self.level = level
        super().__init__(f"family is not increasing: level {level} is not contained in level {level + 1}")


class LevelCertificateFailed(LaxMilgramError):
    def __init__(self, level: int, constant: float, required: float):
        self.level = level
        self.constant = constant
        self.required = required
        super().__init__(
            f"level {level}: restricted coercivity constant {constant:.3e} is below {required:.3e}"
        )


class ScenarioParseError(LaxMilgramError):
    pass


class ScenarioValidationError(LaxMilgramError):
    def __init__(self, field_path: str, message: str):
        self.field_path = field_path
        super().__init__(f"{field_path}: {message}")
