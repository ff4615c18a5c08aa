"""
Error Types
Typed failures raised by the numerical modules; the CLI maps them to exit codes
"""
from typing import Any, Dict, Optional

VALIDATION_EXIT = 2
NUMERICAL_EXIT = 3
BUDGET_EXIT = 4


class KamlabError(Exception):
    exit_code: int = 1

    def __init__(self, detail: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(detail)
        self.detail = detail
        self.context = context or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "detail": self.detail,
            "exit_code": self.exit_code,
            "context": self.context,
        }


# --- validation (exit 2) ---

class ModelValidationError(KamlabError):
    exit_code = VALIDATION_EXIT


class SeriesValidationError(ModelValidationError):
    pass


class ConfigValidationError(ModelValidationError):
    pass


class InfeasibleCoverError(ModelValidationError):
    pass


# --- numerical failures (exit 3) ---

class NumericalError(KamlabError):
    exit_code = NUMERICAL_EXIT


class ResonanceError(NumericalError):
    def __init__(self, detail: str, witness, divisor: float = 0.0):
        super().__init__(detail, {"witness": [int(x) for x in witness], "divisor": float(divisor)})
        self.witness = tuple(int(x) for x in witness)
        self.divisor = float(divisor)


class ShiftTooLargeError(NumericalError):
    pass


class InversionError(NumericalError):
    pass


class StepTooLargeError(NumericalError):
    pass


class DivergenceError(NumericalError):
    def __init__(self, detail: str, trace=None):
        super().__init__(detail, {"trace": [r.model_dump() for r in trace or []]})
        self.trace = trace or []


class NewtonStagnationError(NumericalError):
    pass


class PrecisionError(NumericalError):
    pass


class NotRussmannDegenerateError(NumericalError):
    def __init__(self, detail: str, residual: float):
        super().__init__(detail, {"residual": float(residual)})
        self.residual = float(residual)


class ResonanceNotFoundError(NumericalError):
    pass


class NormOverflowError(NumericalError):
    pass


class IntegrationError(NumericalError):
    pass


class ConstructionError(NumericalError):
    pass


class AcceptanceFailure(NumericalError):
    pass


# --- budget (exit 4) ---

class BudgetExhaustedError(KamlabError):
    exit_code = BUDGET_EXIT
