# utils/errors.py
"""
Exception hierarchy. Every error knows its numeric code and can render itself
as the machine-readable record the command layer prints on failure.
"""
from typing import Any, Dict, List, Optional, Sequence


class DualityError(Exception):
    code = 500

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> Dict[str, Any]:
        record = {
            'code': self.code,
            'error': type(self).__name__,
            'message': self.message,
        }
        for key, value in self.details.items():
            record[key] = value
        return record


class ConfigParseError(DualityError):
    code = 400

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})", line=line, column=column)
        self.line = line
        self.column = column


class ConfigValidationError(DualityError):
    code = 400

    def __init__(self, field: str, allowed: str, value: Any = None):
        super().__init__(f"Invalid value for '{field}': {value!r}, allowed {allowed}",
                         field=field, allowed=allowed)
        self.field = field
        self.allowed = allowed


class SpecValidationError(DualityError):
    code = 400

    def __init__(self, field: str, allowed: str, value: Any = None):
        super().__init__(f"Circuit field '{field}'={value!r} outside {allowed}",
                         field=field, allowed=allowed)
        self.field = field


class DomainError(DualityError):
    code = 422


class CircuitBuildError(DualityError):
    def __init__(self, message: str, condition_report: Optional[Dict[str, float]] = None):
        super().__init__(message, condition_report=condition_report or {})
        self.condition_report = condition_report or {}


class BogoliubovError(DualityError):
    pass


class CutoffSaturationError(DualityError):
    def __init__(self, message: str, cutoff: int, boundary_weight: float):
        super().__init__(message, cutoff=cutoff, boundary_weight=boundary_weight)
        self.cutoff = cutoff
        self.boundary_weight = boundary_weight


class BasisOverflowError(DualityError):
    def __init__(self, size: int, limit: int, what: str = "basis"):
        super().__init__(f"{what} size {size} exceeds configured maximum {limit}",
                         size=size, limit=limit)
        self.size = size
        self.limit = limit


class GridResolutionError(DualityError):
    pass


class EigenSolverError(DualityError):
    def __init__(self, message: str, residuals: Sequence[float] = ()):
        residuals = [float(r) for r in residuals]
        super().__init__(message, residuals=residuals)
        self.residuals: List[float] = residuals


class OracleDimensionError(DualityError):
    code = 400

    def __init__(self, size: int, limit: int):
        super().__init__(f"oracle dimension {size} exceeds maximum {limit}", size=size, limit=limit)


class ReferenceLevelError(DualityError):
    code = 422


class FitError(DualityError):
    code = 422


class DualityExtractionError(DualityError):
    code = 422


class ResultIOError(DualityError):
    code = 507

    def __init__(self, message: str, path: str):
        super().__init__(f"{message}: {path}", path=path)
        self.path = path
