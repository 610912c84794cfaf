"""
Error hierarchy
Every failure surfaced to the command line carries a machine-readable code
and the process exit status it maps to.
"""
from typing import Any, Dict, Optional


class NvRegSimError(Exception):
    """Base class for all simulator errors."""

    code = "INTERNAL_ERROR"
    exit_code = 3

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "success": False,
            "error": {
                "code": self.code,
                "message": self.message,
                "details": self.details,
            },
        }


class ConfigValidationError(NvRegSimError, ValueError):
    """Experiment config failed schema or physical-invariant validation."""

    code = "SCHEMA_VIOLATION"
    exit_code = 2


# ============================
# NUMERICAL FAILURES (exit 3)
# ============================

class NumericalError(NvRegSimError):
    code = "NUMERICAL_FAILURE"
    exit_code = 3


class AlgebraError(NumericalError, ValueError):
    code = "ALGEBRA_ERROR"


class FitError(NumericalError):
    code = "FIT_ERROR"


class GeometryError(NumericalError, ValueError):
    code = "GEOMETRY_ERROR"


class UnphysicalTransitionsError(GeometryError):
    """The ODMR pair admits no real field for the given D and E."""

    code = "UNPHYSICAL_TRANSITIONS"

    def __init__(self, message: str, radicand: float):
        super().__init__(message, {"radicand": radicand})
        self.radicand = radicand


class InconsistentGeometryError(GeometryError):
    code = "INCONSISTENT_GEOMETRY"


class LabelingAmbiguityError(NumericalError):
    code = "LABELING_AMBIGUITY"


class SequenceError(NumericalError, ValueError):
    code = "SEQUENCE_ERROR"


class CalibrationError(NumericalError):
    code = "CALIBRATION_ERROR"


class CliffordSynthesisError(NumericalError):
    code = "CLIFFORD_SYNTHESIS_ERROR"


class BenchmarkingError(NumericalError):
    code = "BENCHMARKING_ERROR"


class ChargeStatsError(NumericalError, ValueError):
    code = "CHARGE_STATS_ERROR"


class PhotophysicsError(NumericalError, ValueError):
    code = "PHOTOPHYSICS_ERROR"


class ReportError(NvRegSimError):
    code = "UNWRITABLE_PATH"
    exit_code = 3
