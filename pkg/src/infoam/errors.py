"""Exception types shared across the infoam package."""


class InfoamError(Exception):
    """Base class for all infoam errors."""


class MeasurementError(InfoamError):
    """A line-scan measurement is unusable (e.g. coil spacing at or below the rope width)."""


class OverExtrusionError(InfoamError):
    """Extruded volume exceeds the spanned volume; porosity would be negative."""


class InfeasibleTargetError(InfoamError):
    """A porosity target cannot be met within the coiling-regime bounds.

    Carries the feasible porosity interval for the conditions that were
    requested, so callers can report what *is* achievable.
    """

    def __init__(self, phi, phi_min, phi_max, detail=""):
        self.phi = phi
        self.phi_min = phi_min
        self.phi_max = phi_max
        msg = f"porosity {phi:.6g}% unreachable"
        if phi_min == phi_min and phi_max == phi_max:  # skip when unknown (nan)
            msg += f"; feasible interval is [{phi_min:.6g}%, {phi_max:.6g}%]"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class CalibrationError(InfoamError):
    """Calibration data is insufficient or degenerate for the requested fit."""


class ExtrapolationError(InfoamError):
    """A nozzle height outside the calibrated validity interval was requested."""


class PlanError(InfoamError):
    """A part specification cannot be turned into a valid toolpath plan."""


class GcodeError(InfoamError):
    """A toolpath segment cannot be emitted as G-code."""


class GcodeParseError(InfoamError):
    """Malformed G-code input; carries the 1-based line number."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class VerificationError(InfoamError):
    """Structural mismatch between a G-code file and the plan it claims to implement."""


class AnalysisError(InfoamError):
    """Experiment-record analysis failed (bad trace, level out of range, ...)."""


class SchemaError(InfoamError):
    """A JSON document has a missing or unsupported schema tag."""
