"""Exception hierarchy for the simulator."""

from typing import Any, List, Optional


class SimulatorError(Exception):
    """Base class for every error raised by the simulator."""


class ConfigError(SimulatorError):
    """A simulation config could not be parsed or violates its invariants."""

    def __init__(self, message: str, violations: Optional[List[str]] = None) -> None:
        self.violations = list(violations or [])
        if self.violations:
            message = message + ":\n" + "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(message)


class SimulationStateError(SimulatorError):
    """An optimization step was requested on a fully assigned mask."""


class ConvergenceError(SimulatorError):
    """An optimization loop exceeded its iteration cap.

    The partially optimized state and the telemetry collected so far are
    attached so the run can be inspected.
    """

    def __init__(
        self, message: str, partial: Any = None, telemetry: Any = None
    ) -> None:
        super().__init__(message)
        self.partial = partial
        self.telemetry = telemetry


class FormatError(SimulatorError):
    """A file could not be encoded or decoded in the documented format."""


class CohortError(SimulatorError):
    """Generation failed for one seed of a cohort."""

    def __init__(self, seed: int, cause: Exception) -> None:
        super().__init__(f"seed {seed}: {type(cause).__name__}: {cause}")
        self.seed = seed
        self.cause = cause
