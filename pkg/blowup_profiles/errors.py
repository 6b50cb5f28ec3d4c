from __future__ import annotations

from typing import Any, Dict, List, Optional


class BlowupError(Exception):
    """Root of every error raised by blowup_profiles."""


class DomainError(BlowupError, ValueError):
    """Parameters or problem combination outside the admissible domain."""


class ConvergenceError(BlowupError):
    def __init__(self, message: str, solution: Any = None, diagnostics: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.solution = solution
        self.diagnostics = dict(diagnostics or {})


class NewtonFailure(ConvergenceError):
    pass


class MeshOverflow(ConvergenceError):
    pass


class IntegrationError(BlowupError):
    def __init__(self, message: str, trajectory: Any = None):
        super().__init__(message)
        self.trajectory = trajectory


class NoPeriodicOrbit(IntegrationError):
    """Poincare iteration ended without a periodic orbit.

    reason is one of ``converged_to_equilibrium``, ``no_crossings`` or
    ``not_converged``; ``distances`` holds the successive return distances.
    """

    def __init__(self, message: str, reason: str, distances: Optional[List[float]] = None,
                 state: Any = None, trajectory: Any = None):
        super().__init__(message, trajectory)
        self.reason = reason
        self.distances = list(distances or [])
        self.state = state


class QuadratureError(BlowupError):
    pass


class RescaleError(BlowupError):
    pass


class ArchiveError(BlowupError):
    pass


class SchemaMismatch(ArchiveError):
    pass
