"""Exception types shared across the package."""


class QDriveError(Exception):
    """Base class for all qdrive errors."""


class GapClosedError(QDriveError):
    """The Hamiltonian is degenerate (gamma = omega = 0); eigenvectors are undefined."""


class NormalizationError(QDriveError):
    """A state vector deviates from unit norm beyond tolerance."""


class IntegrationError(QDriveError):
    """The propagator could not meet its accuracy target.

    Carries the rescaled-time region where step-size control failed.
    """

    def __init__(self, message: str, tau_lo: float | None = None, tau_hi: float | None = None):
        super().__init__(message)
        self.tau_lo = tau_lo
        self.tau_hi = tau_hi


class TargetNotReachedError(QDriveError):
    """A threshold search exhausted its range; carries the best value found."""

    def __init__(self, message: str, best_fidelity: float | None = None):
        super().__init__(message)
        self.best_fidelity = best_fidelity


class FeasibilityError(QDriveError):
    """No admissible parameter value exists inside the search bracket."""


class ConfigError(QDriveError):
    """Invalid run configuration (unknown keys, wrong parameters for a protocol)."""
