"""Exception hierarchy shared by all modules."""


class ArtifactError(Exception):
    """Base class for every error raised by this package."""


class DomainError(ArtifactError, ValueError):
    """State outside the admissible set (rho <= 0 or theta <= 0, zero direction)."""


class AssumptionViolation(ArtifactError):
    """A closure violates the positivity assumptions on p, p_rho, p_theta, e_theta, kappa."""


class NumericalError(ArtifactError):
    pass


class ConvergenceError(NumericalError):
    pass


class ProfileMismatch(NumericalError):
    """Eigenvalue clustering did not give the multiplicity profile {4,1,1,1,1}."""


class NotDiagonalizable(NumericalError):
    pass


class CascadeBroken(ArtifactError):
    """A pivot of the forced-zero cascade vanished (some heat-flux component is zero)."""


class DegenerateDirection(ArtifactError):
    """The direction left the neighbourhood where the witness branch is defined."""


class ConfigError(ArtifactError, ValueError):
    pass
