"""Exception hierarchy shared by all slitcap modules.

Every failure mode of the numerical pipeline maps to one of these classes so
callers (and the CLI) can tell geometry rejections apart from solver
breakdowns.
"""


class SlitcapError(Exception):
    """Base class for all slitcap errors."""


class OutOfRange(SlitcapError, ValueError):
    """An input parameter lies outside the supported range."""


class ConvergenceFailure(SlitcapError, RuntimeError):
    """A series or iteration did not reach the requested tolerance."""


class PoleProximity(SlitcapError, ValueError):
    """Evaluation point too close to a pole / lattice point."""


class NoRootInRegion(SlitcapError, RuntimeError):
    """Root search found no admissible root; carries the best residual seen."""

    def __init__(self, message: str, best_residual: float = float("nan")):
        super().__init__(message)
        self.best_residual = best_residual


class DegenerateGeometry(SlitcapError, ValueError):
    """Slit configuration is degenerate (collinear, touching, zero length...)."""


class BracketFailure(SlitcapError, RuntimeError):
    """Bisection bracket does not enclose the target value."""


class SingularPinch(SlitcapError, RuntimeError):
    """The evolution hit a singular configuration (parameters collide)."""


class StepSizeUnderflow(SlitcapError, RuntimeError):
    """Adaptive step size fell below the hard floor; carries last good state."""

    def __init__(self, message: str, last_state=None, trajectory=None):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory


class DefectBlowup(SlitcapError, RuntimeError):
    """Monitored first-integral defects exceeded the abort threshold."""


class QuadratureFailure(SlitcapError, RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance."""


class PathBlocked(SlitcapError, RuntimeError):
    """No admissible integration path avoiding the poles was found."""


class NonConvergence(SlitcapError, RuntimeError):
    """Iterative linear solve failed to reach the requested residual."""
