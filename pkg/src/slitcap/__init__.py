"""slitcap: conformal module / capacity of the exterior of two rectilinear slits.

The solver represents the conformal map of an annulus onto the slit exterior
through Weierstrass sigma-functions, transports the accessory parameters of
that representation along a homotopy from an explicitly solvable symmetric
configuration, and reads the module m and capacity 1/m off the evolved state.
"""

from .errors import (
    BracketFailure,
    ConvergenceFailure,
    DefectBlowup,
    DegenerateGeometry,
    NoRootInRegion,
    NonConvergence,
    OutOfRange,
    PathBlocked,
    PoleProximity,
    QuadratureFailure,
    SingularPinch,
    SlitcapError,
    StepSizeUnderflow,
)

__all__ = [
    "BracketFailure",
    "ConvergenceFailure",
    "DefectBlowup",
    "DegenerateGeometry",
    "NoRootInRegion",
    "NonConvergence",
    "OutOfRange",
    "PathBlocked",
    "PoleProximity",
    "QuadratureFailure",
    "SingularPinch",
    "SlitcapError",
    "StepSizeUnderflow",
]

__version__ = "0.1.0"
