"""
Exception hierarchy for the tube toolkit

Precondition failures subclass ValueError, numerical failures subclass
RuntimeError, so callers that only know the builtins still catch them.
"""

from typing import Dict, Type


class TubeToolkitError(Exception):
    """Base class for every toolkit error"""


class PreconditionError(TubeToolkitError, ValueError):
    """Input outside the domain an operation is defined on"""


class DomainError(PreconditionError):
    """Argument outside the natural domain of a function"""


class NoGeodesicOrbit(PreconditionError):
    """Pitch whose screw-motion group has no geodesic orbit"""


class NotDefined(PreconditionError):
    """Quantity only defined for kappa > 0"""


class OutOfRegion(PreconditionError):
    """Moduli point outside the supercritical region"""


class OutOfScope(PreconditionError):
    """Moduli point in the unduloid region (J > 0)"""


class NotApplicable(PreconditionError):
    """Operation does not apply to these parameters"""


class NotClosing(PreconditionError):
    """Pitch does not close the Berger fibers"""


class NumericalError(TubeToolkitError, RuntimeError):
    """A numerical procedure failed"""


class QuadratureError(NumericalError):
    """Quadrature did not reach the requested tolerance"""


class IntegrationError(NumericalError):
    """ODE integrator failed (step-size underflow)"""


class NoTube(NumericalError):
    """No sign change of the closing defect in the energy bracket"""


class GeometryError(NumericalError):
    """A geometric assumption (monotone branch, graph property) is violated"""


class ExportError(TubeToolkitError, OSError):
    """Writing a mesh or table failed; the message names the path"""


EXIT_OK = 0
EXIT_PRECONDITION = 1
EXIT_NUMERICAL = 2
EXIT_USAGE = 64

_EXIT_CODES: Dict[Type[TubeToolkitError], int] = {
    PreconditionError: EXIT_PRECONDITION,
    NumericalError: EXIT_NUMERICAL,
}


def exit_code_for(exc: BaseException) -> int:
    """Map an exception to the CLI exit code"""
    for cls, code in _EXIT_CODES.items():
        if isinstance(exc, cls):
            return code
    return EXIT_NUMERICAL
