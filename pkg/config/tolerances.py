"""
Numerical Tolerances and Defaults
Every numeric knob of the tube toolkit lives here
"""

from dataclasses import dataclass
from typing import Tuple


@dataclass
class NumericalTolerances:
    """
    Default tolerances for quadrature, root finding and classification
    Overridable per call through QuadratureSettings / RootFindSettings
    """

    # Quadrature (adaptive Gauss-Kronrod, Simpson fallback)
    QUAD_ABS_TOL: float = 1e-10
    QUAD_REL_TOL: float = 1e-10
    QUAD_MAX_SUBDIVISIONS: int = 200
    SIMPSON_MAX_LEVEL: int = 20  # up to 2^20 + 1 nodes

    # Root finding over the energy bracket
    ROOT_TOL: float = 1e-13
    ROOT_MAX_ITER: int = 200
    SCAN_POINTS: int = 64
    MIN_SCAN_POINTS: int = 8

    # Tube acceptance and classification
    TUBE_RESIDUAL: float = 1e-9
    CLASSIFY_TOL: float = 1e-9
    SYMMETRY_TOL: float = 1e-9
    SYMMETRY_DEFECT_TOL: float = 1e-12  # relative, for 2 tau^2 - a tau kappa = 0

    # Curve sampling
    CHEBYSHEV_NODES: int = 512

    # kappa -> 0 series switch: |kappa| * x^2 below this uses the truncated series
    SERIES_SWITCH: float = 1e-8

    # Round-off clamp for f in the height integrand
    F_CLAMP: float = 1e-12

    # |kappa - 4 tau^2| below this is rejected
    EPSILON_REJECT: float = 1e-12

    # Direct (ODE) integration
    ODE_RTOL: float = 1e-11
    ODE_ATOL: float = 1e-12
    ODE_METHOD: str = "DOP853"

    # Config file schema tag
    CONFIG_SCHEMA: str = "cmc-tubes/1"

    def validate_quadrature(self, abs_tol: float, rel_tol: float, max_subdivisions: int) -> Tuple[bool, str]:
        """
        Validate quadrature settings

        Returns:
            (is_valid, status_message)
        """
        if not (abs_tol > 0 and rel_tol > 0):
            return False, f"tolerances must be positive: abs_tol={abs_tol}, rel_tol={rel_tol}"
        if max_subdivisions < 1:
            return False, f"max_subdivisions={max_subdivisions} must be at least 1"
        return True, "OK"

    def validate_root_find(self, tol: float, max_iter: int, scan_points: int) -> Tuple[bool, str]:
        """
        Validate root-finding settings

        Returns:
            (is_valid, status_message)
        """
        if not tol > 0:
            return False, f"tol={tol} must be positive"
        if max_iter < 1:
            return False, f"max_iter={max_iter} must be at least 1"
        if scan_points < self.MIN_SCAN_POINTS:
            return False, f"scan_points={scan_points} below minimum {self.MIN_SCAN_POINTS}"
        return True, "OK"

    def use_series(self, kappa: float, x):
        """True where the kappa -> 0 series replaces the closed form"""
        return abs(kappa) * x * x < self.SERIES_SWITCH


# Global instance
TOLERANCES = NumericalTolerances()
