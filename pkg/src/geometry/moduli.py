"""
Moduli Space of Screw-Motion CMC Surfaces
Classification of (H, J), tube energies, boundary points and tube families

For fixed pitch a the tube region is the zero set of the closing defect
delta_a(H, J) inside the supercritical region Xi. Tube energies are found by
scanning delta_a over the energy bracket [J-, J+] and refining every sign
change with Brent's method.
"""

import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.optimize import brentq

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from tolerances import TOLERANCES
from errors import (
    DomainError,
    NoGeodesicOrbit,
    NoTube,
    NotApplicable,
    NotDefined,
    OutOfRegion,
    OutOfScope,
    TubeToolkitError,
)
from space_core import (
    AmbientSpace,
    ArrayLike,
    Pitch,
    conjugate_pitch,
    critical_curvature,
    energy_bracket,
    existence_bound,
    has_geodesic_orbit,
    is_admissible,
    is_conjugate_admissible,
    is_symmetric_pitch,
    scalar_or_array,
)
from profile_curve import (
    ModuliPoint,
    ProfileCurve,
    QuadratureSettings,
    boundary_residual,
    closing_defect,
    h_max,
    height_coefficients,
    radius_bounds,
    require_xi,
    sample_profile,
)

logger = logging.getLogger(__name__)


class SurfaceClass(str, Enum):
    SPHERE_TYPE = "SphereType"
    HELICOID = "Helicoid"
    NODOID_I = "NodoidI"
    TUBE = "Tube"
    NODOID_II = "NodoidII"


class ModuliRegion(str, Enum):
    """Position of J relative to the energy bracket at fixed H"""
    PLUS = "plus"
    ZERO = "zero"
    MINUS = "minus"


@dataclass(frozen=True)
class RootFindSettings:
    """Bracket scan and refinement settings (defaults from TOLERANCES)"""
    tol: float = TOLERANCES.ROOT_TOL
    max_iter: int = TOLERANCES.ROOT_MAX_ITER
    scan_points: int = TOLERANCES.SCAN_POINTS

    def __post_init__(self):
        is_valid, message = TOLERANCES.validate_root_find(self.tol, self.max_iter, self.scan_points)
        if not is_valid:
            raise DomainError(f"invalid root-find settings: {message}")


@dataclass(frozen=True, eq=False)
class TubeSolution:
    """
    A tube (H, J_tube) for pitch a, with the scan that produced it

    multiplicity_report lists every sign-change bracket found in the energy
    bracket; roots holds the refined energy of each. The profile curve is
    sampled lazily.
    """
    space: AmbientSpace
    pitch: Pitch
    point: ModuliPoint
    residual: float
    bracket: Tuple[float, float]
    multiplicity_report: Tuple[Tuple[float, float], ...]
    roots: Tuple[float, ...]
    r_minus: float
    r_plus: float
    h_max: float
    quadrature: QuadratureSettings = field(default_factory=QuadratureSettings)

    @property
    def H(self) -> float:
        return self.point.H

    @property
    def J(self) -> float:
        return self.point.J

    @cached_property
    def curve(self) -> ProfileCurve:
        return sample_profile(self.space, self.pitch, self.point, settings=self.quadrature)

    def to_record(self) -> Dict:
        return {
            'kappa': self.space.kappa,
            'tau': self.space.tau,
            'a': self.pitch.a,
            'H': self.point.H,
            'J_tube': self.point.J,
            'residual': self.residual,
            'bracket': list(self.bracket),
            'roots': list(self.roots),
            'r_minus': self.r_minus,
            'r_plus': self.r_plus,
            'h_max': self.h_max,
        }


# ===== Pitch and region checks =====

def require_tube_pitch(space: AmbientSpace, pitch: Pitch) -> None:
    """Admissible, or (kappa > 0) conjugate to an admissible pitch"""
    if not has_geodesic_orbit(space, pitch):
        raise NoGeodesicOrbit(
            f"a={pitch.a} has no geodesic orbit in {space.label()} "
            f"(a tau eps={pitch.a * space.tau * space.epsilon:.6g})"
        )


def _require_supercritical(space: AmbientSpace, H: float) -> None:
    if not (H > critical_curvature(space) and H > 0):
        raise OutOfRegion(f"H={H:.6g} not above H_crit={critical_curvature(space):.6g} in {space.label()}")


def moduli_region(space: AmbientSpace, pitch: Pitch, point: ModuliPoint) -> ModuliRegion:
    """
    Xi_a^+ (J above the bracket), Xi_a^0 (inside), Xi_a^- (below)

    For conjugate-admissible pitches the bracket is taken sorted.
    """
    require_xi(space, point)
    lo, hi = energy_bracket(space, pitch, point.H)
    if point.J > hi:
        return ModuliRegion.PLUS
    if point.J < lo:
        return ModuliRegion.MINUS
    return ModuliRegion.ZERO


def conjugate_energy(space: AmbientSpace, H: float, J: float) -> float:
    """Energy -J - 4H/kappa of the congruent surface for the conjugate pitch"""
    if space.kappa <= 0:
        raise NotDefined(f"conjugate energy requires kappa > 0, got kappa={space.kappa}")
    return -J - 4.0 * H / space.kappa


# ===== Classification =====

def classify(
    space: AmbientSpace,
    pitch: Pitch,
    point: ModuliPoint,
    tol: Optional[float] = None,
    settings: Optional[QuadratureSettings] = None,
) -> SurfaceClass:
    """
    Classify a point of the closure of Xi

    Boundary (J = 0, or J = -4H/kappa for kappa > 0): SphereType for H > 0,
    Helicoid for H = 0 and kappa > 0. Interior: by the sign of delta_a.

    Raises:
        OutOfScope: J > 0 (unduloid region)
        OutOfRegion: subcritical or below the lower boundary
    """
    tol = TOLERANCES.CLASSIFY_TOL if tol is None else tol
    H, J = point.H, point.J
    if J > 0:
        raise OutOfScope(f"J={J:.6g} > 0 lies in the unduloid region")

    on_lower_boundary = space.kappa > 0 and np.isclose(J, -4.0 * H / space.kappa, rtol=1e-14, atol=0.0)
    if J == 0.0 or on_lower_boundary:
        if H > critical_curvature(space) and H > 0:
            return SurfaceClass.SPHERE_TYPE
        if H == 0.0 and space.kappa > 0:
            return SurfaceClass.HELICOID
        raise OutOfRegion(f"boundary point (H={H:.6g}, J={J:.6g}) is not supercritical in {space.label()}")

    require_xi(space, point)
    delta = closing_defect(space, pitch, point, settings)
    if delta > tol:
        return SurfaceClass.NODOID_I
    if delta < -tol:
        return SurfaceClass.NODOID_II
    return SurfaceClass.TUBE


# ===== Tube energies =====

def _sign_change_brackets(grid: np.ndarray, values: np.ndarray) -> List[Tuple[float, float]]:
    brackets = []
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            brackets.append((grid[i], grid[i]))
        elif values[i] * values[i + 1] < 0:
            brackets.append((grid[i], grid[i + 1]))
    if values[-1] == 0.0:
        brackets.append((grid[-1], grid[-1]))
    return brackets


def _scan_interval(space: AmbientSpace, pitch: Pitch, H: float) -> Tuple[float, float]:
    """Energy bracket clipped to the open J-range of Xi"""
    lo, hi = energy_bracket(space, pitch, H)
    margin = 1e-12 * max(1.0, abs(lo), abs(hi))
    if hi >= 0:
        hi = -margin
    if space.kappa > 0:
        lo = max(lo, -4.0 * H / space.kappa + margin)
    return lo, hi


def _refine(func, lo: float, hi: float, settings: RootFindSettings) -> float:
    if lo == hi:
        return lo
    return brentq(func, lo, hi, xtol=settings.tol, maxiter=settings.max_iter)


def tube_energy(
    space: AmbientSpace,
    pitch: Pitch,
    H: float,
    settings: Optional[RootFindSettings] = None,
    quadrature: Optional[QuadratureSettings] = None,
) -> TubeSolution:
    """
    Solve delta_a(H, J) = 0 for J in the energy bracket

    Args:
        space: Ambient space
        pitch: Admissible or conjugate-admissible pitch
        H: Mean curvature above H_crit
        settings: Scan resolution and Brent tolerance
        quadrature: Tolerances of the closing-defect quadrature

    Returns:
        TubeSolution at the root nearest the bracket midpoint

    Raises:
        NoGeodesicOrbit: pitch has no geodesic orbit
        OutOfRegion: H not supercritical
        NoTube: no sign change of delta_a in the bracket
    """
    settings = settings or RootFindSettings()
    quadrature = quadrature or QuadratureSettings()
    require_tube_pitch(space, pitch)
    _require_supercritical(space, H)
    H = float(H)

    if is_symmetric_pitch(space, pitch):
        # J = -2H/kappa; delta vanishes there by the order-4 symmetry
        J = -2.0 * H / space.kappa
        point = ModuliPoint(H, J)
        r_minus, r_plus = radius_bounds(space, point)
        return TubeSolution(
            space=space,
            pitch=pitch,
            point=point,
            residual=0.0,
            bracket=(J, J),
            multiplicity_report=((J, J),),
            roots=(J,),
            r_minus=r_minus,
            r_plus=r_plus,
            h_max=h_max(space, pitch, point, quadrature),
            quadrature=quadrature,
        )

    bracket = energy_bracket(space, pitch, H)
    lo, hi = _scan_interval(space, pitch, H)
    if not lo < hi:
        raise NoTube(
            f"empty energy bracket [{bracket[0]:.6g}, {bracket[1]:.6g}] inside Xi "
            f"for a={pitch.a} H={H:.6g} in {space.label()}"
        )

    def defect(J: float) -> float:
        return closing_defect(space, pitch, ModuliPoint(H, J), quadrature)

    grid = np.linspace(lo, hi, settings.scan_points)
    values = np.array([defect(J) for J in grid])
    brackets = _sign_change_brackets(grid, values)
    logger.debug("scan a=%.6g H=%.6g over [%.6g, %.6g]: %d sign change(s)",
                 pitch.a, H, lo, hi, len(brackets))
    if not brackets:
        raise NoTube(
            f"no sign change of the closing defect for a={pitch.a} H={H:.6g} in {space.label()} "
            f"(J in [{lo:.6g}, {hi:.6g}], delta in [{values.min():.3g}, {values.max():.3g}])"
        )
    if len(brackets) > 1:
        logger.warning("%d tube energies for a=%.6g H=%.6g in %s", len(brackets), pitch.a, H, space.label())

    roots = [_refine(defect, b_lo, b_hi, settings) for b_lo, b_hi in brackets]
    middle = 0.5 * (bracket[0] + bracket[1])
    J = min(roots, key=lambda root: abs(root - middle))
    residual = abs(defect(J))
    if residual > TOLERANCES.TUBE_RESIDUAL:
        raise NoTube(f"refined root J={J:.12g} leaves residual {residual:.3g} (a={pitch.a}, H={H:.6g})")

    point = ModuliPoint(H, J)
    r_minus, r_plus = radius_bounds(space, point)
    return TubeSolution(
        space=space,
        pitch=pitch,
        point=point,
        residual=residual,
        bracket=bracket,
        multiplicity_report=tuple((float(b_lo), float(b_hi)) for b_lo, b_hi in brackets),
        roots=tuple(float(root) for root in roots),
        r_minus=r_minus,
        r_plus=r_plus,
        h_max=h_max(space, pitch, point, quadrature),
        quadrature=quadrature,
    )


def defect_sign_changes(
    space: AmbientSpace,
    pitch: Pitch,
    H: float,
    scan_points: int = TOLERANCES.SCAN_POINTS,
    quadrature: Optional[QuadratureSettings] = None,
) -> int:
    """Number of sign changes of J -> delta_a(H, J) on an open scan of the bracket"""
    require_tube_pitch(space, pitch)
    lo, hi = _scan_interval(space, pitch, H)
    grid = np.linspace(lo, hi, scan_points + 2)[1:-1]
    values = np.array([closing_defect(space, pitch, ModuliPoint(H, J), quadrature) for J in grid])
    return len(_sign_change_brackets(grid, values))


# ===== Boundary points =====

def boundary_H0(
    space: AmbientSpace,
    pitch: Pitch,
    settings: Optional[RootFindSettings] = None,
    quadrature: Optional[QuadratureSettings] = None,
) -> List[float]:
    """
    All zeros of the boundary residual l_a(H) in (H_crit, E_a)

    H_0 is invariant under congruence, so a conjugate-admissible pitch is
    solved through its conjugate.

    Raises:
        NotApplicable: 2 tau^2 - a tau kappa = 0 (then H_0 = 0)
        NoGeodesicOrbit: pitch has no geodesic orbit
        NoTube: no zero found
    """
    settings = settings or RootFindSettings()
    require_tube_pitch(space, pitch)
    if is_symmetric_pitch(space, pitch):
        raise NotApplicable(f"H_0 = 0 for the symmetric pitch a={pitch.a} in {space.label()}")
    if not is_admissible(space, pitch) and is_conjugate_admissible(space, pitch):
        return boundary_H0(space, conjugate_pitch(space, pitch), settings, quadrature)

    h_crit = critical_curvature(space)
    e_a = existence_bound(space, pitch)
    width = e_a - h_crit
    offsets = np.unique(np.concatenate([
        width * np.logspace(-9, 0, settings.scan_points),
        width * np.linspace(0.0, 1.0, settings.scan_points + 1)[1:],
    ]))
    grid = h_crit + offsets

    def residual(H: float) -> float:
        return boundary_residual(space, pitch, H, quadrature)

    values = np.array([residual(H) for H in grid])
    brackets = _sign_change_brackets(grid, values)
    if not brackets:
        raise NoTube(
            f"no zero of the boundary residual in ({h_crit:.6g}, {e_a:.6g}] for a={pitch.a} in {space.label()}"
        )
    roots = sorted(float(_refine(residual, lo, hi, settings)) for lo, hi in brackets)
    if len(roots) > 1:
        logger.warning("%d boundary points for a=%.6g in %s: %s", len(roots), pitch.a, space.label(), roots)
    logger.debug("H_0(a=%.6g) in %s: %s (E_a=%.6g)", pitch.a, space.label(), roots, e_a)
    return roots


# ===== Tube families =====

@dataclass(frozen=True, eq=False)
class FamilyEntry:
    """One H of a family scan; solution is None unless status == 'ok'"""
    H: float
    status: str
    solution: Optional[TubeSolution] = None
    error: str = ""


@dataclass(frozen=True, eq=False)
class TubeFamily:
    space: AmbientSpace
    pitch: Pitch
    entries: Tuple[FamilyEntry, ...]

    @property
    def solutions(self) -> List[TubeSolution]:
        return [entry.solution for entry in self.entries if entry.status == "ok"]

    @property
    def gaps(self) -> List[float]:
        """H values without a tube"""
        return [entry.H for entry in self.entries if entry.status != "ok"]

    @property
    def monotonicity(self) -> str:
        """
        Observed monotonicity of H -> J_tube over the solved entries

        One of 'increasing', 'decreasing', 'constant', 'non-monotone', 'insufficient'.
        Reported only; monotonicity is not assumed anywhere.
        """
        solved = sorted(self.solutions, key=lambda s: s.H)
        if len(solved) < 2:
            return "insufficient"
        steps = np.diff([s.J for s in solved])
        scale = TOLERANCES.TUBE_RESIDUAL * max(1.0, max(abs(s.J) for s in solved))
        if np.all(np.abs(steps) <= scale):
            return "constant"
        if np.all(steps < scale):
            return "decreasing"
        if np.all(steps > -scale):
            return "increasing"
        return "non-monotone"

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for entry in self.entries:
            solution = entry.solution
            rows.append({
                'H': entry.H,
                'J_tube': solution.J if solution else np.nan,
                'residual': solution.residual if solution else np.nan,
                'r_minus': solution.r_minus if solution else np.nan,
                'r_plus': solution.r_plus if solution else np.nan,
                'h_max': solution.h_max if solution else np.nan,
                'class': SurfaceClass.TUBE.value if solution else "",
                'roots_found': len(solution.roots) if solution else 0,
                'status': entry.status,
                'error': entry.error,
            })
        return pd.DataFrame(rows, columns=[
            'H', 'J_tube', 'residual', 'r_minus', 'r_plus', 'h_max', 'class', 'roots_found', 'status', 'error',
        ])


def _family_entry(space, pitch, H, settings, quadrature) -> FamilyEntry:
    try:
        return FamilyEntry(H=float(H), status="ok", solution=tube_energy(space, pitch, H, settings, quadrature))
    except NoTube as exc:
        logger.warning("no tube at H=%.6g: %s", H, exc)
        return FamilyEntry(H=float(H), status="no_tube", error=str(exc))
    except TubeToolkitError as exc:
        logger.warning("tube solve failed at H=%.6g: %s", H, exc)
        return FamilyEntry(H=float(H), status="error", error=str(exc))


def tube_family(
    space: AmbientSpace,
    pitch: Pitch,
    H_grid: Sequence[float],
    settings: Optional[RootFindSettings] = None,
    quadrature: Optional[QuadratureSettings] = None,
    n_jobs: int = 1,
) -> TubeFamily:
    """
    Tube energies over an H-grid, failures recorded per entry

    Args:
        n_jobs: joblib thread count; entries keep grid order

    Raises:
        NoGeodesicOrbit: pitch has no geodesic orbit
    """
    require_tube_pitch(space, pitch)
    entries = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_family_entry)(space, pitch, H, settings, quadrature) for H in H_grid
    )
    family = TubeFamily(space=space, pitch=pitch, entries=tuple(entries))
    logger.info("✓ tube family a=%.6g in %s: %d/%d solved, J_tube %s",
                pitch.a, space.label(), len(family.solutions), len(family.entries), family.monotonicity)
    return family


# ===== Heisenberg uniqueness =====

def nil_cubic_coefficients(space: AmbientSpace, pitch: Pitch) -> Tuple[float, float, float, float]:
    """
    (alpha, beta, gamma, delta) of the cubic in y = H^2

    D2(a, H, J+(H)) = 8/(tau^2 H) (alpha y^3 + beta y^2 + gamma y + delta)
    """
    if space.kappa != 0:
        raise NotApplicable(f"the uniqueness cubic is only defined for kappa=0, got {space.label()}")
    a, t = pitch.a, space.tau
    return (
        2.0 * (1.0 - 6.0 * a * t + 8.0 * a * a * t * t),
        t * t * (3.0 - 12.0 * a * t),
        2.0 * t ** 4 * (1.0 - 2.0 * a * t),
        t ** 6,
    )


def nil_uniqueness_bound(space: AmbientSpace, pitch: Pitch) -> float:
    """
    H_a^Nil = max(E_a, sqrt(y*)), y* the largest positive root of the cubic

    Above this bound the closing defect is strictly monotone in J, so each H
    carries exactly one tube.

    Raises:
        NotApplicable: kappa != 0
        NoGeodesicOrbit: pitch not admissible
    """
    coefficients = nil_cubic_coefficients(space, pitch)
    if not is_admissible(space, pitch):
        raise NoGeodesicOrbit(f"a={pitch.a} is not admissible in {space.label()}")
    e_a = existence_bound(space, pitch)
    roots = np.roots(coefficients)
    scale = max(1.0, np.max(np.abs(roots))) if roots.size else 1.0
    positive = [root.real for root in roots if abs(root.imag) <= 1e-9 * scale and root.real > 0]
    if not positive:
        return e_a
    return float(max(e_a, np.sqrt(max(positive))))


def height_J_derivative(space: AmbientSpace, pitch: Pitch, point: ModuliPoint, sigma) -> float:
    """
    d/dJ of dh/dsigma = g sin(sigma) / ((sin^2 - kappa J^2 - 4HJ)^(3/2) sqrt(f))

    g = B1 s^2 + B2 + B3 s sqrt(s^2 - kappa J^2 - 4HJ)
    """
    require_xi(space, point)
    s = np.sin(np.asarray(sigma, dtype=float))
    q = s * s - space.kappa * point.J ** 2 - 4.0 * point.H * point.J
    numerator = height_J_numerator(space, pitch, point, s, q)
    value = numerator * s / (q ** 1.5 * np.sqrt(height_radicand(space, pitch, point, s, q)))
    return scalar_or_array(value)


def _b_coefficients(space: AmbientSpace, pitch: Pitch, point: ModuliPoint) -> Tuple[float, float, float]:
    k, t, a = space.kappa, space.tau, pitch.a
    H, J = point.H, point.J
    b1 = 2.0 * H * (1.0 + a * a * k - 2.0 * a * t) + J * (k + 4.0 * t * t + a * a * k * k - 4.0 * a * k * t)
    b2 = 4.0 * H * (2.0 * a * H + a * k * J - 2.0 * t * J) * (a * H + t * J)
    b3 = 2.0 * H * (1.0 - 2.0 * a * t) - 2.0 * t * J * (a * k - 2.0 * t)
    return b1, b2, b3


def height_radicand(space: AmbientSpace, pitch: Pitch, point: ModuliPoint, s: ArrayLike, q: ArrayLike) -> ArrayLike:
    """f = C1 s^4 + C2 s^2 + C3 + (C4 s^2 + C5) s sqrt(q), with s = sin(sigma) of either sign"""
    c1, c2, c3, c4, c5 = height_coefficients(space, pitch, point)
    s2 = s * s
    return c1 * s2 * s2 + c2 * s2 + c3 + (c4 * s2 + c5) * np.sqrt(q) * s


def height_J_numerator(space: AmbientSpace, pitch: Pitch, point: ModuliPoint, s: ArrayLike, q: ArrayLike) -> ArrayLike:
    """g = B1 s^2 + B2 + B3 s sqrt(q), the numerator of d/dJ of dh/dsigma"""
    b1, b2, b3 = _b_coefficients(space, pitch, point)
    return b1 * s * s + b2 + b3 * np.sqrt(q) * s


def psi_coefficients(space: AmbientSpace, pitch: Pitch, point: ModuliPoint) -> Tuple[float, float, float]:
    """
    (D_a, D_b, D_c) with g(-s) f(s) - g(s) f(-s) = 2 s sqrt(Q) (D_a x^2 + D_b x + D_c), x = s^2
    """
    c1, c2, c3, c4, c5 = height_coefficients(space, pitch, point)
    b1, b2, b3 = _b_coefficients(space, pitch, point)
    return (
        b1 * c4 - b3 * c1,
        b1 * c5 + b2 * c4 - b3 * c2,
        b2 * c5 - b3 * c3,
    )


@dataclass(frozen=True)
class NilCertificate:
    """
    psi(x) = D1 x + D2 on (0, 1) and the pairwise J-derivative margin

    pairwise_sign is +1 (-1) when d/dJ of dh/dsigma at sin = s outweighs
    (is outweighed by) its reflection at sin = -s for every sampled s, which
    fixes the sign of d delta_a / dJ; 0 when the margin changes sign.
    """
    D1: float
    D2: float
    psi_min: float
    positive: bool
    pairwise_sign: int


def nil_certificate(space: AmbientSpace, pitch: Pitch, H: float, J: float, samples: int = 256) -> NilCertificate:
    """
    Uniqueness certificate at (H, J) in Nil_3

    Raises:
        NotApplicable: kappa != 0
    """
    if space.kappa != 0:
        raise NotApplicable(f"the uniqueness certificate is only defined for kappa=0, got {space.label()}")
    a, t = pitch.a, space.tau
    d1 = 32.0 * t * t * H * H * (2.0 * a * a * H - J * (2.0 * a * t - 1.0))
    d2 = 32.0 * H * H * (
        2.0 * t ** 4 * J ** 3
        + t * t * H * J * J * (2.0 * a * t - 1.0)
        + H * H * J * (1.0 - 4.0 * a * t - 2.0 * a * a * t * t)
        - a * a * H ** 3 * (2.0 * a * t - 1.0)
    )
    psi_min = min(d2, d1 + d2)

    pairwise_sign = 0
    point = ModuliPoint(H, J)
    if H > 0 and J < 0:
        s = np.linspace(0.0, 1.0, samples + 2)[1:-1]
        q = s * s - 4.0 * H * J
        upper, lower = (
            height_J_numerator(space, pitch, point, sign * s, q)
            / np.sqrt(np.maximum(height_radicand(space, pitch, point, sign * s, q), 0.0))
            for sign in (1.0, -1.0)
        )
        margin = upper - lower
        if np.all(margin > 0):
            pairwise_sign = 1
        elif np.all(margin < 0):
            pairwise_sign = -1

    return NilCertificate(D1=float(d1), D2=float(d2), psi_min=float(psi_min),
                          positive=bool(psi_min > 0), pairwise_sign=pairwise_sign)

