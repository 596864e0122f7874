"""
Ambient Space E(kappa, tau)
Model metric, kappa-trigonometry and screw-motion pitch arithmetic

Coordinates (r, theta, z) with metric
    dr^2 + sn(r)^2 dtheta^2 + (4 tau sn(r/2)^2 dtheta - dz)^2
"""

import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from tolerances import TOLERANCES
from errors import DomainError, NoGeodesicOrbit, NotDefined

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def scalar_or_array(value) -> ArrayLike:
    """Return a Python float for 0-d results, the array otherwise"""
    if np.ndim(value) == 0:
        return float(value)
    return value


def _series_mask(kappa: float, x: np.ndarray) -> np.ndarray:
    return TOLERANCES.use_series(kappa, x)


# ===== kappa-trigonometry =====

def sn(kappa: float, x: ArrayLike) -> ArrayLike:
    """sin(sqrt(k) x)/sqrt(k), x, sinh(sqrt(-k) x)/sqrt(-k) for k >, =, < 0"""
    x = np.asarray(x, dtype=float)
    if kappa == 0.0:
        return scalar_or_array(x.copy())
    root = np.sqrt(abs(kappa))
    with np.errstate(over='ignore'):
        exact = np.sin(root * x) / root if kappa > 0 else np.sinh(root * x) / root
    series = x * (1.0 - kappa * x * x / 6.0 + kappa * kappa * x ** 4 / 120.0)
    return scalar_or_array(np.where(_series_mask(kappa, x), series, exact))


def cs(kappa: float, x: ArrayLike) -> ArrayLike:
    """Derivative of sn: cos, 1, cosh"""
    x = np.asarray(x, dtype=float)
    if kappa == 0.0:
        return scalar_or_array(np.ones_like(x))
    root = np.sqrt(abs(kappa))
    with np.errstate(over='ignore'):
        exact = np.cos(root * x) if kappa > 0 else np.cosh(root * x)
    series = 1.0 - kappa * x * x / 2.0 + kappa * kappa * x ** 4 / 24.0
    return scalar_or_array(np.where(_series_mask(kappa, x), series, exact))


def tn(kappa: float, x: ArrayLike) -> ArrayLike:
    denominator = np.asarray(cs(kappa, x))
    if np.any(denominator == 0.0):
        raise DomainError(f"tn undefined where cs vanishes (kappa={kappa})")
    return scalar_or_array(np.asarray(sn(kappa, x)) / denominator)


def ct(kappa: float, x: ArrayLike) -> ArrayLike:
    denominator = np.asarray(sn(kappa, x))
    if np.any(denominator == 0.0):
        raise DomainError(f"ct undefined where sn vanishes (kappa={kappa})")
    return scalar_or_array(np.asarray(cs(kappa, x)) / denominator)


def arcs(kappa: float, y: ArrayLike) -> ArrayLike:
    """
    Inverse of cs on [0, pi/sqrt(k)] (k > 0) or [0, inf) (k < 0)

    Raises:
        DomainError: kappa = 0 (cs is constant) or y outside the range of cs
    """
    y = np.asarray(y, dtype=float)
    if kappa == 0.0:
        raise DomainError("arcs undefined for kappa=0 (cs is identically 1)")
    root = np.sqrt(abs(kappa))
    slack = 1e-12
    if kappa > 0:
        if np.any(np.abs(y) > 1.0 + slack):
            raise DomainError(f"arcs argument outside [-1, 1] for kappa={kappa}: {y}")
        return scalar_or_array(np.arccos(np.clip(y, -1.0, 1.0)) / root)
    if np.any(y < 1.0 - slack):
        raise DomainError(f"arcs argument below 1 for kappa={kappa}: {y}")
    return scalar_or_array(np.arccosh(np.maximum(y, 1.0)) / root)


def arct(kappa: float, y: ArrayLike) -> ArrayLike:
    """Inverse of tn with values in (-pi/(2 sqrt k), pi/(2 sqrt k)) for k > 0, R otherwise"""
    y = np.asarray(y, dtype=float)
    if kappa == 0.0:
        return scalar_or_array(y.copy())
    root = np.sqrt(abs(kappa))
    series = y * (1.0 - kappa * y * y / 3.0)
    if kappa > 0:
        exact = np.arctan(root * y) / root
    else:
        if np.any(np.abs(root * y) >= 1.0):
            raise DomainError(f"arct argument outside (-1/sqrt(-k), 1/sqrt(-k)) for kappa={kappa}: {y}")
        exact = np.arctanh(root * y) / root
    return scalar_or_array(np.where(_series_mask(kappa, y), series, exact))


def arcsn(kappa: float, y: ArrayLike) -> ArrayLike:
    """Inverse of sn on its principal monotone branch"""
    y = np.asarray(y, dtype=float)
    if kappa == 0.0:
        return scalar_or_array(y.copy())
    root = np.sqrt(abs(kappa))
    series = y * (1.0 + kappa * y * y / 6.0)
    if kappa > 0:
        scaled = root * y
        if np.any(np.abs(scaled) > 1.0 + 1e-12):
            raise DomainError(f"arcsn argument outside [-1/sqrt(k), 1/sqrt(k)] for kappa={kappa}: {y}")
        exact = np.arcsin(np.clip(scaled, -1.0, 1.0)) / root
    else:
        exact = np.arcsinh(root * y) / root
    return scalar_or_array(np.where(_series_mask(kappa, y), series, exact))


def sn_half_squared(kappa: float, r: ArrayLike) -> ArrayLike:
    """sn(r/2)^2 = (1 - cs(r)) / (2 kappa), continuous through kappa = 0"""
    half = np.asarray(sn(kappa, np.asarray(r, dtype=float) / 2.0))
    return scalar_or_array(half * half)


class TrigKind(str, Enum):
    SN = "sn"
    CS = "cs"
    TN = "tn"
    CT = "ct"
    ARCS = "arcs"
    ARCT = "arct"
    ARCSN = "arcsn"


_TRIG_FUNCTIONS = {
    TrigKind.SN: sn,
    TrigKind.CS: cs,
    TrigKind.TN: tn,
    TrigKind.CT: ct,
    TrigKind.ARCS: arcs,
    TrigKind.ARCT: arct,
    TrigKind.ARCSN: arcsn,
}


# ===== Domain types =====

@dataclass(frozen=True)
class AmbientSpace:
    """The homogeneous space E(kappa, tau); epsilon = sgn(kappa - 4 tau^2)"""
    kappa: float
    tau: float
    epsilon: int = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.kappa) and np.isfinite(self.tau)):
            raise DomainError(f"non-finite space parameters kappa={self.kappa}, tau={self.tau}")
        if self.tau < 0:
            raise DomainError(f"tau={self.tau} must be >= 0 (orientation normalization)")
        gap = self.kappa - 4.0 * self.tau ** 2
        if abs(gap) < TOLERANCES.EPSILON_REJECT:
            raise DomainError(f"kappa - 4 tau^2 = {gap:.3g} too close to 0 (space form excluded)")
        object.__setattr__(self, 'kappa', float(self.kappa))
        object.__setattr__(self, 'tau', float(self.tau))
        object.__setattr__(self, 'epsilon', 1 if gap > 0 else -1)

    @property
    def gap(self) -> float:
        """kappa - 4 tau^2"""
        return self.kappa - 4.0 * self.tau ** 2

    @property
    def is_berger(self) -> bool:
        """Compact fibers: kappa > 0 and tau > 0"""
        return self.kappa > 0 and self.tau > 0

    @property
    def antipodal_radius(self) -> float:
        """pi/sqrt(kappa) for kappa > 0, infinity otherwise"""
        if self.kappa > 0:
            return np.pi / np.sqrt(self.kappa)
        return np.inf

    @property
    def fiber_length(self) -> float:
        """Length 8 pi tau / kappa of a closed Berger fiber"""
        if self.kappa <= 0:
            raise NotDefined(f"fibers are not closed for kappa={self.kappa}")
        return 8.0 * np.pi * self.tau / self.kappa

    def label(self) -> str:
        return f"E({self.kappa:g},{self.tau:g})"


@dataclass(frozen=True)
class Pitch:
    """Screw-motion pitch: vertical translation per unit angle"""
    a: float

    def __post_init__(self):
        if not np.isfinite(self.a):
            raise DomainError(f"pitch a={self.a} must be finite")
        object.__setattr__(self, 'a', float(self.a))


@dataclass(frozen=True)
class BergerPitch:
    """Closing pitch a_{n,m} with its admissibility report"""
    pitch: Pitch
    n: int
    m: int
    fiber_length: float
    closes_fibers: bool
    admissible: bool
    conjugate_admissible: bool
    tube_exists: bool


# ===== Operations =====

def trig_eval(space: AmbientSpace, kind, x: ArrayLike) -> ArrayLike:
    """
    Evaluate a kappa-trigonometric function of the space

    Args:
        space: Ambient space (only kappa is used)
        kind: TrigKind or its string value ('sn', 'cs', 'tn', 'ct', 'arcs', 'arct', 'arcsn')
        x: Argument (scalar or array)

    Returns:
        Function value, float for scalar input
    """
    try:
        kind = TrigKind(kind)
    except ValueError as exc:
        raise DomainError(f"unknown trigonometric kind {kind!r}") from exc
    return _TRIG_FUNCTIONS[kind](space.kappa, x)


def symmetry_defect(space: AmbientSpace, pitch: Pitch) -> float:
    """2 tau^2 - a tau kappa; vanishes for tau = 0 and the horizontal pitch"""
    return 2.0 * space.tau ** 2 - pitch.a * space.tau * space.kappa


def is_symmetric_pitch(space: AmbientSpace, pitch: Pitch) -> bool:
    """True when 2 tau^2 - a tau kappa = 0 (up to round-off)"""
    scale = max(1.0, 2.0 * space.tau ** 2, abs(pitch.a * space.tau * space.kappa))
    return abs(symmetry_defect(space, pitch)) <= TOLERANCES.SYMMETRY_DEFECT_TOL * scale


def has_geodesic_orbit(space: AmbientSpace, pitch: Pitch) -> bool:
    """True iff the screw-motion group G_a has a geodesic orbit"""
    t = pitch.a * space.tau * space.epsilon
    upper = space.epsilon / 2.0
    if space.kappa <= 0:
        return t < upper
    lower = 4.0 * space.tau ** 2 * space.epsilon / space.kappa - space.epsilon / 2.0
    return lower < t < upper


def is_admissible(space: AmbientSpace, pitch: Pitch) -> bool:
    """
    Admissible pitch: a tau eps in (-inf, eps/2) for kappa <= 0,
    in [2 tau^2 eps / kappa, eps/2) for kappa > 0
    """
    t = pitch.a * space.tau * space.epsilon
    upper = space.epsilon / 2.0
    if space.kappa <= 0:
        return t < upper
    lower = 2.0 * space.tau ** 2 * space.epsilon / space.kappa
    return lower <= t < upper


def is_conjugate_admissible(space: AmbientSpace, pitch: Pitch) -> bool:
    """kappa > 0 and the conjugate pitch is admissible"""
    if space.kappa <= 0:
        return False
    return is_admissible(space, conjugate_pitch(space, pitch))


def geodesic_radius(space: AmbientSpace, pitch: Pitch) -> float:
    """
    Radius rho_a of the geodesic orbit c_a(s) = (rho_a, s, a s)

    Evaluated as 2 arcsn(sqrt(q)) with q = sn(rho/2)^2 = (1 - 2 a tau) / (2 (kappa - 4 tau^2)),
    which equals arcs(kappa/(kappa - 4 tau^2) (2 a tau - 1) + 1) and stays finite at kappa = 0.

    Raises:
        NoGeodesicOrbit: G_a has no geodesic orbit
    """
    if not has_geodesic_orbit(space, pitch):
        raise NoGeodesicOrbit(
            f"no geodesic orbit for a={pitch.a} in {space.label()} "
            f"(a tau eps={pitch.a * space.tau * space.epsilon:.6g})"
        )
    q = (1.0 - 2.0 * pitch.a * space.tau) / (2.0 * space.gap)
    return 2.0 * arcsn(space.kappa, np.sqrt(q))


def geodesic_orbit(space: AmbientSpace, pitch: Pitch, s_values) -> np.ndarray:
    """Points (rho_a, s, a s) of the geodesic orbit, shape (n, 3)"""
    s = np.atleast_1d(np.asarray(s_values, dtype=float))
    rho = geodesic_radius(space, pitch)
    return np.column_stack([np.full_like(s, rho), s, pitch.a * s])


def metric_tensor(space: AmbientSpace, point) -> np.ndarray:
    """Model metric at (r, theta, z) as a 3x3 matrix"""
    r = float(point[0])
    w = 4.0 * space.tau * sn_half_squared(space.kappa, r)
    s = sn(space.kappa, r)
    return np.array([
        [1.0, 0.0, 0.0],
        [0.0, s * s + w * w, -w],
        [0.0, -w, 1.0],
    ])


def geodesic_curvature_residual(space: AmbientSpace, pitch: Pitch, r: ArrayLike) -> ArrayLike:
    """
    Radial acceleration of the orbit s -> (r, s, a s)

    Half the r-derivative of |(0, 1, a)|^2; zero exactly when the orbit is a geodesic.
    """
    r = np.asarray(r, dtype=float)
    w = 4.0 * space.tau * np.asarray(sn_half_squared(space.kappa, r))
    residual = np.asarray(sn(space.kappa, r)) * (np.asarray(cs(space.kappa, r)) + 2.0 * space.tau * (w - pitch.a))
    return scalar_or_array(residual)


def fiber_angle(space: AmbientSpace, pitch: Pitch) -> float:
    """
    Cosine of the constant angle between c_a and the fibers

    Raises:
        NoGeodesicOrbit: (kappa - 4 tau^2)(1 + a^2 kappa - 4 a tau) <= 0
    """
    a = pitch.a
    radicand = space.gap * (1.0 + a * a * space.kappa - 4.0 * a * space.tau)
    if radicand <= 0:
        raise NoGeodesicOrbit(f"fiber angle undefined for a={a} in {space.label()} (radicand={radicand:.3g})")
    value = (a * space.kappa - 2.0 * space.tau) * space.epsilon / np.sqrt(radicand)
    return float(np.clip(value, -1.0, 1.0))


def conjugate_pitch(space: AmbientSpace, pitch: Pitch) -> Pitch:
    """a~ = 4 tau / kappa - a"""
    if space.kappa <= 0:
        raise NotDefined(f"conjugate pitch requires kappa > 0, got kappa={space.kappa}")
    return Pitch(4.0 * space.tau / space.kappa - pitch.a)


def conjugation_isometry(space: AmbientSpace, pitch: Pitch, point) -> Tuple[float, float, float]:
    """
    Isometry conjugating G_a to G_a~ (kappa > 0)

    (r, theta, z) -> (pi/sqrt(kappa) - r, theta, -z + 4 tau theta / kappa).
    It sends c_a(s) to c_a~(s), is an involution and fixes the equator. On the
    orbit z = a theta it agrees with (pi/sqrt(kappa) - r, theta, z + (4 tau/kappa - 2a) theta).
    The formula does not involve a; the pitch must still be admissible or
    conjugate-admissible so that G_a has the orbit being conjugated.

    Raises:
        NotDefined: kappa <= 0
        NoGeodesicOrbit: pitch neither admissible nor conjugate-admissible
    """
    if space.kappa <= 0:
        raise NotDefined(f"conjugation requires kappa > 0, got kappa={space.kappa}")
    if not (is_admissible(space, pitch) or is_conjugate_admissible(space, pitch)):
        raise NoGeodesicOrbit(
            f"conjugation undefined for a={pitch.a} in {space.label()}: "
            f"neither a nor 4 tau/kappa - a is admissible"
        )
    r, theta, z = (float(c) for c in point)
    return (space.antipodal_radius - r, theta, -z + 4.0 * space.tau * theta / space.kappa)


def critical_curvature(space: AmbientSpace) -> float:
    """H_crit: 0 for kappa >= 0, sqrt(-kappa)/2 for kappa < 0"""
    if space.kappa < 0:
        return float(np.sqrt(-space.kappa) / 2.0)
    return 0.0


def existence_bound(space: AmbientSpace, pitch: Pitch) -> float:
    """
    E_a = sqrt((2 tau^2 - a tau kappa) / (4 a tau - 2)); tubes exist for H > E_a

    Congruence-invariant: a conjugate-admissible pitch gets the bound of its conjugate.

    Raises:
        NoGeodesicOrbit: radicand negative or denominator zero
    """
    if is_symmetric_pitch(space, pitch):
        return 0.0
    if not is_admissible(space, pitch) and is_conjugate_admissible(space, pitch):
        return existence_bound(space, conjugate_pitch(space, pitch))
    numerator = symmetry_defect(space, pitch)
    denominator = 4.0 * pitch.a * space.tau - 2.0
    if denominator == 0 or numerator / denominator < 0:
        raise NoGeodesicOrbit(
            f"existence bound undefined for a={pitch.a} in {space.label()} "
            f"({numerator:.3g}/{denominator:.3g})"
        )
    return float(np.sqrt(numerator / denominator))


def energy_bounds(space: AmbientSpace, pitch: Pitch, H: float) -> Tuple[float, float]:
    """
    (J-, J+) bounding the tube energies at mean curvature H

    J- = 2H (2 a tau - 1) / (kappa - 4 tau^2)
    J+ = J- - (2 tau^2 - a tau kappa) / (H (kappa - 4 tau^2))
    """
    if not H > 0:
        raise DomainError(f"energy bounds need H > 0, got H={H}")
    j_minus = 2.0 * H * (2.0 * pitch.a * space.tau - 1.0) / space.gap
    j_plus = j_minus - symmetry_defect(space, pitch) / (H * space.gap)
    return float(j_minus), float(j_plus)


def energy_bracket(space: AmbientSpace, pitch: Pitch, H: float) -> Tuple[float, float]:
    """energy_bounds sorted ascending (conjugate-admissible pitches swap them)"""
    j_minus, j_plus = energy_bounds(space, pitch, H)
    return min(j_minus, j_plus), max(j_minus, j_plus)


def berger_pitch(space: AmbientSpace, n: int, m: int) -> BergerPitch:
    """
    Pitch a_{n,m} = (n/m)(4 tau / kappa) closing the fibers after m turns

    Args:
        space: Ambient space with kappa > 0
        n: Fiber periods
        m: Turns

    Returns:
        BergerPitch with admissibility and tube-existence flags
    """
    if space.kappa <= 0:
        raise NotDefined(f"closing pitch requires kappa > 0, got kappa={space.kappa}")
    if int(n) != n or int(m) != m or n < 1 or m < 1:
        raise DomainError(f"n, m must be integers >= 1, got n={n}, m={m}")
    n, m = int(n), int(m)
    pitch = Pitch((n / m) * 4.0 * space.tau / space.kappa)
    admissible = is_admissible(space, pitch)
    conjugate_ok = is_conjugate_admissible(space, pitch)

    if n == 1:
        eps, kappa, tau2 = space.epsilon, space.kappa, space.tau ** 2
        below = m * eps <= 2 * eps and (kappa - 8.0 * tau2 / m) * eps > 0
        above = m * eps >= 2 * eps and (kappa - 8.0 * (m - 1) * tau2 / m) * eps > 0
        tube_exists = bool(below or above)
    else:
        tube_exists = admissible or conjugate_ok

    logger.debug("a_{%d,%d}=%.6g in %s: admissible=%s conjugate=%s tube=%s",
                 n, m, pitch.a, space.label(), admissible, conjugate_ok, tube_exists)
    return BergerPitch(
        pitch=pitch,
        n=n,
        m=m,
        fiber_length=space.fiber_length,
        closes_fibers=True,
        admissible=admissible,
        conjugate_admissible=conjugate_ok,
        tube_exists=tube_exists,
    )


def berger_turns(space: AmbientSpace, pitch: Pitch, n: int = 1) -> Optional[int]:
    """m such that pitch = a_{n,m}, or None"""
    if space.kappa <= 0 or space.tau == 0 or pitch.a == 0:
        return None
    m = n * 4.0 * space.tau / (space.kappa * pitch.a)
    nearest = int(round(m))
    if nearest >= 1 and abs(m - nearest) <= 1e-9 * max(1.0, abs(m)):
        return nearest
    return None
