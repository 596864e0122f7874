"""
Embeddedness and Foliation Decisions
Closed-form thresholds checked against the numerical tube data

Verdict functions follow the validate_* pattern: a plain decision plus the
numbers that produced it.
"""

import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.optimize import bisect, minimize_scalar

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from tolerances import TOLERANCES
from errors import DomainError, NotApplicable, NotClosing, NotDefined
from space_core import (
    AmbientSpace,
    Pitch,
    berger_pitch,
    berger_turns,
    is_symmetric_pitch,
    symmetry_defect,
)
from profile_curve import ModuliPoint, QuadratureSettings, h_max, radius_at, radius_bounds
from moduli import TubeSolution

logger = logging.getLogger(__name__)


class FoliationKind(str, Enum):
    FOLIATES = "Foliates"
    PARTIAL_ABOVE = "PartialAbove"


@dataclass(frozen=True)
class FoliationVerdict:
    """Foliation decision; H_star is set for PartialAbove"""
    verdict: FoliationKind
    threshold: float
    H_star: Optional[float] = None
    witnesses: Dict[str, float] = field(default_factory=dict)

    @property
    def foliates(self) -> bool:
        return self.verdict is FoliationKind.FOLIATES


@dataclass(frozen=True)
class BergerVerdict:
    """Embeddedness of a compact tube in a Berger sphere, with its closing data"""
    embedded: bool
    n: int
    m: int
    fiber_length: float
    height_span: float  # 2 m h_max
    admissible: bool
    conjugate_admissible: bool
    tube_exists: bool

    def __bool__(self) -> bool:
        return self.embedded


@dataclass(frozen=True)
class DihedralWitness:
    order: int
    symmetry_defect: float
    centering_defect: float  # r_+ + r_- - pi/sqrt(kappa), NaN for kappa <= 0
    mean_radius_gap: float   # r(pi) - (r_+ + r_-)/2


@dataclass(frozen=True, eq=False)
class FoliationAudit:
    """Sampled h_max(H) along a symmetric-pitch family"""
    H: np.ndarray
    h_max: np.ndarray
    argmax_H: float
    strictly_decreasing: bool
    nested: bool


# ===== Universal constant =====

@lru_cache(maxsize=1)
def solve_x0() -> float:
    """Unique positive root of x artanh(x) = 1 (about 0.83356)"""
    return float(bisect(lambda x: x * np.arctanh(x) - 1.0, 0.5, 0.95, xtol=1e-14, maxiter=200))


# ===== Embeddedness =====

def embedded_noncompact(space: AmbientSpace, pitch: Pitch, tube: TubeSolution) -> bool:
    """Non-compact fibers: the tube is embedded iff 2 h_max < 2 pi |a|"""
    if tube.pitch.a != pitch.a:
        raise DomainError(f"tube solved for a={tube.pitch.a}, asked about a={pitch.a}")
    return bool(2.0 * tube.h_max < 2.0 * np.pi * abs(pitch.a))


def embedded_berger(space: AmbientSpace, m: int, tube: TubeSolution) -> BergerVerdict:
    """
    Compact tube with pitch a_{1,m}: embedded iff 2 m h_max < 8 pi tau / kappa

    Raises:
        NotDefined: kappa <= 0
        NotClosing: the tube pitch is not a_{1,m}
    """
    if space.kappa <= 0:
        raise NotDefined(f"Berger embeddedness requires kappa > 0, got {space.label()}")
    turns = berger_turns(space, tube.pitch, n=1)
    if turns != m:
        raise NotClosing(f"a={tube.pitch.a} is not a_{{1,{m}}} = {4.0 * space.tau / (m * space.kappa):.6g} in {space.label()}")

    closing = berger_pitch(space, 1, m)
    span = 2.0 * m * tube.h_max
    verdict = BergerVerdict(
        embedded=bool(span < closing.fiber_length),
        n=1,
        m=m,
        fiber_length=closing.fiber_length,
        height_span=span,
        admissible=closing.admissible,
        conjugate_admissible=closing.conjugate_admissible,
        tube_exists=closing.tube_exists,
    )
    logger.debug("a_{1,%d} at H=%.6g: span %.6g vs fiber %.6g -> %s",
                 m, tube.H, span, closing.fiber_length, verdict.embedded)
    return verdict


# ===== Foliation =====

def _require_symmetric(space: AmbientSpace, pitch: Pitch) -> None:
    if not is_symmetric_pitch(space, pitch) or space.kappa <= 0:
        raise NotApplicable(
            f"foliation is only decided for 2 tau^2 - a tau kappa = 0 with kappa > 0 "
            f"(a={pitch.a}, {space.label()}, defect={symmetry_defect(space, pitch):.3g})"
        )


def foliation_decision(space: AmbientSpace, pitch: Pitch) -> FoliationVerdict:
    """
    Whether the tube family around c_a foliates

    tau = 0: Foliates iff |a| >= sqrt((1 - x0^2)/(x0^2 kappa)).
    Berger, horizontal pitch: Foliates iff (1 - x0^2) kappa - 4 tau^2 <= 0.
    Otherwise the tubes with H above H_star still foliate an open subset.

    Raises:
        NotApplicable: 2 tau^2 - a tau kappa != 0
    """
    _require_symmetric(space, pitch)
    x0 = solve_x0()
    kappa, tau, a = space.kappa, space.tau, pitch.a

    if tau == 0:
        threshold = float(np.sqrt((1.0 - x0 * x0) / (x0 * x0 * kappa)))
        witnesses = {'x0': x0, 'abs_a': abs(a)}
        if abs(a) >= threshold:
            return FoliationVerdict(FoliationKind.FOLIATES, threshold, None, witnesses)
        weight = 1.0 + kappa * a * a
        h_star = 0.5 * np.sqrt(kappa) * np.sqrt((1.0 - x0 * x0 * weight) / (x0 * x0 * weight))
        return FoliationVerdict(FoliationKind.PARTIAL_ABOVE, threshold, float(h_star), witnesses)

    criterion = (1.0 - x0 * x0) * kappa - 4.0 * tau * tau
    witnesses = {'x0': x0, 'criterion': float(criterion)}
    if criterion <= 0:
        return FoliationVerdict(FoliationKind.FOLIATES, 0.0, None, witnesses)
    h_star = np.sqrt(criterion / (4.0 * x0 * x0))
    return FoliationVerdict(FoliationKind.PARTIAL_ABOVE, 0.0, float(h_star), witnesses)


def _require_product(space: AmbientSpace, H: float) -> None:
    if space.tau != 0 or space.kappa <= 0:
        raise NotApplicable(f"closed-form h_max needs tau=0 and kappa>0, got {space.label()}")
    if not H > 0:
        raise NotApplicable(f"closed-form h_max needs H > 0, got H={H}")


def hmax_closed_form(space: AmbientSpace, pitch: Pitch, H: float) -> float:
    """
    h_max(H) in S^2(kappa) x R

    2H/(sqrt(kappa) sqrt(4H^2+kappa)) arcoth(X) + |a| arcsin(|a| kappa / sqrt(a^2 kappa^2 + 4H^2 (1 + kappa a^2)))
    with X = sqrt(4H^2+kappa) sqrt(1+kappa a^2) / sqrt(kappa) > 1. Both terms are positive.
    """
    _require_product(space, H)
    kappa, a = space.kappa, abs(pitch.a)
    scale = 4.0 * H * H + kappa
    weight = 1.0 + kappa * a * a
    x = np.sqrt(kappa) / (np.sqrt(scale) * np.sqrt(weight))
    lateral = 2.0 * H / (np.sqrt(kappa) * np.sqrt(scale)) * np.arctanh(x)
    vertical = a * np.arcsin(a * kappa / np.sqrt(a * a * kappa * kappa + 4.0 * H * H * weight))
    return float(lateral + vertical)


def dH_hmax(space: AmbientSpace, pitch: Pitch, H: float) -> float:
    """d h_max / dH = 2 sqrt(1 + kappa a^2)/(4H^2 + kappa) (x artanh(x) - 1)"""
    _require_product(space, H)
    kappa, a = space.kappa, pitch.a
    scale = 4.0 * H * H + kappa
    weight = 1.0 + kappa * a * a
    x = np.sqrt(kappa) / (np.sqrt(scale) * np.sqrt(weight))
    return float(2.0 * np.sqrt(kappa) / scale ** 1.5 * np.arctanh(x) - 2.0 * np.sqrt(weight) / scale)


# ===== Symmetry =====

def dihedral_witness(space: AmbientSpace, pitch: Pitch, tube: TubeSolution) -> DihedralWitness:
    """Order of the dihedral symmetry of the profile curve and the defects deciding it"""
    defect = symmetry_defect(space, tube.pitch)
    r_minus, r_plus = tube.r_minus, tube.r_plus
    mean_radius = 0.5 * (r_minus + r_plus)
    gap = float(radius_at(space, tube.point, np.pi)) - mean_radius
    centering = r_plus + r_minus - space.antipodal_radius if space.kappa > 0 else np.nan

    tol = TOLERANCES.SYMMETRY_TOL
    order4 = (
        is_symmetric_pitch(space, tube.pitch)
        and abs(centering) <= tol
        and abs(gap) <= tol
    )
    return DihedralWitness(order=4 if order4 else 2, symmetry_defect=float(defect),
                           centering_defect=float(centering), mean_radius_gap=float(gap))


def dihedral_order(space: AmbientSpace, pitch: Pitch, tube: TubeSolution) -> int:
    """4 iff 2 tau^2 - a tau kappa = 0 (confirmed on the solved tube), else 2"""
    return dihedral_witness(space, pitch, tube).order


# ===== Numeric foliation audit =====

def _symmetric_h_max(space: AmbientSpace, pitch: Pitch, H: float,
                     quadrature: Optional[QuadratureSettings]) -> float:
    return h_max(space, pitch, ModuliPoint(H, -2.0 * H / space.kappa), quadrature)


def foliation_audit(
    space: AmbientSpace,
    pitch: Pitch,
    H_grid: Sequence[float],
    quadrature: Optional[QuadratureSettings] = None,
) -> FoliationAudit:
    """
    h_max along the family J = -2H/kappa, its argmax and the nesting of [r-, r+]

    The sampled argmax is refined by a bounded scalar search between its
    neighbours. Nesting is checked on the grid points above the argmax.
    """
    _require_symmetric(space, pitch)
    H = np.sort(np.asarray(H_grid, dtype=float))
    if H.size < 3 or H[0] <= 0:
        raise DomainError("audit needs at least 3 positive H values")

    heights = np.array([_symmetric_h_max(space, pitch, h, quadrature) for h in H])
    i = int(np.argmax(heights))
    argmax_H = float(H[i])
    if 0 < i < H.size - 1:
        result = minimize_scalar(
            lambda h: -_symmetric_h_max(space, pitch, h, quadrature),
            bounds=(H[i - 1], H[i + 1]),
            method='bounded',
            options={'xatol': 1e-10 * H[i]},
        )
        if result.success:
            argmax_H = float(result.x)

    bounds: List = [radius_bounds(space, ModuliPoint(h, -2.0 * h / space.kappa)) for h in H[i:]]
    nested = all(
        lower_next > lower and upper_next < upper
        for (lower, upper), (lower_next, upper_next) in zip(bounds[:-1], bounds[1:])
    )
    audit = FoliationAudit(
        H=H,
        h_max=heights,
        argmax_H=argmax_H,
        strictly_decreasing=bool(np.all(np.diff(heights) < 0)),
        nested=nested,
    )
    logger.info("✓ foliation audit a=%.6g in %s: argmax H=%.6g, decreasing=%s, nested=%s",
                pitch.a, space.label(), argmax_H, audit.strictly_decreasing, nested)
    return audit
