"""
Profile Curve of a Screw-Motion CMC Surface
Radius, height, closing defect and boundary integrand in the turning angle sigma

The profile curve lives in the orbit space E(kappa, tau)/G_a with coordinates
(r, h). Parameterized by its turning angle sigma it satisfies

    J = 2H/kappa (cs(r) - 1) + sn(r) sin(sigma)        (energy first integral)

so r(sigma) is closed-form and h(sigma) is a single quadrature. A direct
arclength integrator of the unreduced system serves as an independent oracle.
"""

import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.integrate import quad, simpson, solve_ivp

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from tolerances import TOLERANCES
from errors import DomainError, IntegrationError, OutOfRegion, QuadratureError
from space_core import (
    AmbientSpace,
    ArrayLike,
    Pitch,
    arcsn,
    arct,
    critical_curvature,
    cs,
    ct,
    scalar_or_array,
    sn,
    sn_half_squared,
)

logger = logging.getLogger(__name__)

HALF_PI = np.pi / 2.0
SIGMA_START = HALF_PI
SIGMA_PERIOD_END = 5.0 * np.pi / 2.0


# ===== Domain types =====

@dataclass(frozen=True)
class ModuliPoint:
    """Mean curvature H and energy J of a profile curve"""
    H: float
    J: float

    def __post_init__(self):
        object.__setattr__(self, 'H', float(self.H))
        object.__setattr__(self, 'J', float(self.J))


@dataclass(frozen=True)
class QuadratureSettings:
    """Adaptive quadrature tolerances (defaults from TOLERANCES)"""
    abs_tol: float = TOLERANCES.QUAD_ABS_TOL
    rel_tol: float = TOLERANCES.QUAD_REL_TOL
    max_subdivisions: int = TOLERANCES.QUAD_MAX_SUBDIVISIONS

    def __post_init__(self):
        is_valid, message = TOLERANCES.validate_quadrature(self.abs_tol, self.rel_tol, self.max_subdivisions)
        if not is_valid:
            raise DomainError(f"invalid quadrature settings: {message}")


@dataclass(frozen=True)
class StepControl:
    """Step control for the direct arclength integrator"""
    rtol: float = TOLERANCES.ODE_RTOL
    atol: float = TOLERANCES.ODE_ATOL
    method: str = TOLERANCES.ODE_METHOD
    max_step: float = np.inf
    n_samples: int = 400
    sigma_stop: Optional[float] = None  # terminal event: sigma(t) crosses this value upwards


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """
    Sampled profile curve (immutable)

    sigma_samples are ascending; h_samples start at 0 for curves sampled from
    sigma = pi/2. Curves from the direct integrator also carry the arclength
    t_samples and have delta = NaN.
    """
    sigma_samples: np.ndarray
    r_samples: np.ndarray
    h_samples: np.ndarray
    r_minus: float
    r_plus: float
    h_max: float
    delta: float
    point: Optional[ModuliPoint] = None
    t_samples: Optional[np.ndarray] = None

    def __post_init__(self):
        for name in ('sigma_samples', 'r_samples', 'h_samples', 't_samples'):
            values = getattr(self, name)
            if values is None:
                continue
            values = np.array(values, dtype=float)
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    def __len__(self) -> int:
        return len(self.sigma_samples)

    def to_frame(self) -> pd.DataFrame:
        """Samples as a DataFrame with columns (t,) sigma, r, h"""
        columns = {}
        if self.t_samples is not None:
            columns['t'] = self.t_samples
        columns['sigma'] = self.sigma_samples
        columns['r'] = self.r_samples
        columns['h'] = self.h_samples
        return pd.DataFrame(columns)

    def energy_residual(self, space: AmbientSpace) -> np.ndarray:
        """|J(r, sigma) - J| at every sample"""
        if self.point is None:
            raise DomainError("curve carries no moduli point")
        energy = energy_at(space, self.point.H, self.r_samples, self.sigma_samples)
        return np.abs(np.asarray(energy) - self.point.J)


# ===== Region checks =====

def in_xi(space: AmbientSpace, point: ModuliPoint) -> bool:
    """
    Membership in the supercritical region Xi

    H > H_crit and J in (-4H/kappa, 0) for kappa > 0, J in (-inf, 0) otherwise.
    """
    H, J = point.H, point.J
    if not (np.isfinite(H) and np.isfinite(J)):
        return False
    if H <= critical_curvature(space) or H <= 0:
        return False
    if J >= 0:
        return False
    if space.kappa > 0 and J <= -4.0 * H / space.kappa:
        return False
    return True


def require_xi(space: AmbientSpace, point: ModuliPoint) -> None:
    if not in_xi(space, point):
        raise OutOfRegion(
            f"(H={point.H:.6g}, J={point.J:.6g}) outside the supercritical region of {space.label()} "
            f"(H_crit={critical_curvature(space):.6g})"
        )


# ===== Quadrature engine =====

def _simpson_doubling(func: Callable, edges: Sequence[float], settings: QuadratureSettings) -> float:
    """Composite Simpson with node doubling and a Richardson step, per sub-interval"""
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        previous = None
        for level in range(8, TOLERANCES.SIMPSON_MAX_LEVEL + 1):
            x = np.linspace(lo, hi, 2 ** level + 1)
            y = np.broadcast_to(np.asarray(func(x), dtype=float), x.shape)
            value = float(simpson(y, x=x))
            if previous is not None:
                tolerance = 15.0 * max(settings.abs_tol, settings.rel_tol * abs(value))
                if abs(value - previous) <= tolerance:
                    total += value + (value - previous) / 15.0
                    break
            previous = value
        else:
            raise QuadratureError(
                f"composite Simpson did not converge on [{lo:.6g}, {hi:.6g}] "
                f"with {2 ** TOLERANCES.SIMPSON_MAX_LEVEL + 1} nodes"
            )
    return total


def integrate(
    func: Callable[[ArrayLike], ArrayLike],
    lo: float,
    hi: float,
    settings: Optional[QuadratureSettings] = None,
    breakpoints: Iterable[float] = (),
) -> float:
    """
    Adaptive Gauss-Kronrod quadrature with a composite Simpson fallback

    Args:
        func: Integrand, must accept scalars and arrays
        lo, hi: Limits (hi < lo integrates backwards)
        settings: Tolerances, defaults from TOLERANCES
        breakpoints: Points where the integrand may steepen

    Returns:
        Integral value

    Raises:
        QuadratureError: Both the adaptive rule and the fallback failed
    """
    settings = settings or QuadratureSettings()
    lo, hi = float(lo), float(hi)
    if lo == hi:
        return 0.0
    sign = 1.0
    if hi < lo:
        lo, hi, sign = hi, lo, -1.0

    inner = sorted(p for p in breakpoints if lo < p < hi)
    result = quad(
        func, lo, hi,
        epsabs=settings.abs_tol,
        epsrel=settings.rel_tol,
        limit=settings.max_subdivisions,
        points=inner or None,
        full_output=1,
    )
    if len(result) == 3:
        return sign * float(result[0])

    reason = str(result[3]).strip().splitlines()[0] if result[3] else "unknown"
    logger.warning(
        "Gauss-Kronrod quadrature on [%.6g, %.6g] did not converge (%s); falling back to composite Simpson",
        lo, hi, reason,
    )
    return sign * _simpson_doubling(func, [lo, *inner, hi], settings)


def _zero_crossings(lo: float, hi: float) -> List[float]:
    """Multiples of pi strictly inside (lo, hi); sin(sigma) changes sign there"""
    first = int(np.floor(min(lo, hi) / np.pi)) + 1
    last = int(np.ceil(max(lo, hi) / np.pi)) - 1
    return [k * np.pi for k in range(first, last + 1)]


# ===== Radius and energy =====

def energy_at(space: AmbientSpace, H: float, r: ArrayLike, sigma: ArrayLike) -> ArrayLike:
    """J(r, sigma) = -4H sn(r/2)^2 + sn(r) sin(sigma), continuous through kappa = 0"""
    r = np.asarray(r, dtype=float)
    value = -4.0 * H * np.asarray(sn_half_squared(space.kappa, r)) + np.asarray(sn(space.kappa, r)) * np.sin(sigma)
    return scalar_or_array(value)


def _radius(space: AmbientSpace, point: ModuliPoint, sigma: ArrayLike) -> np.ndarray:
    s = np.sin(np.asarray(sigma, dtype=float))
    H, J, kappa = point.H, point.J, space.kappa
    scale = np.sqrt(4.0 * H * H + kappa * s * s)
    half_chord = (s * s / (scale + 2.0 * H) - J) / (2.0 * scale)
    tilt = np.asarray(arct(kappa, s / (2.0 * H)))
    return tilt + 2.0 * np.asarray(arcsn(kappa, np.sqrt(np.maximum(half_chord, 0.0))))


def radius_at(space: AmbientSpace, point: ModuliPoint, sigma: ArrayLike) -> ArrayLike:
    """
    Closed-form radius r(sigma) of the profile curve

    Independent of the pitch. Depends on sigma only through sin(sigma).

    Raises:
        OutOfRegion: point not in Xi
    """
    require_xi(space, point)
    return scalar_or_array(_radius(space, point, sigma))


def radius_bounds(space: AmbientSpace, point: ModuliPoint) -> Tuple[float, float]:
    """(r_minus, r_plus) = (r(3pi/2), r(pi/2))"""
    require_xi(space, point)
    r = _radius(space, point, np.array([3.0 * HALF_PI, HALF_PI]))
    return float(r[0]), float(r[1])


def radius_derivative(space: AmbientSpace, point: ModuliPoint, sigma: ArrayLike) -> ArrayLike:
    """dr/dsigma = cos(sigma) / (2H - ct(r) sin(sigma))"""
    require_xi(space, point)
    sigma = np.asarray(sigma, dtype=float)
    r = _radius(space, point, sigma)
    denominator = 2.0 * point.H - np.asarray(ct(space.kappa, r)) * np.sin(sigma)
    return scalar_or_array(np.cos(sigma) / denominator)


# ===== Height =====

def height_coefficients(space: AmbientSpace, pitch: Pitch, point: ModuliPoint) -> Tuple[float, ...]:
    """C1..C5 of the height integrand numerator f"""
    k, t, a = space.kappa, space.tau, pitch.a
    H, J = point.H, point.J
    c1 = 8.0 * t * t - 4.0 * a * t * k + a * a * k * k
    c2 = (
        -32.0 * t * t * H * J
        - 4.0 * t * t * k * J * J
        - 16.0 * a * t * H * H
        + 8.0 * a * t * k * H * J
        + 4.0 * k * H * J
        + k * k * J * J
        + 8.0 * H * H
        + 8.0 * a * a * k * H * H
    )
    c3 = (
        16.0 * t * t * H * H * J * J
        + 32.0 * a * t * H ** 3 * J
        - 4.0 * k * H * H * J * J
        - 16.0 * H ** 3 * J
        + 16.0 * a * a * H ** 4
    )
    c4 = 8.0 * t * t - 4.0 * a * t * k
    c5 = -16.0 * t * t * H * J - 16.0 * a * t * H * H + 4.0 * k * H * J + 8.0 * H * H
    return c1, c2, c3, c4, c5


def _clamp_round_off(values: np.ndarray, scale: float, name: str) -> np.ndarray:
    floor = -TOLERANCES.F_CLAMP * max(1.0, scale)
    if np.any(values < floor):
        raise DomainError(f"{name} negative beyond round-off: min={np.min(values):.3g} (scale {scale:.3g})")
    return np.maximum(values, 0.0)


def height_integrand(space: AmbientSpace, pitch: Pitch, point: ModuliPoint) -> Callable[[ArrayLike], ArrayLike]:
    """
    dh/dsigma as a closure over precomputed coefficients

    dh/dsigma = sqrt(f) sin(sigma) / ((4H^2 + kappa sin^2) sqrt(sin^2 - kappa J^2 - 4HJ))
    f = C1 s^4 + C2 s^2 + C3 + (C4 s^2 + C5) s sqrt(s^2 - kappa J^2 - 4HJ)
    """
    c1, c2, c3, c4, c5 = height_coefficients(space, pitch, point)
    H, J, kappa = point.H, point.J, space.kappa
    offset = -kappa * J * J - 4.0 * H * J
    scale = abs(c1) + abs(c2) + abs(c3) + (abs(c4) + abs(c5)) * np.sqrt(1.0 + abs(offset))

    def dh_dsigma(sigma: ArrayLike) -> ArrayLike:
        s = np.sin(np.asarray(sigma, dtype=float))
        s2 = s * s
        q = s2 + offset
        if np.any(q < 0):
            raise DomainError(f"sin^2 - kappa J^2 - 4HJ < 0 at H={H:.6g}, J={J:.6g}")
        root_q = np.sqrt(q)
        f = c1 * s2 * s2 + c2 * s2 + c3 + (c4 * s2 + c5) * root_q * s
        f = _clamp_round_off(f, scale, "f")
        return scalar_or_array(np.sqrt(f) * s / ((4.0 * H * H + kappa * s2) * root_q))

    return dh_dsigma


def height_derivative(space: AmbientSpace, pitch: Pitch, point: ModuliPoint, sigma: ArrayLike) -> ArrayLike:
    """dh/dsigma at sigma (2pi-periodic, symmetric under sigma -> pi - sigma)"""
    require_xi(space, point)
    return height_integrand(space, pitch, point)(sigma)


def height_derivative_ode(space: AmbientSpace, pitch: Pitch, point: ModuliPoint, sigma: ArrayLike) -> ArrayLike:
    """
    dh/dsigma from the reparameterized system, using the closed-form radius

    sqrt(sn^2 + (4 tau sn(r/2)^2 - a)^2) sin(sigma) / (sn(r) (2H - ct(r) sin(sigma))).
    Independent of the C1..C5 expansion; used to cross-check it.
    """
    require_xi(space, point)
    sigma = np.asarray(sigma, dtype=float)
    r = _radius(space, point, sigma)
    s = np.sin(sigma)
    s_r = np.asarray(sn(space.kappa, r))
    w = 4.0 * space.tau * np.asarray(sn_half_squared(space.kappa, r))
    speed = np.sqrt(s_r * s_r + (w - pitch.a) ** 2)
    denominator = 2.0 * point.H * s_r - np.asarray(cs(space.kappa, r)) * s
    return scalar_or_array(speed * s / denominator)


def height_at(
    space: AmbientSpace,
    pitch: Pitch,
    point: ModuliPoint,
    sigma: float,
    settings: Optional[QuadratureSettings] = None,
) -> float:
    """
    h(sigma) = integral of dh/dsigma from pi/2 to sigma

    Raises:
        OutOfRegion: point not in Xi
        QuadratureError: quadrature failed
    """
    require_xi(space, point)
    sigma = float(sigma)
    return integrate(height_integrand(space, pitch, point), SIGMA_START, sigma, settings,
                     _zero_crossings(SIGMA_START, sigma))


def h_max(space: AmbientSpace, pitch: Pitch, point: ModuliPoint,
          settings: Optional[QuadratureSettings] = None) -> float:
    """Maximal height h(pi) of the profile curve"""
    return height_at(space, pitch, point, np.pi, settings)


def closing_defect(space: AmbientSpace, pitch: Pitch, point: ModuliPoint,
                   settings: Optional[QuadratureSettings] = None) -> float:
    """
    delta_a(H, J) = h(3pi/2), the height change over half a period

    > 0 for nodoids of type I, < 0 for type II, 0 for tubes.
    """
    return height_at(space, pitch, point, 3.0 * HALF_PI, settings)


def height_samples(
    space: AmbientSpace,
    pitch: Pitch,
    point: ModuliPoint,
    sigmas: Sequence[float],
    settings: Optional[QuadratureSettings] = None,
) -> np.ndarray:
    """Heights at ascending sigmas, accumulated segment by segment"""
    require_xi(space, point)
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.size == 0:
        return np.empty(0)
    if np.any(np.diff(sigmas) < 0):
        raise DomainError("sigmas must be ascending")
    integrand = height_integrand(space, pitch, point)
    heights = np.empty_like(sigmas)
    heights[0] = integrate(integrand, SIGMA_START, sigmas[0], settings, _zero_crossings(SIGMA_START, sigmas[0]))
    for i in range(1, sigmas.size):
        lo, hi = sigmas[i - 1], sigmas[i]
        heights[i] = heights[i - 1] + integrate(integrand, lo, hi, settings, _zero_crossings(lo, hi))
    return heights


def sample_profile(
    space: AmbientSpace,
    pitch: Pitch,
    point: ModuliPoint,
    n_nodes: Optional[int] = None,
    settings: Optional[QuadratureSettings] = None,
) -> ProfileCurve:
    """
    Sample one full period sigma in [pi/2, 5pi/2] on Chebyshev-Lobatto nodes

    Args:
        n_nodes: Number of nodes (default TOLERANCES.CHEBYSHEV_NODES)

    Returns:
        ProfileCurve with h(pi/2) = 0
    """
    n = int(n_nodes or TOLERANCES.CHEBYSHEV_NODES)
    if n < 2:
        raise DomainError(f"n_nodes={n} must be at least 2")
    require_xi(space, point)

    nodes = 3.0 * HALF_PI - np.pi * np.cos(np.pi * np.arange(n) / (n - 1))
    nodes[0], nodes[-1] = SIGMA_START, SIGMA_PERIOD_END

    r_minus, r_plus = radius_bounds(space, point)
    r = _radius(space, point, nodes)
    h = height_samples(space, pitch, point, nodes, settings)
    curve = ProfileCurve(
        sigma_samples=nodes,
        r_samples=r,
        h_samples=h,
        r_minus=r_minus,
        r_plus=r_plus,
        h_max=h_max(space, pitch, point, settings),
        delta=closing_defect(space, pitch, point, settings),
        point=point,
    )
    logger.debug("sampled profile at H=%.6g J=%.6g: %d nodes, h_max=%.6g, delta=%.3g",
                 point.H, point.J, n, curve.h_max, curve.delta)
    return curve


# ===== Boundary of the tube region =====

def boundary_integrand(space: AmbientSpace, pitch: Pitch, H: float, sigma: ArrayLike) -> ArrayLike:
    """
    p_a(sigma; H), the J -> 0 limit of |dh/dsigma| on the lower branch

    sqrt((4 tau - a kappa)^2 s^4 + 8H^2 (2 - 4 a tau + a^2 kappa) s^2 + 16 a^2 H^4) / (4H^2 + kappa s^2)

    Raises:
        OutOfRegion: H <= H_crit
    """
    if not (H > critical_curvature(space) and H > 0):
        raise OutOfRegion(f"H={H:.6g} not above H_crit={critical_curvature(space):.6g} in {space.label()}")
    k, t, a = space.kappa, space.tau, pitch.a
    s2 = np.sin(np.asarray(sigma, dtype=float)) ** 2
    quartic = (4.0 * t - a * k) ** 2
    quadratic = 8.0 * H * H * (2.0 - 4.0 * a * t + a * a * k)
    constant = 16.0 * a * a * H ** 4
    radicand = quartic * s2 * s2 + quadratic * s2 + constant
    radicand = _clamp_round_off(radicand, quartic + abs(quadratic) + constant, "boundary radicand")
    return scalar_or_array(np.sqrt(radicand) / (4.0 * H * H + k * s2))


def boundary_residual(space: AmbientSpace, pitch: Pitch, H: float,
                      settings: Optional[QuadratureSettings] = None) -> float:
    """l_a(H) = integral of p_a over [pi/2, pi] minus (pi/2)|a|; zeros are the boundary points H_0"""
    integrand = lambda sigma: boundary_integrand(space, pitch, H, sigma)
    return integrate(integrand, HALF_PI, np.pi, settings) - HALF_PI * abs(pitch.a)


def limit_height(pitch: Pitch) -> float:
    """Maximal height (pi/2)|a| of the J -> 0 limit surface"""
    return HALF_PI * abs(pitch.a)


# ===== Direct integration (oracle) =====

def integrate_ode_direct(
    space: AmbientSpace,
    pitch: Pitch,
    H: float,
    initial: Tuple[float, float, float],
    t_span: Tuple[float, float],
    step_control: Optional[StepControl] = None,
) -> ProfileCurve:
    """
    Integrate the arclength system of the profile curve

        r' = cos(sigma)
        h' = sqrt(sn^2 + (4 tau sn(r/2)^2 - a)^2) / sn(r) * sin(sigma)
        sigma' = 2H - ct(r) sin(sigma)

    Args:
        space: Ambient space
        pitch: Screw-motion pitch
        H: Mean curvature
        initial: (r0, sigma0, h0)
        t_span: Arclength interval
        step_control: Tolerances, method, samples and optional terminal sigma

    Returns:
        ProfileCurve with t_samples; delta is NaN, the bounds are NaN outside Xi

    Raises:
        DomainError: r0 outside (0, pi/sqrt(kappa))
        IntegrationError: the integrator failed
    """
    control = step_control or StepControl()
    r0, sigma0, h0 = (float(v) for v in initial)
    if not (0.0 < r0 < space.antipodal_radius):
        raise DomainError(f"r0={r0} outside (0, {space.antipodal_radius:.6g}) in {space.label()}")

    kappa, tau, a = space.kappa, space.tau, pitch.a

    def rhs(t, y):
        r, h, sigma = y
        s_r = sn(kappa, r)
        w = 4.0 * tau * sn_half_squared(kappa, r)
        s = np.sin(sigma)
        return [
            np.cos(sigma),
            np.sqrt(s_r * s_r + (w - a) ** 2) / s_r * s,
            2.0 * H - cs(kappa, r) / s_r * s,
        ]

    events = None
    if control.sigma_stop is not None:
        def sigma_reached(t, y):
            return y[2] - control.sigma_stop
        sigma_reached.terminal = True
        sigma_reached.direction = 1
        events = [sigma_reached]

    t_eval = np.linspace(t_span[0], t_span[1], control.n_samples)
    solution = solve_ivp(
        rhs, t_span, [r0, h0, sigma0],
        method=control.method,
        rtol=control.rtol,
        atol=control.atol,
        max_step=control.max_step,
        t_eval=t_eval,
        events=events,
    )
    if solution.status == -1:
        raise IntegrationError(
            f"direct integration failed at t={solution.t[-1] if solution.t.size else t_span[0]:.6g} "
            f"(H={H:.6g}, r0={r0:.6g}): {solution.message}"
        )

    t, (r, h, sigma) = solution.t, solution.y
    if events is not None and solution.t_events[0].size:
        t = np.append(t, solution.t_events[0][0])
        r, h, sigma = (np.append(row, value) for row, value in zip((r, h, sigma), solution.y_events[0][0]))

    point = ModuliPoint(H, energy_at(space, H, r0, sigma0))
    if in_xi(space, point):
        r_minus, r_plus = radius_bounds(space, point)
    else:
        r_minus, r_plus = np.nan, np.nan

    logger.debug("direct integration: %d samples over t in [%.3g, %.3g], J=%.6g",
                 t.size, t[0], t[-1], point.J)
    return ProfileCurve(
        sigma_samples=sigma,
        r_samples=r,
        h_samples=h,
        r_minus=r_minus,
        r_plus=r_plus,
        h_max=float(np.max(h) - h0),
        delta=np.nan,
        point=point,
        t_samples=t,
    )
