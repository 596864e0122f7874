"""
Area and Enclosed Volume of Compact Berger Tubes
Isoperimetric profile H -> (volume, area) along tube families with closing pitch a_{1,m}

The tube with pitch a_{1,m} closes after m turns (theta in [0, 2 pi m]) and
its profile is symmetric under h -> -h, so both integrals run over the upper
branch sigma in [pi/2, 3pi/2] with prefactor 4 pi m. The volume form of the
model metric is sn(r) dr dtheta dz.
"""

import logging
import sys
from pathlib import Path
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from tolerances import TOLERANCES
from errors import (
    GeometryError,
    IntegrationError,
    NoTube,
    NotApplicable,
    NotClosing,
    NotDefined,
    TubeToolkitError,
)
from space_core import AmbientSpace, berger_pitch, berger_turns, cs, sn, sn_half_squared
from profile_curve import (
    HALF_PI,
    QuadratureSettings,
    height_at,
    height_integrand,
    integrate,
    radius_at,
)
from moduli import RootFindSettings, TubeSolution, tube_energy

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['pitch_n', 'pitch_m', 'a', 'H', 'J_tube', 'volume', 'vol_complement', 'area', 'status', 'error']


def _require_closing(space: AmbientSpace, m: int, tube: TubeSolution) -> None:
    if space.kappa <= 0:
        raise NotDefined(f"compact tubes require kappa > 0, got {space.label()}")
    if berger_turns(space, tube.pitch, n=1) != m:
        raise NotClosing(f"a={tube.pitch.a} is not a_{{1,{m}}} in {space.label()}")


def _upper_branch(space: AmbientSpace, tube: TubeSolution):
    """(r, dr/dsigma) on the upper branch as vectorized closures"""
    point = tube.point
    kappa = space.kappa

    def radius(sigma):
        return np.asarray(radius_at(space, point, sigma))

    def radius_rate(sigma):
        sigma = np.asarray(sigma, dtype=float)
        r = radius(sigma)
        s = np.sin(sigma)
        return np.cos(sigma) / (2.0 * point.H - np.asarray(cs(kappa, r)) / np.asarray(sn(kappa, r)) * s)

    return radius, radius_rate


def ambient_volume(space: AmbientSpace) -> float:
    """
    Volume 32 pi^2 tau / kappa^2 of the Berger sphere

    Fiber length 8 pi tau / kappa times base area 4 pi / kappa.

    Raises:
        NotApplicable: kappa <= 0 or tau = 0 (non-compact fibers)
    """
    if space.kappa <= 0 or space.tau == 0:
        raise NotApplicable(f"ambient volume only for Berger spheres, got {space.label()}")
    return 32.0 * np.pi ** 2 * space.tau / space.kappa ** 2


def tube_area(space: AmbientSpace, m: int, tube: TubeSolution,
              settings: Optional[QuadratureSettings] = None) -> float:
    """
    Area 4 pi m * integral of sqrt((sn^2 + (w - a)^2) r'^2 + sn^2 h'^2) over the upper branch

    w = 4 tau sn(r/2)^2 is the twist of the metric.

    Raises:
        NotClosing: tube pitch is not a_{1,m}
        QuadratureError: quadrature failed
    """
    _require_closing(space, m, tube)
    settings = settings or tube.quadrature
    kappa, tau, a = space.kappa, space.tau, tube.pitch.a
    radius, radius_rate = _upper_branch(space, tube)
    height_rate = height_integrand(space, tube.pitch, tube.point)

    def element(sigma):
        r = radius(sigma)
        s_r = np.asarray(sn(kappa, r))
        w = 4.0 * tau * np.asarray(sn_half_squared(kappa, r))
        dr = radius_rate(sigma)
        dh = np.asarray(height_rate(sigma))
        return np.sqrt((s_r * s_r + (w - a) ** 2) * dr * dr + s_r * s_r * dh * dh)

    return 4.0 * np.pi * m * integrate(element, HALF_PI, 3.0 * HALF_PI, settings, [np.pi])


def tube_volume(space: AmbientSpace, m: int, tube: TubeSolution,
                settings: Optional[QuadratureSettings] = None) -> float:
    """
    Enclosed volume 4 pi m * integral of sn(r) h (-r') over sigma in [pi/2, 3pi/2]

    h and the volume integral are integrated together as one ODE in sigma.

    Raises:
        NotClosing: tube pitch is not a_{1,m}
        GeometryError: the upper branch is not a graph over r
        IntegrationError: the integrator failed
    """
    _require_closing(space, m, tube)
    settings = settings or tube.quadrature
    kappa = space.kappa
    radius, radius_rate = _upper_branch(space, tube)
    height_rate = height_integrand(space, tube.pitch, tube.point)

    interior = np.linspace(HALF_PI, 3.0 * HALF_PI, 257)[1:-1]
    if np.any(radius_rate(interior) >= 0):
        raise GeometryError(f"radius not strictly decreasing on the upper branch at H={tube.H:.6g}")

    def rhs(sigma, y):
        h = y[0]
        r = radius(sigma)
        return [height_rate(sigma), float(sn(kappa, r)) * h * -float(radius_rate(sigma))]

    solution = solve_ivp(
        rhs, (HALF_PI, 3.0 * HALF_PI), [0.0, 0.0],
        method=TOLERANCES.ODE_METHOD,
        rtol=min(TOLERANCES.ODE_RTOL, settings.rel_tol),
        atol=min(TOLERANCES.ODE_ATOL, settings.abs_tol),
        dense_output=True,
    )
    if solution.status != 0:
        raise IntegrationError(f"volume integration failed at H={tube.H:.6g}: {solution.message}")

    heights = solution.sol(interior)[0]
    if np.any(heights < -TOLERANCES.TUBE_RESIDUAL):
        raise GeometryError(f"upper branch dips below h=0 (min {heights.min():.3g}) at H={tube.H:.6g}")
    return 4.0 * np.pi * m * float(solution.y[1, -1])


def tube_volume_graph(space: AmbientSpace, m: int, tube: TubeSolution,
                      settings: Optional[QuadratureSettings] = None) -> float:
    """
    Enclosed volume 4 pi m * integral of sn(r) h(r) dr with h read as a graph over r

    sigma(r) on the upper branch is recovered by root finding; slower than
    tube_volume and used to check it.
    """
    _require_closing(space, m, tube)
    settings = settings or tube.quadrature
    point, pitch = tube.point, tube.pitch
    radius, _ = _upper_branch(space, tube)
    r_minus, r_plus = tube.r_minus, tube.r_plus

    def sigma_of(r: float) -> float:
        if r >= r_plus:
            return HALF_PI
        if r <= r_minus:
            return 3.0 * HALF_PI
        return brentq(lambda sigma: float(radius(sigma)) - r, HALF_PI, 3.0 * HALF_PI, xtol=1e-15, maxiter=200)

    # vectorized so the Simpson fallback can pass node arrays
    @np.vectorize
    def slab(r):
        return float(sn(space.kappa, r)) * height_at(space, pitch, point, sigma_of(r), settings)

    return 4.0 * np.pi * m * integrate(slab, r_minus, r_plus, settings)


# ===== Isoperimetric sweep =====

def _sweep_row(space, n, m, closing, H, settings, quadrature) -> dict:
    row = {'pitch_n': n, 'pitch_m': m, 'a': closing.pitch.a, 'H': float(H),
           'J_tube': np.nan, 'volume': np.nan, 'vol_complement': np.nan, 'area': np.nan,
           'status': 'ok', 'error': ''}
    if not closing.tube_exists:
        row.update(status='no_tube', error=f"no tube for a_{{{n},{m}}} in {space.label()}")
        return row
    try:
        tube = tube_energy(space, closing.pitch, H, settings, quadrature)
        volume = tube_volume(space, m, tube, quadrature)
        row.update(
            J_tube=tube.J,
            volume=volume,
            vol_complement=ambient_volume(space) - volume,
            area=tube_area(space, m, tube, quadrature),
        )
    except NoTube as exc:
        row.update(status='no_tube', error=str(exc))
    except TubeToolkitError as exc:
        logger.warning("sweep row a_{%d,%d} H=%.6g failed: %s", n, m, H, exc)
        row.update(status='error', error=str(exc))
    return row


def profile_sweep(
    space: AmbientSpace,
    pitch_specs: Sequence[Tuple[int, int]],
    H_grid: Sequence[float],
    settings: Optional[RootFindSettings] = None,
    quadrature: Optional[QuadratureSettings] = None,
    n_jobs: int = 1,
) -> pd.DataFrame:
    """
    Volume and area of the tubes with pitch a_{n,m} over an H-grid

    Args:
        pitch_specs: (n, m) pairs; only n = 1 closes with the 4 pi m prefactor
        n_jobs: joblib thread count; rows keep (pitch, H) order

    Returns:
        DataFrame with SWEEP_COLUMNS; failed rows carry status and error
    """
    tasks = []
    for n, m in pitch_specs:
        closing = berger_pitch(space, n, m)
        for H in H_grid:
            if n != 1:
                tasks.append(delayed(_unsupported_row)(space, n, m, closing, H))
            else:
                tasks.append(delayed(_sweep_row)(space, n, m, closing, H, settings, quadrature))
    rows = Parallel(n_jobs=n_jobs, prefer="threads")(tasks)
    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)
    logger.info("✓ isoperimetric sweep %s: %d rows, %d ok",
                space.label(), len(frame), int((frame['status'] == 'ok').sum()))
    return frame


def _unsupported_row(space, n, m, closing, H) -> dict:
    return {'pitch_n': n, 'pitch_m': m, 'a': closing.pitch.a, 'H': float(H),
            'J_tube': np.nan, 'volume': np.nan, 'vol_complement': np.nan, 'area': np.nan,
            'status': 'error', 'error': f"a_{{{n},{m}}}: only n=1 closing pitches are swept"}


def area_at_volumes(frame: pd.DataFrame, m: int, volumes: Sequence[float]) -> np.ndarray:
    """
    Area of the a_{1,m} tubes at the given enclosed volumes

    Interpolates along the solved rows ordered by decreasing H, up to the first
    point where the volume stops increasing. NaN outside the covered range.
    """
    rows = frame[(frame['pitch_m'] == m) & (frame['pitch_n'] == 1) & (frame['status'] == 'ok')]
    rows = rows.sort_values('H', ascending=False)
    volume = rows['volume'].to_numpy()
    area = rows['area'].to_numpy()
    if volume.size < 2:
        return np.full(len(volumes), np.nan)
    steps = np.diff(volume)
    stop = int(np.argmax(steps <= 0)) + 1 if np.any(steps <= 0) else volume.size
    volume, area = volume[:stop], area[:stop]
    return np.interp(np.asarray(volumes, dtype=float), volume, area, left=np.nan, right=np.nan)


def volume_range(frame: pd.DataFrame, m: int) -> Tuple[float, float]:
    """(min, max) enclosed volume among the solved a_{1,m} rows"""
    rows = frame[(frame['pitch_m'] == m) & (frame['pitch_n'] == 1) & (frame['status'] == 'ok')]
    if rows.empty:
        return np.nan, np.nan
    return float(rows['volume'].min()), float(rows['volume'].max())
