"""
Surface Export for Offline Visualization
Samples the screw-motion immersion (sigma, theta) -> (r(sigma), theta, h(sigma) + a theta)

Meshes are written in the cylindrical chart (r cos theta, r sin theta, z).
The model metric is NOT Euclidean in this chart: the pictures show the
topology and the symmetries of a tube, not its intrinsic shape.
"""

import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))
sys.path.insert(0, str(Path(__file__).parent.parent.parent / 'config'))

from errors import DomainError, ExportError
from space_core import AmbientSpace, Pitch, berger_turns
from profile_curve import HALF_PI, SIGMA_PERIOD_END, ProfileCurve, height_samples, radius_at
from moduli import TubeSolution

logger = logging.getLogger(__name__)

SEAM_TOL = 1e-9
CHARTS = ("cylindrical",)

PathLike = Union[str, Path]


@dataclass(frozen=True, eq=False)
class SurfaceGrid:
    """Model points on a (res_sigma, res_theta) parameter grid"""
    sigma: np.ndarray
    theta: np.ndarray
    r: np.ndarray
    z: np.ndarray
    z_period: Optional[float] = None  # fiber length when z is reduced

    @property
    def shape(self):
        return self.r.shape

    def points(self) -> np.ndarray:
        """(N, 3) model coordinates (r, theta, z), sigma-major"""
        theta = np.broadcast_to(self.theta[None, :], self.shape)
        return np.column_stack([self.r.ravel(), theta.ravel(), self.z.ravel()])

    def cartesian(self) -> np.ndarray:
        """(N, 3) chart coordinates (r cos theta, r sin theta, z), sigma-major"""
        theta = self.theta[None, :]
        x = self.r * np.cos(theta)
        y = self.r * np.sin(theta)
        return np.column_stack([x.ravel(), y.ravel(), self.z.ravel()])

    def seam_gap(self) -> float:
        """Largest chart distance between the first and last theta columns"""
        xyz = self.cartesian().reshape(self.shape + (3,))
        offset = xyz[:, -1, :] - xyz[:, 0, :]
        if self.z_period is not None:
            dz = np.abs(offset[:, 2])
            offset[:, 2] = np.minimum(dz, self.z_period - dz)
        return float(np.max(np.linalg.norm(offset, axis=1)))


@dataclass(frozen=True)
class MeshStats:
    path: Path
    vertices: int
    faces: int


def sample_surface(
    space: AmbientSpace,
    pitch: Pitch,
    tube: TubeSolution,
    res_sigma: int,
    res_theta: int,
    theta_span: Optional[float] = None,
) -> SurfaceGrid:
    """
    Sample the tube over sigma in [pi/2, 5pi/2] and theta in [0, theta_span]

    Args:
        space: Ambient space
        pitch: Screw-motion pitch (the tube's)
        tube: Solved tube
        res_sigma, res_theta: Grid resolution, at least 2 each
        theta_span: Angular extent; defaults to 2 pi m for a Berger closing
            pitch a_{1,m} and to 2 pi otherwise

    Returns:
        SurfaceGrid; theta is kept unwrapped, z is reduced modulo the fiber
        length in Berger spheres
    """
    if res_sigma < 2 or res_theta < 2:
        raise DomainError(f"resolution must be at least 2x2, got {res_sigma}x{res_theta}")
    if tube.pitch.a != pitch.a:
        raise DomainError(f"tube solved for a={tube.pitch.a}, asked to sample a={pitch.a}")

    turns = berger_turns(space, pitch, n=1) if space.is_berger else None
    if theta_span is None:
        theta_span = 2.0 * np.pi * (turns or 1)

    sigma = np.linspace(HALF_PI, SIGMA_PERIOD_END, res_sigma)
    theta = np.linspace(0.0, float(theta_span), res_theta)
    r_profile = np.asarray(radius_at(space, tube.point, sigma))
    h_profile = height_samples(space, pitch, tube.point, sigma, tube.quadrature)

    r = np.repeat(r_profile[:, None], res_theta, axis=1)
    z = h_profile[:, None] + pitch.a * theta[None, :]

    period = None
    if space.is_berger:
        period = space.fiber_length
        z = np.mod(z, period)
        z[z >= period * (1.0 - 1e-12)] = 0.0

    logger.debug("sampled surface %dx%d, theta span %.6g, z period %s", res_sigma, res_theta, theta_span, period)
    return SurfaceGrid(sigma=sigma, theta=theta, r=r, z=z, z_period=period)


def write_obj(grid: SurfaceGrid, path: PathLike, chart: str = "cylindrical", merge_seam: bool = True) -> MeshStats:
    """
    Write the grid as a triangulated ASCII OBJ (v/f records, 1-based, LF)

    When the first and last theta columns coincide within SEAM_TOL and
    merge_seam is set, the last column is dropped and the closing strip reuses
    the first column, so the mesh is watertight in theta.

    Raises:
        DomainError: unknown chart or empty grid
        ExportError: the file cannot be written
    """
    if chart not in CHARTS:
        raise DomainError(f"unknown chart {chart!r}; available: {', '.join(CHARTS)}")
    rows, cols = grid.shape
    if rows < 2 or cols < 2:
        raise DomainError(f"grid {rows}x{cols} too small for a mesh")

    merged = merge_seam and grid.seam_gap() <= SEAM_TOL
    kept = cols - 1 if merged else cols
    xyz = grid.cartesian().reshape(rows, cols, 3)[:, :kept, :]

    def index(i: int, j: int) -> int:
        return i * kept + (j % kept) + 1

    lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in xyz.reshape(-1, 3)]
    faces = 0
    for i in range(rows - 1):
        for j in range(cols - 1):
            a, b, c, d = index(i, j), index(i + 1, j), index(i + 1, j + 1), index(i, j + 1)
            lines.append(f"f {a} {b} {c}")
            lines.append(f"f {a} {c} {d}")
            faces += 2

    path = Path(path)
    try:
        with open(path, 'w', newline='\n') as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise ExportError(f"cannot write mesh to {path}: {exc}") from exc

    logger.info("✓ wrote %s: %d vertices, %d faces%s", path, rows * kept, faces, " (seam merged)" if merged else "")
    return MeshStats(path=path, vertices=rows * kept, faces=faces)


def write_curve_csv(curve: ProfileCurve, path: Optional[PathLike] = None) -> Optional[str]:
    """
    Write the profile samples as CSV (sigma, r, h; 17 significant digits, LF)

    Returns:
        The CSV text when path is None, otherwise None

    Raises:
        ExportError: the file cannot be written
    """
    frame = curve.to_frame()
    if path is None:
        return frame.to_csv(index=False, float_format="%.17g", lineterminator="\n")
    try:
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as exc:
        raise ExportError(f"cannot write curve to {path}: {exc}") from exc
    return None
