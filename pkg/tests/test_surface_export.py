"""
Test Surface Sampling and Mesh/Curve Export
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src' / 'geometry'))
sys.path.insert(0, str(Path(__file__).parent.parent / 'config'))

from errors import DomainError, ExportError
from space_core import AmbientSpace, Pitch, berger_pitch, geodesic_radius
from profile_curve import ModuliPoint, height_samples, radius_at, sample_profile
from moduli import tube_energy
from surface_export import SurfaceGrid, sample_surface, write_curve_csv, write_obj

BERGER = AmbientSpace(4.0, 0.5)
NIL = AmbientSpace(0.0, 1.0)


def flat_grid(theta, rows=2, pitch=0.0):
    theta = np.asarray(theta, dtype=float)
    sigma = np.linspace(0.0, 1.0, rows)
    r = np.ones((rows, len(theta)))
    z = np.zeros((rows, 1)) + pitch * theta[None, :]
    return SurfaceGrid(sigma=sigma, theta=theta, r=r, z=z)


def read_records(path, tag):
    return [line for line in Path(path).read_text().splitlines() if line.startswith(tag + " ")]


class TestObj:
    def test_two_by_two_grid(self, tmp_path):
        stats = write_obj(flat_grid([0.0, 1.0]), tmp_path / "quad.obj")
        assert (stats.vertices, stats.faces) == (4, 2)
        assert read_records(stats.path, "f") == ["f 1 3 4", "f 1 4 2"]
        assert len(read_records(stats.path, "v")) == 4

    def test_seam_merged_for_full_turn(self, tmp_path):
        grid = flat_grid(np.linspace(0.0, 2 * np.pi, 5), rows=3)
        assert grid.seam_gap() < 1e-9
        stats = write_obj(grid, tmp_path / "ring.obj")
        assert stats.vertices == 12
        assert stats.faces == 16
        faces = read_records(stats.path, "f")
        # closing strip of the first row reuses vertex 1
        assert "f 4 8 5" in faces and "f 4 5 1" in faces

    def test_open_seam_kept(self, tmp_path):
        grid = flat_grid(np.linspace(0.0, 2 * np.pi, 5), rows=3, pitch=0.3)
        assert_allclose(grid.seam_gap(), 2 * np.pi * 0.3)
        stats = write_obj(grid, tmp_path / "open.obj")
        assert stats.vertices == 15

    def test_merge_can_be_disabled(self, tmp_path):
        grid = flat_grid(np.linspace(0.0, 2 * np.pi, 5), rows=3)
        assert write_obj(grid, tmp_path / "raw.obj", merge_seam=False).vertices == 15

    def test_vertices_use_cylindrical_chart(self, tmp_path):
        stats = write_obj(flat_grid([0.0, np.pi / 2]), tmp_path / "chart.obj")
        coords = np.array([[float(v) for v in line.split()[1:]] for line in read_records(stats.path, "v")])
        assert_allclose(coords[1], [0.0, 1.0, 0.0], atol=1e-15)

    def test_unknown_chart(self, tmp_path):
        with pytest.raises(DomainError):
            write_obj(flat_grid([0.0, 1.0]), tmp_path / "x.obj", chart="euclidean")

    def test_unwritable_path(self, tmp_path):
        with pytest.raises(ExportError):
            write_obj(flat_grid([0.0, 1.0]), tmp_path / "missing" / "quad.obj")


class TestSampling:
    def test_berger_tube_wraps_fiber(self):
        closing = berger_pitch(BERGER, 1, 2)
        tube = tube_energy(BERGER, closing.pitch, 1.0)
        grid = sample_surface(BERGER, closing.pitch, tube, 17, 33)
        assert grid.shape == (17, 33)
        assert_allclose(grid.theta[-1], 4 * np.pi)
        assert grid.z_period == BERGER.fiber_length
        assert np.all(grid.z >= 0) and np.all(grid.z < BERGER.fiber_length)
        assert grid.seam_gap() < 1e-9

    def test_radius_within_bounds(self):
        tube = tube_energy(NIL, Pitch(1.0), 2.0)
        grid = sample_surface(NIL, Pitch(1.0), tube, 9, 5)
        assert grid.z_period is None
        assert_allclose(grid.theta[-1], 2 * np.pi)
        assert np.all(grid.r >= tube.r_minus - 1e-12)
        assert np.all(grid.r <= tube.r_plus + 1e-12)
        assert grid.points().shape == (45, 3)

    def test_first_column_is_profile(self):
        tube = tube_energy(NIL, Pitch(1.0), 2.0)
        grid = sample_surface(NIL, Pitch(1.0), tube, 9, 5)
        heights = height_samples(NIL, Pitch(1.0), tube.point, grid.sigma)
        assert_allclose(grid.r[:, 0], radius_at(NIL, tube.point, grid.sigma), rtol=1e-15)
        assert_allclose(grid.z[:, 0], heights, atol=1e-15)

    def test_screw_invariance(self):
        tube = tube_energy(NIL, Pitch(1.0), 2.0)
        grid = sample_surface(NIL, Pitch(1.0), tube, 9, 7)
        step = grid.theta[1] - grid.theta[0]
        assert_allclose(grid.r[:, 1:], grid.r[:, :-1])
        assert_allclose(grid.z[:, 1:] - grid.z[:, :-1], 1.0 * step, atol=1e-12)

    def test_thin_tube_hugs_orbit(self):
        space, pitch = AmbientSpace(1.0, 0.0), Pitch(1.0)
        tube = tube_energy(space, pitch, 1e3)
        grid = sample_surface(space, pitch, tube, 17, 9)
        rho = geodesic_radius(space, pitch)
        offset = grid.z - pitch.a * grid.theta[None, :]
        assert np.max(np.abs(grid.r - rho)) < 0.025
        assert np.max(np.abs(offset)) < 0.025

    def test_resolution_too_small(self):
        tube = tube_energy(NIL, Pitch(1.0), 2.0)
        with pytest.raises(DomainError):
            sample_surface(NIL, Pitch(1.0), tube, 1, 8)

    def test_pitch_must_match_tube(self):
        tube = tube_energy(NIL, Pitch(1.0), 2.0)
        with pytest.raises(DomainError):
            sample_surface(NIL, Pitch(2.0), tube, 8, 8)


class TestCurveCsv:
    def test_text_output(self):
        curve = sample_profile(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), n_nodes=9)
        text = write_curve_csv(curve)
        lines = text.split("\n")
        assert lines[0] == "sigma,r,h"
        assert len(lines) == 11 and lines[-1] == ""
        assert "\r" not in text

    def test_file_output(self, tmp_path):
        curve = sample_profile(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), n_nodes=9)
        assert write_curve_csv(curve, tmp_path / "curve.csv") is None
        assert (tmp_path / "curve.csv").read_text().startswith("sigma,r,h\n")

    def test_unwritable_path(self, tmp_path):
        curve = sample_profile(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), n_nodes=9)
        with pytest.raises(ExportError):
            write_curve_csv(curve, tmp_path / "missing" / "curve.csv")
