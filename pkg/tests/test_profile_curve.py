"""
Test Profile Curves
Closed-form radius, height quadrature, closing defect and the direct integrator
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from numpy.testing import assert_allclose

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src' / 'geometry'))
sys.path.insert(0, str(Path(__file__).parent.parent / 'config'))

from errors import DomainError, OutOfRegion
from space_core import AmbientSpace, Pitch, existence_bound
from profile_curve import (
    HALF_PI,
    ModuliPoint,
    QuadratureSettings,
    StepControl,
    boundary_integrand,
    boundary_residual,
    closing_defect,
    energy_at,
    h_max,
    height_at,
    height_derivative,
    height_derivative_ode,
    height_samples,
    in_xi,
    integrate,
    integrate_ode_direct,
    limit_height,
    radius_at,
    radius_bounds,
    radius_derivative,
    sample_profile,
)

PRODUCT = AmbientSpace(1.0, 0.0)
BERGER = AmbientSpace(4.0, 0.5)
NIL = AmbientSpace(0.0, 1.0)


class TestRegion:
    def test_membership(self):
        assert in_xi(PRODUCT, ModuliPoint(1.0, -2.0))
        assert not in_xi(PRODUCT, ModuliPoint(1.0, -4.0))
        assert not in_xi(PRODUCT, ModuliPoint(1.0, 0.0))
        assert not in_xi(AmbientSpace(-1.0, 1.0), ModuliPoint(0.4, -1.0))
        assert in_xi(NIL, ModuliPoint(0.1, -100.0))

    def test_radius_outside_region(self):
        with pytest.raises(OutOfRegion):
            radius_at(PRODUCT, ModuliPoint(1.0, 0.5), HALF_PI)


class TestRadius:
    def test_centered_bounds(self):
        space = AmbientSpace(4.0, 0.0)
        point = ModuliPoint(1.0, -0.5)
        r_minus, r_plus = radius_bounds(space, point)
        assert_allclose(r_plus, 3 * np.pi / 8, rtol=1e-14)
        assert_allclose(r_minus, np.pi / 8, rtol=1e-14)
        assert_allclose(r_plus + r_minus, np.pi / 2, rtol=1e-14)
        assert_allclose(radius_at(space, point, HALF_PI), r_plus, rtol=1e-15)

    def test_depends_on_sine_only(self):
        point = ModuliPoint(0.7, -0.3)
        sigma = np.linspace(0.6, 1.5, 11)
        assert_allclose(radius_at(NIL, point, sigma), radius_at(NIL, point, np.pi - sigma), rtol=1e-14)

    @pytest.mark.parametrize("kappa,tau,H,J", [
        (1.0, 0.0, 1.0, -1.3),
        (4.0, 0.5, 0.8, -0.2),
        (0.0, 1.0, 2.0, -0.9),
        (-1.0, 1.0, 0.9, -0.4),
    ])
    def test_energy_first_integral(self, kappa, tau, H, J):
        space = AmbientSpace(kappa, tau)
        sigma = np.linspace(HALF_PI, 5 * HALF_PI, 101)
        r = radius_at(space, ModuliPoint(H, J), sigma)
        assert_allclose(energy_at(space, H, r, sigma), J, atol=1e-12)

    def test_derivative_matches_finite_difference(self):
        point = ModuliPoint(1.0, -1.3)
        sigma, step = 2.1, 1e-6
        numeric = (radius_at(PRODUCT, point, sigma + step) - radius_at(PRODUCT, point, sigma - step)) / (2 * step)
        assert_allclose(radius_derivative(PRODUCT, point, sigma), numeric, rtol=1e-7)


class TestHeight:
    def test_vanishes_at_pi(self):
        assert abs(height_derivative(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), np.pi)) < 1e-15

    def test_sign_pattern(self):
        point = ModuliPoint(2.0, -0.9)
        rising = height_derivative(NIL, Pitch(1.0), point, np.linspace(HALF_PI, np.pi, 50)[1:-1])
        falling = height_derivative(NIL, Pitch(1.0), point, np.linspace(np.pi, 3 * HALF_PI, 50)[1:-1])
        assert np.all(rising > 0)
        assert np.all(falling < 0)

    def test_lower_branch_limit(self):
        value = height_derivative(PRODUCT, Pitch(1.0), ModuliPoint(1.0, -1e-6), 3 * HALF_PI)
        assert_allclose(value, -1.0, atol=1e-4)

    @pytest.mark.parametrize("kappa,tau,a,H,J", [
        (1.0, 0.0, 0.6, 1.0, -1.3),
        (4.0, 0.5, 0.4, 0.8, -0.2),
        (0.0, 1.0, 1.0, 2.0, -0.9),
        (-1.0, 1.0, 3.0, 0.9, -0.4),
    ])
    def test_expansion_matches_reparameterized_system(self, kappa, tau, a, H, J):
        space, pitch, point = AmbientSpace(kappa, tau), Pitch(a), ModuliPoint(H, J)
        sigma = np.linspace(HALF_PI, 5 * HALF_PI, 97)
        expanded = height_derivative(space, pitch, point, sigma)
        direct = height_derivative_ode(space, pitch, point, sigma)
        assert_allclose(expanded, direct, rtol=1e-9, atol=1e-12)

    @pytest.mark.parametrize("kappa,tau,a,H,J", [
        (1.0, 0.0, 0.6, 1.0, -1.3),
        (4.0, 0.5, 0.4, 0.8, -0.2),
        (0.0, 1.0, 1.0, 2.0, -0.9),
        (-1.0, 1.0, 3.0, 0.9, -0.4),
    ])
    def test_reflection_and_period(self, kappa, tau, a, H, J):
        space, pitch, point = AmbientSpace(kappa, tau), Pitch(a), ModuliPoint(H, J)
        sigma = np.linspace(0.1, 3.0, 30)
        values = height_derivative(space, pitch, point, sigma)
        assert_allclose(height_derivative(space, pitch, point, np.pi - sigma), values, rtol=1e-12, atol=1e-14)
        assert_allclose(height_derivative(space, pitch, point, sigma + 2 * np.pi), values, rtol=1e-12, atol=1e-14)

    def test_starts_at_zero(self):
        assert height_at(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), HALF_PI) == 0.0

    def test_h_max_product_space(self):
        assert_allclose(h_max(PRODUCT, Pitch(1.0), ModuliPoint(1.0, -2.0)), 0.632715, atol=1e-6)

    def test_samples_match_pointwise(self):
        pitch, point = Pitch(1.0), ModuliPoint(2.0, -0.9)
        sigmas = np.array([2.0, np.pi, 4.0, 3 * HALF_PI])
        pointwise = [height_at(NIL, pitch, point, s) for s in sigmas]
        assert_allclose(height_samples(NIL, pitch, point, sigmas), pointwise, atol=1e-10)

    def test_samples_must_ascend(self):
        with pytest.raises(DomainError):
            height_samples(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), [3.0, 2.0])


class TestClosingDefect:
    @pytest.mark.parametrize("kappa", [1.0, 4.0])
    @pytest.mark.parametrize("a", [0.3, 1.0, 2.0])
    @pytest.mark.parametrize("H", [0.5, 1.0, 2.0, 5.0])
    def test_product_space_tubes(self, kappa, a, H):
        space = AmbientSpace(kappa, 0.0)
        assert abs(closing_defect(space, Pitch(a), ModuliPoint(H, -2.0 * H / kappa))) < 1e-9

    def test_horizontal_berger_tube(self):
        assert abs(closing_defect(BERGER, Pitch(0.25), ModuliPoint(1.0, -0.5))) < 1e-9

    def test_symmetric_curve_closes_after_full_period(self):
        curve = sample_profile(PRODUCT, Pitch(1.0), ModuliPoint(1.0, -2.0), n_nodes=65)
        assert abs(curve.h_samples[-1]) < 1e-9
        assert abs(curve.delta) < 1e-9


class TestBoundary:
    def test_product_space_residual_near_zero_curvature(self):
        assert abs(boundary_residual(PRODUCT, Pitch(1.0), 1e-6)) < 1e-4

    def test_product_space_integrand_tends_to_pitch(self):
        sigma = np.append(np.linspace(HALF_PI, np.pi - 0.1, 20), np.pi)
        for a in (0.3, 1.0, 2.5):
            assert_allclose(boundary_integrand(PRODUCT, Pitch(a), 1e-7, sigma), a, rtol=1e-8)

    @pytest.mark.parametrize("kappa,tau,a", [(4.0, 0.5, 0.4), (4.0, 0.5, 0.9), (1.0, 1.0, 0.7), (1.0, 1.0, 1.5)])
    def test_residual_limit_at_zero_curvature(self, kappa, tau, a):
        space, pitch = AmbientSpace(kappa, tau), Pitch(a)
        sigma = np.linspace(HALF_PI, np.pi - 0.1, 20)
        assert_allclose(boundary_integrand(space, pitch, 1e-7, sigma), abs(4 * tau - a * kappa) / kappa, rtol=1e-8)
        expected = HALF_PI * (abs(4 * tau - a * kappa) / kappa - abs(a))
        assert abs(expected) > 0.1
        assert_allclose(boundary_residual(space, pitch, 1e-4), expected, atol=5e-3)

    @pytest.mark.parametrize("kappa,tau,a", [(4.0, 0.5, 0.4), (0.0, 1.0, 1.0), (1.0, 1.0, 1.5), (-1.0, 1.0, 2.0)])
    def test_residual_keeps_sign_from_existence_bound(self, kappa, tau, a):
        space, pitch = AmbientSpace(kappa, tau), Pitch(a)
        bound = existence_bound(space, pitch)
        assert bound > 0
        residuals = np.array([boundary_residual(space, pitch, bound * factor) for factor in (1.0, 1.5, 3.0)])
        assert np.all(np.abs(residuals) > 1e-8)
        assert len(set(np.sign(residuals))) == 1

    def test_limit_height(self):
        assert_allclose(limit_height(Pitch(-0.8)), 0.4 * np.pi)


class TestQuadrature:
    def test_polynomial(self):
        assert_allclose(integrate(lambda x: 3 * np.asarray(x) ** 2, 0.0, 2.0), 8.0, rtol=1e-12)

    def test_backwards_limits(self):
        assert_allclose(integrate(np.cos, HALF_PI, 0.0), -1.0, rtol=1e-12)

    def test_invalid_settings(self):
        with pytest.raises(DomainError):
            QuadratureSettings(abs_tol=-1.0)


class TestProfileCurve:
    def test_immutable_samples(self):
        curve = sample_profile(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), n_nodes=33)
        with pytest.raises(ValueError):
            curve.r_samples[0] = 0.0

    def test_frame_and_energy(self):
        curve = sample_profile(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9), n_nodes=33)
        frame = curve.to_frame()
        assert list(frame.columns) == ['sigma', 'r', 'h']
        assert len(frame) == len(curve) == 33
        assert np.max(curve.energy_residual(NIL)) < 1e-12
        assert_allclose(curve.sigma_samples[[0, -1]], [HALF_PI, 5 * HALF_PI])


class TestDirectIntegration:
    def _compare(self, space, pitch, point):
        r_minus, r_plus = radius_bounds(space, point)
        control = StepControl(n_samples=8000, sigma_stop=5 * HALF_PI)
        curve = integrate_ode_direct(space, pitch, point.H, (r_plus, HALF_PI, 0.0), (0.0, 40.0), control)
        assert_allclose(curve.sigma_samples[-1], 5 * HALF_PI, atol=1e-9)
        assert np.max(curve.energy_residual(space)) < 1e-8
        order = np.argsort(curve.sigma_samples)
        sigma = curve.sigma_samples[order]
        closed_r = radius_at(space, point, sigma)
        closed_h = height_samples(space, pitch, point, sigma)
        assert np.max(np.abs(closed_r - curve.r_samples[order])) < 1e-6
        assert np.max(np.abs(closed_h - curve.h_samples[order])) < 1e-6

    def test_nil_curve(self):
        self._compare(NIL, Pitch(1.0), ModuliPoint(2.0, -0.9))

    def test_berger_curve(self):
        self._compare(BERGER, Pitch(0.4), ModuliPoint(0.8, -0.2))

    @pytest.mark.slow
    def test_random_points(self):
        rng = np.random.default_rng(20240611)
        spaces = [PRODUCT, BERGER, NIL, AmbientSpace(-1.0, 1.0)]
        for i in range(50):
            space = spaces[i % len(spaces)]
            H = rng.uniform(1.0, 3.0)
            upper = -4.0 * H / space.kappa if space.kappa > 0 else -3.0
            J = rng.uniform(0.9 * upper, 0.1 * upper)
            self._compare(space, Pitch(rng.uniform(0.3, 0.45) if space.is_berger else 1.0), ModuliPoint(H, J))

    def test_rejects_bad_start(self):
        with pytest.raises(DomainError):
            integrate_ode_direct(BERGER, Pitch(0.4), 1.0, (2.0, HALF_PI, 0.0), (0.0, 1.0))
