import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import ellipe

from conftest import circle, ellipse_curve, grid
from curveflow import (
    EUCLIDEAN,
    HYPERBOLIC,
    SPHERICAL,
    RadialCurve,
    SpaceForm,
    curve_from_csv,
    curve_to_csv,
    sample_convex,
)

ELLIPSE_PERIMETER = 8.0 * ellipe(0.75)  # 4 a E(1 - b^2/a^2) for a=2, b=1


class TestConstruction:
    def test_rejects_small_or_odd_grids(self):
        with pytest.raises(ValueError):
            RadialCurve(EUCLIDEAN, np.ones(8))
        with pytest.raises(ValueError):
            RadialCurve(EUCLIDEAN, np.ones(17))

    def test_rejects_nonpositive_radii(self):
        rho = np.ones(32)
        rho[5] = 0.0
        with pytest.raises(ValueError):
            RadialCurve(EUCLIDEAN, rho)

    def test_rejects_radii_near_the_equator(self):
        with pytest.raises(ValueError) as err:
            RadialCurve(SPHERICAL, np.full(32, 1.6))
        assert "pi/2" in str(err.value)

    def test_rejects_bad_stencil_order(self):
        with pytest.raises(ValueError):
            RadialCurve(EUCLIDEAN, np.ones(32), stencil_order=3)

    def test_rho_is_frozen(self):
        c = circle(EUCLIDEAN, 1.0, 32)
        with pytest.raises(ValueError):
            c.rho[0] = 2.0


class TestDerivatives:
    def test_constant_profile_differentiates_to_zero(self, sf):
        r0 = 0.8 if sf.K == 1 else 1.3
        d1, d2 = circle(sf, r0, 64).derivatives()
        assert np.all(d1 == 0.0)
        assert np.all(d2 == 0.0)

    def test_order4_error_on_cosine(self):
        # Exact stencil error for mode 1 is h^4/30 at the theta = pi/2 node.
        n = 256
        h = 2 * math.pi / n
        theta = grid(n)
        c = RadialCurve(EUCLIDEAN, 2.0 + np.cos(theta), stencil_order=4)
        d1, _ = c.derivatives()
        err = np.abs(d1 + np.sin(theta)).max()
        assert err <= 1.25 * h**4 / 30.0
        assert err >= 0.75 * h**4 / 30.0

    def test_order2_halving_reduces_error_fourfold(self):
        errors = []
        for n in (128, 256):
            theta = grid(n)
            c = RadialCurve(EUCLIDEAN, 2.0 + np.cos(3 * theta), stencil_order=2)
            d1, _ = c.derivatives()
            errors.append(np.abs(d1 + 3.0 * np.sin(3 * theta)).max())
        ratio = errors[0] / errors[1]
        assert ratio == pytest.approx(4.0, rel=0.10)

    def test_second_derivative_on_cosine(self):
        n = 512
        theta = grid(n)
        c = RadialCurve(EUCLIDEAN, 2.0 + 0.3 * np.cos(2 * theta), stencil_order=4)
        _, d2 = c.derivatives()
        assert np.abs(d2 + 1.2 * np.cos(2 * theta)).max() < 1e-7


class TestFields:
    def test_circle_curvature_and_support(self):
        c = circle(HYPERBOLIC, 1.0, 256)
        f = c.fields
        assert np.allclose(f.kappa, 1.0 / math.tanh(1.0), atol=1e-12)
        assert np.allclose(f.kappa, 1.313035, atol=1e-6)
        assert np.allclose(f.u, math.sinh(1.0), atol=1e-12)

    def test_circle_closed_forms_each_geometry(self, sf):
        r0 = 0.8 if sf.K == 1 else 1.0
        c = circle(sf, r0, 64)
        phi = c.fields.phi[0]
        phip = c.fields.phi_prime[0]
        assert np.allclose(c.fields.kappa, phip / phi, atol=1e-9)
        assert c.length() == pytest.approx(2 * math.pi * phi, abs=1e-9)
        assert c.area() == pytest.approx(2 * math.pi * c.fields.Phi[0], abs=1e-9)

    def test_ellipse_vertex_curvature_and_support(self):
        c = ellipse_curve(2.0, 1.0, 1024)
        f = c.fields
        assert f.kappa[0] == pytest.approx(2.0, abs=1e-6)  # a / b^2
        assert f.u[0] == pytest.approx(2.0, abs=1e-10)

    def test_ellipse_minimum_curvature(self):
        c = ellipse_curve(2.0, 1.0, 1024)
        assert c.fields.kappa.min() == pytest.approx(0.25, abs=1e-4)  # b / a^2

    def test_arclength_density_positive(self, sf):
        rng = np.random.default_rng(7)
        rho = (0.7 if sf.K == 1 else 1.0) + 0.05 * rng.standard_normal(64)
        c = RadialCurve(sf, rho)
        assert np.all(c.fields.ds_dtheta > 0)


class TestIntegrals:
    def test_length_of_circles(self):
        assert circle(HYPERBOLIC, 1.0, 256).length() == pytest.approx(
            2 * math.pi * math.sinh(1.0), abs=1e-6
        )
        assert circle(SPHERICAL, 0.5, 256).length() == pytest.approx(
            2 * math.pi * math.sin(0.5), abs=1e-6
        )

    def test_length_of_ellipse_matches_elliptic_integral(self):
        assert ellipse_curve(2.0, 1.0, 1024).length() == pytest.approx(
            ELLIPSE_PERIMETER, abs=1e-4
        )

    def test_area_of_circles(self):
        assert circle(EUCLIDEAN, 2.0, 256).area() == pytest.approx(4 * math.pi, abs=1e-9)
        assert circle(SPHERICAL, 0.5, 256).area() == pytest.approx(
            2 * math.pi * (1 - math.cos(0.5)), abs=1e-6
        )

    def test_area_of_ellipse(self):
        assert ellipse_curve(2.0, 1.0, 1024).area() == pytest.approx(2 * math.pi, abs=1e-5)

    @given(st.floats(0.1, 2.0))
    @settings(max_examples=30)
    def test_trapezoid_exact_on_constants(self, value):
        c = circle(EUCLIDEAN, 1.0, 64)
        assert c.integrate(np.full(64, value)) == pytest.approx(
            2 * math.pi * value, rel=1e-14
        )

    @pytest.mark.parametrize("k, r0", [(-1, 1.2), (0, 0.7), (1, 0.9)])
    def test_isoperimetric_identity_on_circles(self, k, r0):
        c = circle(SpaceForm(k), r0, 256)
        L = c.length()
        A = c.area()
        deficit = L * L - 4 * math.pi * A + k * A * A
        assert abs(deficit) <= 1e-8 * L * L


class TestGaussBonnet:
    def test_circles_have_tiny_residual(self, sf):
        r0 = 0.8 if sf.K == 1 else 1.0
        assert abs(circle(sf, r0, 256).gauss_bonnet_residual()) <= 1e-10

    def test_ellipse_residual_drops_at_stencil_order(self):
        r512 = abs(ellipse_curve(2.0, 1.0, 512).gauss_bonnet_residual())
        r1024 = abs(ellipse_curve(2.0, 1.0, 1024).gauss_bonnet_residual())
        assert 8.0 <= r512 / r1024 <= 32.0  # nominal 2^4

    def test_random_convex_curve_residual_small(self):
        c = sample_convex(11, HYPERBOLIC, 1024)
        assert abs(c.gauss_bonnet_residual()) <= 1e-6


class TestConvexity:
    def test_circle_is_convex_with_circle_margin(self):
        c = circle(HYPERBOLIC, 1.0, 128)
        ok, margin = c.is_strictly_convex()
        assert ok
        assert margin == pytest.approx(math.cosh(1.0) / math.sinh(1.0), abs=1e-10)

    def test_large_mode3_wiggle_is_not_convex(self):
        theta = grid(256)
        c = RadialCurve(EUCLIDEAN, 1.0 + 0.5 * np.cos(3 * theta))
        ok, margin = c.is_strictly_convex()
        assert not ok
        assert margin < 0

    def test_ellipse_margin(self):
        ok, margin = ellipse_curve(2.0, 1.0, 1024).is_strictly_convex()
        assert ok
        assert margin == pytest.approx(0.25, abs=1e-4)


class TestGradientMonitor:
    def test_zero_on_circles(self, sf):
        r0 = 0.8 if sf.K == 1 else 1.0
        assert circle(sf, r0, 128).gradient_monitor() <= 1e-12

    def test_known_value_for_offset_profile(self):
        theta = grid(256)
        c = RadialCurve(EUCLIDEAN, 1.0 + 0.1 * np.cos(theta))
        assert c.gradient_monitor() == pytest.approx(0.100504, abs=1e-4)

    @given(st.floats(0.1, 10.0))
    @settings(max_examples=30)
    def test_scale_invariant_in_the_plane(self, scale):
        theta = grid(64)
        rho = 1.0 + 0.2 * np.cos(2 * theta)
        a = RadialCurve(EUCLIDEAN, rho).gradient_monitor()
        b = RadialCurve(EUCLIDEAN, scale * rho).gradient_monitor()
        assert a == pytest.approx(b, rel=1e-12)


class TestRefinementOrder:
    @pytest.mark.parametrize("order", [2, 4])
    def test_length_converges_at_stencil_order(self, order):
        errors = []
        for n in (128, 256, 512):
            c = ellipse_curve(2.0, 1.0, n, order)
            errors.append(abs(c.length() - ELLIPSE_PERIMETER))
        rates = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(rates >= order - 0.5)


class TestSerialization:
    def test_round_trip_is_bit_exact(self):
        rng = np.random.default_rng(3)
        rho = 1.0 + 0.1 * rng.standard_normal(64)
        c = RadialCurve(HYPERBOLIC, rho, stencil_order=2)
        text = curve_to_csv(c)
        back = curve_from_csv(text, stencil_order=2)
        assert back.sf.K == -1
        assert np.array_equal(back.rho, c.rho)

    def test_header_carries_geometry_and_size(self):
        text = curve_to_csv(circle(SPHERICAL, 0.5, 32))
        assert text.splitlines()[0] == "# K=1 N=32"

    def test_malformed_inputs_rejected(self):
        with pytest.raises(ValueError):
            curve_from_csv("0.0,1.0\n")
        with pytest.raises(ValueError):
            curve_from_csv("# K=0 N=4\n0,1\n1,1\n2,1\n3,1\n")
        with pytest.raises(ValueError):
            curve_from_csv("# K=0 N=32\n0,1\n")
