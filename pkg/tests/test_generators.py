import math

import numpy as np
import pytest

from conftest import grid
from curveflow import (
    EUCLIDEAN,
    HYPERBOLIC,
    SPHERICAL,
    CurveSpec,
    SplitMix64,
    generate,
    item_seed,
    sample_convex,
    sample_nonconvex_star,
)


class TestSplitMix64:
    def test_reference_first_outputs_for_seed_zero(self):
        # Published reference sequence of the splitmix64 state transition.
        rng = SplitMix64(0)
        assert rng.next_u64() == 0xE220A8397B1DCDAF
        assert rng.next_u64() == 0x6E789E6AA1B965F4
        assert rng.next_u64() == 0x06C45D188009454F

    def test_streams_are_reproducible(self):
        a = SplitMix64(987654321)
        b = SplitMix64(987654321)
        assert [a.next_u64() for _ in range(10)] == [b.next_u64() for _ in range(10)]

    def test_seed_wraps_to_64_bits(self):
        assert SplitMix64(2**64 + 5).next_u64() == SplitMix64(5).next_u64()

    def test_random_unit_interval(self):
        rng = SplitMix64(7)
        values = [rng.random() for _ in range(1000)]
        assert all(0.0 <= v < 1.0 for v in values)
        assert abs(np.mean(values) - 0.5) < 0.05

    def test_uniform_bounds(self):
        rng = SplitMix64(11)
        values = [rng.uniform(-2.0, 3.0) for _ in range(500)]
        assert min(values) >= -2.0
        assert max(values) < 3.0

    def test_choice_int_covers_inclusive_range(self):
        rng = SplitMix64(13)
        values = {rng.choice_int(3, 6) for _ in range(300)}
        assert values == {3, 4, 5, 6}

    def test_item_seeds_differ(self):
        seeds = {item_seed(42, i) for i in range(100)}
        assert len(seeds) == 100
        assert item_seed(2**64 - 1, 1) == 0


class TestGenerate:
    def test_circle(self):
        c = generate(CurveSpec(kind="circle", r0=1.0), EUCLIDEAN, 64)
        assert np.all(c.rho == 1.0)

    def test_fourier_profile(self):
        spec = CurveSpec(kind="fourier", r0=2.0, cos_amps=((2, 0.1),), sin_amps=((3, 0.05),))
        c = generate(spec, HYPERBOLIC, 128)
        theta = grid(128)
        expected = 2.0 * (1.0 + 0.1 * np.cos(2 * theta) + 0.05 * np.sin(3 * theta))
        assert np.allclose(c.rho, expected, atol=1e-15)

    def test_ellipse_axis_values(self):
        c = generate(CurveSpec(kind="ellipse", axes=(2.0, 1.0)), EUCLIDEAN, 64)
        assert c.rho[0] == pytest.approx(2.0, abs=1e-14)
        assert c.rho[16] == pytest.approx(1.0, abs=1e-14)  # theta = pi/2

    def test_ellipse_needs_flat_geometry(self):
        with pytest.raises(ValueError):
            generate(CurveSpec(kind="ellipse"), HYPERBOLIC, 64)
        with pytest.raises(ValueError):
            generate(CurveSpec(kind="ellipse", axes=(0.0, 1.0)), EUCLIDEAN, 64)

    def test_random_is_deterministic(self):
        a = generate(CurveSpec(kind="random", seed=99), EUCLIDEAN, 128)
        b = generate(CurveSpec(kind="random", seed=99), EUCLIDEAN, 128)
        assert np.array_equal(a.rho, b.rho)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            generate(CurveSpec(kind="pentagon"), EUCLIDEAN, 64)

    def test_hemisphere_radius_violation_names_the_bound(self):
        with pytest.raises(ValueError, match="pi/2"):
            generate(CurveSpec(kind="circle", r0=1.6), SPHERICAL, 64)


class TestSampleConvex:
    @pytest.mark.parametrize("k, r0", [(-1, 1.0), (0, 1.0), (1, 0.7)])
    def test_samples_are_valid_and_strictly_convex(self, k, r0):
        from curveflow import SpaceForm

        sf = SpaceForm(k)
        for i in range(20):
            c = sample_convex(item_seed(3, i), sf, 256, r0)
            ok, margin = c.is_strictly_convex()
            assert ok and margin > 0
            assert np.all(c.rho > 0)
            if k == 1:
                assert c.rho.max() < math.pi / 2

    def test_deterministic(self):
        a = sample_convex(1234, HYPERBOLIC, 128)
        b = sample_convex(1234, HYPERBOLIC, 128)
        assert np.array_equal(a.rho, b.rho)

    def test_rejection_exhaustion_raises(self):
        # A base radius at the pole margin leaves no room for any draw.
        with pytest.raises(RuntimeError, match="1000"):
            sample_convex(1, SPHERICAL, 64, r0=1.5)


class TestSampleNonconvex:
    def test_samples_are_star_shaped_but_not_convex(self):
        for i in range(20):
            c = sample_nonconvex_star(item_seed(17, i), HYPERBOLIC, 256)
            assert np.all(c.rho > 0)
            ok, margin = c.is_strictly_convex()
            assert not ok and margin < 0

    def test_deterministic(self):
        a = sample_nonconvex_star(55, HYPERBOLIC, 128)
        b = sample_nonconvex_star(55, HYPERBOLIC, 128)
        assert np.array_equal(a.rho, b.rho)
