import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from curveflow import SpaceForm, embed_unit_sphere, inverse_warp, warp


def test_curvature_label_validation():
    with pytest.raises(ValueError):
        SpaceForm(2)
    with pytest.raises(ValueError):
        SpaceForm(-3)


def test_radius_bound_only_on_hemisphere():
    assert SpaceForm(1).r_max == pytest.approx(math.pi / 2)
    assert SpaceForm(0).r_max == math.inf
    assert SpaceForm(-1).r_max == math.inf


@pytest.mark.parametrize(
    "k, r, expected",
    [
        (-1, 1.0, (1.175201, 1.543081, 0.543081)),
        (0, 2.0, (2.0, 1.0, 2.0)),
        (1, 0.5, (0.479426, 0.877583, 0.122417)),
    ],
)
def test_warp_closed_forms(k, r, expected):
    phi, phip, Phi = warp(SpaceForm(k), r)
    assert phi == pytest.approx(expected[0], abs=1e-6)
    assert phip == pytest.approx(expected[1], abs=1e-6)
    assert Phi == pytest.approx(expected[2], abs=1e-6)


def test_warp_is_vectorized():
    r = np.array([0.1, 0.5, 1.0])
    phi, phip, Phi = warp(SpaceForm(-1), r)
    assert np.allclose(phi, np.sinh(r))
    assert np.allclose(phip, np.cosh(r))
    assert np.allclose(Phi, np.cosh(r) - 1.0)


def test_warp_domain_errors():
    with pytest.raises(ValueError):
        warp(SpaceForm(0), -0.1)
    with pytest.raises(ValueError):
        warp(SpaceForm(1), math.pi / 2)
    with pytest.raises(ValueError):
        warp(SpaceForm(1), np.array([0.3, 1.7]))


@given(st.integers(-1, 1), st.floats(0.01, 1.5))
@settings(max_examples=60)
def test_warp_ode_by_finite_differences(k, r):
    # phi'' = -K phi, checked with a centered difference of phi'.
    sf = SpaceForm(k)
    eps = 1e-6
    _, phip_plus, _ = warp(sf, r + eps)
    _, phip_minus, _ = warp(sf, r - eps)
    phi, _, _ = warp(sf, r)
    second = (phip_plus - phip_minus) / (2 * eps)
    assert second == pytest.approx(-k * phi, abs=1e-6)


@given(st.integers(-1, 1), st.floats(1e-3, 1.5))
@settings(max_examples=60)
def test_warp_potential_identity(k, r):
    # Phi * phi' + Phi = phi^2 pointwise.
    phi, phip, Phi = warp(SpaceForm(k), r)
    assert Phi * phip + Phi == pytest.approx(phi * phi, rel=1e-12)


@pytest.mark.parametrize(
    "k, ell, expected",
    [(0, 3.0, 3.0), (-1, 1.175201, 1.0), (1, 0.479426, 0.5)],
)
def test_inverse_warp_round_trip(k, ell, expected):
    assert inverse_warp(SpaceForm(k), ell) == pytest.approx(expected, abs=1e-6)


@given(st.integers(-1, 1), st.floats(0.01, 1.4))
@settings(max_examples=60)
def test_inverse_warp_inverts_warp(k, r):
    sf = SpaceForm(k)
    phi, _, _ = warp(sf, r)
    assert inverse_warp(sf, float(phi)) == pytest.approx(r, rel=1e-12)


def test_inverse_warp_domain_errors():
    with pytest.raises(ValueError):
        inverse_warp(SpaceForm(0), 0.0)
    with pytest.raises(ValueError):
        inverse_warp(SpaceForm(-1), -1.0)
    with pytest.raises(ValueError):
        inverse_warp(SpaceForm(1), 1.0)


def test_embedding_closed_forms():
    sphere = SpaceForm(1)
    x = embed_unit_sphere(sphere, math.pi / 4, 0.0)
    assert np.allclose(x, [0.707107, 0.0, 0.707107], atol=1e-6)
    x = embed_unit_sphere(sphere, 0.5, math.pi / 2)
    assert np.allclose(x, [0.0, 0.479426, 0.877583], atol=1e-6)
    # pole limit
    x = embed_unit_sphere(sphere, 1e-9, 2.0)
    assert np.allclose(x, [0.0, 0.0, 1.0], atol=1e-8)


def test_embedding_requires_hemisphere():
    with pytest.raises(ValueError):
        embed_unit_sphere(SpaceForm(0), 0.5, 0.0)
    with pytest.raises(ValueError):
        embed_unit_sphere(SpaceForm(1), 1.6, 0.0)
    with pytest.raises(ValueError):
        embed_unit_sphere(SpaceForm(1), 0.0, 0.0)


@given(st.floats(1e-6, math.pi / 2 - 1e-6), st.floats(0, 2 * math.pi))
@settings(max_examples=80)
def test_embedding_lands_on_unit_sphere(r, theta):
    x = embed_unit_sphere(SpaceForm(1), r, theta)
    assert abs(np.linalg.norm(x) - 1.0) <= 1e-14


def test_embedding_is_vectorized():
    r = np.array([0.3, 0.6])
    theta = np.array([0.0, 1.0])
    x = embed_unit_sphere(SpaceForm(1), r, theta)
    assert x.shape == (3, 2)
    assert np.allclose(np.linalg.norm(x, axis=0), 1.0, atol=1e-14)
