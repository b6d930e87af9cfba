import numpy as np
import pytest

from curveflow import EUCLIDEAN, HYPERBOLIC, SPHERICAL, RadialCurve, SpaceForm


@pytest.fixture(params=[-1, 0, 1], ids=["hyperbolic", "euclidean", "spherical"])
def sf(request) -> SpaceForm:
    return SpaceForm(request.param)


def circle(sf: SpaceForm, r0: float, n: int = 256, order: int = 4) -> RadialCurve:
    return RadialCurve(sf, np.full(n, float(r0)), order)


def grid(n: int) -> np.ndarray:
    return np.arange(n) * (2.0 * np.pi / n)


def ellipse_curve(a: float = 2.0, b: float = 1.0, n: int = 1024, order: int = 4) -> RadialCurve:
    theta = grid(n)
    rho = a * b / np.sqrt((b * np.cos(theta)) ** 2 + (a * np.sin(theta)) ** 2)
    return RadialCurve(EUCLIDEAN, rho, order)
