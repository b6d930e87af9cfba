"""Closed-form geometry of the three simply connected 2-D space forms.

The ambient surface is a warped product (0, r_max) x S^1 with metric
dr^2 + phi(r)^2 dtheta^2, where the warp phi solves phi'' = -K phi,
phi(0) = 0, phi'(0) = 1 for a curvature label K in {-1, 0, +1}:

    K = -1:  phi = sinh r          (hyperbolic plane)
    K =  0:  phi = r               (Euclidean plane)
    K = +1:  phi = sin r           (hemisphere, r < pi/2)

Phi(r) = integral of phi from 0 to r is the potential of the radial
conformal field; the area element is phi(r) dr dtheta.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Keep sin-warp radii strictly below the equator, where cos(r) -> 0 and the
# radial flow equation degenerates.
POLE_MARGIN = 1e-6


@dataclass(frozen=True)
class SpaceForm:
    """Constant-curvature ambient surface, identified by its label K."""

    K: int

    def __post_init__(self) -> None:
        if self.K not in (-1, 0, 1):
            raise ValueError(f"curvature label must be -1, 0 or +1, got {self.K!r}")

    @property
    def r_max(self) -> float:
        """Upper end of the admissible radius range (pi/2 on the hemisphere)."""
        return 0.5 * math.pi if self.K == 1 else math.inf


HYPERBOLIC = SpaceForm(-1)
EUCLIDEAN = SpaceForm(0)
SPHERICAL = SpaceForm(1)


def warp(sf: SpaceForm, r):
    """Evaluate (phi, phi', Phi) at radius r (scalar or array).

    Raises ValueError if any radius lies outside [0, r_max).
    """
    ra = np.asarray(r, dtype=float)
    if np.any(ra < 0.0) or np.any(ra >= sf.r_max):
        raise ValueError(f"radius out of range [0, {sf.r_max}) for K={sf.K}")
    if sf.K == -1:
        return np.sinh(r), np.cosh(r), np.cosh(r) - 1.0
    if sf.K == 0:
        return r * 1.0, r * 0.0 + 1.0, 0.5 * r * r
    return np.sin(r), np.cos(r), 1.0 - np.cos(r)


def inverse_warp(sf: SpaceForm, ell: float) -> float:
    """Radius of the geodesic circle whose warp value is ell, i.e. phi(r) = ell.

    A circle of circumference L has warp value L / (2 pi), so this recovers
    the limit radius of a length-preserving flow.  For K = +1 the warp tops
    out at 1, so ell must lie in (0, 1).
    """
    if ell <= 0.0:
        raise ValueError(f"warp value must be positive, got {ell}")
    if sf.K == -1:
        return math.asinh(ell)
    if sf.K == 0:
        return ell
    if ell >= 1.0:
        raise ValueError(f"warp value must be < 1 on the hemisphere, got {ell}")
    return math.asin(ell)


def embed_unit_sphere(sf: SpaceForm, r, theta):
    """Embed the polar point (r, theta) of the hemisphere as a unit 3-vector.

    The origin of the polar chart maps to the north pole (0, 0, 1); the
    returned coordinates satisfy <x, x> = 1, so inner products of embedded
    points equal cosines of geodesic distances.
    """
    if sf.K != 1:
        raise ValueError("unit-sphere embedding requires K = +1")
    ra = np.asarray(r, dtype=float)
    if np.any(ra <= 0.0) or np.any(ra >= 0.5 * math.pi):
        raise ValueError("radius must lie strictly inside (0, pi/2)")
    sr = np.sin(r)
    return np.stack(
        np.broadcast_arrays(sr * np.cos(theta), sr * np.sin(theta), np.cos(r))
    )
