"""Closed star-shaped curves sampled as radial graphs over a periodic grid.

A curve is stored as N radii rho_i at the equispaced angles theta_i = 2 pi i / N.
All differential quantities come from periodic central differences (order 2 or 4)
and all integrals from the periodic trapezoid rule, which on smooth periodic
data is spectrally accurate, so the stencil order dominates the overall error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .spaceform import POLE_MARGIN, SpaceForm, warp

MIN_GRID = 16


@dataclass(frozen=True)
class CurveFields:
    """Pointwise geometry of one curve along the grid.

    rho_t1, rho_t2 are the first and second theta-derivatives of the radius,
    kappa the geodesic curvature, u the support function <V, nu> generated by
    the radial conformal field, and ds_dtheta the arclength density
    sqrt(phi^2 + rho_t1^2).
    """

    rho_t1: np.ndarray
    rho_t2: np.ndarray
    kappa: np.ndarray
    u: np.ndarray
    ds_dtheta: np.ndarray
    phi: np.ndarray
    phi_prime: np.ndarray
    Phi: np.ndarray


@dataclass(frozen=True)
class RadialCurve:
    """Immutable radial graph of a closed star-shaped curve.

    The grid size must be even and at least 16 so that low-mode experiments
    stay far from the Nyquist frequency. Radii must be positive and, on the
    hemisphere, stay below pi/2 - POLE_MARGIN.
    """

    sf: SpaceForm
    rho: np.ndarray
    stencil_order: int = 4

    def __post_init__(self) -> None:
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 1:
            raise ValueError("rho must be a one-dimensional array")
        n = rho.shape[0]
        if n < MIN_GRID or n % 2 != 0:
            raise ValueError(f"grid size must be even and >= {MIN_GRID}, got {n}")
        if self.stencil_order not in (2, 4):
            raise ValueError(f"stencil order must be 2 or 4, got {self.stencil_order}")
        if not np.all(np.isfinite(rho)):
            raise ValueError("rho contains non-finite values")
        if np.any(rho <= 0.0):
            raise ValueError("rho must be positive everywhere")
        if self.sf.K == 1 and np.any(rho >= 0.5 * math.pi - POLE_MARGIN):
            raise ValueError(
                f"rho must stay below pi/2 - {POLE_MARGIN} on the hemisphere "
                f"(max rho = {rho.max():.6f})"
            )
        rho.flags.writeable = False
        object.__setattr__(self, "rho", rho)

    @property
    def N(self) -> int:
        return self.rho.shape[0]

    @property
    def h(self) -> float:
        return 2.0 * math.pi / self.N

    @cached_property
    def theta(self) -> np.ndarray:
        return np.arange(self.N) * self.h

    def with_rho(self, rho: np.ndarray) -> "RadialCurve":
        """New curve on the same grid and geometry with different radii."""
        return RadialCurve(self.sf, rho, self.stencil_order)

    # -- differential structure ------------------------------------------------

    def derivatives(self) -> tuple[np.ndarray, np.ndarray]:
        """Periodic central-difference d rho/d theta and d^2 rho/d theta^2."""
        return periodic_derivatives(self.rho, self.h, self.stencil_order)

    @cached_property
    def fields(self) -> CurveFields:
        """All pointwise quantities, computed once per curve."""
        d1, d2 = self.derivatives()
        phi, phip, Phi = warp(self.sf, self.rho)
        w2 = phi * phi + d1 * d1
        ds = np.sqrt(w2)
        kappa = (phi * phi * phip + 2.0 * d1 * d1 * phip - d2 * phi) / (w2 * ds)
        u = phi * phi / ds
        return CurveFields(
            rho_t1=d1, rho_t2=d2, kappa=kappa, u=u, ds_dtheta=ds,
            phi=phi, phi_prime=phip, Phi=Phi,
        )

    # -- integral quantities ---------------------------------------------------

    def integrate(self, values: np.ndarray) -> float:
        """Periodic trapezoid rule: h * sum(values)."""
        return self.h * float(np.sum(values))

    def integrate_ds(self, values: np.ndarray) -> float:
        """Arclength integral of pointwise values along the curve."""
        return self.integrate(values * self.fields.ds_dtheta)

    def length(self) -> float:
        return self.integrate(self.fields.ds_dtheta)

    def area(self) -> float:
        """Enclosed area: integral of Phi(rho) over theta (star-shaped only)."""
        return self.integrate(self.fields.Phi)

    def gauss_bonnet_residual(self) -> float:
        """integral kappa ds + K * area - 2 pi; tends to 0 at the stencil order."""
        return (
            self.integrate_ds(self.fields.kappa)
            + self.sf.K * self.area()
            - 2.0 * math.pi
        )

    def is_strictly_convex(self) -> tuple[bool, float]:
        """(min kappa > 0, min kappa)."""
        margin = float(self.fields.kappa.min())
        return margin > 0.0, margin

    def gradient_monitor(self) -> float:
        """max |rho_theta| / phi(rho), the slope of the curve seen radially.

        The maximum of this ratio does not increase under the constrained
        flow, which makes it a useful per-run health monitor.
        """
        f = self.fields
        return float(np.max(np.abs(f.rho_t1) / f.phi))


def periodic_derivatives(f: np.ndarray, h: float, order: int) -> tuple[np.ndarray, np.ndarray]:
    """Central first and second differences on a periodic grid.

    Written in terms of offsets from the center value (the coefficients sum
    to zero), so both stencils vanish identically on constants and geodesic
    circles are differentiated without rounding error.
    """
    ep1 = np.roll(f, -1) - f
    em1 = np.roll(f, 1) - f
    if order == 2:
        d1 = (ep1 - em1) / (2.0 * h)
        d2 = (ep1 + em1) / (h * h)
        return d1, d2
    if order == 4:
        ep2 = np.roll(f, -2) - f
        em2 = np.roll(f, 2) - f
        d1 = (em2 - 8.0 * em1 + 8.0 * ep1 - ep2) / (12.0 * h)
        d2 = (-em2 + 16.0 * em1 + 16.0 * ep1 - ep2) / (12.0 * h * h)
        return d1, d2
    raise ValueError(f"stencil order must be 2 or 4, got {order}")


# -- serialization --------------------------------------------------------------


def curve_to_csv(curve: RadialCurve) -> str:
    """Plain-text form: '# K=<k> N=<n>' header then theta,rho rows.

    Values carry 17 significant digits, enough to round-trip float64 exactly.
    """
    lines = [f"# K={curve.sf.K} N={curve.N}"]
    for th, r in zip(curve.theta, curve.rho):
        lines.append(f"{th:.17g},{r:.17g}")
    return "\n".join(lines) + "\n"


def curve_from_csv(text: str, stencil_order: int = 4) -> RadialCurve:
    """Parse the format written by curve_to_csv."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing '# K=<k> N=<n>' header line")
    header = dict(
        item.split("=", 1) for item in lines[0].lstrip("#").split() if "=" in item
    )
    try:
        k = int(header["K"])
        n = int(header["N"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed curve header {lines[0]!r}") from exc
    rows = lines[1:]
    if len(rows) != n:
        raise ValueError(f"expected {n} rows, found {len(rows)}")
    rho = np.array([float(row.split(",")[1]) for row in rows])
    return RadialCurve(SpaceForm(k), rho, stencil_order)


def save_curve(curve: RadialCurve, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(curve_to_csv(curve))


def load_curve(path, stencil_order: int = 4) -> RadialCurve:
    with open(path) as fh:
        return curve_from_csv(fh.read(), stencil_order)
