"""Scalar functionals, identity residuals and inequality margins of one curve.

The margins are set up so that the claimed inequality reads margin >= 0:
a negative value beyond quadrature slack falsifies the inequality on that
curve. Identity residuals (Minkowski, Gauss-Bonnet) instead converge to
zero under grid refinement; their size measures discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields as dataclass_fields

import numpy as np

from .curve import RadialCurve
from .spaceform import embed_unit_sphere

TWO_PI = 2.0 * math.pi

# Inequality margins are accepted down to -quad_slack; trapezoid error on
# N >= 512 smooth data sits far below this.
def quad_slack(length: float) -> float:
    return 1e-8 * max(1.0, length * length)


# Curves with min kappa in (-CONVEX_SLACK, 0] count as weakly convex.
CONVEX_SLACK = 1e-10

# Unit-vector tolerance for directions on the sphere.
UNIT_TOL = 1e-10


@dataclass(frozen=True)
class GeometryReport:
    """Every scalar the harness tracks for a single curve.

    hk_gap and weighted_margin are NaN when the curve fails the convexity
    requirement of the corresponding inequality.
    """

    L: float
    A: float
    deficit: float
    minkowski_residual: float
    hk_gap: float
    weighted_phi_kappa: float
    weighted_margin: float
    monotone_functional: float
    gb_residual: float
    kappa_min: float
    kappa_max: float
    rho_min: float
    rho_max: float
    u_min: float
    u_max: float
    grad_monitor: float

    @staticmethod
    def field_names() -> list[str]:
        return [f.name for f in dataclass_fields(GeometryReport)]

    def as_dict(self) -> dict[str, float]:
        return {name: getattr(self, name) for name in self.field_names()}


def isoperimetric_deficit(c: RadialCurve) -> float:
    """L^2 - 4 pi A + K A^2; nonnegative for simple closed curves."""
    L = c.length()
    A = c.area()
    return L * L - 4.0 * math.pi * A + c.sf.K * A * A


def minkowski_residual(c: RadialCurve) -> float:
    """integral (phi'(rho) - kappa u) ds; identically zero on smooth curves."""
    f = c.fields
    return c.integrate_ds(f.phi_prime - f.kappa * f.u)


def hk_gap(c: RadialCurve) -> float:
    """integral (phi'/kappa - u) ds, the Heintze-Karcher gap.

    Nonnegative for strictly convex curves, zero exactly on centered geodesic
    circles. Requires min kappa > 0 since 1/kappa enters directly.
    """
    f = c.fields
    kmin = float(f.kappa.min())
    if kmin <= 0.0:
        raise ValueError(f"Heintze-Karcher gap needs strict convexity (min kappa = {kmin:.3e})")
    return c.integrate_ds(f.phi_prime / f.kappa - f.u)


def weighted_phi_kappa(c: RadialCurve) -> float:
    """integral Phi(rho) kappa ds."""
    f = c.fields
    return c.integrate_ds(f.Phi * f.kappa)


def weighted_margin(c: RadialCurve) -> float:
    """integral Phi kappa ds - (L^2 - 2 pi A) / (2 pi).

    Nonnegative for convex curves in any of the three geometries; zero only
    on centered geodesic circles.
    """
    kmin = float(c.fields.kappa.min())
    if kmin < -CONVEX_SLACK:
        raise ValueError(f"weighted margin needs a convex curve (min kappa = {kmin:.3e})")
    L = c.length()
    A = c.area()
    return weighted_phi_kappa(c) - (L * L - TWO_PI * A) / TWO_PI


def monotone_functional(c: RadialCurve) -> float:
    """integral Phi kappa ds + A; non-increasing along the constrained flow."""
    return weighted_phi_kappa(c) + c.area()


def total_curvature_margin(c: RadialCurve) -> float:
    """Margin of the phi'-weighted total curvature bound in curved geometries.

    K = -1: integral kappa cosh(rho) ds >= 2 pi + L^2 / (2 pi)
    K = +1: integral kappa cos(rho) ds <= 2 pi - L^2 / (2 pi)

    Returns the slack of the applicable inequality (>= 0 for convex curves,
    0 exactly on centered circles). Undefined for K = 0.
    """
    if c.sf.K == 0:
        raise ValueError("the weighted total curvature bound applies only for K = +1 or -1")
    kmin = float(c.fields.kappa.min())
    if kmin < -CONVEX_SLACK:
        raise ValueError(f"weighted total curvature bound needs convexity (min kappa = {kmin:.3e})")
    f = c.fields
    L = c.length()
    integral = c.integrate_ds(f.kappa * f.phi_prime)
    if c.sf.K == -1:
        return integral - (TWO_PI + L * L / TWO_PI)
    return (TWO_PI - L * L / TWO_PI) - integral


def nonconvex_margin(c: RadialCurve) -> float:
    """integral Phi |kappa| ds - (A + A^2 / (2 pi)) in the hyperbolic plane.

    Holds for every simple closed curve there, convex or not.
    """
    if c.sf.K != -1:
        raise ValueError("the |kappa|-weighted bound is stated in the hyperbolic plane only")
    f = c.fields
    A = c.area()
    return c.integrate_ds(f.Phi * np.abs(f.kappa)) - (A + A * A / TWO_PI)


# -- direction-weighted curvature integrals on the sphere ------------------------


def gp_functional(c: RadialCurve, y: np.ndarray) -> float:
    """integral kappa(x) <x, y> ds for a unit direction y in R^3.

    <x, y> is the cosine of the geodesic distance from the curve point to y,
    so this is the curvature total weighted by closeness to y.
    """
    if c.sf.K != 1:
        raise ValueError("direction-weighted curvature integral requires K = +1")
    y = np.asarray(y, dtype=float)
    if y.shape != (3,) or abs(np.linalg.norm(y) - 1.0) > UNIT_TOL:
        raise ValueError("y must be a unit 3-vector")
    x = embed_unit_sphere(c.sf, c.rho, c.theta)
    return c.integrate_ds(c.fields.kappa * (x * y[:, None]).sum(axis=0))


def gp_argmax(c: RadialCurve) -> np.ndarray:
    """Unit direction maximizing the weighted integral: normalize integral kappa x ds.

    The first-order condition on the sphere makes the maximizer parallel to
    the vector integral, which is nonzero for strictly convex curves.
    """
    if c.sf.K != 1:
        raise ValueError("direction optimization requires K = +1")
    ok, kmin = c.is_strictly_convex()
    if not ok:
        raise ValueError(f"direction optimization needs strict convexity (min kappa = {kmin:.3e})")
    x = embed_unit_sphere(c.sf, c.rho, c.theta)
    v = c.h * (c.fields.kappa * c.fields.ds_dtheta * x).sum(axis=1)
    norm = float(np.linalg.norm(v))
    if norm <= 1e-12:
        raise ValueError("degenerate curvature barycenter; cannot pick a direction")
    return v / norm


def gp_gap(c: RadialCurve) -> float:
    """(2 pi - L^2 / (2 pi)) - max_y integral kappa <x, y> ds.

    Strictly positive on suitable non-circular convex spherical curves, which
    certifies that the curvature total weighted by any direction stays below
    the circle bound.
    """
    y0 = gp_argmax(c)
    L = c.length()
    return (TWO_PI - L * L / TWO_PI) - gp_functional(c, y0)


# -- assembled report -------------------------------------------------------------


def geometry_report(c: RadialCurve) -> GeometryReport:
    """Compute every tracked scalar for one curve.

    Convexity-dependent entries degrade to NaN instead of raising so that
    reports can be taken along flows that leave the convex class.
    """
    f = c.fields
    L = c.length()
    A = c.area()
    kmin = float(f.kappa.min())
    kmax = float(f.kappa.max())
    wpk = weighted_phi_kappa(c)
    if kmin > 0.0:
        gap = c.integrate_ds(f.phi_prime / f.kappa - f.u)
    else:
        gap = math.nan
    if kmin >= -CONVEX_SLACK:
        wmargin = wpk - (L * L - TWO_PI * A) / TWO_PI
    else:
        wmargin = math.nan
    return GeometryReport(
        L=L,
        A=A,
        deficit=L * L - 4.0 * math.pi * A + c.sf.K * A * A,
        minkowski_residual=c.integrate_ds(f.phi_prime - f.kappa * f.u),
        hk_gap=gap,
        weighted_phi_kappa=wpk,
        weighted_margin=wmargin,
        monotone_functional=wpk + A,
        gb_residual=c.integrate_ds(f.kappa) + c.sf.K * A - TWO_PI,
        kappa_min=kmin,
        kappa_max=kmax,
        rho_min=float(c.rho.min()),
        rho_max=float(c.rho.max()),
        u_min=float(f.u.min()),
        u_max=float(f.u.max()),
        grad_monitor=c.gradient_monitor(),
    )


def format_float(x: float) -> str:
    """17-significant-digit decimal form; non-finite values become null."""
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def report_to_json(report: GeometryReport) -> str:
    """Flat JSON object with deterministic field order and number formatting."""
    parts = [f'"{name}": {format_float(value)}' for name, value in report.as_dict().items()]
    return "{" + ", ".join(parts) + "}"
