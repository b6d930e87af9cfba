"""Curve generators and the deterministic random stream behind the sweeps.

Randomness comes from a self-contained splitmix64 stream rather than a
platform RNG so that a sweep's output is reproducible bit for bit anywhere,
including from ports to other languages. The full state transition is:

    state = (state + 0x9E3779B97F4A7C15) mod 2^64
    z = state
    z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    output = z XOR (z >> 31)

Floats in [0, 1) take the top 53 bits of the output divided by 2^53.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .curve import RadialCurve
from .spaceform import POLE_MARGIN, SpaceForm

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """Minimal deterministic 64-bit generator (splitmix64)."""

    def __init__(self, seed: int) -> None:
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * 2.0**-53

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def choice_int(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (inclusive), by rejection-free scaling."""
        span = hi - lo + 1
        return lo + int(self.random() * span)


def item_seed(master_seed: int, index: int) -> int:
    """Seed for the index-th independent item of a sweep."""
    return (master_seed + index) & _MASK64


# -- curve specifications -----------------------------------------------------------

MAX_RANDOM_MODE = 8
RANDOM_AMPLITUDE_SCALE = 0.3  # per-mode bound RANDOM_AMPLITUDE_SCALE / m^3
REJECTION_LIMIT = 1000


@dataclass(frozen=True)
class CurveSpec:
    """Parametric description of an initial curve.

    kind 'circle'  : rho = r0
    kind 'fourier' : rho = r0 * (1 + sum a_m cos(m theta) + b_m sin(m theta))
    kind 'ellipse' : radial graph of the axis-aligned ellipse (K = 0 only)
    kind 'random'  : seeded fourier draw, rejected until strictly convex
    """

    kind: str
    r0: float = 1.0
    cos_amps: tuple[tuple[int, float], ...] = ()
    sin_amps: tuple[tuple[int, float], ...] = ()
    axes: tuple[float, float] = (2.0, 1.0)
    seed: int = 0


def fourier_profile(
    theta: np.ndarray,
    r0: float,
    cos_amps=(),
    sin_amps=(),
) -> np.ndarray:
    rho = np.full_like(theta, 1.0)
    for m, amp in cos_amps:
        rho += amp * np.cos(m * theta)
    for m, amp in sin_amps:
        rho += amp * np.sin(m * theta)
    return r0 * rho


def ellipse_profile(theta: np.ndarray, a: float, b: float) -> np.ndarray:
    return a * b / np.sqrt((b * np.cos(theta)) ** 2 + (a * np.sin(theta)) ** 2)


def generate(spec: CurveSpec, sf: SpaceForm, N: int, stencil_order: int = 4) -> RadialCurve:
    """Realize a curve spec on an N-node grid; validity is enforced by the curve."""
    theta = np.arange(N) * (2.0 * math.pi / N)
    if spec.kind == "circle":
        return RadialCurve(sf, np.full(N, float(spec.r0)), stencil_order)
    if spec.kind == "fourier":
        rho = fourier_profile(theta, spec.r0, spec.cos_amps, spec.sin_amps)
        return RadialCurve(sf, rho, stencil_order)
    if spec.kind == "ellipse":
        if sf.K != 0:
            raise ValueError("ellipse curves are defined in the flat geometry only")
        a, b = spec.axes
        if a <= 0 or b <= 0:
            raise ValueError(f"ellipse semi-axes must be positive, got {spec.axes}")
        return RadialCurve(sf, ellipse_profile(theta, a, b), stencil_order)
    if spec.kind == "random":
        return sample_convex(spec.seed, sf, N, spec.r0, stencil_order)
    raise ValueError(f"unknown curve kind {spec.kind!r}")


def sample_convex(
    seed: int, sf: SpaceForm, N: int, r0: float = 1.0, stencil_order: int = 4
) -> RadialCurve:
    """Random strictly convex curve around radius r0.

    Draws relative Fourier coefficients with |a_m|, |b_m| <= 0.3 / m^3 for
    modes m <= 8 and rejects draws that are invalid or not strictly convex.
    """
    rng = SplitMix64(seed)
    theta = np.arange(N) * (2.0 * math.pi / N)
    for _ in range(REJECTION_LIMIT):
        cos_amps = []
        sin_amps = []
        for m in range(1, MAX_RANDOM_MODE + 1):
            bound = RANDOM_AMPLITUDE_SCALE / m**3
            cos_amps.append((m, rng.uniform(-bound, bound)))
            sin_amps.append((m, rng.uniform(-bound, bound)))
        rho = fourier_profile(theta, r0, cos_amps, sin_amps)
        if np.any(rho <= 0.0):
            continue
        if sf.K == 1 and np.any(rho >= 0.5 * math.pi - POLE_MARGIN):
            continue
        curve = RadialCurve(sf, rho, stencil_order)
        if curve.is_strictly_convex()[0]:
            return curve
    raise RuntimeError(f"no strictly convex draw within {REJECTION_LIMIT} attempts")


def sample_nonconvex_star(
    seed: int, sf: SpaceForm, N: int, r0: float = 1.0, stencil_order: int = 4
) -> RadialCurve:
    """Random star-shaped curve that is certainly not convex.

    One dominant mode m in [3, 6] with amplitude large enough to push the
    curvature negative somewhere, plus a weaker secondary mode; draws are
    rejected until the radii stay positive and min kappa < 0.
    """
    rng = SplitMix64(seed)
    theta = np.arange(N) * (2.0 * math.pi / N)
    for _ in range(REJECTION_LIMIT):
        m = rng.choice_int(3, 6)
        main = rng.uniform(4.0, 7.0) / (m * m)
        m2 = rng.choice_int(2, MAX_RANDOM_MODE)
        side = rng.uniform(-0.5, 0.5) / (m2 * m2)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        rho = r0 * (
            1.0 + main * np.cos(m * theta + phase) + side * np.cos(m2 * theta)
        )
        if np.any(rho <= 0.1 * r0):
            continue
        if sf.K == 1 and np.any(rho >= 0.5 * math.pi - POLE_MARGIN):
            continue
        curve = RadialCurve(sf, rho, stencil_order)
        if not curve.is_strictly_convex()[0]:
            return curve
    raise RuntimeError(f"no non-convex star-shaped draw within {REJECTION_LIMIT} attempts")
