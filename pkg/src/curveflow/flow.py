"""Method-of-lines evolution of radial curves under pluggable normal speeds.

The semidiscrete system is d rho_i/dt = F * sqrt(1 + rho_theta^2 / phi^2)
evaluated at node i, where F is the chosen normal speed. Time stepping is
classical RK4 with a per-step parabolic CFL bound sigma * h^2 / max(D),
D being the diffusivity of the law read off its dependence on rho_thetatheta.

Runs record a GeometryReport plus a curve snapshot on a fixed step stride;
conservation and monotonicity monitors are evaluated on that record and
reported as structured violations, never as hard errors.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .curve import RadialCurve
from .functionals import GeometryReport, geometry_report
from .spaceform import POLE_MARGIN, inverse_warp, warp


class SpeedLaw(enum.Enum):
    """Normal speed driving the flow.

    CONSTRAINED_ICF  F = phi'/kappa - u   length-preserving, needs convexity
    CURVE_SHORTENING F = -kappa           any curve
    CLASSICAL_ICF    F = 1/kappa          expanding, needs convexity
    """

    CONSTRAINED_ICF = "constrained-icf"
    CURVE_SHORTENING = "curve-shortening"
    CLASSICAL_ICF = "classical-icf"

    @property
    def law_id(self) -> int:
        return {
            SpeedLaw.CONSTRAINED_ICF: _kernels.LAW_CONSTRAINED,
            SpeedLaw.CURVE_SHORTENING: _kernels.LAW_SHORTENING,
            SpeedLaw.CLASSICAL_ICF: _kernels.LAW_CLASSICAL,
        }[self]

    @property
    def requires_convexity(self) -> bool:
        return self is not SpeedLaw.CURVE_SHORTENING


class FlowStatus(enum.Enum):
    CONVERGED = "Converged"
    TIME_LIMIT = "TimeLimit"
    CONVEXITY_LOST = "ConvexityLost"
    POLE_HIT = "PoleHit"
    STEP_UNDERFLOW = "StepUnderflow"


_STATUS_BY_CODE = {
    _kernels.CONVERGED: FlowStatus.CONVERGED,
    _kernels.TIME_LIMIT: FlowStatus.TIME_LIMIT,
    _kernels.CONVEXITY_LOST: FlowStatus.CONVEXITY_LOST,
    _kernels.POLE_HIT: FlowStatus.POLE_HIT,
    _kernels.STEP_UNDERFLOW: FlowStatus.STEP_UNDERFLOW,
}


class FlowFailure(RuntimeError):
    """Terminal condition raised by pointwise flow operations."""

    status: FlowStatus = FlowStatus.STEP_UNDERFLOW


class ConvexityLost(FlowFailure):
    status = FlowStatus.CONVEXITY_LOST


class PoleHit(FlowFailure):
    status = FlowStatus.POLE_HIT


class StepUnderflow(FlowFailure):
    status = FlowStatus.STEP_UNDERFLOW


_FAILURE_BY_CODE = {
    _kernels.CONVEXITY_LOST: ConvexityLost,
    _kernels.POLE_HIT: PoleHit,
    _kernels.STEP_UNDERFLOW: StepUnderflow,
}


@dataclass(frozen=True)
class FlowConfig:
    sigma: float = 0.1
    t_end: float = 50.0
    eps_stationary: float = 1e-9
    report_stride: int = 200
    refine_on_failure: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma <= 0.5:
            raise ValueError(f"sigma must lie in (0, 0.5], got {self.sigma}")
        if self.t_end <= 0.0:
            raise ValueError(f"t_end must be positive, got {self.t_end}")
        if self.report_stride < 1:
            raise ValueError("report_stride must be >= 1")


@dataclass(frozen=True)
class MonitorViolation:
    """One monitored quantity exceeding its slack at one recorded time."""

    monitor: str
    time: float
    excess: float


@dataclass
class FlowTrace:
    """Everything one run produced, on the recording stride."""

    law: SpeedLaw
    config: FlowConfig
    times: np.ndarray
    reports: list[GeometryReport]
    snapshots: list[RadialCurve]
    speed_integrals: np.ndarray        # integral F ds at each recorded time
    speed_kappa_integrals: np.ndarray  # integral F kappa ds at each recorded time
    status: FlowStatus
    t_final: float
    steps: int
    violations: list[MonitorViolation] = field(default_factory=list)
    refined: bool = False


# -- pointwise operations ---------------------------------------------------------


def _kernel_stats(c: RadialCurve, law: SpeedLaw):
    out = np.empty(c.N)
    status, sup, max_diff, kmin, kmax = _kernels.speed_kernel(
        c.rho, c.sf.K, law.law_id, c.stencil_order, c.h, POLE_MARGIN, out
    )
    if status != _kernels.RUNNING:
        raise _FAILURE_BY_CODE[status](f"flow speed undefined: {_STATUS_BY_CODE[status].value}")
    return out, sup, max_diff, kmin, kmax


def rhs(c: RadialCurve, law: SpeedLaw) -> np.ndarray:
    """d rho/dt per node under the law; raises ConvexityLost when required."""
    return _kernel_stats(c, law)[0]


def stable_dt(c: RadialCurve, law: SpeedLaw, sigma: float = 0.1) -> float:
    """Parabolic CFL bound sigma * h^2 / max diffusivity."""
    _, _, max_diff, _, _ = _kernel_stats(c, law)
    dt = sigma * c.h * c.h / max_diff
    if dt < _kernels.MIN_DT:
        raise StepUnderflow(f"stable step {dt:.3e} below {_kernels.MIN_DT}")
    return dt


def step(c: RadialCurve, law: SpeedLaw, dt: float) -> RadialCurve:
    """One classical RK4 update; stages and result are validated like any curve."""

    def advanced(rho: np.ndarray) -> RadialCurve:
        try:
            return c.with_rho(rho)
        except ValueError as exc:
            raise PoleHit(str(exc)) from exc

    k1 = rhs(c, law)
    k2 = rhs(advanced(c.rho + 0.5 * dt * k1), law)
    k3 = rhs(advanced(c.rho + 0.5 * dt * k2), law)
    k4 = rhs(advanced(c.rho + dt * k3), law)
    return advanced(c.rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def speed_integrals(c: RadialCurve, law: SpeedLaw) -> tuple[float, float]:
    """(integral F ds, integral F kappa ds) for diagnostic identities.

    NaN when the law divides by kappa and the curve is not strictly convex
    (only possible on the terminal state of a failed run).
    """
    f = c.fields
    if law is SpeedLaw.CURVE_SHORTENING:
        F = -f.kappa
    elif f.kappa.min() <= 0.0:
        return math.nan, math.nan
    elif law is SpeedLaw.CONSTRAINED_ICF:
        F = f.phi_prime / f.kappa - f.u
    else:
        F = 1.0 / f.kappa
    return c.integrate_ds(F), c.integrate_ds(F * f.kappa)


# -- full runs --------------------------------------------------------------------


def run(c0: RadialCurve, law: SpeedLaw, config: FlowConfig = FlowConfig()) -> FlowTrace:
    """Integrate until stationarity, t_end, or a terminal failure.

    With refine_on_failure set, a failed run is retried once on a grid with
    twice the nodes (trigonometric interpolation of the initial curve) and
    half the CFL factor.
    """
    trace = _run_once(c0, law, config)
    failed = trace.status in (
        FlowStatus.CONVEXITY_LOST,
        FlowStatus.POLE_HIT,
        FlowStatus.STEP_UNDERFLOW,
    )
    if failed and config.refine_on_failure:
        retry_config = FlowConfig(
            sigma=0.5 * config.sigma,
            t_end=config.t_end,
            eps_stationary=config.eps_stationary,
            report_stride=config.report_stride,
            refine_on_failure=False,
        )
        trace = _run_once(refine_curve(c0), law, retry_config)
        trace.refined = True
    return trace


def _run_once(c0: RadialCurve, law: SpeedLaw, config: FlowConfig) -> FlowTrace:
    rho = c0.rho.copy()
    t = 0.0
    steps = 0

    times: list[float] = []
    reports: list[GeometryReport] = []
    snapshots: list[RadialCurve] = []
    f_ints: list[float] = []
    fk_ints: list[float] = []

    def record(tc: float, state: np.ndarray) -> None:
        curve = c0.with_rho(state.copy())
        times.append(tc)
        reports.append(geometry_report(curve))
        snapshots.append(curve)
        fi, fki = speed_integrals(curve, law)
        f_ints.append(fi)
        fk_ints.append(fki)

    record(0.0, rho)
    while True:
        t, done, code = _kernels.rk4_chunk(
            rho,
            c0.sf.K,
            law.law_id,
            c0.stencil_order,
            config.sigma,
            c0.h,
            config.eps_stationary,
            t,
            config.t_end,
            config.report_stride,
            POLE_MARGIN,
        )
        steps += done
        if done > 0:
            record(t, rho)
        if code != _kernels.RUNNING:
            status = _STATUS_BY_CODE[code]
            break

    trace = FlowTrace(
        law=law,
        config=config,
        times=np.array(times),
        reports=reports,
        snapshots=snapshots,
        speed_integrals=np.array(f_ints),
        speed_kappa_integrals=np.array(fk_ints),
        status=status,
        t_final=t,
        steps=steps,
    )
    trace.violations = check_monitors(trace)
    return trace


def refine_curve(c: RadialCurve) -> RadialCurve:
    """Same curve resampled on twice the nodes by trigonometric interpolation."""
    n = c.N
    spectrum = np.fft.rfft(c.rho)
    padded = np.zeros(n + 1, dtype=complex)
    padded[: n // 2] = spectrum[: n // 2]
    padded[n // 2] = 0.5 * spectrum[n // 2]  # split the Nyquist bin
    rho2 = 2.0 * np.fft.irfft(padded, 2 * n)
    return RadialCurve(c.sf, rho2, c.stencil_order)


# -- run monitors -----------------------------------------------------------------

LENGTH_SLACK = 1e-5
AREA_SLACK = 1e-8
DEFICIT_SLACK = 1e-8
KAPPA_SLACK = 1e-6
RADIUS_SLACK = 1e-8
GRADIENT_SLACK = 1e-6
MONOTONE_SLACK = 1e-8
CLASSICAL_LENGTH_SLACK = 1e-4
SHORTENING_AREA_SLACK = 1e-6
IDENTITY_REL_TOL = 0.01


def check_monitors(trace: FlowTrace) -> list[MonitorViolation]:
    """Evaluate every applicable conservation/monotonicity bound on the record."""
    out: list[MonitorViolation] = []
    reps = trace.reports
    ts = trace.times
    if len(reps) < 1:
        return out

    def flag(name: str, when: float, excess: float) -> None:
        out.append(MonitorViolation(name, when, excess))

    if trace.law is SpeedLaw.CONSTRAINED_ICF:
        r0 = reps[0]
        for k, (tk, rk) in enumerate(zip(ts, reps)):
            drift = abs(rk.L - r0.L) / r0.L
            if drift > LENGTH_SLACK:
                flag("length_preserved", tk, drift - LENGTH_SLACK)
            if rk.kappa_min < r0.kappa_min - KAPPA_SLACK:
                flag("kappa_lower_bound", tk, r0.kappa_min - KAPPA_SLACK - rk.kappa_min)
            if rk.kappa_max > r0.kappa_max + KAPPA_SLACK:
                flag("kappa_upper_bound", tk, rk.kappa_max - r0.kappa_max - KAPPA_SLACK)
            if rk.rho_min < r0.rho_min - RADIUS_SLACK:
                flag("radius_lower_bound", tk, r0.rho_min - RADIUS_SLACK - rk.rho_min)
            if rk.rho_max > r0.rho_max + RADIUS_SLACK:
                flag("radius_upper_bound", tk, rk.rho_max - r0.rho_max - RADIUS_SLACK)
            if rk.u_min <= 0.0:
                flag("support_positive", tk, -rk.u_min)
            if k > 0:
                prev = reps[k - 1]
                if rk.A < prev.A - AREA_SLACK:
                    flag("area_monotone", tk, prev.A - AREA_SLACK - rk.A)
                if rk.deficit > prev.deficit + DEFICIT_SLACK:
                    flag("deficit_monotone", tk, rk.deficit - prev.deficit - DEFICIT_SLACK)
                if rk.grad_monitor > prev.grad_monitor + GRADIENT_SLACK:
                    flag(
                        "gradient_monotone",
                        tk,
                        rk.grad_monitor - prev.grad_monitor - GRADIENT_SLACK,
                    )
                if rk.monotone_functional > prev.monotone_functional + MONOTONE_SLACK:
                    flag(
                        "weighted_functional_monotone",
                        tk,
                        rk.monotone_functional - prev.monotone_functional - MONOTONE_SLACK,
                    )

    if trace.law is SpeedLaw.CLASSICAL_ICF and trace.snapshots[0].sf.K == 0:
        for tk, rk in zip(ts, reps):
            expected = reps[0].L * math.exp(tk)
            drift = abs(rk.L - expected) / expected
            if drift > CLASSICAL_LENGTH_SLACK:
                flag("length_exponential", tk, drift - CLASSICAL_LENGTH_SLACK)

    if trace.law is SpeedLaw.CURVE_SHORTENING and trace.snapshots[0].sf.K == 0:
        for tk, rk in zip(ts, reps):
            expected = reps[0].A - 2.0 * math.pi * tk
            err = abs(rk.A - expected)
            if err > SHORTENING_AREA_SLACK:
                flag("area_linear", tk, err - SHORTENING_AREA_SLACK)

    # Three-point check of dL/dt = integral F kappa ds and dA/dt = integral
    # F ds between recorded times (loose, diagnostic). Recorded times are not
    # equispaced (per-step CFL, t_end capping), so use the non-uniform stencil,
    # and widen the tolerance by the measured local curvature of the integral:
    # the stencil error is dp*dm/6 times the second time derivative, which can
    # be large while the early nonlinear transient is under-resolved.
    if len(reps) >= 3:
        L = np.array([r.L for r in reps])
        A = np.array([r.A for r in reps])

        def deriv(values: np.ndarray, k: int) -> float:
            dm = ts[k] - ts[k - 1]
            dp = ts[k + 1] - ts[k]
            return (
                dm / (dp * (dp + dm)) * values[k + 1]
                + (dp - dm) / (dp * dm) * values[k]
                - dp / (dm * (dp + dm)) * values[k - 1]
            )

        def sampling_tol(rates: np.ndarray, k: int) -> float:
            dm = ts[k] - ts[k - 1]
            dp = ts[k + 1] - ts[k]
            second = 2.0 * (
                dm * rates[k + 1] - (dp + dm) * rates[k] + dp * rates[k - 1]
            ) / (dp * dm * (dp + dm))
            return IDENTITY_REL_TOL * max(1.0, abs(rates[k])) + 0.5 * dp * dm * abs(second)

        for k in range(1, len(reps) - 1):
            if ts[k + 1] - ts[k] <= 0.0 or ts[k] - ts[k - 1] <= 0.0:
                continue
            tol_l = sampling_tol(trace.speed_kappa_integrals, k)
            tol_a = sampling_tol(trace.speed_integrals, k)
            err_l = abs(deriv(L, k) - trace.speed_kappa_integrals[k])
            err_a = abs(deriv(A, k) - trace.speed_integrals[k])
            if math.isfinite(err_l) and err_l > tol_l:
                flag("length_rate_identity", ts[k], err_l - tol_l)
            if math.isfinite(err_a) and err_a > tol_a:
                flag("area_rate_identity", ts[k], err_a - tol_a)
    return out


# -- late-time decay measurement --------------------------------------------------

AMPLITUDE_FLOOR = 1e-11
FIT_START_FRACTION = 0.1
MIN_FIT_SAMPLES = 20


def limit_radius(trace: FlowTrace) -> float:
    """Radius of the limit circle fixed by the preserved initial length."""
    sf = trace.snapshots[0].sf
    return inverse_warp(sf, trace.reports[0].L / (2.0 * math.pi))


def mode_amplitudes(trace: FlowTrace, m: int) -> np.ndarray:
    """|m-th Fourier coefficient| of rho(., t) at every recorded time."""
    n = trace.snapshots[0].N
    if not 0 < m < n // 2:
        raise ValueError(f"mode index must lie in (0, {n // 2}), got {m}")
    amps = np.empty(len(trace.snapshots))
    for i, snap in enumerate(trace.snapshots):
        coeff = np.fft.rfft(snap.rho)[m]
        amps[i] = 2.0 * abs(coeff) / n
    return amps


def decay_rate(trace: FlowTrace, m: int) -> tuple[float, float]:
    """(measured, predicted) exponential decay rate of Fourier mode m.

    The measured rate is the least-squares slope of log amplitude over the
    late-time window that starts once the amplitude has fallen to 10% of its
    initial value and ends when it reaches the 1e-11 floor. The prediction
    m^2 / phi'(rho_infinity) comes from the linearization about the limit
    circle.
    """
    if trace.law is not SpeedLaw.CONSTRAINED_ICF:
        raise ValueError("decay rates are defined for the constrained flow only")
    if trace.status is not FlowStatus.CONVERGED:
        raise ValueError(f"trace must be converged, got {trace.status.value}")
    rho_inf = limit_radius(trace)
    _, phi_prime_inf, _ = warp(trace.snapshots[0].sf, rho_inf)
    predicted = m * m / float(phi_prime_inf)

    amps = mode_amplitudes(trace, m)
    if amps[0] <= 0.0:
        raise ValueError(f"mode {m} absent from the initial curve")
    inside = np.flatnonzero(amps <= FIT_START_FRACTION * amps[0])
    if inside.size == 0:
        raise ValueError("amplitude never fell below 10% of its initial value")
    start = int(inside[0])
    above = np.flatnonzero(amps[start:] >= AMPLITUDE_FLOOR)
    if above.size == 0:
        raise ValueError("no samples above the amplitude floor in the fit window")
    stop = start + int(above[-1]) + 1
    t_fit = trace.times[start:stop]
    a_fit = amps[start:stop]
    keep = a_fit > 0.0
    if int(keep.sum()) < MIN_FIT_SAMPLES:
        raise ValueError(
            f"fit window holds {int(keep.sum())} samples, need {MIN_FIT_SAMPLES}; "
            "record more often or lower eps_stationary"
        )
    slope = np.polyfit(t_fit[keep], np.log(a_fit[keep]), 1)[0]
    return -float(slope), predicted


def l2_decay_rate(trace: FlowTrace) -> tuple[float, float]:
    """(measured, guaranteed) decay rate of integral (rho - rho_inf)^2 dtheta.

    The guaranteed rate 1 / (8 phi'(rho_inf)) is far from sharp; the measured
    rate should dominate it comfortably.
    """
    if trace.status is not FlowStatus.CONVERGED:
        raise ValueError(f"trace must be converged, got {trace.status.value}")
    rho_inf = limit_radius(trace)
    _, phi_prime_inf, _ = warp(trace.snapshots[0].sf, rho_inf)
    bound = 1.0 / (8.0 * float(phi_prime_inf))

    h = trace.snapshots[0].h
    sq = np.array([h * float(np.sum((s.rho - rho_inf) ** 2)) for s in trace.snapshots])
    if sq[0] <= 0.0:
        raise ValueError("initial curve coincides with the limit circle")
    inside = np.flatnonzero(sq <= FIT_START_FRACTION * sq[0])
    if inside.size == 0:
        raise ValueError("squared norm never fell below 10% of its initial value")
    start = int(inside[0])
    # Stay well above the roundoff floor set by the final state.
    floor = max(1e4 * sq[-1], 1e-28)
    above = np.flatnonzero(sq[start:] >= floor)
    if above.size < MIN_FIT_SAMPLES:
        raise ValueError("not enough samples above the roundoff floor")
    stop = start + int(above[-1]) + 1
    slope = np.polyfit(trace.times[start:stop], np.log(sq[start:stop]), 1)[0]
    return -float(slope), bound
