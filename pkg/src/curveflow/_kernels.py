"""Compiled inner loops for the method-of-lines integrator.

Everything here is plain scalar arithmetic in index loops so numba can keep
the whole time step in registers; evaluation order is fixed, which makes runs
bit-reproducible. Status codes are shared with flow.FlowStatus:

    0 running   1 converged   2 time limit
    3 convexity lost   4 pole hit   5 step underflow
"""

from __future__ import annotations

import numpy as np
from numba import njit

RUNNING = 0
CONVERGED = 1
TIME_LIMIT = 2
CONVEXITY_LOST = 3
POLE_HIT = 4
STEP_UNDERFLOW = 5

LAW_CONSTRAINED = 0
LAW_SHORTENING = 1
LAW_CLASSICAL = 2

HALF_PI = 0.5 * np.pi
MIN_DT = 1e-14


@njit(cache=True)
def speed_kernel(rho, K, law, order, h, pole_margin, out):
    """Radial speed d rho/dt at every node, plus step-control statistics.

    Fills `out` and returns (status, sup |speed|, max diffusivity,
    min kappa, max kappa). A nonzero status means the state is unusable
    and `out` must be ignored.
    """
    n = rho.shape[0]
    sup = 0.0
    max_diff = 0.0
    kappa_min = 1e300
    kappa_max = -1e300
    for i in range(n):
        r = rho[i]
        if r <= 0.0:
            return POLE_HIT, 0.0, 0.0, 0.0, 0.0
        if K == 1 and r >= HALF_PI - pole_margin:
            return POLE_HIT, 0.0, 0.0, 0.0, 0.0
        im1 = i - 1 if i >= 1 else n - 1
        ip1 = i + 1 if i + 1 < n else 0
        # Offset-from-center stencil form: exactly zero on constants.
        em1 = rho[im1] - r
        ep1 = rho[ip1] - r
        if order == 4:
            im2 = i - 2 if i >= 2 else i - 2 + n
            ip2 = i + 2 if i + 2 < n else i + 2 - n
            em2 = rho[im2] - r
            ep2 = rho[ip2] - r
            d1 = (em2 - 8.0 * em1 + 8.0 * ep1 - ep2) / (12.0 * h)
            d2 = (-em2 + 16.0 * em1 + 16.0 * ep1 - ep2) / (12.0 * h * h)
        else:
            d1 = (ep1 - em1) / (2.0 * h)
            d2 = (ep1 + em1) / (h * h)
        if K == -1:
            phi = np.sinh(r)
            phip = np.cosh(r)
        elif K == 0:
            phi = r
            phip = 1.0
        else:
            phi = np.sin(r)
            phip = np.cos(r)
        p2 = phi * phi
        w2 = p2 + d1 * d1
        sq = np.sqrt(w2)
        kappa = (p2 * phip + 2.0 * d1 * d1 * phip - d2 * phi) / (w2 * sq)
        if kappa < kappa_min:
            kappa_min = kappa
        if kappa > kappa_max:
            kappa_max = kappa
        if law == LAW_SHORTENING:
            f = -kappa * sq / phi
            diff = 1.0 / w2
        else:
            if kappa <= 0.0:
                return CONVEXITY_LOST, 0.0, 0.0, 0.0, 0.0
            if law == LAW_CONSTRAINED:
                f = (phip / kappa) * sq / phi - phi
                diff = phip / (kappa * kappa * w2)
            else:
                f = sq / (kappa * phi)
                diff = 1.0 / (kappa * kappa * w2)
        out[i] = f
        af = abs(f)
        if af > sup:
            sup = af
        if diff > max_diff:
            max_diff = diff
    return RUNNING, sup, max_diff, kappa_min, kappa_max


@njit(cache=True)
def rk4_chunk(rho, K, law, order, sigma, h, eps_stationary, t, t_end, max_steps, pole_margin):
    """Advance up to max_steps classical RK4 steps in place.

    The step size is re-derived from the current diffusivity each step.
    Candidate states are validated before committing, so on any terminal
    status `rho` holds the last valid state. Returns (t, steps, status).
    """
    n = rho.shape[0]
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    cand = np.empty(n)
    steps = 0
    while steps < max_steps:
        status, sup, max_diff, kappa_min, kappa_max = speed_kernel(
            rho, K, law, order, h, pole_margin, k1
        )
        if status != RUNNING:
            return t, steps, status
        if sup < eps_stationary:
            return t, steps, CONVERGED
        if t >= t_end:
            return t, steps, TIME_LIMIT
        if law == LAW_SHORTENING:
            # Stop before the shrinking curve degenerates the radial chart or
            # a forming singularity spreads curvature over six decades.
            rho_min = rho[0]
            for i in range(1, n):
                if rho[i] < rho_min:
                    rho_min = rho[i]
            if rho_min < 10.0 * h:
                return t, steps, POLE_HIT
            if kappa_min > 0.0 and kappa_max / kappa_min > 1e6:
                return t, steps, STEP_UNDERFLOW
        dt = sigma * h * h / max_diff
        if dt < MIN_DT:
            # Near the equator the diffusivity 1/phi' blows up and collapses
            # the step; attribute that to the pole, not to generic stiffness.
            if K == 1:
                rho_max = rho[0]
                for i in range(1, n):
                    if rho[i] > rho_max:
                        rho_max = rho[i]
                if rho_max >= HALF_PI - 1000.0 * pole_margin:
                    return t, steps, POLE_HIT
            return t, steps, STEP_UNDERFLOW
        hit_end = False
        if t + dt >= t_end:
            dt = t_end - t
            hit_end = True
        for i in range(n):
            tmp[i] = rho[i] + 0.5 * dt * k1[i]
        status, _, _, _, _ = speed_kernel(tmp, K, law, order, h, pole_margin, k2)
        if status != RUNNING:
            return t, steps, status
        for i in range(n):
            tmp[i] = rho[i] + 0.5 * dt * k2[i]
        status, _, _, _, _ = speed_kernel(tmp, K, law, order, h, pole_margin, k3)
        if status != RUNNING:
            return t, steps, status
        for i in range(n):
            tmp[i] = rho[i] + dt * k3[i]
        status, _, _, _, _ = speed_kernel(tmp, K, law, order, h, pole_margin, k4)
        if status != RUNNING:
            return t, steps, status
        for i in range(n):
            cand[i] = rho[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            if cand[i] <= 0.0:
                return t, steps, POLE_HIT
            if K == 1 and cand[i] >= HALF_PI - pole_margin:
                return t, steps, POLE_HIT
        for i in range(n):
            rho[i] = cand[i]
        t = t_end if hit_end else t + dt
        steps += 1
    return t, steps, RUNNING
