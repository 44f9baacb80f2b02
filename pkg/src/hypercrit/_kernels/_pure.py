"""Pure-Python reference kernels.

These mirror the compiled kernels draw-for-draw: both consume the same bit
stream through numpy's distribution functions, so a fixed seed produces
bitwise-identical output on either backend.  Keep any change to the draw
order or to the bridge skip rule in sync with ``_core.pyx``.
"""

from __future__ import annotations

import math

import numpy as np

# Stop reasons shared with the compiled kernel.
STOP_HORIZON = 0
STOP_BUDGET = 1
STOP_FROZEN = 2

# log(2**-53): a clamped uniform draw cannot push a bridge minimum further
# than 0.5*sqrt(-2*dt*LOG_U_MIN) below the segment endpoints.
LOG_U_MIN = -36.7368005696771014
U_MIN = 2.0 ** -53


def run_walk(generator, lam_coef, n_vertices, horizon, patch_limit=-1,
             freeze_step=-1, record_children=True):
    """Sequential walk with Binomial(eligible, rho(N, i-1)) child counts.

    Returns ``(children, newmin_steps, n_steps, stop_reason)`` where
    ``children`` is None when not recorded and ``newmin_steps`` lists the
    steps at which the walk set a new strict minimum (excursion ends).
    """
    lam_coef = np.ascontiguousarray(lam_coef, dtype=np.float64)
    n_terms = lam_coef.shape[0]
    children = np.empty(horizon, dtype=np.int32) if record_children else None
    newmin = []
    z = 0
    patches = 1  # P(0) = 1: the walk starts from one patch
    min_z = 0
    n_steps = horizon
    reason = STOP_HORIZON

    for i in range(1, horizon + 1):
        m = i - 1
        lam = 0.0
        falling = 1.0
        for j in range(min(m, n_terms - 1) + 1):
            lam += lam_coef[j] * falling
            falling *= m - j
        rho = -math.expm1(-lam)
        eligible = n_vertices - m - z - patches
        if eligible < 0:
            eligible = 0
        c = int(generator.binomial(eligible, rho))
        z += c - 1
        if record_children:
            children[i - 1] = c
        if z < min_z:
            min_z = z
            newmin.append(i)
            if i < horizon:
                if freeze_step >= 0 and i > freeze_step:
                    n_steps = i
                    reason = STOP_FROZEN
                    break
                if patch_limit >= 0 and patches == patch_limit:
                    n_steps = i
                    reason = STOP_BUDGET
                    break
                patches += 1

    if record_children:
        # copy early-stopped traces so the full horizon buffer can be freed
        children = children[:n_steps]
        if n_steps < horizon:
            children = children.copy()
    return children, np.asarray(newmin, dtype=np.int64), n_steps, reason


def wk_segment(generator, out, mu, k, dt, start_step, x0, rmin0, last_min_step0,
               use_bridge=True):
    """Advance a drifted Brownian path by len(out) Euler steps.

    Gaussian increments make the grid values exact in law; the optional
    Brownian-bridge draw corrects the running minimum between grid points.
    The bridge draw is skipped when even the most extreme representable
    uniform could not beat the current minimum, which leaves the law intact.

    Returns ``(x_end, running_min, last_min_step)`` so adaptive horizons can
    resume where the previous segment stopped.
    """
    sqrt_dt = math.sqrt(dt)
    c_drift = mu / (k - 1.0)
    skip_gap = 0.5 * math.sqrt(-2.0 * dt * LOG_U_MIN)
    x = x0
    rmin = rmin0
    last_min_step = last_min_step0
    step = start_step
    for j in range(len(out)):
        t1 = step * dt
        t2 = (step + 1) * dt
        p1 = 1.0
        p2 = 1.0
        for _ in range(k - 1):
            p1 *= t1
            p2 *= t2
        x2 = x + sqrt_dt * generator.standard_normal() + c_drift * (p2 - p1)
        lo = x2 if x2 < x else x
        if use_bridge:
            if lo - rmin < skip_gap:
                u = generator.random()
                if u < U_MIN:
                    u = U_MIN
                d = x2 - x
                m = 0.5 * (x + x2 - math.sqrt(d * d - 2.0 * dt * math.log(u)))
                if m < rmin:
                    rmin = m
                    last_min_step = step + 1
        elif x2 < rmin:
            rmin = x2
            last_min_step = step + 1
        out[j] = x2
        x = x2
        step += 1
    return x, rmin, last_min_step
