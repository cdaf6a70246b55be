"""Pure-Python Dormand-Prince 5(4) loop.

Same tableau, error norm, PI controller and sample-time clipping as the
compiled ``_dopri_c.run_linear``; the field is an arbitrary callable
``f(t, y) -> dy``, so this path also serves problems with nonlinear gradients.
"""

from __future__ import annotations

import math

import numpy as np

C2, C3, C4, C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
A21 = 1 / 5
A31, A32 = 3 / 40, 9 / 40
A41, A42, A43 = 44 / 45, -56 / 15, 32 / 9
A51, A52, A53, A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
A61, A62, A63, A64, A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
B1, B3, B4, B5, B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
E1, E3, E4, E5, E6, E7 = 71 / 57600, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40

SAFE, FAC_MIN, FAC_MAX, BETA, EXPO1 = 0.9, 0.2, 10.0, 0.04, 0.17


def _rms_scaled(num, ya, yb, atol, rtol):
    sk = atol + rtol * np.maximum(np.abs(ya), np.abs(yb))
    q = num / sk
    return math.sqrt(float(np.dot(q, q)) / q.size)


def initial_step(f, t0, y, k1, span, rtol, atol):
    zero = np.zeros_like(y)
    d0 = _rms_scaled(y, y, zero, atol, rtol)
    d1 = _rms_scaled(k1, y, zero, atol, rtol)
    h = 1e-6 if (d0 < 1e-10 or d1 < 1e-10) else 0.01 * d0 / d1
    h = min(h, span)
    k2 = f(t0 + h, y + h * k1)
    d2 = _rms_scaled(k2 - k1, y, zero, atol, rtol) / h
    der12 = max(d1, d2)
    h1 = max(1e-6, h * 1e-3) if der12 <= 1e-15 else (0.01 / der12) ** 0.2
    return min(100.0 * h, h1, span)


def run(f, t0, y0, sample_times, rtol, atol, max_steps, h0):
    """Integrate ``y' = f(t, y)`` through ``sample_times`` (first entry == t0).

    Returns the same tuple as the compiled kernel.
    """
    n_samp = len(sample_times)
    y = np.array(y0, dtype=float)
    out = np.empty((n_samp, y.size))
    out[0] = y
    t = float(t0)
    k1 = f(t, y)
    span = sample_times[-1] - t0
    h = h0 if h0 > 0 else initial_step(f, t, y, k1, span, rtol, atol)

    err_old = 1e-4
    reject = False
    accepted = rejected = steps = 0
    hmin, hmax = 1e300, 0.0
    next_idx = 1
    status = 0
    while next_idx < n_samp:
        if steps >= max_steps:
            status = 1
            break
        if h < 1e-14 * abs(t):
            status = 2
            break
        t_target = sample_times[next_idx]
        clipped = t + h >= t_target - 0.01 * h
        h_use = t_target - t if clipped else h

        k2 = f(t + C2 * h_use, y + h_use * (A21 * k1))
        k3 = f(t + C3 * h_use, y + h_use * (A31 * k1 + A32 * k2))
        k4 = f(t + C4 * h_use, y + h_use * (A41 * k1 + A42 * k2 + A43 * k3))
        k5 = f(t + C5 * h_use, y + h_use * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4))
        k6 = f(t + h_use, y + h_use * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5))
        ynew = y + h_use * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6)
        k7 = f(t + h_use, ynew)
        errv = h_use * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7)
        err = _rms_scaled(errv, y, ynew, atol, rtol)
        if not math.isfinite(err):
            err = 1e300
        steps += 1

        if err <= 1.0:
            fac11 = err**EXPO1
            fac = fac11 / err_old**BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            hnew = h_use / fac
            err_old = max(err, 1e-4)
            if reject:
                hnew = min(hnew, h_use)
            reject = False
            accepted += 1
            hmin = min(hmin, h_use)
            hmax = max(hmax, h_use)
            t = t_target if clipped else t + h_use
            y = ynew
            k1 = k7
            if clipped:
                out[next_idx] = y
                next_idx += 1
                h = max(hnew, h)
            else:
                h = hnew
        else:
            fac11 = err**EXPO1
            h = h_use / min(1.0 / FAC_MIN, fac11 / SAFE)
            reject = True
            rejected += 1

    if accepted == 0:
        hmin = 0.0
    return out, next_idx, status, t, accepted, rejected, hmin, hmax
