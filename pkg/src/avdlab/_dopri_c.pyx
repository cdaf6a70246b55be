# cython: language_level=3
"""Compiled Dormand-Prince 5(4) loop for damped systems with linear gradients.

Integrates y = (x, v) under

    x' = v
    v' = -a(t) v - (H x - g) - eps(t) x

with a(t) = alpha/t (damp_kind 0) or gamma (damp_kind 1), and eps one of the
builtin schedules encoded as in ``schedules.SCHEDULE_KINDS``. The step
controller, error norm and sample-time clipping mirror ``_dopri_py`` line for
line; the two backends take the same steps and differ only by floating-point
summation order (well inside the integration tolerance).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmax, fmin, log, pow, sqrt, isfinite

cnp.import_array()

# Dormand-Prince tableau
cdef double C2 = 1.0 / 5.0, C3 = 3.0 / 10.0, C4 = 4.0 / 5.0, C5 = 8.0 / 9.0
cdef double A21 = 1.0 / 5.0
cdef double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0
cdef double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0
cdef double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0, A54 = -212.0 / 729.0
cdef double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0, A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0
cdef double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0, B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0
cdef double E1 = 71.0 / 57600.0, E3 = -71.0 / 16695.0, E4 = 71.0 / 1920.0
cdef double E5 = -17253.0 / 339200.0, E6 = 22.0 / 525.0, E7 = -1.0 / 40.0

cdef double SAFE = 0.9, FAC_MIN = 0.2, FAC_MAX = 10.0, BETA = 0.04, EXPO1 = 0.17


cdef inline double eps_eval(int kind, double p, double t) nogil:
    if kind == 0:
        return 0.0
    elif kind == 1:
        return pow(t, -p)
    elif kind == 2:
        return 1.0 / (1.0 + log(t))
    else:
        return pow(log(t), -p)


cdef class _Field:
    cdef int n, damp_kind, eps_kind
    cdef double damp_param, eps_param
    cdef double[:, ::1] H
    cdef double[::1] g

    def __init__(self, int damp_kind, double damp_param, int eps_kind, double eps_param, H, g):
        self.damp_kind = damp_kind
        self.damp_param = damp_param
        self.eps_kind = eps_kind
        self.eps_param = eps_param
        self.H = np.array(H, dtype=np.float64, order="C")
        self.g = np.array(g, dtype=np.float64)
        self.n = self.g.shape[0]

    cdef inline void eval(self, double t, double[::1] y, double[::1] out) noexcept nogil:
        cdef int i, j, n = self.n
        cdef double a, e, s
        if self.damp_kind == 0:
            a = self.damp_param / t
        else:
            a = self.damp_param
        e = eps_eval(self.eps_kind, self.eps_param, t)
        for i in range(n):
            out[i] = y[n + i]
            s = 0.0
            for j in range(n):
                s += self.H[i, j] * y[j]
            out[n + i] = -a * y[n + i] - (s - self.g[i]) - e * y[i]


cdef double _rms_scaled(double[::1] num, double[::1] ya, double[::1] yb, double atol, double rtol, int m) noexcept nogil:
    cdef int i
    cdef double acc = 0.0, sk, q
    for i in range(m):
        sk = atol + rtol * fmax(fabs(ya[i]), fabs(yb[i]))
        q = num[i] / sk
        acc += q * q
    return sqrt(acc / m)


def run_linear(double t0, y0, double[::1] sample_times,
               int damp_kind, double damp_param, int eps_kind, double eps_param,
               H, g, double rtol, double atol, long max_steps, double h0):
    """Integrate from t0 through ``sample_times`` (first entry == t0).

    Returns ``(samples, n_samples, status, t_stop, accepted, rejected, hmin, hmax)``
    with status 0 = done, 1 = max_steps exceeded, 2 = step underflow.
    """
    cdef _Field fld = _Field(damp_kind, damp_param, eps_kind, eps_param, H, g)
    cdef int m = 2 * fld.n
    cdef Py_ssize_t n_samp = sample_times.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out_arr = np.empty((n_samp, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] y = np.array(y0, dtype=np.float64)
    cdef double[::1] ynew = np.empty(m)
    cdef double[::1] yt = np.empty(m)
    cdef double[::1] k1 = np.empty(m)
    cdef double[::1] k2 = np.empty(m)
    cdef double[::1] k3 = np.empty(m)
    cdef double[::1] k4 = np.empty(m)
    cdef double[::1] k5 = np.empty(m)
    cdef double[::1] k6 = np.empty(m)
    cdef double[::1] k7 = np.empty(m)
    cdef double[::1] errv = np.empty(m)
    cdef double[::1] swap
    cdef double t = t0, h, h_use, t_target, err, err_old = 1e-4, fac11, fac, hnew
    cdef double d0, d1, d2, der12, h1, span
    cdef double hmin = 1e300, hmax = 0.0
    cdef long accepted = 0, rejected = 0, steps = 0
    cdef Py_ssize_t next_idx = 1, i
    cdef int status = 0
    cdef bint clipped, reject = False

    fld.eval(t, y, k1)
    for i in range(m):
        out[0, i] = y[i]

    span = sample_times[n_samp - 1] - t0
    if h0 > 0:
        h = h0
    else:
        for i in range(m):
            errv[i] = 0.0
        d0 = _rms_scaled(y, y, errv, atol, rtol, m)
        d1 = _rms_scaled(k1, y, errv, atol, rtol, m)
        if d0 < 1e-10 or d1 < 1e-10:
            h = 1e-6
        else:
            h = 0.01 * d0 / d1
        h = fmin(h, span)
        for i in range(m):
            yt[i] = y[i] + h * k1[i]
        fld.eval(t + h, yt, k2)
        for i in range(m):
            errv[i] = k2[i] - k1[i]
        for i in range(m):
            ynew[i] = 0.0
        d2 = _rms_scaled(errv, y, ynew, atol, rtol, m) / h
        der12 = fmax(d1, d2)
        if der12 <= 1e-15:
            h1 = fmax(1e-6, h * 1e-3)
        else:
            h1 = pow(0.01 / der12, 0.2)
        h = fmin(fmin(100.0 * h, h1), span)

    with nogil:
        while next_idx < n_samp:
            if steps >= max_steps:
                status = 1
                break
            if h < 1e-14 * fabs(t):
                status = 2
                break
            t_target = sample_times[next_idx]
            clipped = t + h >= t_target - 0.01 * h
            if clipped:
                h_use = t_target - t
            else:
                h_use = h

            for i in range(m):
                yt[i] = y[i] + h_use * A21 * k1[i]
            fld.eval(t + C2 * h_use, yt, k2)
            for i in range(m):
                yt[i] = y[i] + h_use * (A31 * k1[i] + A32 * k2[i])
            fld.eval(t + C3 * h_use, yt, k3)
            for i in range(m):
                yt[i] = y[i] + h_use * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
            fld.eval(t + C4 * h_use, yt, k4)
            for i in range(m):
                yt[i] = y[i] + h_use * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
            fld.eval(t + C5 * h_use, yt, k5)
            for i in range(m):
                yt[i] = y[i] + h_use * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
            fld.eval(t + h_use, yt, k6)
            for i in range(m):
                ynew[i] = y[i] + h_use * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
            fld.eval(t + h_use, ynew, k7)
            for i in range(m):
                errv[i] = h_use * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            err = _rms_scaled(errv, y, ynew, atol, rtol, m)
            if not isfinite(err):
                err = 1e300
            steps += 1

            if err <= 1.0:
                fac11 = pow(err, EXPO1)
                fac = fac11 / pow(err_old, BETA)
                fac = fmax(1.0 / FAC_MAX, fmin(1.0 / FAC_MIN, fac / SAFE))
                hnew = h_use / fac
                err_old = fmax(err, 1e-4)
                if reject:
                    hnew = fmin(hnew, h_use)
                reject = False
                accepted += 1
                hmin = fmin(hmin, h_use)
                hmax = fmax(hmax, h_use)
                if clipped:
                    t = t_target
                else:
                    t = t + h_use
                swap = y
                y = ynew
                ynew = swap
                swap = k1
                k1 = k7
                k7 = swap
                if clipped:
                    for i in range(m):
                        out[next_idx, i] = y[i]
                    next_idx += 1
                    h = fmax(hnew, h)
                else:
                    h = hnew
            else:
                fac11 = pow(err, EXPO1)
                h = h_use / fmin(1.0 / FAC_MIN, fac11 / SAFE)
                reject = True
                rejected += 1

    if accepted == 0:
        hmin = 0.0
    return out_arr, next_idx, status, t, accepted, rejected, hmin, hmax
