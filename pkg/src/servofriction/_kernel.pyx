# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled simulation kernels.

Mirror of ``_purepy`` with identical floating-point evaluation order; the
build disables FP contraction so both backends produce bit-identical
results.  See the fallback module for the ordering rules.
"""

from libc.math cimport NAN, exp, fabs, isfinite, isnan, pow, sin

BACKEND = "compiled"

cdef enum:
    K_V = 0
    K_C = 1
    K_CS = 2
    V_S = 3
    ALPHA = 4
    K_M = 5
    K_E = 6
    K_MS = 7
    K_ES = 8
    K_MQ = 9
    K_EQ = 10

cdef enum:
    LAW_OFF = 0
    LAW_VOLTAGE = 1
    LAW_CURRENT = 2

cdef enum:
    A_KT = 0
    A_R = 1
    A_UMAX = 2
    A_IHEAT = 3
    A_KP = 4
    A_KI = 5
    A_KD = 6
    A_ILIM = 7
    A_DTC = 8


cdef inline double _static_part(int model, const double* c, double tau_m,
                                double tau_e, double omega) noexcept nogil:
    cdef double decay, base, held
    if model == 1:
        return c[K_C]
    if model == 3:
        return c[K_C] + fabs(c[K_M] * tau_m - c[K_E] * tau_e)
    if omega == 0.0:
        decay = 1.0
    else:
        decay = exp(-pow(fabs(omega / c[V_S]), c[ALPHA]))
    if model == 2:
        return c[K_C] + decay * c[K_CS]
    base = c[K_C] + fabs(c[K_M] * tau_m - c[K_E] * tau_e)
    held = fabs(c[K_MS] * tau_m - c[K_ES] * tau_e)
    if model == 6:
        if fabs(tau_m) >= fabs(tau_e):
            held = held + c[K_EQ] * (tau_e * tau_e)
        else:
            held = held + c[K_MQ] * (tau_m * tau_m)
    return base + decay * (c[K_CS] + held)


cdef inline double _budget(int model, const double* c, double tau_m,
                           double tau_e, double omega) noexcept nogil:
    return _static_part(model, c, tau_m, tau_e, omega) + c[K_V] * fabs(omega)


cdef inline double _servo_torque(int law, const double* a, double theta,
                                 double omega, double target,
                                 double* integral) noexcept nogil:
    cdef double err, ki, lim, out, kt, r, umax, u, ih, lo, hi, i, acc
    if law == LAW_OFF or isnan(target):
        return 0.0
    err = target - theta
    ki = a[A_KI]
    if ki > 0.0:
        acc = integral[0] + err * a[A_DTC]
        lim = a[A_ILIM]
        if acc > lim:
            acc = lim
        elif acc < -lim:
            acc = -lim
        integral[0] = acc
    out = a[A_KP] * err + ki * integral[0] - a[A_KD] * omega
    kt = a[A_KT]
    r = a[A_R]
    if law == LAW_VOLTAGE:
        umax = a[A_UMAX]
        u = out
        if u > umax:
            u = umax
        elif u < -umax:
            u = -umax
        return (kt / r) * u - (kt * kt / r) * omega
    ih = a[A_IHEAT]
    lo = (-a[A_UMAX] - kt * omega) / r
    hi = (a[A_UMAX] - kt * omega) / r
    if lo < -ih:
        lo = -ih
    elif lo > ih:
        lo = ih
    if hi > ih:
        hi = ih
    elif hi < -ih:
        hi = -ih
    i = out
    if i < lo:
        i = lo
    elif i > hi:
        i = hi
    return kt * i


cdef inline void _step_core(int model, const double* c, double mgl, double j,
                            double j_dt, double dt, double theta, double omega,
                            double tau_m, double* theta1, double* omega1,
                            double* tau_e_out, double* tau_f_out) noexcept nogil:
    cdef double tau_e, cap, stop, tau_f, acc, w1
    tau_e = mgl * sin(theta)
    cap = _static_part(model, c, tau_m, tau_e, omega) + c[K_V] * fabs(omega)
    stop = -(j_dt * omega + tau_m + tau_e)
    if stop > cap:
        tau_f = cap
        acc = (tau_m + tau_e + tau_f) / j
        w1 = omega + acc * dt
    elif stop < -cap:
        tau_f = -cap
        acc = (tau_m + tau_e + tau_f) / j
        w1 = omega + acc * dt
    else:
        tau_f = stop
        acc = -omega / dt
        w1 = 0.0
    theta1[0] = theta + omega * dt + 0.5 * acc * dt * dt
    omega1[0] = w1
    tau_e_out[0] = tau_e
    tau_f_out[0] = tau_f


def static_part(int model, double[::1] c, double tau_m, double tau_e,
                double omega):
    return _static_part(model, &c[0], tau_m, tau_e, omega)


def budget(int model, double[::1] c, double tau_m, double tau_e, double omega):
    return _budget(model, &c[0], tau_m, tau_e, omega)


def budget_batch(int model, double[:, ::1] coeffs, double[::1] tau_m,
                 double[::1] tau_e, double[::1] omega, double[::1] out):
    cdef Py_ssize_t i, n = out.shape[0]
    with nogil:
        for i in range(n):
            out[i] = _budget(model, &coeffs[i, 0], tau_m[i], tau_e[i], omega[i])


def servo_torque(int law, double[::1] a, double theta, double omega,
                 double target, double integral):
    cdef double integ = integral
    cdef double tau = _servo_torque(law, &a[0], theta, omega, target, &integ)
    return tau, integ


def step(int model, double[::1] c, int law, double[::1] a, double m, double l,
         double g, double dt, double j_m, double theta, double omega,
         double target, double integral):
    cdef double mgl = m * g * l
    cdef double j = m * l * l + j_m
    cdef double j_dt = j / dt
    cdef double integ = integral
    cdef double tau_m = _servo_torque(law, &a[0], theta, omega, target, &integ)
    cdef double theta1, omega1, tau_e, tau_f
    _step_core(model, &c[0], mgl, j, j_dt, dt, theta, omega, tau_m,
               &theta1, &omega1, &tau_e, &tau_f)
    return theta1, omega1, tau_m, tau_e, tau_f, integ


def rollout(int model, double[::1] c, int law, double[::1] a, int ctrl_every,
            double m, double l, double g, double dt, double j_m,
            double theta0, double omega0, double[::1] targets,
            double[::1] out_theta, double[::1] out_omega,
            double[::1] out_tau_m, double[::1] out_tau_e,
            double[::1] out_tau_f):
    cdef Py_ssize_t k, kk, n = targets.shape[0]
    cdef double mgl = m * g * l
    cdef double j = m * l * l + j_m
    cdef double j_dt = j / dt
    cdef double theta = theta0
    cdef double omega = omega0
    cdef double integral = 0.0
    cdef double held = 0.0
    cdef double tgt, tau_m, tau_e, tau_f
    cdef int status = 0
    with nogil:
        out_theta[0] = theta
        out_omega[0] = omega
        for k in range(n - 1):
            tgt = targets[k + 1]
            if law == LAW_OFF or isnan(tgt):
                tau_m = 0.0
            else:
                if k % ctrl_every == 0:
                    held = _servo_torque(law, &a[0], theta, omega, tgt,
                                         &integral)
                tau_m = held
            _step_core(model, &c[0], mgl, j, j_dt, dt, theta, omega, tau_m,
                       &theta, &omega, &tau_e, &tau_f)
            out_tau_m[k] = tau_m
            out_tau_e[k] = tau_e
            out_tau_f[k] = tau_f
            out_theta[k + 1] = theta
            out_omega[k + 1] = omega
            if not (isfinite(theta) and isfinite(omega)):
                for kk in range(k + 1, n):
                    out_theta[kk] = NAN
                    out_omega[kk] = NAN
                    out_tau_m[kk] = NAN
                    out_tau_e[kk] = NAN
                    out_tau_f[kk] = NAN
                status = 1
                break
        if status == 0:
            out_tau_m[n - 1] = 0.0
            out_tau_e[n - 1] = 0.0
            out_tau_f[n - 1] = 0.0
    return status


def rollout_mae(int model, double[::1] c, int law, double[::1] a,
                int ctrl_every, double m, double l, double g, double dt,
                double j_m, double theta0, double omega0,
                double[::1] targets, double[::1] measured):
    cdef Py_ssize_t k, n = targets.shape[0]
    cdef double mgl = m * g * l
    cdef double j = m * l * l + j_m
    cdef double j_dt = j / dt
    cdef double theta = theta0
    cdef double omega = omega0
    cdef double integral = 0.0
    cdef double held = 0.0
    cdef double tgt, tau_m, tau_e, tau_f
    cdef double total
    with nogil:
        total = fabs(theta - measured[0])
        for k in range(n - 1):
            tgt = targets[k + 1]
            if law == LAW_OFF or isnan(tgt):
                tau_m = 0.0
            else:
                if k % ctrl_every == 0:
                    held = _servo_torque(law, &a[0], theta, omega, tgt,
                                         &integral)
                tau_m = held
            _step_core(model, &c[0], mgl, j, j_dt, dt, theta, omega, tau_m,
                       &theta, &omega, &tau_e, &tau_f)
            if not (isfinite(theta) and isfinite(omega)):
                total = NAN
                break
            total += fabs(theta - measured[k + 1])
    return total
