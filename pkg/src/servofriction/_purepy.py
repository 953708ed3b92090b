"""Pure-Python fallback for the simulation kernels.

This module and the compiled ``_kernel`` extension implement the same
operations with the same floating-point evaluation order, so results are
bit-identical across backends.  Three ordering rules are load-bearing:

* load-dependent terms are always evaluated as ``|a*tau_m - b*tau_e|``
  (with ``a == b`` for the symmetric models), so that every nested model
  pair agrees exactly when the extra coefficients are zero;
* the viscous term is added to the budget last, so the on-the-fly
  Coulomb-equivalent (the static part) reconstructs the budget exactly;
* when the stop torque lies inside the budget the step is an exact stop:
  the next velocity is exactly zero and the acceleration used for the
  position update is ``-omega/dt``, the exact-arithmetic value.

Only :mod:`math` is used for transcendentals (same libm as the kernel).
"""

import math

BACKEND = "pure"

# friction coefficient slots
K_V, K_C, K_CS, V_S, ALPHA, K_M, K_E, K_MS, K_ES, K_MQ, K_EQ = range(11)
NCOEF = 11

# control law ids
LAW_OFF, LAW_VOLTAGE, LAW_CURRENT = 0, 1, 2

# actuator parameter slots
A_KT, A_R, A_UMAX, A_IHEAT, A_KP, A_KI, A_KD, A_ILIM, A_DTC = range(9)
NACT = 9


def static_part(model, c, tau_m, tau_e, omega):
    """Velocity-threshold part of the torque budget (everything except
    the viscous term); doubles as the equivalent Coulomb coefficient."""
    if model == 1:
        return c[K_C]
    if model == 3:
        return c[K_C] + abs(c[K_M] * tau_m - c[K_E] * tau_e)
    if omega == 0.0:
        decay = 1.0
    else:
        decay = math.exp(-math.pow(abs(omega / c[V_S]), c[ALPHA]))
    if model == 2:
        return c[K_C] + decay * c[K_CS]
    base = c[K_C] + abs(c[K_M] * tau_m - c[K_E] * tau_e)
    held = abs(c[K_MS] * tau_m - c[K_ES] * tau_e)
    if model == 6:
        if abs(tau_m) >= abs(tau_e):
            held = held + c[K_EQ] * (tau_e * tau_e)
        else:
            held = held + c[K_MQ] * (tau_m * tau_m)
    return base + decay * (c[K_CS] + held)


def budget(model, c, tau_m, tau_e, omega):
    """Friction torque budget for one state."""
    return static_part(model, c, tau_m, tau_e, omega) + c[K_V] * abs(omega)


def budget_batch(model, coeffs, tau_m, tau_e, omega, out):
    """Budget over rows of states, one coefficient vector per row."""
    for i in range(len(out)):
        out[i] = budget(model, coeffs[i], tau_m[i], tau_e[i], omega[i])


def servo_torque(law, a, theta, omega, target, integral):
    """One control-law evaluation; returns (tau_m, new_integral).

    A NaN target means the output stage is released: zero torque and no
    back-EMF damping, controller state untouched.
    """
    if law == LAW_OFF or target != target:
        return 0.0, integral
    err = target - theta
    ki = a[A_KI]
    if ki > 0.0:
        integral = integral + err * a[A_DTC]
        lim = a[A_ILIM]
        if integral > lim:
            integral = lim
        elif integral < -lim:
            integral = -lim
    out = a[A_KP] * err + ki * integral - a[A_KD] * omega
    kt = a[A_KT]
    r = a[A_R]
    if law == LAW_VOLTAGE:
        umax = a[A_UMAX]
        u = out
        if u > umax:
            u = umax
        elif u < -umax:
            u = -umax
        return (kt / r) * u - (kt * kt / r) * omega, integral
    # current law: command clipped to the EMF window intersected with the
    # heat limit; each EMF bound is clipped into [-i_heat, i_heat] so the
    # interval stays non-empty even when back-EMF exceeds the supply.
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
    return kt * i, integral


def _step_core(model, c, mgl, j, j_dt, dt, theta, omega, tau_m):
    """One dynamics transition given the motor torque."""
    tau_e = mgl * math.sin(theta)
    cap = static_part(model, c, tau_m, tau_e, omega) + c[K_V] * abs(omega)
    stop = -(j_dt * omega + tau_m + tau_e)
    if stop > cap:
        tau_f = cap
        acc = (tau_m + tau_e + tau_f) / j
        omega1 = omega + acc * dt
    elif stop < -cap:
        tau_f = -cap
        acc = (tau_m + tau_e + tau_f) / j
        omega1 = omega + acc * dt
    else:
        tau_f = stop
        acc = -omega / dt
        omega1 = 0.0
    theta1 = theta + omega * dt + 0.5 * acc * dt * dt
    return theta1, omega1, tau_e, tau_f


def step(model, c, law, a, m, l, g, dt, j_m, theta, omega, target, integral):
    """Single simulation step.

    Returns (theta1, omega1, tau_m, tau_e, tau_f, new_integral).
    """
    mgl = m * g * l
    j = m * l * l + j_m
    j_dt = j / dt
    tau_m, integral = servo_torque(law, a, theta, omega, target, integral)
    theta1, omega1, tau_e, tau_f = _step_core(
        model, c, mgl, j, j_dt, dt, theta, omega, tau_m
    )
    return theta1, omega1, tau_m, tau_e, tau_f, integral


def rollout(model, c, law, a, ctrl_every, m, l, g, dt, j_m,
            theta0, omega0, targets,
            out_theta, out_omega, out_tau_m, out_tau_e, out_tau_f):
    """Full trajectory rollout; fills the output arrays.

    ``targets[k]`` is the desired position at sample k (NaN = output stage
    released); the transition leaving sample k consumes ``targets[k + 1]``.
    Torque entries at index k describe that transition; the last row is
    zero.  Returns 0, or 1 if the state became non-finite (remaining
    entries are NaN).
    """
    n = len(targets)
    mgl = m * g * l
    j = m * l * l + j_m
    j_dt = j / dt
    theta = theta0
    omega = omega0
    integral = 0.0
    held = 0.0
    out_theta[0] = theta
    out_omega[0] = omega
    for k in range(n - 1):
        tgt = targets[k + 1]
        if law == LAW_OFF or tgt != tgt:
            tau_m = 0.0
        else:
            if k % ctrl_every == 0:
                held, integral = servo_torque(law, a, theta, omega, tgt, integral)
            tau_m = held
        theta, omega, tau_e, tau_f = _step_core(
            model, c, mgl, j, j_dt, dt, theta, omega, tau_m
        )
        out_tau_m[k] = tau_m
        out_tau_e[k] = tau_e
        out_tau_f[k] = tau_f
        out_theta[k + 1] = theta
        out_omega[k + 1] = omega
        if not (math.isfinite(theta) and math.isfinite(omega)):
            for kk in range(k + 1, n):
                out_theta[kk] = math.nan
                out_omega[kk] = math.nan
                out_tau_m[kk] = math.nan
                out_tau_e[kk] = math.nan
                out_tau_f[kk] = math.nan
            return 1
    out_tau_m[n - 1] = 0.0
    out_tau_e[n - 1] = 0.0
    out_tau_f[n - 1] = 0.0
    return 0


def rollout_mae(model, c, law, a, ctrl_every, m, l, g, dt, j_m,
                theta0, omega0, targets, measured):
    """Sum of |theta_sim - measured| over all samples; NaN on divergence."""
    n = len(targets)
    mgl = m * g * l
    j = m * l * l + j_m
    j_dt = j / dt
    theta = theta0
    omega = omega0
    integral = 0.0
    held = 0.0
    total = abs(theta - measured[0])
    for k in range(n - 1):
        tgt = targets[k + 1]
        if law == LAW_OFF or tgt != tgt:
            tau_m = 0.0
        else:
            if k % ctrl_every == 0:
                held, integral = servo_torque(law, a, theta, omega, tgt, integral)
            tau_m = held
        theta, omega, _, _ = _step_core(
            model, c, mgl, j, j_dt, dt, theta, omega, tau_m
        )
        if not (math.isfinite(theta) and math.isfinite(omega)):
            return math.nan
        total += abs(theta - measured[k + 1])
    return total
