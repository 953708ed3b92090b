"""Servo actuator models: control law plus motor electrical model.

A servo model maps (position, velocity, target position) to a motor
torque.  Two standard laws are provided, voltage and current, both built
on a PID block with clamped integral and derivative on measurement, plus
a released ("off") mode in which the output stage applies no torque and,
for a voltage drive, no back-EMF damping either.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import impl
from .errors import DomainError

LAWS = ("voltage", "current", "off")
LAW_IDS = {"off": 0, "voltage": 1, "current": 2}


@dataclass(frozen=True)
class MotorElectrical:
    """Motor constants, reducer included (torque constant is motor constant
    times gear ratio, apparent inertia is rotor inertia times ratio^2)."""

    k_t: float
    r: float
    u_max: float
    i_heat: float | None = None
    j_m: float = 0.0

    def __post_init__(self):
        for name in ("k_t", "r", "u_max"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"{name} must be finite and > 0, got {value}")
            object.__setattr__(self, name, value)
        if self.i_heat is not None:
            value = float(self.i_heat)
            if not (math.isfinite(value) and value > 0.0):
                raise DomainError(f"i_heat must be finite and > 0, got {value}")
            object.__setattr__(self, "i_heat", value)
        j_m = float(self.j_m)
        if not (math.isfinite(j_m) and j_m >= 0.0):
            raise DomainError(f"j_m must be finite and >= 0, got {j_m}")
        object.__setattr__(self, "j_m", j_m)


@dataclass(frozen=True)
class PidGains:
    """PID gains; the integral state is clamped to +/- integral_limit."""

    k_p: float
    k_i: float = 0.0
    k_d: float = 0.0
    integral_limit: float = math.inf

    def __post_init__(self):
        for name in ("k_p", "k_i", "k_d"):
            value = float(getattr(self, name))
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)
        lim = float(self.integral_limit)
        if math.isnan(lim):
            raise DomainError("integral_limit must not be NaN")
        if self.k_i > 0.0 and lim <= 0.0:
            raise DomainError(f"integral_limit must be > 0, got {lim}")
        object.__setattr__(self, "integral_limit", lim)


@dataclass(frozen=True)
class ActuatorModel:
    """Control-law variant plus motor model and control update period.

    ``control_period`` is in seconds and must be an integer multiple of
    the physics timestep; None means one control update per physics step.
    """

    law: str
    motor: MotorElectrical
    gains: PidGains = field(default_factory=lambda: PidGains(0.0))
    control_period: float | None = None

    def __post_init__(self):
        if self.law not in LAWS:
            raise DomainError(f"unknown control law {self.law!r}")
        if self.control_period is not None:
            period = float(self.control_period)
            if not (math.isfinite(period) and period > 0.0):
                raise DomainError(f"control_period must be > 0, got {period}")
            object.__setattr__(self, "control_period", period)

    @property
    def law_id(self) -> int:
        return LAW_IDS[self.law]

    def decimation(self, dt: float) -> int:
        """Number of physics steps per control update for timestep dt."""
        if self.control_period is None:
            return 1
        steps = round(self.control_period / dt)
        if steps < 1 or abs(steps * dt - self.control_period) > 1e-9 * max(dt, self.control_period):
            raise DomainError(
                f"control_period {self.control_period} is not an integer "
                f"multiple of the physics timestep {dt}")
        return steps

    def param_vector(self, dt_ctrl: float) -> np.ndarray:
        """Pack into the 9-slot kernel actuator vector."""
        motor, gains = self.motor, self.gains
        i_heat = math.inf if motor.i_heat is None else motor.i_heat
        return np.array([motor.k_t, motor.r, motor.u_max, i_heat,
                         gains.k_p, gains.k_i, gains.k_d,
                         gains.integral_limit, dt_ctrl])

    def to_dict(self) -> dict:
        motor, gains = self.motor, self.gains
        lim = gains.integral_limit
        return {
            "law": self.law,
            "k_p": gains.k_p,
            "k_i": gains.k_i,
            "k_d": gains.k_d,
            "integral_limit": None if math.isinf(lim) else lim,
            "k_t": motor.k_t,
            "R": motor.r,
            "U_max": motor.u_max,
            "I_heat": motor.i_heat,
            "J_m": motor.j_m,
            "control_period": self.control_period,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ActuatorModel":
        known = {"law", "k_p", "k_i", "k_d", "integral_limit", "k_t", "R",
                 "U_max", "I_heat", "J_m", "control_period"}
        if not isinstance(doc, dict):
            raise DomainError("actuator section must be an object")
        unknown = set(doc) - known
        if unknown:
            raise DomainError(f"unknown actuator keys: {sorted(unknown)}")
        missing = {"law", "k_p", "k_t", "R", "U_max"} - set(doc)
        if missing:
            raise DomainError(f"actuator section is missing {sorted(missing)}")
        lim = doc.get("integral_limit")
        motor = MotorElectrical(k_t=doc["k_t"], r=doc["R"], u_max=doc["U_max"],
                                i_heat=doc.get("I_heat"), j_m=doc.get("J_m", 0.0))
        gains = PidGains(k_p=doc["k_p"], k_i=doc.get("k_i", 0.0),
                         k_d=doc.get("k_d", 0.0),
                         integral_limit=math.inf if lim is None else lim)
        return cls(law=doc["law"], motor=motor, gains=gains,
                   control_period=doc.get("control_period"))


def _check_state(theta: float, omega: float):
    if not (math.isfinite(theta) and math.isfinite(omega)):
        raise DomainError(f"state must be finite, got theta={theta}, omega={omega}")


def _as_target(target) -> float:
    if target is None:
        return math.nan
    target = float(target)
    if math.isinf(target):
        raise DomainError("target must be finite or None")
    return target


def voltage_step(motor: MotorElectrical, gains: PidGains, theta: float,
                 omega: float, target, integral: float = 0.0,
                 dt: float = 1e-3) -> tuple[float, float]:
    """Voltage-law torque: PID gives a voltage clipped to +/- U_max, torque
    follows from the DC motor equation with back-EMF.

    Returns (tau_m, updated integral state).
    """
    _check_state(theta, omega)
    model = ActuatorModel("voltage", motor, gains)
    return impl.servo_torque(1, model.param_vector(dt), theta, omega,
                             _as_target(target), integral)


def current_step(motor: MotorElectrical, gains: PidGains, theta: float,
                 omega: float, target, integral: float = 0.0,
                 dt: float = 1e-3) -> tuple[float, float]:
    """Current-law torque: PID gives a current command clipped to the
    intersection of the back-EMF window and the heat limit, torque is
    k_t times the applied current.

    Returns (tau_m, updated integral state).
    """
    _check_state(theta, omega)
    model = ActuatorModel("current", motor, gains)
    return impl.servo_torque(2, model.param_vector(dt), theta, omega,
                             _as_target(target), integral)


def torque_off_step(theta: float = 0.0, omega: float = 0.0) -> float:
    """Released output stage: zero torque, and no back-EMF damping."""
    _check_state(theta, omega)
    return 0.0
