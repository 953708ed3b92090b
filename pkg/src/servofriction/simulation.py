"""Pendulum test-bench simulation.

The bench is a rigid link with a point load driven by one servo actuator.
Angle zero is the upward vertical, so the gravity torque is
``m * g * l * sin(theta)`` and the hanging rest pose is at pi.

One step resolves the actuator torque, the gravity torque, the friction
budget, and the stop torque, clips the stop torque to the budget, and
integrates with an explicit velocity update plus the half-acceleration
position term.  Rollouts repeat the step over a target series; static
drive/backdrive boundaries are found by bisection on the external torque.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._backend import impl
from .actuator import ActuatorModel
from .errors import DomainError, NumericalError
from .friction import FrictionParams

SEARCH_LIMIT = 1e3  # N*m; beyond this a boundary is declared unbounded


@dataclass(frozen=True)
class BenchConfig:
    """Pendulum test-bench constants."""

    m: float
    l: float
    g: float = 9.81
    dt: float = 1e-3

    def __post_init__(self):
        for name, low_ok in (("m", True), ("l", True), ("g", False), ("dt", False)):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0.0 or (value == 0.0 and not low_ok):
                raise DomainError(f"{name} must be finite and {'>=' if low_ok else '>'} 0, got {value}")
            object.__setattr__(self, name, value)

    def inertia(self, actuator: ActuatorModel) -> float:
        return self.m * self.l * self.l + actuator.motor.j_m

    def to_dict(self) -> dict:
        return {"m": self.m, "l": self.l, "g": self.g, "dt": self.dt}

    @classmethod
    def from_dict(cls, doc: dict) -> "BenchConfig":
        unknown = set(doc) - {"m", "l", "g", "dt"}
        if unknown:
            raise DomainError(f"unknown bench keys: {sorted(unknown)}")
        try:
            return cls(m=doc["m"], l=doc["l"], g=doc["g"], dt=doc["dt"])
        except KeyError as exc:
            raise DomainError(f"bench section is missing {exc}") from exc


@dataclass(frozen=True)
class SimState:
    """Joint position and velocity."""

    theta: float
    omega: float

    def __post_init__(self):
        for name in ("theta", "omega"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class StaticBoundary:
    """Extremal external torques of the static area at a given motor torque.

    Statuses are "bounded", "unbounded" (self-locking side: the static
    inequality holds with growing margin out to the search limit) or
    "exhausted" (inequality held everywhere searched but the margin was
    still shrinking, so unboundedness was not established).
    """

    tau_m: float
    tau_drive: float
    tau_backdrive: float
    drive_status: str = "bounded"
    backdrive_status: str = "bounded"


@dataclass
class RolloutResult:
    """Per-sample series of one rollout.

    Torque entries at index k describe the transition leaving sample k;
    the last row of the torque series is zero.
    """

    time: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    tau_m: np.ndarray
    tau_e: np.ndarray
    tau_f: np.ndarray


def _as_targets(targets) -> np.ndarray:
    if isinstance(targets, np.ndarray):
        arr = np.asarray(targets, dtype=float).copy()
    else:
        arr = np.array([math.nan if t is None else float(t) for t in targets])
    if arr.ndim != 1 or arr.size < 1:
        raise DomainError("targets must be a non-empty 1-D series")
    if np.isinf(arr).any():
        raise DomainError("targets must be finite or the released marker")
    return arr


def step(bench: BenchConfig, actuator: ActuatorModel, friction: FrictionParams,
         state: SimState, target, integral: float = 0.0) -> SimState:
    """Advance one physics step toward the target position at k+1."""
    j = bench.inertia(actuator)
    if j <= 0.0:
        raise DomainError("need m*l^2 + J_m > 0 (massless bench with no armature)")
    tgt = math.nan if target is None else float(target)
    if math.isinf(tgt):
        raise DomainError("target must be finite or None")
    theta1, omega1, _, _, _, _ = impl.step(
        friction.model_id, friction.coeff_vector(), actuator.law_id,
        actuator.param_vector(bench.dt), bench.m, bench.l, bench.g, bench.dt,
        actuator.motor.j_m, state.theta, state.omega, tgt, integral)
    if not (math.isfinite(theta1) and math.isfinite(omega1)):
        raise NumericalError("state became non-finite during step")
    return SimState(theta1, omega1)


def rollout(bench: BenchConfig, actuator: ActuatorModel,
            friction: FrictionParams, initial: SimState,
            targets) -> RolloutResult:
    """Roll the bench out over a target series sampled at the physics rate."""
    j = bench.inertia(actuator)
    if j <= 0.0:
        raise DomainError("need m*l^2 + J_m > 0 (massless bench with no armature)")
    tgt = _as_targets(targets)
    n = tgt.size
    ctrl_every = actuator.decimation(bench.dt)
    out = [np.empty(n) for _ in range(5)]
    status = impl.rollout(
        friction.model_id, friction.coeff_vector(), actuator.law_id,
        actuator.param_vector(ctrl_every * bench.dt), ctrl_every,
        bench.m, bench.l, bench.g, bench.dt, actuator.motor.j_m,
        initial.theta, initial.omega, tgt, *out)
    if status != 0:
        raise NumericalError("rollout diverged to a non-finite state")
    time = np.arange(n) * bench.dt
    return RolloutResult(time, *out)


def _one_side(margin, center: float, sign: float, limit: float,
              tol: float) -> tuple[float, str]:
    lo = center
    width = 1e-6 * max(1.0, abs(center))
    while True:
        cand = center + sign * width
        capped = abs(cand) >= limit
        if capped:
            cand = sign * limit
        if margin(cand) < 0.0:
            hi = cand
            break
        lo = cand
        if capped:
            halfway = 0.5 * (center + cand)
            if margin(cand) >= margin(halfway):
                return sign * math.inf, "unbounded"
            return cand, "exhausted"
        width *= 2.0
    while abs(hi - lo) > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) < 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi), "bounded"


def static_boundary(friction: FrictionParams, tau_m: float,
                    omega: float = 0.0, limit: float = SEARCH_LIMIT,
                    tol: float = 1e-11) -> StaticBoundary:
    """Drive/backdrive boundaries of the static area at one motor torque.

    The static area is where the stop torque fits inside the friction
    budget, i.e. |tau_m + tau_e| <= budget(tau_m, tau_e, omega); it always
    contains the no-friction equilibrium tau_e = -tau_m, from which the
    search expands outward and bisects the first sign change.
    """
    if not math.isfinite(tau_m):
        raise DomainError(f"tau_m must be finite, got {tau_m}")
    if abs(tau_m) >= limit:
        raise DomainError(f"|tau_m| must be below the search limit {limit}")
    model = friction.model_id
    coeffs = friction.coeff_vector()

    def margin(tau_e: float) -> float:
        return impl.budget(model, coeffs, tau_m, tau_e, omega) - abs(tau_m + tau_e)

    drive, drive_status = _one_side(margin, -tau_m, +1.0, limit, tol)
    backdrive, backdrive_status = _one_side(margin, -tau_m, -1.0, limit, tol)
    return StaticBoundary(tau_m, drive, backdrive, drive_status, backdrive_status)


def diagram(friction: FrictionParams, tau_m_values,
            velocity_levels=(0.0,)) -> list[tuple[float, float, StaticBoundary]]:
    """Boundary curves over a motor-torque grid and velocity levels.

    Rows are (tau_m, velocity_level, boundary), one full grid sweep per
    velocity level; the budget is evaluated at that |velocity|.
    """
    tau_m_values = [float(t) for t in tau_m_values]
    if not tau_m_values:
        raise DomainError("tau_m grid must be non-empty")
    rows = []
    for level in velocity_levels:
        level = float(level)
        if not (math.isfinite(level) and level >= 0.0):
            raise DomainError(f"velocity level must be finite and >= 0, got {level}")
        for tau_m in tau_m_values:
            rows.append((tau_m, level, static_boundary(friction, tau_m, level)))
    return rows


def equivalent_cv_params(friction: FrictionParams, tau_m: float,
                         tau_e_prev: float, omega: float) -> tuple[float, float]:
    """Coulomb-Viscous pair reproducing the extended budget at this state.

    Returns (k_c_eff, k_v_eff) with k_c_eff the velocity-threshold part of
    the budget evaluated with the previous-step external torque, so
    k_c_eff + k_v_eff * |omega| equals the extended budget exactly.
    """
    for name, value in (("tau_m", tau_m), ("tau_e_prev", tau_e_prev),
                        ("omega", omega)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value}")
    k_c_eff = impl.static_part(friction.model_id, friction.coeff_vector(),
                               tau_m, tau_e_prev, omega)
    return k_c_eff, friction.k_v


def params_to_doc(friction: FrictionParams,
                  actuator: ActuatorModel | None = None) -> dict:
    """Flat parameter document: friction coefficients plus a model tag,
    with an optional nested actuator section."""
    doc = friction.to_dict()
    if actuator is not None:
        doc["actuator"] = actuator.to_dict()
    return doc


def params_from_doc(doc: dict) -> tuple[FrictionParams, ActuatorModel | None]:
    if not isinstance(doc, dict):
        raise DomainError("parameter document must be an object")
    doc = dict(doc)
    actuator_doc = doc.pop("actuator", None)
    actuator = None if actuator_doc is None else ActuatorModel.from_dict(actuator_doc)
    return FrictionParams.from_dict(doc), actuator


def save_params_file(path, friction: FrictionParams,
                     actuator: ActuatorModel | None = None):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(params_to_doc(friction, actuator), fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_params_file(path) -> tuple[FrictionParams, ActuatorModel | None]:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid parameter file {path}: {exc}") from exc
    return params_from_doc(doc)
