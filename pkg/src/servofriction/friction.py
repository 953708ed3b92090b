"""Friction torque-budget models.

Six models of increasing richness, tagged "M1" through "M6":

* M1 - Coulomb-Viscous
* M2 - adds velocity-decaying (Stribeck) static friction
* M3 - adds load-dependent friction
* M4 - Stribeck + load-dependent
* M5 - direction-dependent load terms (motor vs external side)
* M6 - adds a quadratic load term, as seen on harmonic drives

A model evaluates to a non-negative torque budget: the maximum friction
torque available to resist motion at the current state.  The torque that
would freeze the joint over one timestep (the stop torque) is clipped to
that budget to obtain the applied friction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import impl
from .errors import DomainError

MODELS = ("M1", "M2", "M3", "M4", "M5", "M6")

MODEL_COEFFS = {
    "M1": ("k_v", "k_c"),
    "M2": ("k_v", "k_c", "k_c_s", "v_s", "alpha"),
    "M3": ("k_v", "k_c", "k_l"),
    "M4": ("k_v", "k_c", "k_l", "k_c_s", "k_l_s", "v_s", "alpha"),
    "M5": ("k_v", "k_c", "k_m", "k_e", "k_c_s", "k_m_s", "k_e_s",
           "v_s", "alpha"),
    "M6": ("k_v", "k_c", "k_m", "k_e", "k_c_s", "k_m_s", "k_e_s",
           "k_m_q", "k_e_q", "v_s", "alpha"),
}

ALL_COEFFS = ("k_v", "k_c", "k_c_s", "v_s", "alpha", "k_l", "k_l_s",
              "k_m", "k_e", "k_m_s", "k_e_s", "k_m_q", "k_e_q")

# kernel coefficient vector slots; the symmetric load coefficient k_l maps
# onto both directional slots so all models share one code path
_SLOTS = {"k_v": (0,), "k_c": (1,), "k_c_s": (2,), "v_s": (3,), "alpha": (4,),
          "k_m": (5,), "k_e": (6,), "k_m_s": (7,), "k_e_s": (8,),
          "k_m_q": (9,), "k_e_q": (10,), "k_l": (5, 6), "k_l_s": (7, 8)}

_STRICTLY_POSITIVE = ("v_s", "alpha")


@dataclass(frozen=True)
class FrictionParams:
    """Coefficients of one friction model; all values are SI and >= 0."""

    model: str
    k_v: float | None = None
    k_c: float | None = None
    k_c_s: float | None = None
    v_s: float | None = None
    alpha: float | None = None
    k_l: float | None = None
    k_l_s: float | None = None
    k_m: float | None = None
    k_e: float | None = None
    k_m_s: float | None = None
    k_e_s: float | None = None
    k_m_q: float | None = None
    k_e_q: float | None = None

    def __post_init__(self):
        if self.model not in MODELS:
            raise DomainError(f"unknown friction model {self.model!r}")
        wanted = MODEL_COEFFS[self.model]
        for name in ALL_COEFFS:
            value = getattr(self, name)
            if name in wanted:
                if value is None:
                    raise DomainError(f"{self.model} requires coefficient {name}")
                value = float(value)
                if not math.isfinite(value) or value < 0.0:
                    raise DomainError(f"{name} must be finite and >= 0, got {value}")
                if name in _STRICTLY_POSITIVE and value == 0.0:
                    raise DomainError(f"{name} must be > 0")
                object.__setattr__(self, name, value)
            elif value is not None:
                raise DomainError(f"coefficient {name} is not part of {self.model}")

    @property
    def model_id(self) -> int:
        return int(self.model[1])

    def coeff_vector(self) -> np.ndarray:
        """Pack into the 11-slot kernel coefficient vector."""
        c = np.zeros(11)
        c[3] = 1.0  # v_s slot, unused by M1/M3 but kept well-defined
        c[4] = 1.0
        for name in MODEL_COEFFS[self.model]:
            for slot in _SLOTS[name]:
                c[slot] = getattr(self, name)
        return c

    def to_dict(self) -> dict:
        doc = {"model": self.model}
        for name in MODEL_COEFFS[self.model]:
            doc[name] = getattr(self, name)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "FrictionParams":
        if not isinstance(doc, dict) or "model" not in doc:
            raise DomainError("friction document must carry a 'model' tag")
        model = doc["model"]
        if model not in MODELS:
            raise DomainError(f"unknown friction model {model!r}")
        wanted = MODEL_COEFFS[model]
        unknown = set(doc) - set(wanted) - {"model"}
        if unknown:
            raise DomainError(f"unknown keys for {model}: {sorted(unknown)}")
        kwargs = {}
        for name in wanted:
            if name not in doc:
                raise DomainError(f"{model} document is missing {name}")
            value = doc[name]
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise DomainError(f"{name} must be a number, got {value!r}")
            kwargs[name] = float(value)
        return cls(model, **kwargs)


@dataclass(frozen=True)
class FrictionInputs:
    """State-dependent arguments of a friction model."""

    tau_m: float
    tau_e: float
    omega: float

    def __post_init__(self):
        for name in ("tau_m", "tau_e", "omega"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value}")
            object.__setattr__(self, name, value)


def friction_budget(params: FrictionParams, inputs: FrictionInputs) -> float:
    """Torque budget available to resist motion at the given state."""
    return impl.budget(params.model_id, params.coeff_vector(),
                       inputs.tau_m, inputs.tau_e, inputs.omega)


def stop_torque(j: float, dt: float, omega: float, tau_m: float,
                tau_e: float) -> float:
    """Friction torque that would bring the velocity to zero in one step."""
    if not (j > 0.0) or not (dt > 0.0):
        raise DomainError(f"need j > 0 and dt > 0, got j={j}, dt={dt}")
    for name, value in (("omega", omega), ("tau_m", tau_m), ("tau_e", tau_e)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value}")
    return -((j / dt) * omega + tau_m + tau_e)


def applied_friction(stop: float, budget: float) -> float:
    """Clip the stop torque to the +/- budget range."""
    if not math.isfinite(stop):
        raise DomainError(f"stop torque must be finite, got {stop}")
    if not (math.isfinite(budget) and budget >= 0.0):
        raise DomainError(f"budget must be finite and >= 0, got {budget}")
    if stop > budget:
        return budget
    if stop < -budget:
        return -budget
    return stop
