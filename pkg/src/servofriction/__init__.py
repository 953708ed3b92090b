"""Servo actuator friction models, test-bench simulation, and
trajectory-based parameter identification.

The hot simulation kernels live in a compiled extension with a pure-Python
fallback selected at import; see :func:`backend_name`.
"""

from ._backend import backend_name
from .actuator import (ActuatorModel, MotorElectrical, PidGains, current_step,
                       torque_off_step, voltage_step)
from .dataset import (DatasetSplit, TrajectoryLog, generate_targets, load_log,
                      save_log, split, synthesize_family, synthesize_log,
                      table1_presets)
from .errors import DataError, DomainError, NumericalError
from .friction import (MODEL_COEFFS, MODELS, FrictionInputs, FrictionParams,
                       applied_friction, friction_budget, stop_torque)
from .identification import (IdentResult, ParamBound, ParamSpace, cost,
                             default_space, evaluate, identify, model_sweep)
from .simulation import (BenchConfig, RolloutResult, SimState, StaticBoundary,
                         diagram, equivalent_cv_params, load_params_file,
                         rollout, save_params_file, static_boundary, step)

__version__ = "0.1.0"

__all__ = [
    "ActuatorModel", "BenchConfig", "DataError", "DatasetSplit",
    "DomainError", "FrictionInputs", "FrictionParams", "IdentResult",
    "MODELS", "MODEL_COEFFS", "MotorElectrical", "NumericalError",
    "ParamBound", "ParamSpace", "PidGains", "RolloutResult", "SimState",
    "StaticBoundary", "applied_friction", "backend_name", "cost",
    "current_step", "default_space", "diagram", "equivalent_cv_params",
    "evaluate", "friction_budget", "generate_targets", "identify",
    "load_log", "load_params_file", "model_sweep", "rollout", "save_log",
    "save_params_file", "split", "static_boundary", "step", "stop_torque",
    "synthesize_family", "synthesize_log", "table1_presets",
    "torque_off_step", "voltage_step",
]
