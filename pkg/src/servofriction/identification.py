"""Black-box parameter identification from trajectory logs.

The cost of a parameter vector is the mean absolute error between each
log's measured positions and a fresh rollout from the log's initial
measured position under the log's own targets and configuration.  A
covariance-matrix-adaptation strategy minimizes it inside per-parameter
boxes, with log-scaled coordinates where the plausible range spans
decades.  Validation logs are never seen by the optimizer; they are
scored by a separate evaluate call.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._backend import impl
from .cmaes import CmaEs, default_population
from .dataset import TrajectoryLog
from .errors import DomainError
from .friction import MODEL_COEFFS, MODELS, _SLOTS
from .simulation import params_to_doc  # noqa: F401  (re-exported for reports)

DIVERGENCE_PENALTY = 1e6  # rad; replaces the cost of a diverged rollout

ELECTRICAL_NAMES = ("k_t", "R", "J_m")

_DEFAULT_BOUNDS = {
    "k_v": (1e-6, 10.0, "log"),
    "k_c": (1e-6, 10.0, "log"),
    "k_c_s": (1e-6, 10.0, "log"),
    "k_l": (1e-6, 10.0, "log"),
    "k_l_s": (1e-6, 10.0, "log"),
    "k_m": (1e-6, 10.0, "log"),
    "k_e": (1e-6, 10.0, "log"),
    "k_m_s": (1e-6, 10.0, "log"),
    "k_e_s": (1e-6, 10.0, "log"),
    "k_m_q": (1e-6, 10.0, "log"),
    "k_e_q": (1e-6, 10.0, "log"),
    "v_s": (1e-3, 10.0, "log"),
    "alpha": (0.1, 10.0, "log"),
    "k_t": (0.1, 20.0, "linear"),
    "R": (0.05, 50.0, "log"),
    "J_m": (1e-6, 0.1, "log"),
}


@dataclass(frozen=True)
class ParamBound:
    name: str
    lower: float
    upper: float
    scale: str = "log"

    def __post_init__(self):
        if self.scale not in ("linear", "log"):
            raise DomainError(f"unknown scale {self.scale!r}")
        if not (self.lower < self.upper):
            raise DomainError(f"{self.name}: lower bound must be below upper")
        if self.scale == "log" and self.lower <= 0.0:
            raise DomainError(f"{self.name}: log scale needs lower > 0")


class ParamSpace:
    """Ordered, bounded, optionally log-scaled parameter vector layout."""

    def __init__(self, bounds):
        self.bounds = tuple(bounds)
        self.names = tuple(b.name for b in self.bounds)
        if len(set(self.names)) != len(self.names):
            raise DomainError("duplicate parameter names")
        self._lower = np.array([b.lower for b in self.bounds])
        self._upper = np.array([b.upper for b in self.bounds])

    def __len__(self):
        return len(self.bounds)

    def to_physical(self, unit: np.ndarray) -> np.ndarray:
        out = np.empty(len(self.bounds))
        for i, bound in enumerate(self.bounds):
            if bound.scale == "log":
                span = math.log(bound.upper) - math.log(bound.lower)
                out[i] = math.exp(math.log(bound.lower) + unit[i] * span)
            else:
                out[i] = bound.lower + unit[i] * (bound.upper - bound.lower)
        return out

    def contains(self, vector: np.ndarray) -> bool:
        vector = np.asarray(vector, dtype=float)
        return bool((vector >= self._lower).all() and (vector <= self._upper).all())


def default_space(model: str, fit_electrical: bool = False) -> ParamSpace:
    """Bounds for one friction model, plus motor electricals when those
    are to be identified as well."""
    if model not in MODELS:
        raise DomainError(f"unknown friction model {model!r}")
    names = list(MODEL_COEFFS[model])
    if fit_electrical:
        names.extend(ELECTRICAL_NAMES)
    return ParamSpace(ParamBound(n, *_DEFAULT_BOUNDS[n]) for n in names)


@dataclass(frozen=True)
class IdentResult:
    """Outcome of one identification run."""

    model: str
    seed: int
    budget: int
    evaluations: int
    params: dict
    identification_mae: float
    validation_mae: float | None
    per_log_mae: dict
    trace: list

    def report_dict(self) -> dict:
        return {
            "model": self.model,
            "seed": self.seed,
            "budget": self.budget,
            "evaluations": self.evaluations,
            "parameters": {k: self.params[k] for k in self.params},
            "identification_mae": self.identification_mae,
            "validation_mae": self.validation_mae,
            "per_log_mae": {k: self.per_log_mae[k]
                            for k in sorted(self.per_log_mae)},
            "trace": [list(entry) for entry in self.trace],
        }


class _CostFunction:
    """MAE in joint position over a set of logs, ready for hot evaluation."""

    def __init__(self, logs, model: str, space: ParamSpace,
                 fit_electrical: bool = False):
        if model not in MODELS:
            raise DomainError(f"unknown friction model {model!r}")
        expected = list(MODEL_COEFFS[model])
        if fit_electrical:
            expected.extend(ELECTRICAL_NAMES)
        if list(space.names) != expected:
            raise DomainError(
                f"parameter space {list(space.names)} does not match "
                f"model {model} (expected {expected})")
        if not logs:
            raise DomainError("need at least one log")
        self.model_id = int(model[1])
        self.fit_electrical = fit_electrical
        self.space = space
        self._slots = [(_SLOTS[name], i)
                       for i, name in enumerate(MODEL_COEFFS[model])]
        template = np.zeros(11)
        template[3] = 1.0
        template[4] = 1.0
        self._template = template
        self.log_ids = [log.log_id for log in logs]
        self.samples = sum(len(log.time) for log in logs)
        self._prepared = []
        for log in logs:
            bench, act = log.bench, log.actuator
            ctrl_every = act.decimation(bench.dt)
            self._prepared.append((
                act.law_id,
                act.param_vector(ctrl_every * bench.dt),
                ctrl_every, bench.m, bench.l, bench.g, bench.dt,
                act.motor.j_m,
                float(log.measured[0]),
                np.ascontiguousarray(log.target, dtype=float),
                np.ascontiguousarray(log.measured, dtype=float),
            ))

    def coeff_vector(self, vector: np.ndarray) -> np.ndarray:
        coeffs = self._template.copy()
        for slots, i in self._slots:
            for slot in slots:
                coeffs[slot] = vector[i]
        return coeffs

    def __call__(self, vector: np.ndarray) -> float:
        total, count = self._accumulate(vector)
        if total is None:
            return DIVERGENCE_PENALTY
        return total / count

    def per_log(self, vector: np.ndarray) -> dict:
        scores = {}
        coeffs = self.coeff_vector(vector)
        for log_id, prepared in zip(self.log_ids, self._prepared):
            total = self._one_log(coeffs, vector, prepared)
            scores[log_id] = (DIVERGENCE_PENALTY if math.isnan(total)
                              else total / len(prepared[10]))
        return scores

    def _one_log(self, coeffs, vector, prepared) -> float:
        (law, act, ctrl_every, m, l, g, dt, j_m,
         theta0, targets, measured) = prepared
        if self.fit_electrical:
            act = act.copy()
            act[0] = vector[-3]  # k_t
            act[1] = vector[-2]  # R
            j_m = vector[-1]
        return impl.rollout_mae(self.model_id, coeffs, law, act, ctrl_every,
                                m, l, g, dt, j_m, theta0, 0.0,
                                targets, measured)

    def _accumulate(self, vector):
        coeffs = self.coeff_vector(vector)
        total = 0.0
        count = 0
        for prepared in self._prepared:
            part = self._one_log(coeffs, vector, prepared)
            if math.isnan(part):
                return None, 0
            total += part
            count += len(prepared[10])
        return total, count


def cost(vector, logs, model: str, space: ParamSpace | None = None,
         fit_electrical: bool = False) -> float:
    """MAE (rad) of one parameter vector over a set of logs."""
    space = space if space is not None else default_space(model, fit_electrical)
    vector = np.asarray(vector, dtype=float)
    if vector.shape != (len(space),):
        raise DomainError(f"vector length {vector.shape} does not match "
                          f"space of {len(space)} parameters")
    if not space.contains(vector):
        raise DomainError("vector violates the parameter-space bounds")
    return _CostFunction(logs, model, space, fit_electrical)(vector)


def evaluate(params: dict, logs, model: str,
             fit_electrical: bool = False) -> tuple[float, dict]:
    """Score a named parameter set on logs; returns (mae, per-log mae)."""
    space = default_space(model, fit_electrical)
    try:
        vector = np.array([float(params[name]) for name in space.names])
    except KeyError as exc:
        raise DomainError(f"missing parameter {exc}") from exc
    fn = _CostFunction(logs, model, space, fit_electrical)
    return fn(vector), fn.per_log(vector)


_STALL_GENERATIONS = 50
_STALL_IMPROVEMENT = 1e-4  # relative best-cost improvement that resets the stall clock


def identify(logs, model: str, space: ParamSpace | None = None, *,
             budget: int = 4000, seed: int = 0, workers: int | None = None,
             budget_units: str = "evaluations", fit_electrical: bool = False,
             progress=None) -> IdentResult:
    """Fit a friction model to identification logs with CMA-ES.

    Restart strategy: whenever a run stalls (no meaningful best-cost
    improvement over a window of generations, or step-size collapse) and
    budget remains, the search restarts with a doubled population, keeping
    the best-ever vector.  The cost landscape of stick-slip trajectories
    is multi-modal, so single runs are easily trapped.

    ``budget`` counts cost evaluations by default; pass
    ``budget_units="generations"`` to count optimizer generations instead.
    Validation scoring is a separate step (see :func:`evaluate`), so this
    function never sees held-out logs.  Deterministic for a fixed seed.
    """
    if budget_units not in ("evaluations", "generations"):
        raise DomainError(f"unknown budget units {budget_units!r}")
    space = space if space is not None else default_space(model, fit_electrical)
    fn = _CostFunction(logs, model, space, fit_electrical)
    base_population = default_population(len(space))
    max_evals = (budget if budget_units == "evaluations"
                 else budget * base_population)
    if max_evals < base_population:
        raise DomainError(
            f"budget of {max_evals} evaluations is below the population "
            f"size {base_population}")
    if workers is None:
        workers = min(base_population, os.cpu_count() or 1)

    rng = np.random.default_rng(seed)
    best_cost = math.inf
    best_vector = None
    trace = []
    evaluations = 0
    generation = 0
    population = base_population
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while evaluations + population <= max_evals:
            optimizer = CmaEs(len(space), rng, population=population)
            stall_mark = best_cost
            stall_age = 0
            while evaluations + optimizer.lam <= max_evals:
                unit_candidates = optimizer.ask()
                vectors = [space.to_physical(u) for u in unit_candidates]
                if pool is not None:
                    costs = list(pool.map(fn, vectors))
                else:
                    costs = [fn(v) for v in vectors]
                optimizer.tell(unit_candidates, costs)
                for vector, value in zip(vectors, costs):
                    if value < best_cost:
                        best_cost = value
                        best_vector = vector
                evaluations += optimizer.lam
                generation += 1
                trace.append((generation, evaluations, best_cost))
                if progress is not None:
                    progress(generation, evaluations, best_cost)
                if best_cost < stall_mark * (1.0 - _STALL_IMPROVEMENT):
                    stall_mark = best_cost
                    stall_age = 0
                else:
                    stall_age += 1
                if stall_age >= _STALL_GENERATIONS or optimizer.sigma < 1e-12:
                    break
            population *= 2
    finally:
        if pool is not None:
            pool.shutdown()

    params = {name: float(value)
              for name, value in zip(space.names, best_vector)}
    return IdentResult(model=model, seed=seed, budget=budget,
                       evaluations=evaluations, params=params,
                       identification_mae=best_cost, validation_mae=None,
                       per_log_mae=fn.per_log(best_vector), trace=trace)


def attach_validation(result: IdentResult, validation_logs,
                      fit_electrical: bool = False) -> IdentResult:
    """Score held-out logs and return the completed result."""
    mae, per_log = evaluate(result.params, validation_logs, result.model,
                            fit_electrical)
    return replace(result, validation_mae=mae,
                   per_log_mae={**result.per_log_mae, **per_log})


def model_sweep(logs, models, dataset_split, *, budget: int = 4000,
                seed: int = 0, workers: int | None = None,
                budget_units: str = "evaluations",
                fit_electrical: bool = False,
                progress_factory=None) -> list[IdentResult]:
    """Identify each model on the same split; validation-scored results.

    Returns one result per model (empty list for an empty model list).
    """
    results = []
    if not models:
        return results
    by_id = {log.log_id: log for log in logs}
    missing = [i for i in (*dataset_split.identification,
                           *dataset_split.validation) if i not in by_id]
    if missing:
        raise DomainError(f"split references unknown log ids: {missing[:5]}")
    ident_logs = [by_id[i] for i in dataset_split.identification]
    valid_logs = [by_id[i] for i in dataset_split.validation]
    for model in models:
        progress = progress_factory(model) if progress_factory else None
        result = identify(ident_logs, model, budget=budget, seed=seed,
                          workers=workers, budget_units=budget_units,
                          fit_electrical=fit_electrical, progress=progress)
        results.append(attach_validation(result, valid_logs, fit_electrical))
    return results
