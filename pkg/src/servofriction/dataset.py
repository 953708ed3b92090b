"""Trajectory logs: format, excitation profiles, synthesis, and splitting.

A log is one recorded (or synthesized) run of the test bench: a header
with the bench and actuator configuration and a uniformly sampled series
of (time, target, measured) triples.  The released output stage is
encoded as a null target.  Synthetic logs may embed the ground-truth
friction parameters they were generated from.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .actuator import ActuatorModel, MotorElectrical, PidGains
from .errors import DataError, DomainError
from .friction import FrictionParams
from .simulation import BenchConfig, SimState, rollout

TRAJECTORY_TYPES = ("accelerated-oscillations", "slow-with-sub-oscillations",
                    "raise-lower", "lift-drop")

VALIDATION_FRACTION = 0.25


@dataclass
class TrajectoryLog:
    """Header plus uniformly sampled target/measured series."""

    bench: BenchConfig
    actuator: ActuatorModel
    log_id: str
    trajectory: str
    time: np.ndarray
    target: np.ndarray  # NaN marks the released output stage
    measured: np.ndarray
    ground_truth: FrictionParams | None = None

    def __post_init__(self):
        n = len(self.time)
        if n < 2:
            raise DataError("a log needs at least 2 samples")
        if len(self.target) != n or len(self.measured) != n:
            raise DataError("time, target and measured must have equal length")
        if not np.isfinite(self.measured).all():
            raise DataError("measured values must be finite")
        dt = self.bench.dt
        deltas = np.diff(self.time)
        if (deltas <= 0).any() or np.abs(deltas - dt).max() > 1e-9 * max(1.0, dt):
            raise DataError("timestamps must increase uniformly by the header dt")

    def to_doc(self) -> dict:
        samples = []
        for t, tgt, meas in zip(self.time, self.target, self.measured):
            samples.append([float(t), None if math.isnan(tgt) else float(tgt),
                            float(meas)])
        header = {
            "log_id": self.log_id,
            "trajectory": self.trajectory,
            "bench": self.bench.to_dict(),
            "actuator": self.actuator.to_dict(),
            "ground_truth": None if self.ground_truth is None
            else self.ground_truth.to_dict(),
        }
        return {"header": header, "samples": samples}

    @classmethod
    def from_doc(cls, doc: dict) -> "TrajectoryLog":
        try:
            header = doc["header"]
            samples = doc["samples"]
            bench = BenchConfig.from_dict(header["bench"])
            act = ActuatorModel.from_dict(header["actuator"])
            truth_doc = header.get("ground_truth")
            truth = None if truth_doc is None else FrictionParams.from_dict(truth_doc)
            time = np.array([row[0] for row in samples], dtype=float)
            target = np.array([math.nan if row[1] is None else row[1]
                               for row in samples], dtype=float)
            measured = np.array([row[2] for row in samples], dtype=float)
            return cls(bench=bench, actuator=act, log_id=header["log_id"],
                       trajectory=header["trajectory"], time=time,
                       target=target, measured=measured, ground_truth=truth)
        except (KeyError, IndexError, TypeError, DomainError) as exc:
            raise DataError(f"malformed log document: {exc}") from exc


def save_log(log: TrajectoryLog, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(log.to_doc(), fh, allow_nan=False)
        fh.write("\n")


def load_log(path) -> TrajectoryLog:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid log file {path}: {exc}") from exc
    return TrajectoryLog.from_doc(doc)


def _time_grid(dt: float, duration: float) -> np.ndarray:
    if not (dt > 0.0 and duration > 0.0):
        raise DomainError("dt and duration must be > 0")
    n = int(round(duration / dt)) + 1
    if n < 2:
        raise DomainError("duration must cover at least one step")
    return np.arange(n) * dt


def chirp_targets(dt: float, duration: float, amplitude: float,
                  f_start: float, f_end: float,
                  center: float = math.pi) -> np.ndarray:
    """Constant-amplitude oscillation with linearly increasing frequency."""
    if not (f_start > 0.0 and f_end > 0.0):
        raise DomainError("frequencies must be > 0")
    t = _time_grid(dt, duration)
    phase = f_start * t + (f_end - f_start) / (2.0 * duration) * t * t
    return center + amplitude * np.sin(2.0 * math.pi * phase)


def dual_sine_targets(dt: float, duration: float, amplitude: float,
                      frequency: float, sub_amplitude: float,
                      sub_frequency: float,
                      center: float = math.pi) -> np.ndarray:
    """Slow oscillation with a smaller, faster oscillation on top."""
    if not (frequency > 0.0 and sub_frequency > 0.0):
        raise DomainError("frequencies must be > 0")
    t = _time_grid(dt, duration)
    return (center + amplitude * np.sin(2.0 * math.pi * frequency * t)
            + sub_amplitude * np.sin(2.0 * math.pi * sub_frequency * t))


def _raise_profile(t: np.ndarray, duration: float, amplitude: float,
                   raise_time: float, hold_time: float) -> np.ndarray:
    if not (raise_time > 0.0 and hold_time >= 0.0):
        raise DomainError("raise_time must be > 0 and hold_time >= 0")
    if raise_time + hold_time >= duration:
        raise DomainError("raise + hold must leave time for the tail segment")
    up = np.clip(t / raise_time, 0.0, 1.0)
    return amplitude * up


def raise_lower_targets(dt: float, duration: float, amplitude: float,
                        raise_time: float, hold_time: float,
                        center: float = math.pi) -> np.ndarray:
    """Raise the load, hold, then lower it slowly back down."""
    t = _time_grid(dt, duration)
    profile = _raise_profile(t, duration, amplitude, raise_time, hold_time)
    t_down = raise_time + hold_time
    down = np.clip((t - t_down) / (duration - t_down), 0.0, 1.0)
    profile = np.where(t < t_down, profile, amplitude * (1.0 - down))
    return center - profile


def lift_drop_targets(dt: float, duration: float, amplitude: float,
                      raise_time: float, hold_time: float,
                      center: float = math.pi) -> np.ndarray:
    """Raise the load, hold, then release the output stage."""
    t = _time_grid(dt, duration)
    profile = _raise_profile(t, duration, amplitude, raise_time, hold_time)
    targets = center - profile
    targets[t >= raise_time + hold_time] = math.nan
    return targets


_GENERATORS = {
    "accelerated-oscillations": chirp_targets,
    "slow-with-sub-oscillations": dual_sine_targets,
    "raise-lower": raise_lower_targets,
    "lift-drop": lift_drop_targets,
}


def load_presets() -> dict:
    text = resources.files(__package__).joinpath("presets.json").read_text()
    return json.loads(text)


def generate_targets(kind: str, dt: float, duration: float | None = None,
                     center: float | None = None, **overrides) -> np.ndarray:
    """Target series for one of the four excitation profiles, using the
    shipped defaults unless overridden."""
    if kind not in _GENERATORS:
        raise DomainError(f"unknown trajectory type {kind!r}")
    presets = load_presets()["trajectories"]
    kwargs = dict(presets[kind])
    kwargs.update(overrides)
    if duration is None:
        duration = presets["duration"]
    if center is None:
        center = presets["center"]
    return _GENERATORS[kind](dt=dt, duration=duration, center=center, **kwargs)


def synthesize_log(bench: BenchConfig, actuator: ActuatorModel,
                   true_friction: FrictionParams, targets, *,
                   noise: float = 0.0, seed=0, log_id: str = "log",
                   trajectory: str = "custom") -> TrajectoryLog:
    """Roll the bench out under known friction and record a noisy measure.

    The bench starts at rest on the first target; measurement noise is
    i.i.d. zero-mean Gaussian with the given standard deviation.
    """
    if noise < 0.0 or not math.isfinite(noise):
        raise DomainError(f"noise sigma must be finite and >= 0, got {noise}")
    targets = np.asarray(targets, dtype=float)
    if math.isnan(targets[0]):
        raise DomainError("the first target must be a position, not released")
    initial = SimState(float(targets[0]), 0.0)
    result = rollout(bench, actuator, true_friction, initial, targets)
    measured = result.theta
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        measured = measured + rng.normal(0.0, noise, measured.size)
    else:
        measured = measured.copy()
    return TrajectoryLog(bench=bench, actuator=actuator, log_id=log_id,
                         trajectory=trajectory, time=result.time,
                         target=targets.copy(), measured=measured,
                         ground_truth=true_friction)


@dataclass(frozen=True)
class FamilyPreset:
    """One actuator family: configuration grid plus motor model and the
    ground-truth friction used for synthetic data."""

    name: str
    masses: tuple
    lengths: tuple
    gains: tuple
    law: str
    motor: MotorElectrical
    ground_truth: FrictionParams


def family_preset(family: str) -> FamilyPreset:
    presets = load_presets()["families"]
    if family not in presets:
        raise DomainError(f"unknown preset family {family!r}; "
                          f"have {sorted(presets)}")
    doc = presets[family]
    motor_doc = doc["motor"]
    motor = MotorElectrical(k_t=motor_doc["k_t"], r=motor_doc["R"],
                            u_max=motor_doc["U_max"],
                            i_heat=motor_doc["I_heat"], j_m=motor_doc["J_m"])
    return FamilyPreset(name=family, masses=tuple(doc["masses"]),
                        lengths=tuple(doc["lengths"]),
                        gains=tuple(doc["gains"]), law=doc["law"],
                        motor=motor,
                        ground_truth=FrictionParams.from_dict(doc["ground_truth"]))


def table1_presets(family: str) -> list[tuple[float, float, float]]:
    """The (mass, length, proportional gain) identification grid."""
    preset = family_preset(family)
    return [(m, l, g) for m in preset.masses for l in preset.lengths
            for g in preset.gains]


def synthesize_family(family: str, types=TRAJECTORY_TYPES, *,
                      noise: float = 0.0, seed: int = 0,
                      dt: float = 1e-3) -> list[TrajectoryLog]:
    """Synthesize the full preset grid for one family, one log per
    (configuration x trajectory type); deterministic in the seed."""
    preset = family_preset(family)
    types = tuple(types)
    for kind in types:
        if kind not in TRAJECTORY_TYPES:
            raise DomainError(f"unknown trajectory type {kind!r}")
    grid = table1_presets(family)
    seeds = np.random.SeedSequence(seed).spawn(len(grid) * len(types))
    logs = []
    index = 0
    for mass, length, gain in grid:
        bench = BenchConfig(m=mass, l=length, dt=dt)
        actuator = ActuatorModel(law=preset.law, motor=preset.motor,
                                 gains=PidGains(k_p=gain))
        for kind in types:
            targets = generate_targets(kind, dt)
            log_id = f"{family}-m{mass:g}-l{length:g}-g{gain:g}-{kind}"
            logs.append(synthesize_log(
                bench, actuator, preset.ground_truth, targets, noise=noise,
                seed=seeds[index], log_id=log_id, trajectory=kind))
            index += 1
    return logs


@dataclass(frozen=True)
class DatasetSplit:
    """Disjoint identification/validation partition of a set of log ids."""

    identification: tuple
    validation: tuple
    seed: int

    def __post_init__(self):
        ident, valid = set(self.identification), set(self.validation)
        if ident & valid:
            raise DataError("identification and validation sets overlap")


def split(logs, seed: int = 0) -> DatasetSplit:
    """Seeded 75/25 identification/validation split.

    Stratified by trajectory type when every type has at least two logs,
    so each type appears on both sides; plain shuffle otherwise.
    """
    pairs = [(log.log_id, log.trajectory) for log in logs]
    ids = [p[0] for p in pairs]
    if len(ids) != len(set(ids)):
        raise DataError("log ids must be unique")
    if len(ids) < 4:
        raise DataError(f"need at least 4 logs to split, got {len(ids)}")
    rng = np.random.default_rng(seed)
    by_type: dict[str, list[str]] = {}
    for log_id, kind in pairs:
        by_type.setdefault(kind, []).append(log_id)

    validation: list[str] = []
    if all(len(group) >= 2 for group in by_type.values()):
        for kind in sorted(by_type):
            group = sorted(by_type[kind])
            rng.shuffle(group)
            take = int(round(VALIDATION_FRACTION * len(group)))
            take = min(max(take, 1), len(group) - 1)
            validation.extend(group[:take])
    else:
        group = sorted(ids)
        rng.shuffle(group)
        take = int(round(VALIDATION_FRACTION * len(group)))
        take = min(max(take, 1), len(group) - 1)
        validation = group[:take]
    validation_set = set(validation)
    identification = tuple(sorted(i for i in ids if i not in validation_set))
    return DatasetSplit(identification=identification,
                        validation=tuple(sorted(validation)), seed=seed)


def write_manifest(path, family: str, seed: int, noise: float,
                   entries: list[dict]):
    doc = {"version": 1, "family": family, "seed": seed, "noise": noise,
           "logs": entries}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, allow_nan=False)
        fh.write("\n")


def load_manifest(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise DataError(f"manifest not found: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"invalid manifest {path}: {exc}") from exc
    if not isinstance(doc, dict) or "logs" not in doc:
        raise DataError(f"manifest {path} has no 'logs' entry")
    return doc
