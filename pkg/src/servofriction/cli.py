"""Command-line front end.

Subcommands: ``synth`` (write a synthetic dataset), ``identify`` (fit one
or more friction models to a dataset), ``simulate`` (replay a log under
given parameters), ``diagram`` (export drive/backdrive boundary tables).
Every command is deterministic given its flags and seed.  Exit codes:
0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import dataset as ds
from . import identification as ident
from . import simulation as sim
from .errors import DataError, DomainError, NumericalError
from .friction import MODEL_COEFFS, MODELS, FrictionParams

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form."""
    return repr(float(value))


def _load_config(path, allowed: set) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise UsageError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"invalid config file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise UsageError("config file must hold a JSON object")
    unknown = set(doc) - allowed
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    return doc


class _Options:
    """Flag values merged over config-file values over defaults."""

    def __init__(self, args, allowed: set):
        self.args = args
        self.config = (_load_config(args.config, allowed)
                       if getattr(args, "config", None) else {})

    def get(self, key: str, default=None, required: bool = False):
        value = getattr(self.args, key.replace("-", "_"))
        if value is None or value is False:
            if key in self.config:
                value = self.config[key]
            elif value is None:
                value = default
        if required and value is None:
            raise UsageError(f"--{key} is required")
        return value


def _parse_types(spec) -> tuple:
    if spec is None or spec == "all":
        return ds.TRAJECTORY_TYPES
    if isinstance(spec, str):
        names = [s.strip() for s in spec.split(",") if s.strip()]
    else:
        names = list(spec)
    for name in names:
        if name not in ds.TRAJECTORY_TYPES:
            raise UsageError(f"unknown trajectory type {name!r}; "
                             f"choose from {', '.join(ds.TRAJECTORY_TYPES)}")
    if not names:
        raise UsageError("no trajectory types given")
    return tuple(names)


def _parse_models(spec) -> list:
    if spec is None or spec == "all":
        return list(MODELS)
    if isinstance(spec, str):
        names = [s.strip() for s in spec.split(",") if s.strip()]
    else:
        names = list(spec)
    for name in names:
        if name not in MODELS:
            raise UsageError(f"unknown model {name!r}; choose from M1..M6")
    return names


def _parse_range(spec) -> np.ndarray:
    parts = str(spec).split(":")
    if len(parts) != 3:
        raise UsageError("--tau-m-range must be lo:hi:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise UsageError(f"bad --tau-m-range: {exc}") from exc
    if count < 1 or not (hi >= lo):
        raise UsageError("--tau-m-range needs hi >= lo and count >= 1")
    return np.linspace(lo, hi, count)


def _parse_levels(spec) -> list:
    try:
        levels = [float(s) for s in str(spec).split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"bad --velocity-levels: {exc}") from exc
    if not levels:
        raise UsageError("no velocity levels given")
    return levels


def _out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory not writable: {out}: {exc}") from exc
    return out


def cmd_synth(args) -> int:
    opts = _Options(args, {"family", "types", "noise", "seed", "out"})
    family = opts.get("family", required=True)
    types = _parse_types(opts.get("types", "all"))
    noise = float(opts.get("noise", 0.0))
    seed = int(opts.get("seed", 0))
    out = _out_dir(opts.get("out", required=True))
    logs = ds.synthesize_family(family, types, noise=noise, seed=seed)
    entries = []
    for log in logs:
        name = f"{log.log_id}.log.json"
        ds.save_log(log, out / name)
        entries.append({"path": name, "log_id": log.log_id,
                        "trajectory": log.trajectory})
    ds.write_manifest(out / "manifest.json", family, seed, noise, entries)
    print(f"wrote {len(logs)} logs and manifest.json to {out}")
    return EXIT_OK


def _load_dataset(manifest_path) -> list:
    manifest = ds.load_manifest(manifest_path)
    base = Path(manifest_path).parent
    logs, failures = [], []
    for entry in manifest["logs"]:
        path = base / entry["path"]
        try:
            logs.append(ds.load_log(path))
        except (DataError, FileNotFoundError) as exc:
            failures.append(f"{path}: {exc}")
    if failures:
        raise DataError("failed to parse logs:\n  " + "\n  ".join(failures))
    return logs


def _result_params_doc(result, logs, fit_electrical: bool):
    coeffs = {name: result.params[name] for name in MODEL_COEFFS[result.model]}
    friction = FrictionParams(result.model, **coeffs)
    actuator = None
    if fit_electrical:
        base = logs[0].actuator
        motor = dataclasses.replace(base.motor, k_t=result.params["k_t"],
                                    r=result.params["R"],
                                    j_m=result.params["J_m"])
        actuator = dataclasses.replace(base, motor=motor)
    return friction, actuator


def cmd_identify(args) -> int:
    opts = _Options(args, {"manifest", "model", "budget", "seed", "out",
                           "progress", "budget-units", "workers",
                           "fit-electrical"})
    manifest = opts.get("manifest", required=True)
    models = _parse_models(opts.get("model", "all"))
    budget = int(opts.get("budget", 4000))
    budget_units = opts.get("budget-units", "evaluations")
    seed = int(opts.get("seed", 0))
    out = _out_dir(opts.get("out", required=True))
    workers = opts.get("workers")
    workers = None if workers is None else int(workers)
    show_progress = bool(opts.get("progress", False))
    fit_electrical = bool(opts.get("fit-electrical", False))

    logs = _load_dataset(manifest)
    split = ds.split(logs, seed)

    def progress_factory(model):
        if not show_progress:
            return None

        def progress(gen, evals, best):
            print(f"[{model}] generation {gen} evaluations {evals} "
                  f"best {best:.6e}", flush=True)
        return progress

    results = ident.model_sweep(logs, models, split, budget=budget,
                                seed=seed, workers=workers,
                                budget_units=budget_units,
                                fit_electrical=fit_electrical,
                                progress_factory=progress_factory)
    lines = ["model,identification_mae,validation_mae"]
    for result in results:
        with open(out / f"ident-{result.model}.json", "w",
                  encoding="utf-8") as fh:
            json.dump(result.report_dict(), fh, indent=2, allow_nan=False)
            fh.write("\n")
        friction, actuator = _result_params_doc(result, logs, fit_electrical)
        sim.save_params_file(out / f"params-{result.model}.json", friction,
                             actuator)
        lines.append(f"{result.model},{_fmt(result.identification_mae)},"
                     f"{_fmt(result.validation_mae)}")
        print(f"{result.model} validation MAE {_fmt(result.validation_mae)}")
    (out / "comparison.csv").write_text("\n".join(lines) + "\n",
                                        encoding="utf-8")
    return EXIT_OK


def cmd_simulate(args) -> int:
    opts = _Options(args, {"log", "params", "out"})
    log = ds.load_log(opts.get("log", required=True))
    friction, actuator = sim.load_params_file(opts.get("params", required=True))
    out_path = Path(opts.get("out", required=True))
    actuator = actuator if actuator is not None else log.actuator
    initial = sim.SimState(float(log.measured[0]), 0.0)
    result = sim.rollout(log.bench, actuator, friction, initial, log.target)
    error = log.measured - result.theta
    mae = float(np.mean(np.abs(error)))
    rows = ["t,target,measured,simulated,error"]
    for k in range(len(log.time)):
        target = "" if math.isnan(log.target[k]) else _fmt(log.target[k])
        rows.append(f"{_fmt(log.time[k])},{target},{_fmt(log.measured[k])},"
                    f"{_fmt(result.theta[k])},{_fmt(error[k])}")
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write series file {out_path}: {exc}") from exc
    print(f"MAE {_fmt(mae)}")
    return EXIT_OK


def cmd_diagram(args) -> int:
    opts = _Options(args, {"params", "tau-m-range", "velocity-levels", "out"})
    friction, _ = sim.load_params_file(opts.get("params", required=True))
    grid = _parse_range(opts.get("tau-m-range", "-1:1:21"))
    levels = _parse_levels(opts.get("velocity-levels", "0"))
    out_path = Path(opts.get("out", required=True))
    rows = ["tau_m,velocity_level,tau_drive,tau_backdrive"]
    for tau_m, level, boundary in sim.diagram(friction, grid, levels):
        drive = (boundary.drive_status if boundary.drive_status != "bounded"
                 else _fmt(boundary.tau_drive))
        backdrive = (boundary.backdrive_status
                     if boundary.backdrive_status != "bounded"
                     else _fmt(boundary.tau_backdrive))
        rows.append(f"{_fmt(tau_m)},{_fmt(level)},{drive},{backdrive}")
    try:
        out_path.parent.mkdir(parents=True, exist_ok=True)
        out_path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot write diagram file {out_path}: {exc}") from exc
    print(f"wrote {len(rows) - 1} boundary rows to {out_path}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="servofriction",
                     description="Servo friction simulation and identification")
    sub = parser.add_subparsers(dest="command")

    synth = sub.add_parser("synth", help="synthesize a preset dataset")
    synth.add_argument("--family")
    synth.add_argument("--types")
    synth.add_argument("--noise", type=float)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--out")
    synth.add_argument("--config")
    synth.set_defaults(func=cmd_synth)

    identify = sub.add_parser("identify", help="fit friction models to a dataset")
    identify.add_argument("--manifest")
    identify.add_argument("--model")
    identify.add_argument("--budget", type=int)
    identify.add_argument("--budget-units",
                          choices=("evaluations", "generations"))
    identify.add_argument("--seed", type=int)
    identify.add_argument("--out")
    identify.add_argument("--workers", type=int)
    identify.add_argument("--progress", action="store_true")
    identify.add_argument("--fit-electrical", action="store_true")
    identify.add_argument("--config")
    identify.set_defaults(func=cmd_identify)

    simulate = sub.add_parser("simulate", help="replay a log under parameters")
    simulate.add_argument("--log")
    simulate.add_argument("--params")
    simulate.add_argument("--out")
    simulate.add_argument("--config")
    simulate.set_defaults(func=cmd_simulate)

    diagram = sub.add_parser("diagram", help="export drive/backdrive boundaries")
    diagram.add_argument("--params")
    diagram.add_argument("--tau-m-range")
    diagram.add_argument("--velocity-levels")
    diagram.add_argument("--out")
    diagram.add_argument("--config")
    diagram.set_defaults(func=cmd_diagram)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "func", None) is None:
            raise UsageError("a command is required (synth, identify, "
                             "simulate, diagram)")
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (DataError, DomainError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
