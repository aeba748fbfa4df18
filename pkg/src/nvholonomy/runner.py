"""Named experiments, strict parameter resolution and artifact writers.

Each experiment maps a fully resolved parameter dict to either a JSON-style
mapping or a table. Outputs carry a provenance block (package version,
experiment, seed, parameters) and nothing time-dependent, so identical
inputs give byte-identical files. Wall time is reported through logging.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np
import yaml

from . import __version__, dynamics, gyro, holonomy, noise, units
from .connection import PoleError, source_for
from .paths import PathError, load_path

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

U_SQUARE_QUOTED = np.array([[0.91 + 0.23j, -0.11 - 0.33j], [0.34 - 0.07j, 0.66 + 0.67j]])


class ConfigError(ValueError):
    pass


@dataclass
class Table:
    columns: list[str]
    rows: list[list[Any]]
    summary: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    defaults: dict[str, Any]
    fn: Callable[[dict[str, Any], int], Any]
    default_format: str


@dataclass
class ExperimentSpec:
    name: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0
    out: str = "-"
    format: str | None = None


def quoted_deviation(m: np.ndarray) -> float:
    """Largest real- or imaginary-part gap to the 2-decimal quoted ``U_square``."""
    d = np.asarray(m) - U_SQUARE_QUOTED
    return float(max(np.max(np.abs(d.real)), np.max(np.abs(d.imag))))


def matrix_json(m: np.ndarray) -> dict[str, list[list[float]]]:
    m = np.asarray(m)
    return {"re": np.real(m).tolist(), "im": np.imag(m).tolist()}


# --- experiments ---------------------------------------------------------------

def _witness(p, seed):
    src = source_for(p["connection"])
    w = holonomy.ordering_witness(load_path(p["path_a"]), load_path(p["path_b"]),
                                  initial=p["initial"], source=src, n_steps=p["steps"])
    return {
        "pop_ab": w.pop_ab,
        "pop_ba": w.pop_ba,
        "difference": w.difference,
        "amplitude_difference": w.amplitude_difference,
        "u_ab": matrix_json(w.u_ab),
        "u_ba": matrix_json(w.u_ba),
    }


def _square(p, seed):
    h = holonomy.wilson_line(load_path("square"), source_for(p["connection"]), p["steps"])
    return {
        "matrix": matrix_json(h.matrix),
        "matrix_rounded": matrix_json(np.round(h.matrix, 2)),
        "unitarity_residual": h.unitarity_residual,
        "steps_per_segment": p["steps"],
        "max_entry_error_vs_quoted": quoted_deviation(h.matrix),
    }


def _sweep_table(deltas, times, p):
    rows = dynamics.degeneracy_sweep(deltas, times, load_path(p["path"]),
                                     min_steps=p["min_steps"], workers=p["workers"])
    ref = dynamics.adiabatic_reference(load_path(p["path"])).population()
    return Table(
        ["delta", "T", "pop_p1", "pop_0", "pop_m1"],
        [[r.delta, r.total_time, r.pop_p1, r.pop_0, r.pop_m1] for r in rows],
        {"adiabatic_reference_pop_p1": ref,
         "T_microseconds": [units.reduced_time_to_seconds(t) * 1e6 for t in times]},
    )


def _degeneracy_sweep(p, seed):
    return _sweep_table(p["deltas"], [p["total_time"]], p)


def _adiabatic_sweep(p, seed):
    return _sweep_table(p["deltas"], p["times"], p)


def _noise_ensemble(p, seed):
    rows = []
    cfg = dynamics.EvolutionConfig(p["total_time"], load_path(p["path"]))
    base = dynamics.final_populations(cfg)
    for sigma in p["sigma"]:
        for events in p["events"]:
            r = noise.ensemble_run(cfg, noise.NoiseSpec(sigma, events, seed), p["members"],
                                   workers=p["workers"])
            rows.append([sigma, units.epsilon_to_gauss(sigma), events, r.n_members,
                         *r.mean_population, *r.std_population, r.phase_std,
                         abs(r.mean_population[0] - base[0])])
    return Table(
        ["sigma", "sigma_gauss", "events", "members",
         "mean_p1", "mean_0", "mean_m1", "std_p1", "std_0", "std_m1",
         "phase_std", "abs_shift_p1"],
        rows,
        {"noiseless_pop_p1": float(base[0])},
    )


def _path_perturb(p, seed):
    cfg = dynamics.EvolutionConfig(p["total_time"], load_path(p["path"]))
    base = float(dynamics.final_populations(cfg)[0])
    rows = []
    for deg in p["divergence_deg"]:
        div = math.radians(deg)
        r = noise.perturbed_path_study(cfg, div, p["members"], seed, workers=p["workers"])
        nonab = np.abs(r.member_populations[:, 0] - base) / base
        ab = noise.abelian_relative_shifts(cfg.path, div, p["members"], seed)
        rows.append([deg, r.n_members, r.mean_population[0], r.std_population[0],
                     (r.mean_population[0] - base) / base, float(nonab.mean()), float(ab.mean())])
    return Table(
        ["divergence_deg", "members", "mean_p1", "std_p1", "rel_shift_mean",
         "nonabelian_rel_shift", "abelian_rel_shift"],
        rows,
        {"unperturbed_pop_p1": base},
    )


def _gyro(p, seed):
    gp = gyro.GyroParams(p["n"], p["eta"], p["contrast"], p["t1"], p["t2star"], p["tau"],
                         p["omega"], p["t"])
    d_omega, alpha = gyro.min_detectable_rotation(gp)
    d_abelian, _ = gyro.min_detectable_rotation(gp, alpha=1.0)
    omega_t = np.linspace(0.0, 2 * np.sqrt(2) * np.pi, p["samples"])
    return {
        "alpha": alpha,
        "delta_omega": d_omega,
        "delta_omega_abelian_formula": d_abelian,
        "abelian_reference_sensitivity": gyro.ABELIAN_REFERENCE_SENSITIVITY,
        "shot_noise": gyro.shot_noise(gp),
        "nominal_slope": gyro.nominal_slope(gp),
        "signal": gyro.signal(gp),
        "curve": {"omega_t": omega_t.tolist(), "F": gyro.signal_curve(gp, omega_t).tolist()},
    }


EXPERIMENTS: dict[str, Experiment] = {e.name: e for e in [
    Experiment("witness", "non-Abelian ordering difference (14.4%) of circle and square loops",
               {"path_a": "circle", "path_b": "square", "initial": 0, "steps": 4096,
                "connection": "analytic"}, _witness, "json"),
    Experiment("square_holonomy", "square-path holonomy U_square (2-decimal matrix)",
               {"steps": 4096, "connection": "analytic"}, _square, "json"),
    Experiment("degeneracy_sweep", "Fig. 3 reproduction: population vs degeneracy at T = 1e4",
               {"deltas": [-1e-4, -5e-5, -2e-5, -1e-5, 0.0, 1e-5, 2e-5, 5e-5, 1e-4],
                "total_time": 1e4, "path": "circle", "min_steps": 1000, "workers": 1},
               _degeneracy_sweep, "csv"),
    Experiment("adiabatic_sweep", "Fig. 3 reproduction: population vs rotation time per degeneracy",
               {"deltas": [0.0, 1e-5, 1e-4, 1e-3], "times": [1e2, 1e3, 1e4, 1e5],
                "path": "circle", "min_steps": 1000, "workers": 1},
               _adiabatic_sweep, "csv"),
    Experiment("noise_ensemble", "Fig. 4 reproduction: axial field noise ensemble (50 members)",
               {"sigma": [1e-4], "events": [1000], "members": 50, "total_time": 1e4,
                "path": "circle", "workers": 1},
               _noise_ensemble, "csv"),
    Experiment("path_perturb", "polar-angle path errors: 2 degree threshold",
               {"divergence_deg": [2.0], "members": 50, "total_time": 1e4,
                "path": "circle", "workers": 1},
               _path_perturb, "csv"),
    Experiment("gyro", "gyroscope signal and sensitivity, alpha = sqrt(2 T1/T2*)",
               {"n": 1e6, "eta": 0.1, "contrast": 0.2, "t1": 1e-3, "t2star": 1e-6,
                "tau": 1.0, "omega": 0.0, "t": 1e-3, "samples": 33},
               _gyro, "json"),
]}


def list_experiments() -> list[tuple[str, str]]:
    return [(e.name, e.description) for e in EXPERIMENTS.values()]


# --- parameter resolution ------------------------------------------------------

def _coerce(key: str, value, default):
    try:
        if isinstance(default, list):
            if isinstance(value, str):
                value = yaml.safe_load(value)
            items = value if isinstance(value, (list, tuple)) else [value]
            if not items:
                raise ConfigError(f"{key}: list must not be empty")
            proto = default[0] if default else 0.0
            return [_coerce(key, v, proto) for v in items]
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes")
            return bool(value)
        if isinstance(default, int):
            f = float(value)
            if f != int(f):
                raise ConfigError(f"{key}: expected an integer, got {value!r}")
            return int(f)
        if isinstance(default, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError, yaml.YAMLError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{key}: cannot interpret {value!r}") from None


def resolve(spec: ExperimentSpec) -> tuple[Experiment, dict[str, Any], str]:
    if spec.name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {spec.name!r}; choose from {sorted(EXPERIMENTS)}")
    exp = EXPERIMENTS[spec.name]
    unknown = set(spec.params) - set(exp.defaults)
    if unknown:
        raise ConfigError(f"unknown parameters for {spec.name}: {sorted(unknown)}")
    params = dict(exp.defaults)
    for k, v in spec.params.items():
        params[k] = _coerce(k, v, exp.defaults[k])
    fmt = spec.format or exp.default_format
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    return exp, params, fmt


# --- writers -------------------------------------------------------------------

def provenance(name: str, seed: int, params: dict[str, Any]) -> dict[str, Any]:
    return {"package": "nvholonomy", "version": __version__, "experiment": name,
            "seed": seed, "parameters": params}


def render(result, prov: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        if isinstance(result, Table):
            body = {"columns": result.columns, "rows": result.rows, "summary": result.summary}
        else:
            body = result
        return json.dumps({"provenance": prov, "result": body}, indent=2, sort_keys=True) + "\n"

    buf = io.StringIO()
    for key, val in prov.items():
        buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if isinstance(result, Table):
        for key, val in result.summary.items():
            buf.write(f"# {key}: {json.dumps(val)}\n")
        writer.writerow(result.columns)
        writer.writerows([[repr(float(x)) if isinstance(x, (float, np.floating)) else x
                           for x in row] for row in result.rows])
    else:
        writer.writerow(["key", "value"])
        for key, val in result.items():
            writer.writerow([key, json.dumps(val)])
    return buf.getvalue()


def emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def execute(spec: ExperimentSpec) -> str:
    """Resolve, run and render an experiment; returns the artifact text."""
    exp, params, fmt = resolve(spec)
    started = time.perf_counter()
    result = exp.fn(params, spec.seed)
    log.info("%s finished in %.2f s", spec.name, time.perf_counter() - started)
    return render(result, provenance(spec.name, spec.seed, params), fmt)


def classify(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, PathError)):
        return EXIT_CONFIG
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (dynamics.StepStabilityError, PoleError, ValueError, ArithmeticError)):
        return EXIT_NUMERIC
    raise exc


def run(spec: ExperimentSpec) -> int:
    """Run one experiment and write its artifact; returns a process exit code."""
    try:
        emit(execute(spec), spec.out)
    except Exception as exc:  # noqa: BLE001 - mapped onto exit categories
        code = classify(exc)
        log.error("%s: %s", type(exc).__name__, exc)
        return code
    return EXIT_OK


def load_run_file(path: str | Path) -> list[ExperimentSpec]:
    """Read a multi-document YAML run file, one experiment per document."""
    try:
        docs = [d for d in yaml.safe_load_all(Path(path).read_text()) if d is not None]
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    specs = []
    allowed = {"experiment", "params", "seed", "out", "format"}
    for k, doc in enumerate(docs):
        if not isinstance(doc, dict) or "experiment" not in doc:
            raise ConfigError(f"document {k} needs an 'experiment' key")
        extra = set(doc) - allowed
        if extra:
            raise ConfigError(f"document {k}: unknown keys {sorted(extra)}")
        params = doc.get("params") or {}
        if not isinstance(params, dict):
            raise ConfigError(f"document {k}: params must be a mapping")
        specs.append(ExperimentSpec(doc["experiment"], params, int(doc.get("seed", 0)),
                                    str(doc.get("out", "-")), doc.get("format")))
    return specs


def holonomy_report(path_source: str, steps: int, connection: str) -> dict[str, Any]:
    h = holonomy.wilson_line(load_path(path_source), source_for(connection), steps)
    return {"path": path_source, "connection": connection, "steps_per_segment": steps,
            "matrix": matrix_json(h.matrix), "unitarity_residual": h.unitarity_residual}
