"""Declarative parameter sweeps, scaling fits and plot-script emission.

Configs are JSON documents. A sweep config names a model, fixed parameters,
up to two swept axes, a list of sizes, an optional temperature axis and the
observables to tabulate. Each observable becomes one tab-separated table
with a '#'-prefixed metadata block; a JSON manifest records the config,
per-point status, timings, cached values and file checksums.
"""

from __future__ import annotations

import argparse
import dataclasses
import functools
import hashlib
import itertools
import json
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError

MANIFEST_NAME = "manifest.json"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_INTERNAL = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Model schemas and point evaluation
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class ModelSchema:
    params: dict
    observables: tuple
    thermal: tuple = ()


SCHEMAS = {
    "ising_ed": ModelSchema(
        params={"theta": 0.0, "alpha": math.inf, "eps_long": 0.0, "J": 1.0},
        observables=("optimal_ising_qfi", "gap1", "gap2", "order_parameter",
                     "fidelity_susceptibility", "perturbative_fq_jy", "thermal_qfi"),
        thermal=("thermal_qfi",),
    ),
    "ising_fermion": ModelSchema(
        params={"theta": 0.0, "J": 1.0, "open": 0.0},
        observables=("ising_fq_density", "chi_theta", "min_gap", "fidelity_susceptibility"),
    ),
    "lmg": ModelSchema(
        params={"Lambda": 0.0, "delta": 0.0},
        observables=("fq_density", "xi2", "gap1", "gap2", "order_parameter",
                     "fidelity_susceptibility", "thermal_qfi", "thermal_xi2"),
        thermal=("thermal_qfi", "thermal_xi2"),
    ),
    "kitaev": ModelSchema(
        params={"mu": 0.0, "J": 1.0, "pairing": 1.0, "alpha": math.inf},
        observables=("nonlocal_qfi", "winding_number", "min_gap", "chi_mu", "chi_delta",
                     "chi_alpha", "local_fzz", "mean_particle_number"),
    ),
}


def _ising_ed_point(params, size, temps):
    from .qfi_core import CollectiveOperator
    from .spin_ed import (IsingSpec, fidelity_susceptibility_numeric, ground_state_ed,
                          optimal_ising_qfi, order_parameter, perturbative_fq_jy,
                          thermal_qfi_ed)

    def spec_at(theta):
        return IsingSpec(size, theta, params["alpha"], params["eps_long"], J=params["J"])

    spec = spec_at(params["theta"])
    result = functools.cache(lambda: ground_state_ed(spec))

    def thermal():
        op = CollectiveOperator("z", size, staggered=params["theta"] > 0)
        return {T: thermal_qfi_ed(result(), T, op) / size for T in temps}

    return {
        "optimal_ising_qfi": lambda: optimal_ising_qfi(result(), spec)[0],
        "gap1": lambda: result().gap1,
        "gap2": lambda: result().gap2,
        "order_parameter": lambda: order_parameter(result(), spec),
        "fidelity_susceptibility": lambda: fidelity_susceptibility_numeric(
            lambda th: ground_state_ed(spec_at(th)).ground_state, params["theta"]).value,
        "perturbative_fq_jy": lambda: perturbative_fq_jy(size, params["theta"], params["alpha"]),
        "thermal_qfi": thermal,
    }


def _ising_fermion_point(params, size, temps):
    from .free_fermion import (build_ising_nn_fermion, diagonalize, ground_state_overlap,
                               ising_chi_theta, ising_fq_density)
    from .spin_ed import fidelity_susceptibility_numeric

    boundary = "open" if params["open"] else "closed"

    def green_at(theta):
        return diagonalize(build_ising_nn_fermion(size, theta, params["J"], boundary))

    green = functools.cache(lambda: green_at(params["theta"]))
    return {
        "ising_fq_density": lambda: ising_fq_density(green(), params["theta"]),
        "chi_theta": lambda: ising_chi_theta(size, params["theta"]),
        "min_gap": lambda: green().min_gap,
        "fidelity_susceptibility": lambda: fidelity_susceptibility_numeric(
            green_at, params["theta"], overlap=ground_state_overlap).value,
    }


def _lmg_point(params, size, temps):
    from .lmg_model import (LMGSpec, LMGThermal, lmg_fidelity_susceptibility, lmg_gaps,
                            lmg_ground_qfi, lmg_order_parameter)

    spec = LMGSpec(size, params["Lambda"], params["delta"])
    witness = functools.cache(lambda: lmg_ground_qfi(spec))
    gaps = functools.cache(lambda: lmg_gaps(spec))
    thermal = functools.cache(lambda: {T: LMGThermal(spec).witness(T) for T in temps})
    return {
        "fq_density": lambda: witness().fq,
        "xi2": lambda: witness().xi2,
        "gap1": lambda: gaps()[0],
        "gap2": lambda: gaps()[1],
        "order_parameter": lambda: lmg_order_parameter(spec),
        "fidelity_susceptibility": lambda: lmg_fidelity_susceptibility(spec).value,
        "thermal_qfi": lambda: {T: w.fq / size for T, w in thermal().items()},
        "thermal_xi2": lambda: {T: w.xi2 for T, w in thermal().items()},
    }


def _kitaev_point(params, size, temps):
    from . import kitaev_momentum as km
    from .free_fermion import build_kitaev, diagonalize, optimal_nonlocal_qfi

    args = (params["J"], params["mu"], params["pairing"], params["alpha"])
    return {
        "nonlocal_qfi": lambda: optimal_nonlocal_qfi(diagonalize(build_kitaev(size, *args)))[0],
        "winding_number": lambda: km.winding_number(*args, L=size),
        "min_gap": lambda: km.min_gap(size, *args),
        "chi_mu": lambda: km.chi_closed_form("mu", size, *args),
        "chi_delta": lambda: km.chi_closed_form("delta", size, *args),
        "chi_alpha": lambda: km.chi_closed_form("alpha", size, *args),
        "local_fzz": lambda: km.local_qfi_fzz(size, *args)[2],
        "mean_particle_number": lambda: km.mean_particle_number(size, *args),
    }


EVALUATORS = {
    "ising_ed": _ising_ed_point,
    "ising_fermion": _ising_fermion_point,
    "lmg": _lmg_point,
    "kitaev": _kitaev_point,
}


def evaluate_point(task):
    """Worker entry: compute the requested observables at one grid point.

    Returns ({key: (value, status)}, seconds) where key is the observable
    name or (name, T). A failing observable is flagged in its own entries
    and does not affect the others.
    """
    model, params, size, observables, temps = task
    start = time.perf_counter()
    result = {}
    try:
        thunks = EVALUATORS[model](params, size, temps)
    except Exception as exc:  # invalid point, e.g. odd size for a parity model
        thunks = {name: functools.partial(_raise, exc) for name in observables}
    for name in observables:
        thermal = name in SCHEMAS[model].thermal
        try:
            value = thunks[name]()
            if thermal:
                result.update({(name, T): (float(value[T]), "ok") for T in temps})
            else:
                result[name] = (float(value), "ok")
        except Exception as exc:  # per-observable numeric failure is flagged, not fatal
            status = f"error:{type(exc).__name__}"
            keys = [(name, T) for T in temps] if thermal else [name]
            result.update({key: (math.nan, status) for key in keys})
    return result, time.perf_counter() - start


def _raise(exc):
    raise exc


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class Axis:
    name: str
    values: tuple


@dataclasses.dataclass(frozen=True)
class SweepConfig:
    model: str
    fixed: dict
    axes: tuple
    sizes: tuple
    observables: tuple
    temperatures: tuple
    output: str
    raw: dict


def load_json(path: str | os.PathLike) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return data


def _number(value, where: str) -> float:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {value!r}") from None


def _axis_values(spec: dict, where: str) -> tuple:
    if "values" in spec:
        values = spec["values"]
        if not isinstance(values, list) or not values:
            raise ConfigError(f"{where}.values: expected a nonempty list")
        return tuple(_number(v, f"{where}.values[{i}]") for i, v in enumerate(values))
    for key in ("min", "max", "count"):
        if key not in spec:
            raise ConfigError(f"{where}: missing field '{key}'")
    lo, hi = _number(spec["min"], f"{where}.min"), _number(spec["max"], f"{where}.max")
    count = spec["count"]
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ConfigError(f"{where}.count: expected a positive integer")
    if count == 1:
        if lo != hi:
            raise ConfigError(f"{where}.count: a single-point axis needs min == max")
        return (lo,)
    spacing = spec.get("spacing", "linear")
    if spacing == "linear":
        grid = np.linspace(lo, hi, count)
    elif spacing == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"{where}: log spacing needs positive bounds")
        grid = np.geomspace(lo, hi, count)
    else:
        raise ConfigError(f"{where}.spacing: expected 'linear' or 'log', got {spacing!r}")
    return tuple(float(v) for v in grid)


def parse_sweep(data: dict, out_override: str | None = None) -> SweepConfig:
    known = {"model", "fixed", "axes", "sizes", "observables", "temperature", "output"}
    for key in data:
        if key not in known:
            raise ConfigError(f"unknown field '{key}' (allowed: {', '.join(sorted(known))})")
    model = data.get("model")
    if model not in SCHEMAS:
        raise ConfigError(f"model: expected one of {sorted(SCHEMAS)}, got {model!r}")
    schema = SCHEMAS[model]

    fixed = dict(schema.params)
    for key, value in (data.get("fixed") or {}).items():
        if key not in schema.params:
            raise ConfigError(f"fixed.{key}: unknown parameter for {model} "
                              f"(allowed: {', '.join(schema.params)})")
        fixed[key] = _number(value, f"fixed.{key}")

    axes = []
    for i, spec in enumerate(data.get("axes") or []):
        where = f"axes[{i}]"
        if not isinstance(spec, dict) or "name" not in spec:
            raise ConfigError(f"{where}: expected an object with a 'name'")
        if spec["name"] not in schema.params:
            raise ConfigError(f"{where}.name: unknown parameter {spec['name']!r} for {model}")
        if any(a.name == spec["name"] for a in axes):
            raise ConfigError(f"{where}.name: axis {spec['name']!r} given twice")
        axes.append(Axis(spec["name"], _axis_values(spec, where)))
    if len(axes) > 2:
        raise ConfigError("axes: at most two swept parameters are supported")

    sizes = data.get("sizes")
    if not isinstance(sizes, list) or not sizes:
        raise ConfigError("sizes: expected a nonempty list of integers")
    for i, n in enumerate(sizes):
        if not isinstance(n, int) or isinstance(n, bool) or n < 2:
            raise ConfigError(f"sizes[{i}]: expected an integer >= 2, got {n!r}")

    observables = data.get("observables")
    if not isinstance(observables, list) or not observables:
        raise ConfigError("observables: expected a nonempty list")
    for i, name in enumerate(observables):
        if name not in schema.observables:
            raise ConfigError(f"observables[{i}]: unknown observable {name!r} for {model} "
                              f"(allowed: {', '.join(schema.observables)})")

    temps: tuple = ()
    if "temperature" in data:
        temps = _axis_values(data["temperature"], "temperature")
        if any(T <= 0 for T in temps):
            raise ConfigError("temperature: values must be positive")
    if any(o in schema.thermal for o in observables) and not temps:
        raise ConfigError("temperature: required by the requested thermal observables")

    output = out_override or data.get("output") or "sweep_out"
    return SweepConfig(model, fixed, tuple(axes), tuple(sizes), tuple(observables),
                       temps, str(output), data)


# ---------------------------------------------------------------------------
# Running
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    return format(value, ".17g")


def _cache_key(model: str, params: dict, size: int, name: str, T) -> str:
    payload = json.dumps([__version__, model, sorted((k, repr(v)) for k, v in params.items()),
                          size, name, None if T is None else repr(T)])
    return hashlib.sha256(payload.encode()).hexdigest()


def _grid(config: SweepConfig):
    """Yield (index tuple, params) in row-major order over the swept axes."""
    ranges = [range(len(a.values)) for a in config.axes]
    for index in itertools.product(*ranges):
        params = dict(config.fixed)
        for axis, i in zip(config.axes, index):
            params[axis.name] = axis.values[i]
        yield index, params


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, data: dict) -> None:
    tmp = path.with_suffix(".tmp")
    tmp.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    tmp.replace(path)


def run_sweep(config: SweepConfig, jobs: int = 1, use_cache: bool = True) -> dict:
    """Compute every grid point, write one table per observable and the manifest.

    Returns the finalized manifest. Rows are ordered by grid index, so the
    tables are byte-identical for any worker count.
    """
    out_dir = Path(config.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_NAME
    cache: dict = {}
    if use_cache and manifest_path.exists():
        try:
            cache = json.loads(manifest_path.read_text()).get("cache", {})
        except (json.JSONDecodeError, OSError):
            cache = {}
    schema = SCHEMAS[config.model]
    manifest = {
        "config": config.raw,
        "version": __version__,
        "status": "running",
        "points": [],
        "cache": cache,
        "cache_hits": 0,
        "files": {},
    }
    _write_json(manifest_path, manifest)

    started = time.perf_counter()
    grid = list(_grid(config))
    keys_for = {}
    pending = []
    results: dict = {}
    hits = 0
    for index, params in grid:
        for size in config.sizes:
            needed = []
            for name in config.observables:
                temps = config.temperatures if name in schema.thermal else (None,)
                for T in temps:
                    key = _cache_key(config.model, params, size, name, T)
                    keys_for[index, size, name, T] = key
                    if use_cache and key in cache:
                        entry = cache[key]
                        results[index, size, name, T] = (float.fromhex(entry["value"]),
                                                         entry["status"])
                        hits += 1
                    elif name not in needed:
                        needed.append(name)
            if needed:
                pending.append(((index, size),
                                (config.model, params, size, tuple(needed), config.temperatures)))

    timings = {}
    if pending:
        tasks = [task for _, task in pending]
        if jobs > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outputs = list(pool.map(evaluate_point, tasks))
        else:
            outputs = [evaluate_point(task) for task in tasks]
        for ((index, size), task), (values, seconds) in zip(pending, outputs):
            timings[index, size] = seconds
            for key, (value, status) in values.items():
                name, T = (key if isinstance(key, tuple) else (key, None))
                results[index, size, name, T] = (value, status)
                cache_key = keys_for[index, size, name, T]
                if status == "ok":
                    cache[cache_key] = {"value": float(value).hex(), "status": status}

    failures = 0
    swept = {a.name for a in config.axes}
    for name in config.observables:
        temps = config.temperatures if name in schema.thermal else (None,)
        lines = [
            f"# tool: qfi_criticality {__version__}",
            f"# model: {config.model}",
            f"# observable: {name}",
            "# fixed: " + json.dumps({k: repr(v) for k, v in sorted(config.fixed.items())
                                     if k not in swept}),
        ]
        header = [a.name for a in config.axes] + ["size"]
        if temps != (None,):
            header.append("T")
        header += ["value", "status"]
        lines.append("\t".join(header))
        for index, params in grid:
            for size in config.sizes:
                for T in temps:
                    value, status = results[index, size, name, T]
                    if status != "ok":
                        failures += 1
                    row = [_fmt(params[a.name]) for a in config.axes] + [str(size)]
                    if T is not None:
                        row.append(_fmt(T))
                    row += [_fmt(value), status]
                    lines.append("\t".join(row))
        path = out_dir / f"{name}.tsv"
        path.write_text("\n".join(lines) + "\n")
        manifest["files"][path.name] = _sha256(path)

    for index, params in grid:
        for size in config.sizes:
            statuses = sorted({results[index, size, name, T][1]
                               for name in config.observables
                               for T in (config.temperatures if name in schema.thermal
                                         else (None,))})
            manifest["points"].append({
                "index": list(index),
                "params": {a.name: params[a.name] for a in config.axes},
                "size": size,
                "status": "ok" if statuses == ["ok"] else ",".join(s for s in statuses
                                                                   if s != "ok"),
                "seconds": round(timings.get((index, size), 0.0), 6),
            })
    manifest.update(status="complete", cache=cache, cache_hits=hits,
                    failures=failures, wall_seconds=round(time.perf_counter() - started, 6))
    _write_json(manifest_path, manifest)
    return manifest


def read_table(path: str | os.PathLike) -> tuple[list[str], list[list[str]], list[str]]:
    """(header, rows, metadata lines) of a sweep table."""
    meta, header, rows = [], None, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            meta.append(line)
        elif header is None:
            header = line.split("\t")
        elif line:
            rows.append(line.split("\t"))
    if header is None:
        raise ConfigError(f"{path}: no header row")
    return header, rows, meta


# ---------------------------------------------------------------------------
# Fits
# ---------------------------------------------------------------------------

def scaling_report(fit_config: dict, jobs: int = 1, use_cache: bool = True,
                   out_override: str | None = None) -> Path:
    """Fit one observable against size at every swept-parameter point.

    The sweep is (re)run through the cache first. Fits whose relative
    residual RMS exceeds 10% are flagged.
    """
    from .thermal_scaling import ScalingSeries, fit_exponential, fit_power_law

    if "sweep" not in fit_config:
        raise ConfigError("missing field 'sweep' (inline sweep config or path)")
    sweep_data = fit_config["sweep"]
    if isinstance(sweep_data, str):
        sweep_data = load_json(sweep_data)
    config = parse_sweep(sweep_data, out_override)
    observable = fit_config.get("observable", config.observables[0])
    if observable not in config.observables:
        raise ConfigError(f"observable: {observable!r} is not produced by the sweep")
    if observable in SCHEMAS[config.model].thermal:
        raise ConfigError("observable: size fits of thermal observables are not supported")
    model = fit_config.get("model", "power")
    if model not in ("power", "power_offset", "exponential"):
        raise ConfigError("model: expected 'power', 'power_offset' or 'exponential'")
    shift = _number(fit_config.get("subtract", 0.0), "subtract")

    run_sweep(config, jobs=jobs, use_cache=use_cache)
    header, rows, _ = read_table(Path(config.output) / f"{observable}.tsv")
    n_axes = len(config.axes)
    groups: dict = {}
    for row in rows:
        groups.setdefault(tuple(row[:n_axes]), []).append(row)

    lines = [f"# tool: qfi_criticality {__version__}",
             f"# fit: {model} of {observable} - {_fmt(shift)} against size"]
    names = [a.name for a in config.axes]
    pnames = {"power": ["a", "b"], "power_offset": ["a", "b", "c"],
              "exponential": ["A", "x0"]}[model]
    lines.append("\t".join(names + pnames + [f"sigma_{p}" for p in pnames] + ["rms", "flag"]))
    for key, members in groups.items():
        ok = [r for r in members if r[-1] == "ok"]
        xs = np.array([float(r[n_axes]) for r in ok])
        ys = np.array([float(r[-2]) for r in ok]) - shift
        cells = list(key)
        try:
            series = ScalingSeries(xs, ys, observable)
            if model == "exponential":
                fit = fit_exponential(series)
            else:
                fit = fit_power_law(series, offset=model == "power_offset")
            cells += [_fmt(float(fit.params[p])) for p in pnames]
            cells += [_fmt(float(fit.sigmas[p])) for p in pnames]
            cells += [_fmt(fit.rms), "rms_high" if fit.rms > 0.1 else "ok"]
        except Exception as exc:  # a failed fit is reported in its row
            cells += ["nan"] * (2 * len(pnames) + 1) + [f"error:{type(exc).__name__}"]
        lines.append("\t".join(cells))
    path = Path(config.output) / f"fit_{observable}.tsv"
    path.write_text("\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# Plot scripts
# ---------------------------------------------------------------------------

_HEATMAP = '''"""Heatmap of {value} over {x} and {y} from {table}."""
import csv
import matplotlib.pyplot as plt
import numpy as np

rows = [r for r in csv.reader(open({table!r}), delimiter="\\t") if r and not r[0].startswith("#")]
header, rows = rows[0], rows[1:]
ix, iy, iv = header.index({x!r}), header.index({y!r}), header.index({value!r})
xs = sorted({{float(r[ix]) for r in rows}})
ys = sorted({{float(r[iy]) for r in rows}})
grid = np.full((len(ys), len(xs)), np.nan)
for r in rows:
    grid[ys.index(float(r[iy])), xs.index(float(r[ix]))] = float(r[iv])
plt.pcolormesh(xs, ys, grid, shading="nearest")
plt.xlabel({x!r})
plt.ylabel({y!r})
plt.colorbar(label={value!r})
plt.savefig({output!r}, dpi=150)
'''

_LINES = '''"""Curves of {value} against {x}, one per {series}, from {table}."""
import csv
import matplotlib.pyplot as plt

rows = [r for r in csv.reader(open({table!r}), delimiter="\\t") if r and not r[0].startswith("#")]
header, rows = rows[0], rows[1:]
ix, iv, iset = header.index({x!r}), header.index({value!r}), header.index({series!r})
for label in sorted({{r[iset] for r in rows}}, key=float):
    pts = sorted((float(r[ix]), float(r[iv])) for r in rows if r[iset] == label)
    plt.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=f"{series}={{label}}")
plt.xlabel({x!r})
plt.ylabel({value!r})
plt.legend()
plt.savefig({output!r}, dpi=150)
'''


def plot_emit(spec: dict, out_override: str | None = None) -> Path:
    """Write a standalone matplotlib script next to the table it plots."""
    for key in ("table", "kind"):
        if key not in spec:
            raise ConfigError(f"missing field '{key}'")
    table = Path(spec["table"])
    if not table.exists():
        raise ConfigError(f"table: {table} does not exist")
    header, _, _ = read_table(table)
    kind = spec["kind"]
    if kind == "heatmap":
        needed = {"x": spec.get("x"), "y": spec.get("y"), "value": spec.get("value", "value")}
        template = _HEATMAP
    elif kind == "lines":
        needed = {"x": spec.get("x"), "series": spec.get("series", "size"),
                  "value": spec.get("value", "value")}
        template = _LINES
    else:
        raise ConfigError(f"kind: expected 'heatmap' or 'lines', got {kind!r}")
    for role, column in needed.items():
        if column not in header:
            raise ConfigError(f"{role}: unknown column {column!r} "
                              f"(available: {', '.join(header)})")
    out_dir = Path(out_override) if out_override else table.parent
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = f"plot_{table.stem}_{kind}"
    script = out_dir / f"{stem}.py"
    script.write_text(template.format(table=str(table.resolve()), output=f"{stem}.png",
                                      **needed))
    return script


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _acceptance_path() -> Path:
    return Path(__file__).resolve().parents[2] / "tests" / "test_acceptance.py"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qfi-criticality",
                                     description="QFI criticality sweeps and scaling fits")
    parser.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("--out", default=None, help="output directory override")
    common.add_argument("--no-cache", action="store_true", help="ignore cached values")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    p.add_argument("config")
    p = sub.add_parser("fit", parents=[common], help="fit observables against size")
    p.add_argument("config")
    p = sub.add_parser("plot", parents=[common], help="emit a plotting script")
    p.add_argument("spec")
    sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be at least 1")
        if args.command == "sweep":
            config = parse_sweep(load_json(args.config), args.out)
            manifest = run_sweep(config, jobs=args.jobs, use_cache=not args.no_cache)
            print(f"wrote {len(manifest['files'])} table(s) to {config.output} "
                  f"({manifest['cache_hits']} cached values, {manifest['failures']} failures)")
            return EXIT_NUMERIC if manifest["failures"] else EXIT_OK
        if args.command == "fit":
            path = scaling_report(load_json(args.config), jobs=args.jobs,
                                  use_cache=not args.no_cache, out_override=args.out)
            print(f"wrote {path}")
            flagged = any(line.split("\t")[-1] != "ok"
                          for line in path.read_text().splitlines()[3:] if line)
            return EXIT_NUMERIC if flagged else EXIT_OK
        if args.command == "plot":
            print(f"wrote {plot_emit(load_json(args.spec), args.out)}")
            return EXIT_OK
        if args.command == "verify":
            target = _acceptance_path()
            if not target.exists():
                raise ConfigError(f"acceptance suite not found at {target}")
            code = subprocess.call([sys.executable, "-m", "pytest", "-s", "-q", str(target)])
            return EXIT_OK if code == 0 else EXIT_NUMERIC
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_INTERNAL
