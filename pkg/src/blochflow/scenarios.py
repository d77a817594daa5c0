"""Scenario configuration, validation, and end-to-end runs.

A scenario bundles a generator family, a propagation grid, a measurement
basis, and a biased state pair, then produces the full diagnostic table
(survival probability, f criterion, information series, divisibility
margins) plus verdict summaries.  Configs come from a JSON document and/or
command-line overrides and are validated against a published schema;
unknown keys are rejected.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
import jsonschema

from . import covariant
from .classical import f_criterion, reduce_map
from .generators import (GeneratorSpec, Propagator, instantaneous_cp_div,
                         instantaneous_p_div, propagate_ode,
                         propagate_timesplitting)
from .infoflow import detect_backflow, info_trajectory
from .states import ProjectorBasis

SCENARIOS = ("unitary", "pauli", "pauli_hamiltonian", "remark4",
             "covariant_example4", "custom")


class ConfigError(ValueError):
    """The run configuration is invalid (exit code 1 territory)."""


class NumericalFailure(RuntimeError):
    """The computation produced unusable numbers (exit code 2 territory)."""


SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["scenario"],
    "properties": {
        "scenario": {"enum": list(SCENARIOS)},
        "params": {"type": "object"},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "steps": {"type": "integer", "minimum": 5},
            },
        },
        "chi": {"type": "number"},
        "xi": {"type": "number"},
        "mu": {"type": "number", "minimum": 0, "maximum": 1},
        "tol": {"type": "number", "exclusiveMinimum": 0},
        "out_dir": {"type": "string"},
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "required": ["key", "start", "stop", "count"],
            "properties": {
                "key": {"type": "string"},
                "start": {"type": "number"},
                "stop": {"type": "number"},
                "count": {"type": "integer", "minimum": 2},
            },
        },
    },
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    params: dict = field(default_factory=dict)
    t_max: float = 10.0
    steps: int = 10000
    chi: float = 0.0
    xi: float = 0.0
    mu: float = 0.5
    tol: float = 1e-9
    out_dir: str = "."
    sweep: dict | None = None

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.t_max, self.steps + 1)


def config_from_document(doc: dict) -> ScenarioConfig:
    """Validate a JSON document against the schema and build a config.

    The piecewise scenario defaults to a breakpoint-aligned grid (even step
    count on [0, 2 pi]) unless the document pins its own grid.
    """
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigError(f"invalid configuration: {exc.message}") from exc
    grid = doc.get("grid", {})
    if doc["scenario"] == "remark4":
        t_max = grid.get("t_max", 2.0 * math.pi)
        steps = grid.get("steps", 16384)
    else:
        t_max = grid.get("t_max", 10.0)
        steps = grid.get("steps", 10000)
    return ScenarioConfig(
        scenario=doc["scenario"],
        params=dict(doc.get("params", {})),
        t_max=float(t_max),
        steps=int(steps),
        chi=float(doc.get("chi", 0.0)),
        xi=float(doc.get("xi", 0.0)),
        mu=float(doc.get("mu", 0.5)),
        tol=float(doc.get("tol", 1e-9)),
        out_dir=str(doc.get("out_dir", ".")),
        sweep=dict(doc["sweep"]) if "sweep" in doc else None,
    )


# ---------------------------------------------------------------------------
# parameter helpers
# ---------------------------------------------------------------------------
def _number(params: dict, key: str, default: float) -> float:
    value = params.get(key, default)
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise ConfigError(f"parameter '{key}' must be a number")
    return float(value)


def _rate_function(value, key: str) -> Callable[[float], float]:
    """Constant rate, or the named presets 'exp:A:tau' (A e^{-t/tau}) and
    'cos:A:w' (A cos(w t))."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        v = float(value)
        return lambda t: v
    if isinstance(value, str):
        parts = value.split(":")
        try:
            if parts[0] == "exp" and len(parts) == 3:
                amp, tau = float(parts[1]), float(parts[2])
                if tau == 0:
                    raise ConfigError(f"parameter '{key}': tau must be "
                                      "nonzero")
                return lambda t: amp * math.exp(-t / tau)
            if parts[0] == "cos" and len(parts) == 3:
                amp, freq = float(parts[1]), float(parts[2])
                return lambda t: amp * math.cos(freq * t)
        except ValueError as exc:
            raise ConfigError(f"parameter '{key}': bad preset numbers "
                              f"in '{value}'") from exc
        raise ConfigError(f"parameter '{key}': unknown rate preset "
                          f"'{value}' (use a number, 'exp:A:tau' or "
                          "'cos:A:w')")
    raise ConfigError(f"parameter '{key}' must be a number or preset string")


def _vector(params: dict, key: str, default) -> np.ndarray:
    value = params.get(key, default)
    try:
        vec = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parameter '{key}' must be a numeric vector") \
            from exc
    if vec.shape != (3,):
        raise ConfigError(f"parameter '{key}' must have 3 components")
    return vec


def _reject_unknown(params: dict, allowed: tuple, scenario: str) -> None:
    unknown = sorted(set(params) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown parameter(s) {unknown} for scenario "
                          f"'{scenario}' (allowed: {sorted(allowed)})")


# ---------------------------------------------------------------------------
# scenario builders
# ---------------------------------------------------------------------------
def _remark4_linear(t: float) -> np.ndarray:
    if t <= math.pi:
        c = math.cos(t)
        return np.array([[-1.0, c, 0.0], [c, -1.0, 0.0], [0.0, 0.0, -2.0]])
    return np.diag([-1.0, -2.0, -1.0])


@dataclass(frozen=True)
class ScenarioModel:
    """Everything a run needs: the generator, how to propagate it, and an
    optional fast margin evaluator (covariant closed forms)."""

    generator: GeneratorSpec
    propagate: Callable[[np.ndarray], Propagator]
    margin_fn: Callable[[float], tuple] | None = None
    family: object = None


def build_scenario(config: ScenarioConfig) -> ScenarioModel:
    params, name = config.params, config.scenario
    if name == "unitary":
        _reject_unknown(params, ("omega", "axis"), name)
        omega = _number(params, "omega", 1.0)
        axis = _vector(params, "axis", (0.0, 0.0, 1.0))
        norm = np.linalg.norm(axis)
        if norm == 0:
            raise ConfigError("parameter 'axis' must be nonzero")
        vec = omega * axis / norm
        gen = GeneratorSpec.hamiltonian_only(vec)
        return ScenarioModel(gen, lambda grid: propagate_ode(gen, grid))

    if name in ("pauli", "pauli_hamiltonian"):
        allowed = ("gamma1", "gamma2", "gamma3")
        if name == "pauli_hamiltonian":
            allowed += ("omega",)
        _reject_unknown(params, allowed, name)
        rates = [_rate_function(params.get(k, 1.0), k)
                 for k in ("gamma1", "gamma2", "gamma3")]
        gen = GeneratorSpec.pauli(*rates)
        if name == "pauli_hamiltonian":
            omega = _number(params, "omega", 2.0)
            gen = GeneratorSpec(lambda t: np.array([0.0, 0.0, omega]),
                                gen.kossakowski)
        return ScenarioModel(gen, lambda grid: propagate_ode(gen, grid))

    if name == "remark4":
        _reject_unknown(params, (), name)
        gen = GeneratorSpec.from_bloch(_remark4_linear)
        return ScenarioModel(gen,
                             lambda grid: propagate_timesplitting(gen, grid))

    if name == "covariant_example4":
        _reject_unknown(params, ("C",), name)
        c = _number(params, "C", 1.5)
        if c < 0:
            raise ConfigError("parameter 'C' must be nonnegative")
        family = covariant.tanh_modulated_family(c)
        gen = covariant.generator_spec_of(family)

        def margin_fn(t: float):
            g = covariant.generator_triple(family, t)
            return (covariant.prop4_p_div(g).margin,
                    covariant.prop4_cp_div(g).margin)

        return ScenarioModel(
            gen, lambda grid: covariant.propagator_from_family(family, grid),
            margin_fn, family)

    if name == "custom":
        _reject_unknown(params, ("linear", "affine"), name)
        if "linear" not in params:
            raise ConfigError("custom scenario needs a 'linear' 3x3 matrix")
        try:
            linear = np.asarray(params["linear"], dtype=float)
        except (TypeError, ValueError) as exc:
            raise ConfigError("'linear' must be a numeric 3x3 matrix") \
                from exc
        if linear.shape != (3, 3):
            raise ConfigError("'linear' must be a numeric 3x3 matrix")
        affine = (_vector(params, "affine", (0.0, 0.0, 0.0))
                  if "affine" in params else np.zeros(3))
        gen = GeneratorSpec.from_bloch(lambda t: linear, lambda t: affine)
        return ScenarioModel(gen, lambda grid: propagate_ode(gen, grid))

    raise ConfigError(f"unknown scenario '{name}'")


# ---------------------------------------------------------------------------
# computation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class RunResult:
    config: ScenarioConfig
    grid: np.ndarray
    columns: dict
    summary: dict


def _margins(model: ScenarioModel, grid: np.ndarray, tol: float):
    p = np.empty(grid.size)
    cp = np.empty(grid.size)
    if model.margin_fn is not None:
        for k, t in enumerate(grid):
            p[k], cp[k] = model.margin_fn(t)
    else:
        for k, t in enumerate(grid):
            p[k] = instantaneous_p_div(model.generator, t, tol).margin
            cp[k] = instantaneous_cp_div(model.generator, t, tol).margin
    return p, cp


def compute(config: ScenarioConfig) -> RunResult:
    """Run one scenario end to end (no file output)."""
    model = build_scenario(config)
    grid = config.grid()
    # Divergent generators overflow here by design; the propagator
    # constructor rejects non-finite maps, so the element-wise warnings
    # carry no information.
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            prop = model.propagate(grid)
    except ValueError as exc:
        raise NumericalFailure(str(exc)) from exc
    if not np.all(np.isfinite(prop.mats)):
        raise NumericalFailure("propagation produced non-finite maps")
    basis = ProjectorBasis(config.chi, config.xi)
    proc = reduce_map(prop, basis)

    f_vals = np.full(grid.size, np.nan)
    max_f = None
    divisible = None
    singular = 0
    if proc.is_bistochastic():
        crit = f_criterion(proc, tol=config.tol)
        f_vals = crit.f
        max_f = None if np.isnan(crit.max_f) else float(crit.max_f)
        divisible = None if np.isnan(crit.max_f) else bool(crit.divisible)
        singular = int(crit.flagged.sum())
        if crit.flagged.all():
            raise NumericalFailure(
                "classical reduction singular at every grid point")

    traj = info_trajectory(prop, basis, (1.0, 0.0), (0.0, 1.0), config.mu)
    p_margin, cp_margin = _margins(model, grid, config.tol)
    dets = proc.determinants

    columns = {
        "t": grid,
        "T00": proc.t00,
        "f_t": f_vals,
        "det_T": dets,
        "Iq": traj.i_quantum,
        "Icl": traj.i_classical,
        "Ccoh": traj.coherent,
        "Cl1_p": traj.coherences[:, 0],
        "Cl1_q": traj.coherences[:, 1],
        "eigmin_K": cp_margin,
        "p_div_margin": p_margin,
        "cp_div_margin": cp_margin,
    }
    for key in ("T00", "det_T", "Iq", "Icl", "Ccoh", "eigmin_K",
                "p_div_margin", "cp_div_margin"):
        if not np.all(np.isfinite(columns[key])):
            raise NumericalFailure(f"non-finite values in '{key}' series")

    worst_p = float(p_margin.min())
    worst_cp = float(cp_margin.min())
    summary = {
        "scenario": config.scenario,
        "params": dict(config.params),
        "grid": {"t_max": config.t_max, "steps": config.steps},
        "chi": config.chi,
        "xi": config.xi,
        "mu": config.mu,
        "tol": config.tol,
        "quantum": {
            "p_divisible": worst_p >= -config.tol,
            "worst_p_margin": worst_p,
            "cp_divisible": worst_cp >= -config.tol,
            "worst_cp_margin": worst_cp,
            "revivals": [list(iv) for iv in
                         detect_backflow(traj.i_quantum, grid=grid)],
        },
        "classical": [{
            "chi": config.chi,
            "xi": config.xi,
            "max_f_t": max_f,
            "p_divisible": divisible,
            "invertible": bool(np.all(np.abs(dets) > 1e-12)),
            "min_abs_det": float(np.abs(dets).min()),
            "singular_points": singular,
            "revivals": [list(iv) for iv in
                         detect_backflow(traj.i_classical, grid=grid)],
        }],
    }
    return RunResult(config, grid, columns, summary)


SWEEP_TOP_KEYS = ("chi", "xi", "mu")


def sweep_values(config: ScenarioConfig) -> np.ndarray:
    sw = config.sweep
    if sw is None:
        raise ConfigError("no sweep requested")
    return np.linspace(float(sw["start"]), float(sw["stop"]),
                       int(sw["count"]))


def apply_sweep_value(config: ScenarioConfig, value: float) -> ScenarioConfig:
    key = config.sweep["key"]
    if key == "theta":  # basis polar angle alias
        key = "chi"
    if key in SWEEP_TOP_KEYS:
        return replace(config, sweep=None, **{key: float(value)})
    params = dict(config.params)
    params[key] = float(value)
    return replace(config, sweep=None, params=params)


def run_sweep(config: ScenarioConfig) -> list:
    """One compute() per swept value; returns summary rows."""
    key = config.sweep["key"]
    rows = []
    for value in sweep_values(config):
        sub = apply_sweep_value(config, value)
        result = compute(sub)
        q = result.summary["quantum"]
        cl = result.summary["classical"][0]
        rows.append({
            key: float(value),
            "quantum_p_div": bool(q["p_divisible"]),
            "quantum_cp_div": bool(q["cp_divisible"]),
            "p_div_margin": q["worst_p_margin"],
            "cp_div_margin": q["worst_cp_margin"],
            "max_f_t": cl["max_f_t"],
            "classical_p_div": cl["p_divisible"],
            "invertible": bool(cl["invertible"]),
        })
    return rows


def load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
