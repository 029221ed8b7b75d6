"""Run configuration files (YAML) and run manifests.

A config is a flat mapping. Scenario keys set the fixed parameters; sweep
keys list the axes. Everything not given takes its default, and unknown
keys are rejected by name. Example::

    mode: simulate
    methods: all
    beta_grid: {start: 0, stop: 10, step: 0.5}
    n_groups: 3
    cost: uniform
    samples: 20000
    seed: 1

Keys
    mode                 simulate | analytic
    method / methods     one method name, a list, or ``all``
    beta / beta_grid     one value, a list, or {start, stop, step} (inclusive)
    n_groups             odd integer or list of them
    n_projects, t_min, t_max, e_center, cost, budget, values, costs,
    kappa, r, samples, seed, alpha, cutoff
    shift_nonnegative    lift item values so the smallest is zero
    allow_even_groups    accept even n_groups
    common_random_numbers  reuse the master seed in every sweep cell
    quad_nodes, quad_tol   quadrature settings for analytic mode

Fractions (``budget``, ``costs``) may be given as numbers or strings such as
``"31/2"``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Any

import yaml

from .aggregation import METHOD_NAMES, AggregationMethod
from .analytic import ANALYTIC_METHODS, QuadratureSpec
from .model import CostStructure
from .simulator import ScenarioConfig

MODES = ("simulate", "analytic")
PAPER_SCALE_SAMPLES = 500_000

_SCENARIO_KEYS = {
    "n_projects", "t_min", "t_max", "e_center", "cost", "budget", "values", "costs",
    "kappa", "r", "samples", "seed", "alpha", "cutoff", "shift_nonnegative", "allow_even_groups",
}
_SWEEP_KEYS = {
    "mode", "method", "methods", "beta", "beta_grid", "n_groups",
    "common_random_numbers", "quad_nodes", "quad_tol",
}
KNOWN_KEYS = _SCENARIO_KEYS | _SWEEP_KEYS


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending key."""


@dataclass(frozen=True)
class RunSpec:
    """Fully resolved run: a base scenario plus the sweep axes."""

    base: ScenarioConfig
    methods: tuple[str, ...] = ("arithmetic_mean",)
    beta_grid: tuple[float, ...] = (0.0,)
    n_groups: tuple[int, ...] = (3,)
    mode: str = "simulate"
    common_random_numbers: bool = False
    quad: QuadratureSpec = field(default_factory=QuadratureSpec)

    def with_overrides(self, *, seed=None, samples=None) -> "RunSpec":
        base = self.base
        if seed is not None:
            base = replace(base, seed=int(seed))
        if samples is not None:
            base = replace(base, samples=int(samples))
        return replace(self, base=base)


def _grid(key: str, raw) -> tuple[float, ...]:
    if isinstance(raw, dict):
        extra = set(raw) - {"start", "stop", "step"}
        if extra or not {"start", "stop", "step"} <= set(raw):
            raise ConfigError(f"{key}: expected keys start, stop, step")
        start, stop, step = (float(raw[k]) for k in ("start", "stop", "step"))
        if step <= 0 or stop < start:
            raise ConfigError(f"{key}: need step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(count))
    items = raw if isinstance(raw, list) else [raw]
    try:
        out = tuple(float(x) for x in items)
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected numbers") from None
    if not out:
        raise ConfigError(f"{key}: must not be empty")
    if any(b < 0 for b in out):
        raise ConfigError(f"{key}: values must be >= 0")
    return out


def _fraction(key: str, raw) -> Fraction:
    try:
        if isinstance(raw, float):
            return Fraction(str(raw))
        return Fraction(raw)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: not a number or fraction: {raw!r}") from None


def _methods(data: dict, mode: str) -> tuple[str, ...]:
    if "method" in data and "methods" in data:
        raise ConfigError("method: give either 'method' or 'methods', not both")
    raw = data.get("methods", data.get("method", "arithmetic_mean"))
    key = "methods" if "methods" in data else "method"
    if raw == "all":
        names = METHOD_NAMES if mode == "simulate" else ANALYTIC_METHODS
    else:
        names = raw if isinstance(raw, list) else [raw]
    names = tuple(str(n) for n in names)
    if not names:
        raise ConfigError(f"{key}: must not be empty")
    allowed = METHOD_NAMES if mode == "simulate" else ANALYTIC_METHODS
    for n in names:
        if n not in allowed:
            raise ConfigError(f"{key}: unknown method {n!r} for mode {mode}")
    return names


def resolve(data: dict[str, Any]) -> RunSpec:
    """Validate a raw mapping and fill in defaults."""
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    unknown = sorted(set(data) - KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown key")
    mode = data.get("mode", "simulate")
    if mode not in MODES:
        raise ConfigError(f"mode: must be one of {', '.join(MODES)}")
    methods = _methods(data, mode)
    if "beta" in data and "beta_grid" in data:
        raise ConfigError("beta: give either 'beta' or 'beta_grid', not both")
    beta_key = "beta_grid" if "beta_grid" in data else "beta"
    betas = _grid(beta_key, data.get(beta_key, 0.0))
    raw_groups = data.get("n_groups", 3)
    groups = raw_groups if isinstance(raw_groups, list) else [raw_groups]
    if not groups or any(not isinstance(g, int) or isinstance(g, bool) or g < 1 for g in groups):
        raise ConfigError("n_groups: expected positive integers")
    allow_even = bool(data.get("allow_even_groups", False))
    if not allow_even and any(g % 2 == 0 for g in groups):
        raise ConfigError("n_groups: even values need allow_even_groups: true")

    default_np = 2 if mode == "analytic" else 30
    n_projects = data.get("n_projects", default_np)
    if not isinstance(n_projects, int) or n_projects < 1:
        raise ConfigError("n_projects: expected a positive integer")
    cost = data.get("cost", "uniform")
    try:
        cost = CostStructure(cost)
    except ValueError:
        raise ConfigError(f"cost: unknown cost structure {cost!r}") from None
    values = data.get("values")
    if values is not None:
        if not isinstance(values, list) or len(values) != n_projects:
            raise ConfigError("values: expected a list with n_projects entries")
        values = tuple(float(v) for v in values)
    costs = data.get("costs")
    if costs is not None:
        if not isinstance(costs, list) or len(costs) != n_projects:
            raise ConfigError("costs: expected a list with n_projects entries")
        costs = tuple(_fraction("costs", c) for c in costs)
        if any(c <= 0 for c in costs):
            raise ConfigError("costs: must be positive")
    if mode == "analytic":
        if n_projects != 2:
            raise ConfigError("n_projects: analytic mode covers two projects only")
        vals = values or (1.0, 2.0)
        if not vals[0] < vals[1]:
            raise ConfigError("values: analytic mode needs values[0] < values[1]")
    default_budget = Fraction(1) if mode == "analytic" else Fraction(n_projects, 2)
    budget = _fraction("budget", data["budget"]) if "budget" in data else default_budget
    if budget <= 0:
        raise ConfigError("budget: must be > 0")

    numbers = {}
    for key, default in (("t_min", 0.0), ("t_max", 10.0), ("e_center", 5.0), ("kappa", 1.0),
                         ("r", 0.0), ("alpha", 0.2), ("cutoff", 0.0)):
        raw = data.get(key, default)
        if isinstance(raw, bool) or not isinstance(raw, (int, float)):
            raise ConfigError(f"{key}: expected a number")
        numbers[key] = float(raw)
    if not numbers["t_min"] < numbers["t_max"]:
        raise ConfigError("t_min: must be < t_max")
    if numbers["kappa"] < 0:
        raise ConfigError("kappa: must be >= 0")
    if not 0 <= numbers["r"] <= 1:
        raise ConfigError("r: must lie in [0, 1]")
    if not 0 <= numbers["alpha"] < 0.5:
        raise ConfigError("alpha: must lie in [0, 0.5)")
    for key, default in (("samples", 20000), ("seed", 0)):
        raw = data.get(key, default)
        if isinstance(raw, bool) or not isinstance(raw, int):
            raise ConfigError(f"{key}: expected an integer")
    if data.get("samples", 20000) < 1:
        raise ConfigError("samples: must be >= 1")
    for key in ("shift_nonnegative", "allow_even_groups", "common_random_numbers"):
        if key in data and not isinstance(data[key], bool):
            raise ConfigError(f"{key}: expected true or false")

    try:
        quad = QuadratureSpec(nodes=int(data.get("quad_nodes", 8)), tol=float(data.get("quad_tol", 1e-4)))
    except ValueError as exc:
        raise ConfigError(f"quad_nodes: {exc}") from None
    try:
        base = ScenarioConfig(
            n_projects=n_projects,
            n_groups=groups[0],
            t_min=numbers["t_min"],
            t_max=numbers["t_max"],
            e_center=numbers["e_center"],
            beta=betas[0],
            cost_kind=cost,
            budget=budget,
            method=AggregationMethod(methods[0], alpha=numbers["alpha"], cutoff=numbers["cutoff"]),
            kappa=numbers["kappa"],
            r=numbers["r"],
            samples=data.get("samples", 20000),
            seed=data.get("seed", 0),
            values=values,
            costs=costs,
            shift_nonnegative=bool(data.get("shift_nonnegative", mode == "analytic")),
            allow_even_groups=allow_even,
        )
        for g in groups:
            for m in methods:
                AggregationMethod(m, alpha=numbers["alpha"]).trim(g)
    except ValueError as exc:
        raise ConfigError(f"scenario: {exc}") from None
    return RunSpec(
        base=base,
        methods=methods,
        beta_grid=betas,
        n_groups=tuple(groups),
        mode=mode,
        common_random_numbers=bool(data.get("common_random_numbers", False)),
        quad=quad,
    )


def _frac_out(x: Fraction):
    return int(x) if x.denominator == 1 else str(x)


def to_mapping(spec: RunSpec) -> dict[str, Any]:
    """Fully explicit mapping; ``resolve(to_mapping(s)) == s``."""
    b = spec.base
    out: dict[str, Any] = {
        "mode": spec.mode,
        "methods": list(spec.methods),
        "beta_grid": list(spec.beta_grid),
        "n_groups": list(spec.n_groups),
        "n_projects": b.n_projects,
        "t_min": b.t_min,
        "t_max": b.t_max,
        "e_center": b.e_center,
        "cost": b.cost_kind.value,
        "budget": _frac_out(b.capacity),
        "kappa": b.kappa,
        "r": b.r,
        "samples": b.samples,
        "seed": b.seed,
        "alpha": b.method.alpha,
        "cutoff": b.method.cutoff,
        "shift_nonnegative": b.shift_nonnegative,
        "allow_even_groups": b.allow_even_groups,
        "common_random_numbers": spec.common_random_numbers,
        "quad_nodes": spec.quad.nodes,
        "quad_tol": spec.quad.tol,
    }
    if b.values is not None:
        out["values"] = list(b.values)
    if b.costs is not None:
        out["costs"] = [_frac_out(c) for c in b.costs]
    return out


def parse_config(path: str | Path, mode: str | None = None) -> RunSpec:
    """Load and resolve a config file.

    ``mode`` fills in a missing ``mode`` key; a file naming a different
    mode is rejected.
    """
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML ({exc})") from None
    if mode is not None and isinstance(data, dict):
        if data.get("mode", mode) != mode:
            raise ConfigError(f"mode: config is for {data['mode']!r}, not {mode!r}")
        data = {**data, "mode": mode}
    elif mode is not None and data is None:
        data = {"mode": mode}
    return resolve(data)


def write_config(spec: RunSpec, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(yaml.safe_dump(to_mapping(spec), sort_keys=False), encoding="utf-8")
    return path


def config_digest(spec: RunSpec) -> str:
    canonical = json.dumps(to_mapping(spec), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    config_digest: str
    version: str
    seed: int
    timestamp: str

    @classmethod
    def for_spec(cls, spec: RunSpec) -> "RunManifest":
        from . import __version__

        now = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
        return cls(config_digest(spec), __version__, spec.base.seed, now)

    def csv_preamble(self) -> list[str]:
        # the timestamp stays out of the CSV so reruns are byte-identical
        return [
            f"# collective_knapsack {self.version}",
            f"# config_sha256={self.config_digest}",
            f"# seed={self.seed}",
        ]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n"
