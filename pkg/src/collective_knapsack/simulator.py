"""Monte-Carlo estimation of collective knapsack performance.

A replica draws project types, samples the group evaluations, aggregates
them with the configured method, solves the collective knapsack and
scores the chosen portfolio by the projects' intrinsic values. Replica
``k`` of a scenario always reads the same random streams, so estimates do
not depend on how replicas are split across threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import aggregation as agg
from . import kernels, rng
from .knapsack import KnapsackInstance, check_size, scale_weights, solve
from .model import CostStructure, build_panel, make_costs

REPLICA_CHUNK = 2048


@dataclass(frozen=True)
class ScenarioConfig:
    """One point of the parameter space.

    ``values`` defaults to ``1..N_p`` and ``budget`` to ``N_p / 2``.
    ``costs``, when given, overrides ``cost_kind``. ``shift_nonnegative``
    lifts aggregated item values so the smallest is zero before solving,
    which makes the knapsack fill whenever any project fits (the two-project
    analysis assumes one project is always chosen).
    """

    n_projects: int = 30
    n_groups: int = 3
    t_min: float = 0.0
    t_max: float = 10.0
    e_center: float = 5.0
    beta: float = 0.0
    cost_kind: CostStructure = CostStructure.UNIFORM
    budget: Fraction | None = None
    method: agg.AggregationMethod = field(default_factory=lambda: agg.AggregationMethod("arithmetic_mean"))
    kappa: float = 1.0
    r: float = 0.0
    samples: int = 20000
    seed: int = 0
    values: tuple[float, ...] | None = None
    costs: tuple[Fraction, ...] | None = None
    shift_nonnegative: bool = False
    allow_even_groups: bool = False

    def __post_init__(self):
        if isinstance(self.method, str):
            object.__setattr__(self, "method", agg.AggregationMethod(self.method))
        object.__setattr__(self, "cost_kind", CostStructure(self.cost_kind))
        if self.budget is not None:
            object.__setattr__(self, "budget", Fraction(self.budget))
        if self.values is not None:
            object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.costs is not None:
            object.__setattr__(self, "costs", tuple(Fraction(c) for c in self.costs))
        self.validate()

    def validate(self):
        if self.n_projects < 1:
            raise ValueError("n_projects must be >= 1")
        if self.n_groups < 1:
            raise ValueError("n_groups must be >= 1")
        if self.n_groups % 2 == 0 and not self.allow_even_groups:
            raise ValueError("n_groups must be odd (set allow_even_groups to override)")
        if not self.t_min < self.t_max:
            raise ValueError("t_min must be < t_max")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not 0 <= self.r <= 1:
            raise ValueError("r must lie in [0, 1]")
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.budget is not None and self.budget <= 0:
            raise ValueError("budget must be > 0")
        for name in ("values", "costs"):
            seq = getattr(self, name)
            if seq is not None and len(seq) != self.n_projects:
                raise ValueError(f"{name} must have n_projects entries")
        if self.costs is not None and any(c <= 0 for c in self.costs):
            raise ValueError("costs must be positive")
        self.method.trim(self.n_groups)  # rejects 2p >= N_s

    @property
    def capacity(self) -> Fraction:
        return self.budget if self.budget is not None else Fraction(self.n_projects, 2)

    @property
    def project_values(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=np.float64)
        return np.arange(1, self.n_projects + 1, dtype=np.float64)

    @property
    def project_costs(self) -> list[Fraction]:
        if self.costs is not None:
            return list(self.costs)
        return make_costs(self.cost_kind, self.n_projects)

    @property
    def cost_label(self) -> str:
        return "custom" if self.costs is not None else self.cost_kind.value

    def panel(self):
        return build_panel(self.e_center, self.beta, self.n_groups)


@dataclass(frozen=True)
class PerformanceEstimate:
    mean: float
    std_error: float
    samples: int


def build_params(config: ScenarioConfig) -> kernels.ReplicaParams:
    costs = config.project_costs
    wint, cap, _ = scale_weights(costs, config.capacity)
    check_size(config.n_projects, cap)
    panel = config.panel()
    return kernels.ReplicaParams(
        seed=rng.as_int64(config.seed),
        values=config.project_values,
        costs=np.array([float(c) for c in costs]),
        wint=wint,
        cap=int(cap),
        levels=panel.as_array(),
        t_min=float(config.t_min),
        t_max=float(config.t_max),
        kappa=float(config.kappa),
        method=config.method.code,
        trim=config.method.trim(config.n_groups),
        cutoff=float(config.method.cutoff),
        individual=agg.pick_individual(panel, config.t_min, config.t_max),
        r=float(config.r),
        shift=bool(config.shift_nonnegative),
    )


def run_replica(config: ScenarioConfig, replica: int, backend: str | None = None) -> float:
    """True value of the portfolio chosen in replica ``replica``."""
    params = build_params(config)
    return float(kernels.replica_values(params, np.array([replica]), backend)[0])


def resolve_threads(threads: int | None = None) -> int:
    """Thread count; ``CK_THREADS`` takes precedence over the argument."""
    env = os.environ.get("CK_THREADS")
    if env:
        threads = int(env)
    threads = threads or 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def replica_array(
    config: ScenarioConfig,
    threads: int | None = None,
    backend: str | None = None,
    chunk: int = REPLICA_CHUNK,
) -> np.ndarray:
    """Per-replica values for replicas ``0 .. samples-1``, in replica order."""
    params = build_params(config)
    reps = np.arange(config.samples, dtype=np.int64)
    chunks = [reps[s : s + chunk] for s in range(0, reps.size, chunk)]
    threads = resolve_threads(threads)
    if threads == 1 or len(chunks) == 1:
        parts = [kernels.replica_values(params, c, backend) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: kernels.replica_values(params, c, backend), chunks))
    return np.concatenate(parts)


def summarize(values: np.ndarray) -> PerformanceEstimate:
    """Mean and standard error with compensated summation."""
    n = int(values.size)
    mean = math.fsum(values) / n
    if n < 2:
        return PerformanceEstimate(mean, 0.0, n)
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return PerformanceEstimate(mean, math.sqrt(var / n), n)


def estimate_performance(
    config: ScenarioConfig,
    threads: int | None = None,
    backend: str | None = None,
    chunk: int = REPLICA_CHUNK,
) -> PerformanceEstimate:
    """Mean true portfolio value over ``config.samples`` replicas.

    Replicas are split into chunks of ``chunk`` and run on ``threads``
    workers; the result does not depend on either.
    """
    return summarize(replica_array(config, threads, backend, chunk))


def apply_info_error_delegation(config: ScenarioConfig, types, replica: int = 0) -> np.ndarray:
    """Group each project is delegated to in ``replica``, after information errors."""
    types = np.atleast_1d(np.asarray(types, dtype=np.float64))
    k = kernels.delegate_with_error(
        rng.as_int64(config.seed), config.r, np.array([replica]), types[None, :], config.panel().as_array()
    )
    return k[0]


def apply_info_error_minvar(config: ScenarioConfig, replica: int = 0) -> np.ndarray:
    """Boolean mask of projects estimated by the arithmetic mean in ``replica``."""
    return kernels.degraded_mask(rng.as_int64(config.seed), config.r, np.array([replica]), config.n_projects)[0]


def v_max(config: ScenarioConfig) -> float:
    """Best achievable true value: the knapsack solved on intrinsic values."""
    inst = KnapsackInstance(tuple(config.project_values), tuple(config.project_costs), config.capacity)
    return solve(inst).total_value


@dataclass(frozen=True)
class SweepRow:
    method: str
    n_groups: int
    beta: float
    cost: str
    kappa: float
    r: float
    samples: int
    mean: float
    std_error: float


def sweep_cells(
    base: ScenarioConfig,
    beta_grid: Sequence[float],
    methods: Sequence[agg.AggregationMethod | str],
    n_groups: Sequence[int],
    common_random_numbers: bool = False,
) -> list[ScenarioConfig]:
    """Cross product in (method, N_s, beta) order, one seed per cell.

    Cell ``c`` uses ``derive_seed(base.seed, c)``; with common random
    numbers every cell reuses ``base.seed``.
    """
    if not beta_grid or not methods or not n_groups:
        raise ValueError("sweep grids must be nonempty")
    cells = []
    for method in methods:
        if isinstance(method, str):
            method = replace(base.method, name=method)
        for ns in n_groups:
            for beta in beta_grid:
                seed = base.seed if common_random_numbers else rng.derive_seed(base.seed, len(cells))
                cells.append(replace(base, method=method, n_groups=int(ns), beta=float(beta), seed=seed))
    return cells


def sweep(
    base: ScenarioConfig,
    beta_grid: Sequence[float],
    methods: Sequence[agg.AggregationMethod | str],
    n_groups: Sequence[int],
    *,
    common_random_numbers: bool = False,
    threads: int | None = None,
    backend: str | None = None,
) -> list[SweepRow]:
    rows = []
    for cell in sweep_cells(base, beta_grid, methods, n_groups, common_random_numbers):
        est = estimate_performance(cell, threads, backend)
        rows.append(
            SweepRow(
                cell.method.name, cell.n_groups, cell.beta, cell.cost_label,
                cell.kappa, cell.r, est.samples, est.mean, est.std_error,
            )
        )
    return rows
