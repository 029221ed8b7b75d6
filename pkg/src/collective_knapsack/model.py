"""Projects, stakeholder panels, cost structures and noisy evaluations."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rng as _rng


class CostStructure(str, Enum):
    UNIFORM = "uniform"
    DECREASING = "decreasing"
    INCREASING = "increasing"


@dataclass(frozen=True)
class ProjectSet:
    values: tuple[float, ...]
    costs: tuple[Fraction, ...]
    types: tuple[float, ...] = ()
    t_min: float = 0.0
    t_max: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "costs", tuple(Fraction(c) for c in self.costs))
        object.__setattr__(self, "types", tuple(float(t) for t in self.types))
        n = len(self.values)
        if len(self.costs) != n or (self.types and len(self.types) != n):
            raise ValueError("values, costs and types must have equal length")
        if any(v <= 0 for v in self.values):
            raise ValueError("project values must be positive")
        if any(c <= 0 for c in self.costs):
            raise ValueError("project costs must be positive")
        if any(not (self.t_min <= t <= self.t_max) for t in self.types):
            raise ValueError("project types must lie in [t_min, t_max]")

    @property
    def count(self) -> int:
        return len(self.values)

    def with_types(self, types: Sequence[float]) -> "ProjectSet":
        return ProjectSet(self.values, self.costs, tuple(types), self.t_min, self.t_max)


@dataclass(frozen=True)
class ExpertisePanel:
    center: float
    breadth: float
    levels: tuple[float, ...] = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.levels)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.levels, dtype=np.float64)


def build_panel(center: float, breadth: float, size: int) -> ExpertisePanel:
    """Equally spaced expertise levels on [center - breadth, center + breadth].

    >>> build_panel(5, 4, 5).levels
    (1.0, 3.0, 5.0, 7.0, 9.0)
    """
    if size < 1:
        raise ValueError("panel size must be >= 1")
    if breadth < 0:
        raise ValueError("breadth must be >= 0")
    if size == 1:
        return ExpertisePanel(float(center), float(breadth), (float(center),))
    j = np.arange(1, size + 1)
    offsets = (size + 1 - 2 * j) / (size - 1) * breadth
    levels = center - offsets
    # mirror the upper half so the panel is symmetric to the last bit
    half = size // 2
    levels[size - half:] = 2 * center - levels[:half][::-1]
    if size % 2:
        levels[half] = center
    return ExpertisePanel(float(center), float(breadth), tuple(float(e) for e in levels))


@dataclass(frozen=True)
class NoiseModel:
    multiplier: float = 1.0

    def __post_init__(self):
        if self.multiplier < 0:
            raise ValueError("noise multiplier must be >= 0")


def perception_sigma(t_i, e_j, multiplier=1.0):
    """Perception error ``multiplier * |t_i - e_j|``; broadcasts over arrays."""
    if np.any(np.asarray(multiplier) < 0):
        raise ValueError("multiplier must be >= 0")
    return multiplier * np.abs(np.subtract(t_i, e_j))


@dataclass(frozen=True)
class EvaluationMatrix:
    values: np.ndarray  # (N_p, N_s)
    sigmas: np.ndarray  # (N_p, N_s)

    @property
    def shape(self):
        return self.values.shape


def sample_evaluations(
    projects: ProjectSet,
    panel: ExpertisePanel,
    noise: NoiseModel,
    source: _rng.RandomSource,
    replica: int,
) -> EvaluationMatrix:
    """Draw ``v_ij = v_i + sigma_ij * Z`` from the (replica, i, j) streams.

    Cells with zero sigma return ``v_i`` exactly.
    """
    if not projects.types:
        raise ValueError("projects need types before evaluations can be sampled")
    t = np.asarray(projects.types)[:, None]
    e = panel.as_array()[None, :]
    sigmas = perception_sigma(t, e, noise.multiplier)
    v = np.asarray(projects.values)[:, None]
    ii, jj = np.indices(sigmas.shape)
    z = source.normal(_rng.TAG_EVAL, replica, ii, jj)
    values = np.where(sigmas > 0, v + sigmas * z, v)
    values = np.broadcast_to(values, sigmas.shape).copy()
    return EvaluationMatrix(values, sigmas)


def sample_types(source: _rng.RandomSource, replica: int, n: int, t_min: float, t_max: float):
    """Project types for one replica, uniform on [t_min, t_max)."""
    u = source.uniform(_rng.TAG_TYPE, replica, np.arange(n), 0)
    return t_min + (t_max - t_min) * u


def make_costs(kind: CostStructure | str, n: int) -> list[Fraction]:
    """Cost vectors; the non-uniform kinds are exact with denominator n + 1."""
    if n < 1:
        raise ValueError("n must be >= 1")
    kind = CostStructure(kind)
    if kind is CostStructure.UNIFORM:
        return [Fraction(1)] * n
    if kind is CostStructure.DECREASING:
        return [Fraction(2 * (n + 1 - i), n + 1) for i in range(1, n + 1)]
    return [Fraction(2 * i, n + 1) for i in range(1, n + 1)]
