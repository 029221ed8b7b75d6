"""Aggregation of group evaluations into collective values or scores.

Array functions work along the trailing axes so the same code handles a
single evaluation matrix of shape ``(N_p, N_s)`` or a batch of replicas
``(R, N_p, N_s)``. Direct methods return collective values ``v'_i``;
indirect methods return scores ``q'_i`` computed from qualities
``q_ij = v_ij / w_i``, and enter the knapsack as ``q'_i * w_i``.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction

import numpy as np

from .knapsack import KnapsackInstance
from .model import EvaluationMatrix, ExpertisePanel, ProjectSet

METHOD_NAMES = (
    "arithmetic_mean",
    "median",
    "trimmed_mean",
    "winsorized_mean",
    "min_variance",
    "individual",
    "delegation",
    "borda",
    "yes_no",
    "minmax",
    "zscore",
    "stddev_scaling",
)
DIRECT = frozenset(METHOD_NAMES[:7])
INDIRECT = frozenset(METHOD_NAMES[7:])


@dataclass(frozen=True)
class AggregationMethod:
    name: str
    alpha: float = 0.2
    cutoff: float = 0.0

    def __post_init__(self):
        if self.name not in METHOD_NAMES:
            raise ValueError(f"unknown aggregation method {self.name!r}")
        if not 0 <= self.alpha < 0.5:
            raise ValueError("alpha must lie in [0, 0.5)")

    @property
    def code(self) -> int:
        return METHOD_NAMES.index(self.name)

    @property
    def is_direct(self) -> bool:
        return self.name in DIRECT

    def trim(self, n_groups: int) -> int:
        """Number of evaluations dropped (or replaced) on each side."""
        if self.name not in ("trimmed_mean", "winsorized_mean"):
            return 0
        return trim_count(self.alpha, n_groups)


def trim_count(alpha: float, n: int) -> int:
    p = int((Decimal(str(alpha)) * n).quantize(Decimal(1), rounding=ROUND_HALF_UP))
    if 2 * p >= n:
        raise ValueError(f"2p must be < N_s (alpha={alpha}, N_s={n}, p={p})")
    return p


# -- order statistics --------------------------------------------------------


def order_weights(n: int, scheme: str, p: int = 0) -> np.ndarray:
    """Weights applied to the ascending-sorted evaluations."""
    if n < 1:
        raise ValueError("need at least one evaluation")
    if scheme in ("trimmed", "winsorized") and 2 * p >= n:
        raise ValueError(f"2p must be < N_s (N_s={n}, p={p})")
    z = np.zeros(n)
    if scheme == "mean":
        z[:] = 1.0 / n
    elif scheme == "median":
        if n % 2:
            z[n // 2] = 1.0
        else:
            z[n // 2 - 1] = z[n // 2] = 0.5
    elif scheme == "trimmed":
        z[p : n - p] = 1.0 / (n - 2 * p)
    elif scheme == "winsorized":
        # each tail value is replaced by its nearest kept neighbour
        for j in range(n):
            z[min(max(j, p), n - 1 - p)] += 1.0 / n
    else:
        raise ValueError(f"unknown order-statistic scheme {scheme!r}")
    return z


def aggregate_order_weighted(row, scheme: str, p: int = 0):
    """Sort along the last axis and apply :func:`order_weights`.

    >>> float(aggregate_order_weighted([1, 2, 3, 4, 100], "winsorized", 1))
    3.0
    """
    row = np.asarray(row, dtype=np.float64)
    n = row.shape[-1]
    order_weights(n, scheme, p)  # validates
    if scheme == "mean":
        return row.sum(axis=-1) / n
    s = np.sort(row, axis=-1)
    if scheme == "median":
        if n % 2:
            return s[..., n // 2]
        return (s[..., n // 2 - 1] + s[..., n // 2]) / 2
    if scheme == "trimmed":
        return s[..., p : n - p].sum(axis=-1) / (n - 2 * p)
    # winsorized: same weights as order_weights, applied by tail replacement
    s = np.clip(s, s[..., p : p + 1], s[..., n - 1 - p : n - p])
    return s.sum(axis=-1) / n


def _inverse_variance(sigmas) -> np.ndarray:
    # (sigma_min / sigma)**2, proportional to sigma**-2 but never overflowing;
    # zero-sigma groups take all the weight equally
    sigmas = np.asarray(sigmas, dtype=np.float64)
    exact = sigmas == 0
    any_exact = exact.any(axis=-1, keepdims=True)
    smin = sigmas.min(axis=-1, keepdims=True)
    r = np.where(exact, 0.0, (smin / np.where(exact, 1.0, sigmas)) ** 2)
    return np.where(any_exact, exact.astype(np.float64), r)


def min_variance_weights(sigmas) -> np.ndarray:
    """Inverse-variance weights; zero-sigma groups share all the weight."""
    r = _inverse_variance(sigmas)
    return r / r.sum(axis=-1, keepdims=True)


def aggregate_min_variance(row, sigmas):
    """Inverse-variance weighted mean; exact groups are averaged among themselves."""
    row = np.asarray(row, dtype=np.float64)
    r = _inverse_variance(sigmas)
    return (r * row).sum(axis=-1) / r.sum(axis=-1)


# -- group selection ---------------------------------------------------------


def pick_individual(panel: ExpertisePanel, t_min: float, t_max: float) -> int:
    """Group whose expertise is closest to the centre of the type range."""
    centre = (t_min + t_max) / 2
    return int(np.argmin(np.abs(centre - panel.as_array())))


def pick_delegate(t, panel: ExpertisePanel):
    """Index of the group closest to type ``t`` (first one on ties)."""
    d = np.abs(np.asarray(t, dtype=np.float64)[..., None] - panel.as_array())
    k = np.argmin(d, axis=-1)
    return int(k) if k.ndim == 0 else k


# -- indirect scores ---------------------------------------------------------


def score_borda(qualities) -> np.ndarray:
    """Borda points summed over groups; qualities shaped (..., N_p, N_s).

    Within a column, equal qualities are ordered by project index, with the
    lower index ranked higher.
    """
    q = np.asarray(qualities, dtype=np.float64)
    n_p = q.shape[-2]
    order = np.argsort(-q, axis=-2, kind="stable")
    points = np.empty(q.shape, dtype=np.int64)
    ranks = np.arange(n_p - 1, -1, -1, dtype=np.int64)
    ranks = np.broadcast_to(ranks.reshape((n_p, 1)), q.shape)
    np.put_along_axis(points, order, ranks, axis=-2)
    return points.sum(axis=-1)


def score_yes_no(values, cutoff: float = 0.0) -> np.ndarray:
    """Number of groups whose evaluation exceeds ``cutoff``."""
    return (np.asarray(values) > cutoff).sum(axis=-1)


def scale_qualities(qualities, scheme: str) -> np.ndarray:
    """Per-group rescaling summed over groups.

    Degenerate columns (all qualities equal) map to 0.5 for minmax, 0 for
    zscore, and are left unscaled for stddev.
    """
    q = np.asarray(qualities, dtype=np.float64)
    n_p = q.shape[-2]
    qmax = q.max(axis=-2, keepdims=True)
    qmin = q.min(axis=-2, keepdims=True)
    flat = qmax == qmin
    if scheme == "minmax":
        span = np.where(flat, 1.0, qmax - qmin)
        t = np.where(flat, 0.5, (q - qmin) / span)
    elif scheme in ("zscore", "stddev"):
        mu = q.sum(axis=-2, keepdims=True) / n_p
        s = np.sqrt(((q - mu) ** 2).sum(axis=-2, keepdims=True) / n_p)
        flat = flat | (s == 0)  # spread below the float resolution counts as flat
        s = np.where(flat, 1.0, s)
        if scheme == "zscore":
            t = np.where(flat, 0.0, (q - mu) / s)
        else:
            t = q / s
    else:
        raise ValueError(f"unknown scaling scheme {scheme!r}")
    return t.sum(axis=-1)


# -- full pipeline -----------------------------------------------------------


def item_values(
    method: AggregationMethod,
    values,
    sigmas,
    costs,
    *,
    delegates=None,
    individual: int | None = None,
    degraded=None,
):
    """Knapsack item values for every project, shape (..., N_p).

    ``delegates`` gives the group index used per project for delegation;
    ``individual`` the group used by the individual method. ``degraded``
    marks projects whose min-variance estimate falls back to the mean.
    """
    values = np.asarray(values, dtype=np.float64)
    w = np.asarray([float(c) for c in costs])
    n_s = values.shape[-1]
    name = method.name
    if name == "arithmetic_mean":
        return aggregate_order_weighted(values, "mean")
    if name == "median":
        return aggregate_order_weighted(values, "median")
    if name == "trimmed_mean":
        return aggregate_order_weighted(values, "trimmed", method.trim(n_s))
    if name == "winsorized_mean":
        return aggregate_order_weighted(values, "winsorized", method.trim(n_s))
    if name == "min_variance":
        out = aggregate_min_variance(values, sigmas)
        if degraded is not None:
            out = np.where(degraded, aggregate_order_weighted(values, "mean"), out)
        return out
    if name == "individual":
        return values[..., individual]
    if name == "delegation":
        idx = np.asarray(delegates)[..., None]
        return np.take_along_axis(values, np.broadcast_to(idx, values.shape[:-1] + (1,)), axis=-1)[..., 0]
    if name == "yes_no":
        return score_yes_no(values, method.cutoff) * w
    q = values / w[:, None]
    if name == "borda":
        return score_borda(q) * w
    scheme = {"minmax": "minmax", "zscore": "zscore", "stddev_scaling": "stddev"}[name]
    return scale_qualities(q, scheme) * w


def aggregate(
    method: AggregationMethod,
    evals: EvaluationMatrix,
    projects: ProjectSet,
    panel: ExpertisePanel,
) -> np.ndarray:
    """Collective values (direct methods) or scores (indirect) for one matrix."""
    vals = item_values(
        method, evals.values, evals.sigmas, projects.costs,
        delegates=pick_delegate(np.asarray(projects.types), panel) if projects.types else None,
        individual=pick_individual(panel, projects.t_min, projects.t_max),
    )
    if method.is_direct:
        return vals
    return vals / np.asarray([float(c) for c in projects.costs])


def collective_instance(
    method: AggregationMethod,
    evals: EvaluationMatrix,
    projects: ProjectSet,
    panel: ExpertisePanel,
    capacity: Fraction,
) -> KnapsackInstance:
    """Knapsack whose objective is sum(v'_i x_i) or sum(q'_i w_i x_i)."""
    vals = item_values(
        method, evals.values, evals.sigmas, projects.costs,
        delegates=pick_delegate(np.asarray(projects.types), panel) if projects.types else None,
        individual=pick_individual(panel, projects.t_min, projects.t_max),
    )
    return KnapsackInstance(tuple(np.asarray(vals, dtype=np.float64)), projects.costs, capacity)
