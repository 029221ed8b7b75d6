"""Replica kernels: one Monte-Carlo replica = sample, aggregate, solve, score.

Two interchangeable paths compute the same thing:

* ``replicas_numba`` loops over replicas with scalar jitted code
  (``nogil`` so the simulator can run chunks on threads);
* ``replicas_numpy`` vectorizes a chunk of replicas with the array
  functions in :mod:`aggregation` and :func:`knapsack.dp_select_batch`.

Both read the same counter-based streams, so they agree draw for draw.
Which one :func:`replica_values` uses is decided by ``CK_NO_NUMBA``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import aggregation as agg
from . import rng
from ._jit import HAVE_NUMBA, njit
from .knapsack import dp_select, dp_select_batch

NUMPY_CHUNK = 512


@dataclass(frozen=True)
class ReplicaParams:
    seed: int
    values: np.ndarray  # intrinsic v_i
    costs: np.ndarray  # w_i as float
    wint: np.ndarray  # integer-scaled weights
    cap: int
    levels: np.ndarray  # expertise e_j
    t_min: float
    t_max: float
    kappa: float
    method: int
    trim: int
    cutoff: float
    individual: int
    r: float
    shift: bool

    @property
    def method_name(self) -> str:
        return agg.METHOD_NAMES[self.method]


# -- jitted path -------------------------------------------------------------


@njit(nogil=True, cache=True)
def _sort_small(x):
    # insertion sort; rows hold N_s values
    n = x.shape[0]
    for a in range(1, n):
        v = x[a]
        b = a - 1
        while b >= 0 and x[b] > v:
            x[b + 1] = x[b]
            b -= 1
        x[b + 1] = v


@njit(nogil=True, cache=True)
def _row_stat(row, method, p):
    n = row.shape[0]
    if method == 0:
        acc = 0.0
        for j in range(n):
            acc += row[j]
        return acc / n
    s = row.copy()
    _sort_small(s)
    if method == 1:
        if n % 2 == 1:
            return s[n // 2]
        return (s[n // 2 - 1] + s[n // 2]) / 2
    acc = 0.0
    if method == 2:
        for j in range(p, n - p):
            acc += s[j]
        return acc / (n - 2 * p)
    lo = s[p]
    hi = s[n - 1 - p]
    for j in range(n):
        acc += min(max(s[j], lo), hi)
    return acc / n


@njit(nogil=True, cache=True)
def _min_variance(row, sig):
    n = row.shape[0]
    n_exact = 0
    smin = sig[0]
    for j in range(n):
        if sig[j] == 0.0:
            n_exact += 1
        smin = min(smin, sig[j])
    r = np.empty(n)
    tot = 0.0
    for j in range(n):
        if n_exact > 0:
            r[j] = 1.0 if sig[j] == 0.0 else 0.0
        else:
            r[j] = (smin / sig[j]) ** 2
        tot += r[j]
    acc = 0.0
    for j in range(n):
        acc += r[j] * row[j]
    return acc / tot


@njit(nogil=True, cache=True)
def _indirect(q, v, method, cutoff, out):
    n_p, n_s = q.shape
    for i in range(n_p):
        out[i] = 0.0
    for j in range(n_s):
        if method == 7:
            for i in range(n_p):
                pos = 0
                for k in range(n_p):
                    if q[k, j] > q[i, j] or (q[k, j] == q[i, j] and k < i):
                        pos += 1
                out[i] += n_p - 1 - pos
        elif method == 8:
            for i in range(n_p):
                if v[i, j] > cutoff:
                    out[i] += 1.0
        else:
            qmax = q[0, j]
            qmin = q[0, j]
            for i in range(1, n_p):
                qmax = max(qmax, q[i, j])
                qmin = min(qmin, q[i, j])
            flat = qmax == qmin
            if method == 9:
                for i in range(n_p):
                    out[i] += 0.5 if flat else (q[i, j] - qmin) / (qmax - qmin)
            else:
                mu = 0.0
                for i in range(n_p):
                    mu += q[i, j]
                mu /= n_p
                ss = 0.0
                for i in range(n_p):
                    ss += (q[i, j] - mu) ** 2
                s = 0.0 if flat else np.sqrt(ss / n_p)
                if s == 0.0:  # spread below the float resolution counts as flat
                    flat = True
                    s = 1.0
                for i in range(n_p):
                    if method == 10:
                        out[i] += 0.0 if flat else (q[i, j] - mu) / s
                    else:
                        out[i] += q[i, j] / s


@njit(nogil=True, cache=True)
def _one_replica(rep, seed, values, costs, wint, cap, levels, t_min, t_max,
                 kappa, method, trim, cutoff, individual, r, shift, chosen):
    n_p = values.shape[0]
    n_s = levels.shape[0]
    t = np.empty(n_p)
    sig = np.empty((n_p, n_s))
    v = np.empty((n_p, n_s))
    for i in range(n_p):
        t[i] = t_min + (t_max - t_min) * rng.uniform_scalar(rng.key_scalar(seed, rng.TAG_TYPE, rep, i, 0), 0)
        for j in range(n_s):
            s = kappa * abs(t[i] - levels[j])
            sig[i, j] = s
            if s > 0.0:
                v[i, j] = values[i] + s * rng.normal_scalar(rng.key_scalar(seed, rng.TAG_EVAL, rep, i, j))
            else:
                v[i, j] = values[i]
    item = np.empty(n_p)
    if method <= 3:
        for i in range(n_p):
            item[i] = _row_stat(v[i], method, trim)
    elif method == 4:
        for i in range(n_p):
            if r > 0.0 and rng.uniform_scalar(rng.key_scalar(seed, rng.TAG_MINVAR, rep, i, 0), 0) < r:
                item[i] = _row_stat(v[i], 0, 0)
            else:
                item[i] = _min_variance(v[i], sig[i])
    elif method == 5:
        for i in range(n_p):
            item[i] = v[i, individual]
    elif method == 6:
        threshold = (n_s - 1) * r / n_s
        for i in range(n_p):
            k = 0
            for j in range(1, n_s):
                if abs(t[i] - levels[j]) < abs(t[i] - levels[k]):
                    k = j
            if r > 0.0 and n_s > 1:
                key = rng.key_scalar(seed, rng.TAG_DELEGATE, rep, i, 0)
                if rng.uniform_scalar(key, 0) < threshold:
                    alt = int(np.floor(rng.uniform_scalar(key, 1) * (n_s - 1)))
                    k = alt + 1 if alt >= k else alt
            item[i] = v[i, k]
    else:
        q = np.empty((n_p, n_s))
        for i in range(n_p):
            for j in range(n_s):
                q[i, j] = v[i, j] / costs[i]
        _indirect(q, v, method, cutoff, item)
        for i in range(n_p):
            item[i] *= costs[i]
    if shift:
        lo = item[0]
        for i in range(1, n_p):
            lo = min(lo, item[i])
        if lo < 0.0:
            for i in range(n_p):
                item[i] -= lo
    dp_select(item, wint, cap, chosen)
    total = 0.0
    for i in range(n_p):
        if chosen[i]:
            total += values[i]
    return total


@njit(nogil=True, cache=True)
def _replicas_jit(reps, seed, values, costs, wint, cap, levels, t_min, t_max,
                  kappa, method, trim, cutoff, individual, r, shift, out):
    chosen = np.zeros(values.shape[0], dtype=np.bool_)
    for a in range(reps.shape[0]):
        out[a] = _one_replica(reps[a], seed, values, costs, wint, cap, levels, t_min, t_max,
                              kappa, method, trim, cutoff, individual, r, shift, chosen)


def replicas_numba(params: ReplicaParams, reps: np.ndarray) -> np.ndarray:
    reps = np.ascontiguousarray(reps, dtype=np.int64)
    out = np.empty(reps.shape[0])
    p = params
    _replicas_jit(reps, np.int64(p.seed), p.values, p.costs, p.wint, np.int64(p.cap), p.levels,
                  float(p.t_min), float(p.t_max), float(p.kappa), np.int64(p.method),
                  np.int64(p.trim), float(p.cutoff), np.int64(p.individual), float(p.r),
                  bool(p.shift), out)
    return out


# -- numpy path --------------------------------------------------------------


def delegate_with_error(seed, r, reps, types, levels) -> np.ndarray:
    """Delegated group per (replica, project), including information errors.

    With probability ``(N_s - 1) r / N_s`` the project goes to one of the
    non-optimal groups, chosen uniformly; otherwise to the closest group.
    """
    types = np.asarray(types, dtype=np.float64)
    n_s = levels.shape[0]
    k = np.argmin(np.abs(types[..., None] - levels), axis=-1)
    if r > 0.0 and n_s > 1:
        ii = np.arange(types.shape[-1])
        rr = np.asarray(reps)[:, None]
        threshold = (n_s - 1) * r / n_s
        wrong = rng.uniform(seed, rng.TAG_DELEGATE, rr, ii, 0, 0) < threshold
        alt = np.floor(rng.uniform(seed, rng.TAG_DELEGATE, rr, ii, 0, 1) * (n_s - 1)).astype(np.int64)
        alt = np.where(alt >= k, alt + 1, alt)
        k = np.where(wrong, alt, k)
    return k


def degraded_mask(seed, r, reps, n_p: int) -> np.ndarray:
    """Projects whose min-variance estimate falls back to the arithmetic mean."""
    if r <= 0.0:
        return np.zeros((len(reps), n_p), dtype=bool)
    u = rng.uniform(seed, rng.TAG_MINVAR, np.asarray(reps)[:, None], np.arange(n_p), 0, 0)
    return u < r


def _replicas_numpy_chunk(params: ReplicaParams, reps: np.ndarray) -> np.ndarray:
    p = params
    n_p, n_s = p.values.shape[0], p.levels.shape[0]
    rr = reps[:, None]
    ii = np.arange(n_p)
    t = p.t_min + (p.t_max - p.t_min) * rng.uniform(p.seed, rng.TAG_TYPE, rr, ii, 0, 0)
    sig = p.kappa * np.abs(t[..., None] - p.levels)
    z = rng.normal(p.seed, rng.TAG_EVAL, rr[..., None], ii[:, None], np.arange(n_s))
    v0 = p.values[:, None]
    v = np.where(sig > 0.0, v0 + sig * z, v0)
    method = agg.AggregationMethod(agg.METHOD_NAMES[p.method], cutoff=p.cutoff)
    if method.name in ("trimmed_mean", "winsorized_mean"):
        scheme = "trimmed" if method.name == "trimmed_mean" else "winsorized"
        items = agg.aggregate_order_weighted(v, scheme, p.trim)
    else:
        items = agg.item_values(
            method, v, sig, p.costs,
            delegates=delegate_with_error(p.seed, p.r, reps, t, p.levels) if method.name == "delegation" else None,
            individual=p.individual,
            degraded=degraded_mask(p.seed, p.r, reps, n_p) if method.name == "min_variance" else None,
        )
    items = np.asarray(items, dtype=np.float64)
    if p.shift:
        items = items - np.minimum(items.min(axis=-1, keepdims=True), 0.0)
    chosen = dp_select_batch(items, p.wint, p.cap)
    return np.where(chosen, p.values, 0.0).sum(axis=-1)


def replicas_numpy(params: ReplicaParams, reps: np.ndarray) -> np.ndarray:
    reps = np.asarray(reps, dtype=np.int64)
    out = np.empty(reps.shape[0])
    for start in range(0, reps.shape[0], NUMPY_CHUNK):
        sl = slice(start, start + NUMPY_CHUNK)
        out[sl] = _replicas_numpy_chunk(params, reps[sl])
    return out


def replica_values(params: ReplicaParams, reps: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Realized true portfolio value for each replica index in ``reps``."""
    backend = backend or ("numba" if HAVE_NUMBA else "numpy")
    if backend == "numba":
        return replicas_numba(params, reps)
    if backend == "numpy":
        return replicas_numpy(params, reps)
    raise ValueError(f"unknown backend {backend!r}")
