"""Exact 0/1 knapsack over rational weights.

Weights are scaled by their least common denominator so the dynamic
program runs over integer capacities; item values stay real. The table
tracks the best value per weight level, and an item is only taken when
it strictly improves that value, so ties resolve toward leaving items out
and items with value <= 0 are never selected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._jit import njit

DEFAULT_MAX_CELLS = 10**8
BRUTE_FORCE_LIMIT = 25


class KnapsackTooLarge(ValueError):
    """Scaled capacity would exceed the DP memory budget."""


@dataclass(frozen=True)
class KnapsackInstance:
    item_values: tuple[float, ...]
    item_weights: tuple[Fraction, ...]
    capacity: Fraction

    def __post_init__(self):
        object.__setattr__(self, "item_values", tuple(float(v) for v in self.item_values))
        object.__setattr__(self, "item_weights", tuple(Fraction(w) for w in self.item_weights))
        object.__setattr__(self, "capacity", Fraction(self.capacity))
        if len(self.item_values) != len(self.item_weights):
            raise ValueError("item_values and item_weights differ in length")
        if any(w <= 0 for w in self.item_weights):
            raise ValueError("weights must be positive")
        if self.capacity <= 0:
            raise ValueError("capacity must be positive")

    def __len__(self):
        return len(self.item_values)

    def evaluate(self, chosen: Sequence[int]) -> "Selection":
        """Selection record for an arbitrary 0/1 vector (feasible or not)."""
        chosen = tuple(int(bool(x)) for x in chosen)
        value = math.fsum(v for v, x in zip(self.item_values, chosen) if x)
        weight = sum((w for w, x in zip(self.item_weights, chosen) if x), Fraction(0))
        return Selection(chosen, value, weight)


@dataclass(frozen=True)
class Selection:
    chosen: tuple[int, ...]
    total_value: float
    total_weight: Fraction

    @property
    def indices(self) -> list[int]:
        return [i for i, x in enumerate(self.chosen) if x]


def scale_weights(weights: Sequence[Fraction], capacity: Fraction):
    """Integer weights and capacity after multiplying by the common denominator."""
    weights = [Fraction(w) for w in weights]
    capacity = Fraction(capacity)
    denom = math.lcm(*(w.denominator for w in weights)) if weights else 1
    wint = np.array([int(w * denom) for w in weights], dtype=np.int64)
    cap = math.floor(capacity * denom)
    return wint, cap, denom


@njit(nogil=True, cache=True)
def dp_select(values, wint, cap, chosen):
    """Fill ``chosen`` (bool array) with an optimal selection."""
    n = values.shape[0]
    best = np.zeros(cap + 1)
    keep = np.zeros((n, cap + 1), dtype=np.bool_)
    for i in range(n):
        w = wint[i]
        v = values[i]
        if v <= 0.0 or w > cap:
            continue
        for c in range(cap, w - 1, -1):
            cand = best[c - w] + v
            if cand > best[c]:
                best[c] = cand
                keep[i, c] = True
    c = cap
    for i in range(n - 1, -1, -1):
        if keep[i, c]:
            chosen[i] = True
            c -= wint[i]
        else:
            chosen[i] = False


def dp_select_batch(values: np.ndarray, wint: np.ndarray, cap: int) -> np.ndarray:
    """Vectorized DP over a batch of value vectors, shape (R, n) -> bool (R, n).

    Same recurrence and tie rule as :func:`dp_select`, with the weight axis
    updated one item at a time for all replicas at once.
    """
    values = np.asarray(values, dtype=np.float64)
    r, n = values.shape
    best = np.zeros((r, cap + 1))
    keep = np.zeros((r, n, cap + 1), dtype=bool)
    for i in range(n):
        w = int(wint[i])
        if w > cap:
            continue
        v = values[:, i : i + 1]
        cand = best[:, : cap + 1 - w] + v
        take = (cand > best[:, w:]) & (v > 0.0)
        keep[:, i, w:] = take
        best[:, w:] = np.where(take, cand, best[:, w:])
    chosen = np.zeros((r, n), dtype=bool)
    c = np.full(r, cap, dtype=np.int64)
    rows = np.arange(r)
    for i in range(n - 1, -1, -1):
        t = keep[rows, i, c]
        chosen[:, i] = t
        c -= t * wint[i]
    return chosen


def check_size(n: int, cap: int, max_cells: int = DEFAULT_MAX_CELLS):
    if n * (cap + 1) > max_cells:
        raise KnapsackTooLarge(
            f"DP table of {n} x {cap + 1} cells exceeds the budget of {max_cells}"
        )


def solve(instance: KnapsackInstance, max_cells: int = DEFAULT_MAX_CELLS) -> Selection:
    """Optimal selection by dynamic programming."""
    n = len(instance)
    if n == 0:
        return Selection((), 0.0, Fraction(0))
    wint, cap, _ = scale_weights(instance.item_weights, instance.capacity)
    check_size(n, cap, max_cells)
    chosen = np.zeros(n, dtype=np.bool_)
    dp_select(np.asarray(instance.item_values, dtype=np.float64), wint, cap, chosen)
    return instance.evaluate(chosen)


def brute_force(instance: KnapsackInstance, chunk_bits: int = 16) -> Selection:
    """Optimal selection by enumerating all 2**n subsets.

    Feasibility uses the scaled integer weights, i.e. exact rational
    arithmetic. Among equal-value subsets the first in mask order wins.
    """
    n = len(instance)
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to {BRUTE_FORCE_LIMIT} items, got {n}")
    if n == 0:
        return Selection((), 0.0, Fraction(0))
    wint, cap, _ = scale_weights(instance.item_weights, instance.capacity)
    values = np.asarray(instance.item_values, dtype=np.float64)
    shifts = np.arange(n, dtype=np.int64)
    best_val, best_mask = 0.0, 0
    step = 1 << min(n, chunk_bits)
    for start in range(0, 1 << n, step):
        masks = np.arange(start, start + step, dtype=np.int64)
        bits = (masks[:, None] >> shifts) & 1
        feasible = bits @ wint <= cap
        sums = np.where(feasible, bits @ values, -np.inf)
        k = int(np.argmax(sums))
        if sums[k] > best_val:
            best_val, best_mask = float(sums[k]), int(masks[k])
    chosen = [(best_mask >> i) & 1 for i in range(n)]
    return instance.evaluate(chosen)
