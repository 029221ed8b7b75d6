"""Two-project performance by quadrature.

With two projects of values ``a < b`` and room for only one, the
collective picks the better project unless noise reverses the order, so

    V(t1, t2) = a + (b - a) * Pr(v'_1 < v'_2)

and the performance ``E_2`` is the average of ``V`` over both project types.
For the mean, individual and delegation methods the aggregated values are
Gaussian with standard deviation ``g(t)`` and the probability is a normal
CDF. The median needs the distribution of a middle order statistic and is
handled for three groups by a one-dimensional integral per type pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .model import ExpertisePanel, build_panel

SIGMA_FLOOR = 1e-6
_Z_LIMIT = 9.0

ANALYTIC_METHODS = ("arithmetic_mean", "individual", "delegation", "median")
_ALIASES = {"mean": "arithmetic_mean", "median-selector": "median"}


class QuadratureError(RuntimeError):
    """Node doubling stopped before reaching the requested tolerance."""

    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    nodes: int = 8
    tol: float = 1e-4
    max_nodes: int = 512

    def __post_init__(self):
        if self.nodes < 8:
            raise ValueError("nodes must be >= 8")
        if self.tol <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_nodes < self.nodes:
            raise ValueError("max_nodes must be >= nodes")


@dataclass(frozen=True)
class TwoProjectScenario:
    a: float
    b: float
    panel: ExpertisePanel
    t_min: float = 0.0
    t_max: float = 10.0
    kappa: float = 1.0

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError("need a < b")
        if not self.t_min < self.t_max:
            raise ValueError("need t_min < t_max")
        if self.panel.size < 1:
            raise ValueError("panel must be nonempty")

    @classmethod
    def standard(cls, beta: float, n_groups: int, a=1.0, b=2.0, e_center=5.0, t_min=0.0, t_max=10.0):
        return cls(a, b, build_panel(e_center, beta, n_groups), t_min, t_max)

    @property
    def individual(self) -> int:
        centre = (self.t_min + self.t_max) / 2
        return int(np.argmin(np.abs(centre - self.panel.as_array())))


def _method(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in ANALYTIC_METHODS:
        raise ValueError(f"no analytic form for method {name!r}")
    return name


def g_agg(method: str, t, panel: ExpertisePanel, *, individual: int | None = None, kappa: float = 1.0):
    """Standard deviation of the aggregated value of a project of type ``t``.

    ``individual`` is the index of the deciding group for the individual
    method (default: the group closest to the panel centre). For the median
    this returns the deviation of the middle group only, as a nominal value.

    >>> float(g_agg("delegation", 2.0, build_panel(5, 4, 5)))
    1.0
    """
    method = _method(method)
    e = panel.as_array()
    d = kappa * np.abs(np.asarray(t, dtype=np.float64)[..., None] - e)
    if method == "arithmetic_mean":
        return np.sqrt((d**2).sum(axis=-1)) / e.size
    if method == "delegation":
        return d.min(axis=-1)
    if method == "individual":
        k = int(np.argmin(np.abs(e - panel.center))) if individual is None else individual
        return d[..., k]
    return d[..., e.size // 2]


def value_two(t1, t2, scenario: TwoProjectScenario, method: str):
    """Expected true value of the selected project for given types."""
    method = _method(method)
    if method == "median":
        return value_two_median(t1, t2, scenario)
    kw = dict(individual=scenario.individual, kappa=scenario.kappa)
    g1 = g_agg(method, t1, scenario.panel, **kw)
    g2 = g_agg(method, t2, scenario.panel, **kw)
    return value_from_spread(scenario.a, scenario.b, np.hypot(g1, g2))


def value_from_spread(a: float, b: float, g):
    """``a + (b - a) * Phi((b - a) / g)``, equal to ``b`` where ``g == 0``."""
    g = np.asarray(g, dtype=np.float64)
    with np.errstate(divide="ignore"):
        x = np.where(g > 0, (b - a) / np.where(g > 0, g, 1.0), np.inf)
    out = a + (b - a) * ndtr(x)
    return out if out.ndim else float(out)


def _median_cdf(f):
    # F_med for three independent components with CDFs f[..., 0..2]
    f1, f2, f3 = f[..., 0], f[..., 1], f[..., 2]
    return f1 * f2 + f1 * f3 + f2 * f3 - 2 * f1 * f2 * f3


def _median_prob(a, b, s1, s2, n):
    """Pr(median of N(a, s1_j) < median of N(b, s2_j)); s arrays shape (P, 3).

    Sums over which group supplies the first median: the density of that
    group times the chance one of the other two lies below and one above,
    times the survival function of the second median.
    """
    x, w = leggauss(n)
    total = np.zeros(s1.shape[0])
    for ell in range(3):
        others = [k for k in range(3) if k != ell]
        sl = s1[:, ell : ell + 1]
        # split z where the integrand changes fastest: around y = a at the
        # scale of the other project-1 groups, around y = b at project-2 scale
        c_b = (b - a) / sl
        brk = [np.zeros_like(c_b), c_b, np.full_like(c_b, -_Z_LIMIT), np.full_like(c_b, _Z_LIMIT)]
        for k in others:
            brk += [3 * s1[:, k : k + 1] / sl, -3 * s1[:, k : k + 1] / sl]
        for k in range(3):
            brk += [c_b + 3 * s2[:, k : k + 1] / sl, c_b - 3 * s2[:, k : k + 1] / sl]
        brk = np.sort(np.clip(np.concatenate(brk, axis=1), -_Z_LIMIT, _Z_LIMIT), axis=1)
        for p in range(brk.shape[1] - 1):
            lo, hi = brk[:, p : p + 1], brk[:, p + 1 : p + 2]
            half = (hi - lo) / 2
            z = lo + half * (x + 1)
            y = a + sl * z
            fk = ndtr((y[..., None] - a) / s1[:, None, others])
            h = fk[..., 0] * (1 - fk[..., 1]) + fk[..., 1] * (1 - fk[..., 0])
            f2 = ndtr((y[..., None] - b) / s2[:, None, :])
            surv = 1 - _median_cdf(f2)
            dens = np.exp(-0.5 * z * z) / math.sqrt(2 * math.pi)
            total += (half * (w * dens * h * surv)).sum(axis=-1)
    return total


def value_two_median(t1, t2, scenario: TwoProjectScenario, quad: QuadratureSpec | None = None):
    """Median-method counterpart of :func:`value_two` for three groups.

    Deviations below ``SIGMA_FLOOR`` are raised to it, which approximates
    the point-mass limit of a noiseless group.
    """
    quad = quad or QuadratureSpec(nodes=8, tol=1e-7, max_nodes=2048)
    if scenario.panel.size != 3:
        raise ValueError("median quadrature is implemented for N_s = 3 only")
    t1, t2 = np.broadcast_arrays(np.asarray(t1, dtype=np.float64), np.asarray(t2, dtype=np.float64))
    shape = t1.shape
    e = scenario.panel.as_array()
    s1 = np.maximum(scenario.kappa * np.abs(t1.reshape(-1, 1) - e), SIGMA_FLOOR)
    s2 = np.maximum(scenario.kappa * np.abs(t2.reshape(-1, 1) - e), SIGMA_FLOOR)
    a, b = scenario.a, scenario.b
    n = quad.nodes
    cur = _median_prob(a, b, s1, s2, n)
    active = np.arange(cur.size)
    prev = cur[active]
    # refine only the type pairs whose estimate is still moving
    while active.size:
        n *= 2
        new = _median_prob(a, b, s1[active], s2[active], n)
        cur[active] = new
        moving = np.abs(new - prev) >= quad.tol
        if moving.any() and n >= quad.max_nodes:
            err = float(np.max(np.abs(new - prev)))
            raise QuadratureError(f"median integral not converged (error {err:.3g})", float(np.mean(cur)), err)
        active, prev = active[moving], new[moving]
    out = a + (b - a) * np.clip(cur, 0.0, 1.0)
    out = out.reshape(shape)
    return out if out.ndim else float(out)


def _breakpoints(scenario: TwoProjectScenario) -> np.ndarray:
    """Panel edges for the t-integrals: expertise levels and their midpoints."""
    e = np.sort(scenario.panel.as_array())
    pts = np.concatenate([e, (e[1:] + e[:-1]) / 2, [scenario.t_min, scenario.t_max]])
    pts = pts[(pts >= scenario.t_min) & (pts <= scenario.t_max)]
    return np.unique(pts)


@lru_cache(maxsize=64)
def _composite_nodes(edges: tuple[float, ...], n: int):
    x, w = leggauss(n)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = (hi - lo) / 2
        nodes.append(lo + half * (x + 1))
        weights.append(half * w)
    return np.concatenate(nodes), np.concatenate(weights)


def _average(scenario, method, n):
    t, w = _composite_nodes(tuple(_breakpoints(scenario)), n)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    v = value_two(t1, t2, scenario, method)
    span = scenario.t_max - scenario.t_min
    return float(w @ v @ w) / span**2


def performance_two(
    scenario: TwoProjectScenario,
    method: str,
    quad: QuadratureSpec | None = None,
    full_output: bool = False,
):
    """``E_2``: mean of :func:`value_two` over both types, by Gauss-Legendre.

    The node count per panel doubles until two successive estimates differ
    by less than ``quad.tol``; that difference is the reported error.
    """
    quad = quad or QuadratureSpec()
    method = _method(method)
    n = quad.nodes
    prev = _average(scenario, method, n)
    while True:
        n *= 2
        cur = _average(scenario, method, n)
        err = abs(cur - prev)
        if err < quad.tol:
            break
        if n >= quad.max_nodes:
            raise QuadratureError(f"E_2 not converged after {n} nodes per panel (error {err:.3g})", cur, err)
        prev = cur
    return (cur, err) if full_output else cur


def beta_opt(n_groups: int, e_center: float, t_min: float, t_max: float) -> float:
    """Breadth at which delegation performs best.

    >>> beta_opt(5, 5, 0, 10)
    4.0
    """
    if n_groups < 1:
        raise ValueError("n_groups must be >= 1")
    return e_center - t_min - (t_max - t_min) / (2 * n_groups)


def beta_equiv(n_groups: int, e_center: float) -> float:
    """Breadth beyond which delegation and the individual method coincide."""
    if n_groups < 2:
        raise ValueError("n_groups must be >= 2")
    return float(e_center * (n_groups - 1))
