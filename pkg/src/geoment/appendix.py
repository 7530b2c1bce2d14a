"""Closed forms and brute-force checks for the auxiliary results: the trace-
distance measure on isotropic states and two constrained minimizations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pure import restart_rng

E = np.e
LOG2E = np.log2(np.e)


def gt_isotropic_closed(d: int, p: float) -> float:
    if d < 2 or not 0 <= p <= 1:
        raise ValueError("need d >= 2 and p in [0, 1]")
    return float(0.25 * (np.sqrt((2 - p) ** 2 - (4.0 / d) * (1 - p)) + (d * d - 2) * p / (d * d)) ** 2)


@dataclass(frozen=True)
class ConcavityCheck:
    lhs: float
    rhs: float
    violated: bool

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.violated))


def gt_concavity_counterexample(d: int, p: float) -> ConcavityCheck:
    """Compare the isotropic value with the chord between the pure MES and the
    maximally mixed state; ``violated`` means concavity fails at this point."""
    lhs = gt_isotropic_closed(d, p)
    rhs = p * (1 - 1 / d ** 2) ** 2 + (1 - p) * (1 - 1 / d)
    return ConcavityCheck(lhs, float(rhs), bool(lhs < rhs - 1e-9))


@dataclass(frozen=True)
class LogMinResult:
    value: float
    sampled_min: float
    samples: int
    ok: bool


def log_min_objective(x: np.ndarray, y: np.ndarray, n_const: float) -> np.ndarray:
    """sum_i (x_i + y_i) log2[n (1 + y_i/x_i)] over the last axis."""
    return np.sum((x + y) * np.log2(n_const * (1 + y / x)), axis=-1)


def constrained_log_min(k: int, n_const: float, X: float, Y: float, *,
                        samples: int = 10_000, seed: int = 0) -> LogMinResult:
    """Minimum of the objective with sum x_i = X, sum y_i = Y; checked by sampling."""
    if k < 1 or X <= 0 or Y < 0 or n_const <= 0:
        raise ValueError("need k >= 1, X > 0, Y >= 0 and n > 0")
    value = float((X + Y) * np.log2(n_const * (1 + Y / X)))
    rng = restart_rng(seed, 0)
    x = X * rng.dirichlet(np.ones(k), size=samples)
    y = Y * rng.dirichlet(np.ones(k), size=samples)
    x = np.maximum(x, 1e-300)
    sampled = float(np.min(log_min_objective(x, y, n_const)))
    return LogMinResult(value, sampled, samples, bool(sampled >= value - 1e-9))


@dataclass(frozen=True)
class FhsSpec:
    m: float
    n: float
    q: float

    def __post_init__(self):
        if self.m <= 0 or self.n <= 0 or self.m > self.n:
            raise ValueError("need 0 < m <= n")
        if not 0 < self.q < 1:
            raise ValueError("q must lie in (0, 1)")

    @property
    def h_max(self) -> float:
        return (1 - self.q) / self.q

    @property
    def s_max(self) -> float:
        return self.q / (1 - self.q)


@dataclass(frozen=True)
class FhsMinimum:
    value: float
    argmin: tuple[float, float]
    case: int

    def __iter__(self):
        return iter((self.value, self.argmin))


def fhs(spec: FhsSpec, h, s):
    """The two-variable function, vectorized over h and s."""
    m, n, q = spec.m, spec.n, spec.q
    h, s = np.asarray(h, dtype=float), np.asarray(s, dtype=float)
    den = 1 - h * s
    a = (q - s * (1 - q)) / den * (1 + h) * np.log2(m * (1 + h))
    b = ((1 - q) - h * q) / den * (1 + s) * np.log2(n * (1 + s))
    return a + b


def fhs_minimum(spec: FhsSpec) -> FhsMinimum:
    m, n, q = spec.m, spec.n, spec.q
    if m / n >= 1 / E:
        return FhsMinimum(float(q * np.log2(m) + (1 - q) * np.log2(n)), (0.0, 0.0), 1)
    if q >= E * m / n:
        return FhsMinimum(float(np.log2(m / q)), (spec.h_max, 0.0), 2)
    return FhsMinimum(float(np.log2(n) - q * n * LOG2E / (m * E)), (n / (E * m) - 1, 0.0), 3)


def fhs_grid_min(spec: FhsSpec, points: int = 2000) -> tuple[float, tuple[float, float]]:
    """Brute-force minimum over a points x points grid, excluding the singular corner."""
    h = np.linspace(0.0, spec.h_max, points)
    s = np.linspace(0.0, spec.s_max, points)
    best, arg = np.inf, (0.0, 0.0)
    for lo in range(0, points, 250):
        hh = h[lo:lo + 250, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = fhs(spec, hh, s[None, :])
        if lo + 250 >= points:
            vals[-1, -1] = np.inf
        i, j = np.unravel_index(np.argmin(vals), vals.shape)
        if vals[i, j] < best:
            best, arg = float(vals[i, j]), (float(h[lo + i]), float(s[j]))
    return best, arg
