"""Maximal product-state overlap of pure states and the pure-state GM."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .core import ProductState, PureState
from .errors import DimensionError


@dataclass(frozen=True)
class OptimizerOptions:
    """Settings shared by every multistart product-state optimizer.

    Attributes
    ----------
    restarts : int
        Number of random product-state initializations.
    max_sweeps : int
        Iteration cap for alternating updates.
    tol : float
        Stall tolerance on the objective between sweeps.
    seed : int
        Root seed; restart ``k`` draws from ``SeedSequence(seed, spawn_key=(k,))``.
    """

    restarts: int = 32
    max_sweeps: int = 10_000
    tol: float = 1e-12
    seed: int = 0

    def with_restarts(self, restarts: int) -> "OptimizerOptions":
        return replace(self, restarts=restarts)


DEFAULT_OPTIONS = OptimizerOptions()


@dataclass(frozen=True, eq=False)
class CpsResult:
    lambda2: float
    cps: ProductState
    restarts_used: int
    converged: bool


def restart_rng(seed: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=(k,)))


def random_factors(dims: Sequence[int], opts: OptimizerOptions, count: int,
                   offset: int = 0) -> list[np.ndarray]:
    """Per-party arrays of shape (count, d_j); restart ``k`` uses its own generator."""
    rows = []
    for k in range(count):
        rng = restart_rng(opts.seed, offset + k)
        row = []
        for d in dims:
            v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
            row.append(v / np.linalg.norm(v))
        rows.append(row)
    return [np.array([r[j] for r in rows]) for j in range(len(dims))]


def contract_except(t: np.ndarray, factors: Sequence[np.ndarray], j: int) -> np.ndarray:
    """Contract party axes of ``t`` with conjugated factors, skipping party ``j``.

    ``t`` has shape (*batch, d_1, ..., d_n); factor ``k`` has shape (*batch', d_k)
    with ``batch'`` broadcastable against ``batch``. Returns (*batch, d_j).
    """
    n = len(factors)
    nb = t.ndim - n
    for k in reversed(range(n)):
        if k == j:
            continue
        moved = np.moveaxis(t, nb + k, -1)
        f = factors[k].conj()
        f = f.reshape(f.shape[:-1] + (1,) * (moved.ndim - f.ndim) + f.shape[-1:])
        t = np.sum(moved * f, axis=-1)
    return t


def product_overlap(t: np.ndarray, factors: Sequence[np.ndarray]) -> np.ndarray:
    """<phi|psi> for batched product states against the tensor ``t``."""
    v = contract_except(t, factors, 0)
    return np.sum(factors[0].conj() * v, axis=-1)


def alternating_pure(t: np.ndarray, factors: list[np.ndarray], max_sweeps: int,
                     tol: float) -> tuple[np.ndarray, list[np.ndarray], np.ndarray]:
    """Alternating maximization of |<phi|psi>|^2 for a batch of starting points.

    ``t`` has shape (B, *dims) or (*dims,) broadcast over the factor batch; factors
    have shape (B, d_j). Returns (values, factors, converged flags).
    """
    n = len(factors)
    factors = [f.copy() for f in factors]
    batch = factors[0].shape[0]
    if t.ndim == n:
        t = t[None]
    prev = np.full(batch, -1.0)
    value = np.zeros(batch)
    done = np.zeros(batch, dtype=bool)
    for _ in range(max_sweeps):
        for j in range(n):
            v = contract_except(t, factors, j)
            v = np.broadcast_to(v, (batch, v.shape[-1]))
            norm = np.linalg.norm(v, axis=-1)
            ok = norm > 1e-300
            upd = np.where(ok[:, None], v / np.where(ok, norm, 1.0)[:, None], factors[j])
            factors[j] = np.where(done[:, None], factors[j], upd)
            value = np.where(done, value, norm ** 2)
        newly = (value - prev) < tol
        done |= newly
        prev = value.copy()
        if done.all():
            break
    return value, factors, done


def _as_inits(init: Sequence[ProductState] | None, dims) -> list[np.ndarray] | None:
    if not init:
        return None
    for p in init:
        if p.dims != tuple(dims):
            raise DimensionError("initial product state has wrong dimensions")
    return [np.array([p.factors[j] for p in init]) for j in range(len(dims))]


def bipartite_top(amps: np.ndarray, d1: int, d2: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Top singular triple for a batch of bipartite vectors of shape (B, d1*d2).

    Returns (sigma_max, u, v) with <u (x) v|psi> = sigma_max.
    """
    a = amps.reshape(-1, d1, d2)
    u, s, vh = np.linalg.svd(a)
    return s[:, 0], u[:, :, 0], vh[:, 0, :]


def lambda2_pure(psi: PureState, opts: OptimizerOptions = DEFAULT_OPTIONS, *,
                 exact_bipartite: bool = True,
                 init: Sequence[ProductState] | None = None) -> CpsResult:
    """Maximal squared overlap of ``psi`` with a fully product pure state.

    Parameters
    ----------
    psi : PureState
        State with at least two parties.
    opts : OptimizerOptions
        Restart count, sweep cap, stall tolerance and seed.
    exact_bipartite : bool
        Use the top Schmidt coefficient for two-party inputs.
    init : sequence of ProductState, optional
        Extra starting points, tried before the random restarts.

    Returns
    -------
    CpsResult
        ``lambda2`` is recomputed from the returned product state, so it is a
        certified lower bound on the true maximum (exact on the bipartite path).
    """
    dims = psi.dims
    if len(dims) < 2:
        raise DimensionError("need at least two parties")
    if len(dims) == 2 and exact_bipartite:
        s, u, v = bipartite_top(psi.amplitudes[None], *dims)
        cps = ProductState.from_vectors([u[0], v[0]])
        lam = float(abs(np.vdot(cps.vector(), psi.amplitudes)) ** 2)
        return CpsResult(min(lam, 1.0), cps, 0, True)

    starts = random_factors(dims, opts, opts.restarts)
    extra = _as_inits(init, dims)
    if extra is not None:
        starts = [np.concatenate([e, s]) for e, s in zip(extra, starts)]
    values, factors, done = alternating_pure(psi.tensor(), starts, opts.max_sweeps, opts.tol)
    best = int(np.argmax(values))  # first index among ties
    cps = ProductState.from_vectors([f[best] for f in factors])
    lam = float(abs(np.vdot(cps.vector(), psi.amplitudes)) ** 2)
    return CpsResult(min(lam, 1.0), cps, len(values), bool(done[best]))


def gm_pure(psi: PureState, opts: OptimizerOptions = DEFAULT_OPTIONS) -> tuple[float, float]:
    """Return (1 - lambda2, -log2 lambda2)."""
    lam = lambda2_pure(psi, opts).lambda2
    return 1.0 - lam, float(-np.log2(lam))
