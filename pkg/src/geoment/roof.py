"""Convex-roof measures, the fidelity extension, and equal-overlap decompositions.

Decompositions of ``rho = V diag(lam) V^dagger`` with ``K`` members are exactly
the rows of ``U @ (V sqrt(lam))^T`` for ``K x r`` isometries ``U``. The roof
search runs Riemannian gradient descent on that Stiefel manifold, with
Barzilai-Borwein step lengths and Armijo step halving.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .core import (SUPPORT_TOL, DensityMatrix, ProductState, PureState, State,
                   as_density, fidelity)
from .errors import DimensionError
from .mixed import lambda2_mixed, skb_css
from .pure import (DEFAULT_OPTIONS, OptimizerOptions, bipartite_top, contract_except,
                   lambda2_pure, random_factors, restart_rng)

Kind = Literal["linear", "log"]
_LN2 = np.log(2.0)


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Probability-weighted pure-state ensemble."""

    members: tuple[tuple[float, PureState], ...]

    def __post_init__(self):
        if not self.members:
            raise ValueError("empty decomposition")
        object.__setattr__(self, "members", tuple((float(p), s) for p, s in self.members))

    @property
    def weights(self) -> np.ndarray:
        return np.array([p for p, _ in self.members])

    def matrix(self) -> np.ndarray:
        vecs = np.array([np.sqrt(p) * s.amplitudes for p, s in self.members])
        return vecs.T @ vecs.conj()

    def reconstruction_error(self, rho: State) -> float:
        return float(np.max(np.abs(self.matrix() - as_density(rho).matrix)))

    def __len__(self):
        return len(self.members)


@dataclass(frozen=True, eq=False)
class RoofResult:
    value: float
    kind: str
    decomposition: Decomposition
    per_member_lambda2: tuple[float, ...]
    member_cps: tuple[ProductState, ...]
    converged: bool

    def recompute(self) -> float:
        return member_value(self.decomposition.weights, np.array(self.per_member_lambda2), self.kind)


@dataclass(frozen=True)
class RoofOptions:
    """Search budget for :func:`convex_roof`.

    ``k_schedule`` entries are multiples of the rank: ``1`` means K = r and
    ``"r2"`` means K = r^2. ``max_members`` caps K. The first member count gets
    ``starts`` random isometries; later ones start from the incumbent (padded
    with empty members) plus ``starts_large`` random isometries. Each descent
    is followed by up to ``hops`` random perturbations of size ``hop_scale``,
    abandoned after ``hop_patience`` consecutive non-improving hops.
    """

    starts: int = 4
    starts_large: int = 1
    max_iter: int = 400
    k_schedule: tuple = (1, 2, "r2")
    max_members: int = 64
    search_restarts: int = 8
    grad_tol: float = 1e-10
    hops: int = 12
    hop_patience: int = 3
    hop_scale: float = 0.5


DEFAULT_ROOF = RoofOptions()


@dataclass(frozen=True, eq=False)
class FidelityExtension:
    g_f: float
    g_f_log: float
    lambda2f: float
    css: DensityMatrix
    css_fidelity2: float
    roof: RoofResult

    def __iter__(self):
        return iter((self.g_f, self.g_f_log, self.lambda2f, self.css))


def member_value(p: np.ndarray, lam: np.ndarray, kind: str) -> float:
    p = np.asarray(p, dtype=float)
    lam = np.clip(np.asarray(lam, dtype=float), 1e-300, 1.0)
    if kind == "linear":
        return float(np.sum(p * (1.0 - lam)))
    if kind == "log":
        return float(np.sum(p * -np.log2(lam)))
    raise ValueError(f"unknown roof kind {kind!r}")


def _kind(kind: str) -> str:
    k = {"linear": "linear", "lin": "linear", "log": "log", "logarithmic": "log"}.get(kind)
    if k is None:
        raise ValueError(f"unknown roof kind {kind!r}")
    return k


def _polar(x: np.ndarray) -> np.ndarray:
    a, _, bh = np.linalg.svd(x, full_matrices=False)
    return a @ bh


class _RoofProblem:
    """Objective and Euclidean gradient in the mixing isometry."""

    def __init__(self, rho: DensityMatrix, kind: str, opts: OptimizerOptions,
                 search_restarts: int):
        w, v = np.linalg.eigh(rho.matrix)
        keep = w > SUPPORT_TOL
        near = (w > SUPPORT_TOL / 10) & (w < SUPPORT_TOL * 10)
        if np.any(near):
            warnings.warn("eigenvalue within a factor 10 of the rank threshold; "
                          "rank detection is ambiguous", RuntimeWarning, stacklevel=3)
        self.lam = w[keep][::-1]
        self.vecs = v[:, keep][:, ::-1]
        self.w = self.vecs * np.sqrt(self.lam)
        self.rank = int(keep.sum())
        self.dims = rho.dims
        self.kind = kind
        self.opts = opts
        self.search_restarts = search_restarts
        self.bipartite = len(self.dims) == 2

    def members(self, u: np.ndarray) -> np.ndarray:
        return u @ self.w.T

    def _overlaps(self, psi: np.ndarray, warm: list[np.ndarray] | None):
        """Return (a_i = <phi_i|psi_i>, phi vectors, factor list)."""
        k = psi.shape[0]
        if self.bipartite:
            s, u, v = bipartite_top(psi, *self.dims)
            phi = np.einsum("ka,kb->kab", u, v).reshape(k, -1)
            a = np.einsum("kn,kn->k", phi.conj(), psi)
            return a, phi, None
        t = psi.reshape((k, 1) + self.dims)
        if warm is None:
            rnd = random_factors(self.dims, self.opts, self.search_restarts)
            fs = [np.broadcast_to(f[None], (k,) + f.shape).copy() for f in rnd]
            sweeps = 200
        else:
            fs = [f[:, None, :].copy() for f in warm]
            sweeps = 20
        for _ in range(sweeps):
            for j in range(len(self.dims)):
                vj = contract_except(t, fs, j)
                nrm = np.linalg.norm(vj, axis=-1, keepdims=True)
                fs[j] = np.where(nrm > 1e-300, vj / np.where(nrm > 1e-300, nrm, 1.0), fs[j])
        ov = contract_except(t, fs, 0)
        ov = np.sum(fs[0].conj() * ov, axis=-1)
        best = np.argmax(np.abs(ov), axis=1)
        fac = [np.take_along_axis(f, best[:, None, None], axis=1)[:, 0, :] for f in fs]
        phi = fac[0]
        for f in fac[1:]:
            phi = np.einsum("ka,kb->kab", phi, f).reshape(k, -1)
        a = np.einsum("kn,kn->k", phi.conj(), psi)
        return a, phi, fac

    def evaluate(self, u: np.ndarray, warm=None, grad: bool = True):
        psi = self.members(u)
        p = np.sum(np.abs(psi) ** 2, axis=1)
        a, phi, fac = self._overlaps(psi, warm)
        s = np.abs(a) ** 2
        live = p > 1e-300
        if self.kind == "linear":
            f = float(np.sum(p - s))
            alpha = np.ones_like(p)
            beta = -np.ones_like(p)
        else:
            ratio = np.where(live, p / np.where(live, s, 1.0), 1.0)
            f = float(np.sum(np.where(live, p * np.log2(ratio), 0.0)))
            alpha = np.where(live, np.log2(ratio) + 1.0 / _LN2, 0.0)
            beta = np.where(live, -p / (np.where(live, s, 1.0) * _LN2), 0.0)
        if not grad:
            return f, None, fac
        c = phi.conj() @ self.w
        g = alpha[:, None] * (2.0 * u * self.lam[None, :]) + beta[:, None] * (2.0 * a[:, None] * c.conj())
        return f, g, fac


def _riemannian_descent(prob: _RoofProblem, u: np.ndarray, max_iter: int, grad_tol: float):
    f, g, fac = prob.evaluate(u)
    step = 0.5
    prev_u = prev_xi = None
    stall = 0
    converged = False
    for _ in range(max_iter):
        herm = u.conj().T @ g
        xi = g - u @ (0.5 * (herm + herm.conj().T))
        gn2 = float(np.real(np.vdot(xi, xi)))
        if gn2 < grad_tol ** 2:
            converged = True
            break
        if prev_u is not None:
            s_ = u - prev_u
            y_ = xi - prev_xi
            sy = abs(float(np.real(np.vdot(s_, y_))))
            if sy > 1e-300:
                step = float(np.real(np.vdot(s_, s_))) / sy
            step = min(max(step, 1e-8), 1e3)
        t = step
        while True:
            un = _polar(u - t * xi)
            fn, gnew, facn = prob.evaluate(un, fac)
            if fn <= f - 1e-4 * t * gn2 or t < 1e-14:
                break
            t *= 0.5
        if fn > f:
            converged = True
            break
        prev_u, prev_xi = u, xi
        stall = stall + 1 if f - fn < 1e-14 * max(1.0, abs(f)) else 0
        u, f, g, fac = un, fn, gnew, facn
        if stall >= 10:
            converged = True
            break
    return u, f, fac, converged


def _random_isometry(k: int, r: int, rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal((k, r)) + 1j * rng.standard_normal((k, r))
    return _polar(z)


def _embed(u: np.ndarray, k: int) -> np.ndarray:
    if u.shape[0] >= k:
        return u
    return np.vstack([u, np.zeros((k - u.shape[0], u.shape[1]), dtype=complex)])


def _isometry_of(prob: _RoofProblem, dec: Decomposition) -> np.ndarray | None:
    """Mixing matrix of a decomposition in the eigenbasis, or None if it does not fit."""
    vecs = np.array([np.sqrt(p) * s.amplitudes for p, s in dec.members])
    u = (vecs @ prob.vecs.conj()) / np.sqrt(prob.lam)[None, :]
    if np.max(np.abs(u.conj().T @ u - np.eye(prob.rank))) > 1e-6:
        return None
    return _polar(u)


def _schedule(rank: int, ropts: RoofOptions) -> list[int]:
    ks = []
    for e in ropts.k_schedule:
        k = rank * rank if e == "r2" else int(e) * rank
        k = max(rank, min(k, max(ropts.max_members, rank)))
        if k not in ks:
            ks.append(k)
    return ks


def certify(rho: State, dec: Decomposition, kind: str,
            opts: OptimizerOptions = DEFAULT_OPTIONS,
            hints: Sequence[Sequence[ProductState]] | None = None,
            converged: bool = True) -> RoofResult:
    """Evaluate a decomposition with full-restart member certificates."""
    kind = _kind(kind)
    lams, cps = [], []
    for i, (_, psi) in enumerate(dec.members):
        init = list(hints[i]) if hints is not None and hints[i] is not None else None
        if psi.space.n_parties < 2:
            raise DimensionError("roof needs at least two parties")
        res = lambda2_pure(psi, opts, init=init)
        lams.append(res.lambda2)
        cps.append(res.cps)
    value = member_value(dec.weights, np.array(lams), kind)
    return RoofResult(value, kind, dec, tuple(lams), tuple(cps), converged)


def _decomposition(prob: _RoofProblem, u: np.ndarray, dims) -> tuple[Decomposition, list[int]]:
    psi = prob.members(u)
    p = np.sum(np.abs(psi) ** 2, axis=1)
    keep = [i for i in range(len(p)) if p[i] > 1e-14]
    members = tuple((float(p[i]), PureState.from_vector(dims, psi[i])) for i in keep)
    return Decomposition(members), keep


def convex_roof(rho: State, kind: Kind = "linear", opts: OptimizerOptions = DEFAULT_OPTIONS,
                roof_opts: RoofOptions = DEFAULT_ROOF, *,
                seeds: Sequence[Decomposition] = (),
                hint_products: Sequence[ProductState] = ()) -> RoofResult:
    """Certified upper bound on the convex roof of the linear or logarithmic GM.

    Parameters
    ----------
    rho : DensityMatrix or PureState
        State with at least two parties.
    kind : {"linear", "log"}
        Pure-state measure being extended: ``1 - lambda2`` or ``-log2 lambda2``.
    opts : OptimizerOptions
        Options for the inner product-state optimizations and random isometries.
    roof_opts : RoofOptions
        Outer search budget.
    seeds : sequence of Decomposition
        Extra starting decompositions of ``rho``.
    hint_products : sequence of ProductState
        Product states tried as starting points for every member certificate.

    Returns
    -------
    RoofResult
        ``value`` is recomputed from the reported decomposition and its
        per-member certificates, so it never undercuts the true roof.

    Notes
    -----
    Starting points are the spectral decomposition, the equal-overlap
    decomposition built on a closest product state of ``rho``, any supplied
    seeds, and ``roof_opts.starts`` random isometries per member count.
    """
    kind = _kind(kind)
    rho = as_density(rho)
    if rho.space.n_parties < 2:
        raise DimensionError("roof needs at least two parties")
    prob = _RoofProblem(rho, kind, opts, roof_opts.search_restarts)
    dims = rho.dims
    r = prob.rank
    hints = list(hint_products)
    if r == 1:
        psi = PureState.from_vector(dims, prob.vecs[:, 0])
        dec = Decomposition(((1.0, psi),))
        return certify(rho, dec, kind, opts, [hints or None])

    lm = lambda2_mixed(rho, opts)
    hints.append(lm.cps)
    fixed: list[np.ndarray] = [np.eye(r, dtype=complex)]
    try:
        eq = equal_overlap_decomposition(rho, lm.cps)
        ue = _isometry_of(prob, eq)
        if ue is not None:
            fixed.append(ue)
    except ValueError:
        pass
    if _is_diagonal(rho.matrix):
        diag = np.real(np.diag(rho.matrix))
        idx = np.nonzero(diag > 1e-15)[0]
        members = []
        for i in idx:
            e = np.zeros(rho.space.total_dim, dtype=complex)
            e[i] = 1.0
            members.append((diag[i], PureState(rho.space, e)))
        ud = _isometry_of(prob, Decomposition(tuple(members)))
        if ud is not None:
            fixed.append(ud)
    for sd in seeds:
        us = _isometry_of(prob, sd)
        if us is not None:
            fixed.append(us)

    best = None  # (value, order, u)
    order = 0
    rng_base = opts.seed
    prev_k = 0
    schedule = _schedule(r, roof_opts)
    for kk in schedule:
        starts = [_embed(u, kk) for u in fixed if prev_k < u.shape[0] <= kk
                  or (kk == schedule[-1] and u.shape[0] > kk)]
        if best is not None:
            starts.insert(0, _embed(best[2], kk))
        for j in range(roof_opts.starts if prev_k == 0 else roof_opts.starts_large):
            rng = restart_rng(rng_base, 10_000 + 1_000 * kk + j)
            starts.append(_random_isometry(kk, r, rng))
        for si, u0 in enumerate(starts):
            u, f, _, ok = _riemannian_descent(prob, u0, roof_opts.max_iter, roof_opts.grad_tol)
            hop_rng = restart_rng(rng_base, 50_000 + 1_000 * kk + si)
            misses = 0
            for _ in range(roof_opts.hops):
                if misses >= roof_opts.hop_patience:
                    break
                z = hop_rng.standard_normal(u.shape) + 1j * hop_rng.standard_normal(u.shape)
                trial = _polar(u + roof_opts.hop_scale * z / np.sqrt(2 * u.shape[0]))
                ut, ft, _, okt = _riemannian_descent(prob, trial, roof_opts.max_iter,
                                                     roof_opts.grad_tol)
                if ft < f - 1e-12 * max(1.0, abs(f)):
                    u, f, ok = ut, ft, okt
                    misses = 0
                else:
                    misses += 1
            if best is None or f < best[0] - 1e-15:
                best = (f, order, u, ok)
            order += 1
        prev_k = kk
    _, _, u, ok = best
    dec, _ = _decomposition(prob, u, dims)
    res = certify(rho, dec, kind, opts, [hints] * len(dec))
    # fixed seeds are certified too, so the report never loses to a seed
    for uf in fixed:
        alt, _ = _decomposition(prob, uf, dims)
        cand = certify(rho, alt, kind, opts, [hints] * len(alt))
        if cand.value < res.value - 1e-15:
            res = cand
    return res


def _is_diagonal(m: np.ndarray) -> bool:
    off = m - np.diag(np.diag(m))
    return bool(np.max(np.abs(off), initial=0.0) <= 1e-14)


def best_of(*results: RoofResult) -> RoofResult:
    return min(results, key=lambda r: r.value)


def cross_evaluate(rho: State, res: RoofResult, kind: Kind,
                   opts: OptimizerOptions = DEFAULT_OPTIONS) -> RoofResult:
    """Re-score a roof certificate under the other pure-state measure."""
    kind = _kind(kind)
    value = member_value(res.decomposition.weights, np.array(res.per_member_lambda2), kind)
    return RoofResult(value, kind, res.decomposition, res.per_member_lambda2, res.member_cps,
                      res.converged)


def fidelity_extension(rho: State, opts: OptimizerOptions = DEFAULT_OPTIONS,
                       roof_opts: RoofOptions = DEFAULT_ROOF, *,
                       roof: RoofResult | None = None) -> FidelityExtension:
    """Fidelity-of-separability values derived from the linear convex roof.

    Returns ``g_f``, ``g_f_log = -log2(1 - g_f)``, ``lambda2f = 1 - g_f`` and a
    separable candidate ``css`` built from the members' closest product
    states; its squared fidelity with ``rho`` is recomputed and reported.
    """
    rho = as_density(rho)
    r = roof if roof is not None else convex_roof(rho, "linear", opts, roof_opts)
    if r.kind != "linear":
        r = cross_evaluate(rho, r, "linear", opts)
    g_f = max(0.0, r.value)
    lam_f = 1.0 - g_f
    css = skb_css(r.decomposition.members, [c.vector() for c in r.member_cps],
                  r.per_member_lambda2)
    css_dm = DensityMatrix.from_matrix(rho.dims, css / np.trace(css).real)
    f2 = fidelity(rho, css_dm) ** 2
    return FidelityExtension(g_f, float(-np.log2(lam_f)), lam_f, css_dm, f2, r)


# equal-overlap decomposition ---------------------------------------------

def _bisect(fn, lo: float, hi: float, tol: float = 1e-12) -> float:
    flo = fn(lo)
    if flo == 0:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fn(mid)
        if fm == 0 or hi - lo < tol:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def equal_overlap_decomposition(rho: State, phi) -> Decomposition:
    """Decomposition whose members all have squared overlap <phi|rho|phi> with phi.

    Starting from the spectral decomposition, two members whose overlaps
    straddle the target are rotated into one member with exactly the target
    overlap, which is peeled off; the rotated partner stays in the pool.
    Each step removes one member, so the result has as many members as the
    rank of ``rho``.

    Parameters
    ----------
    rho : DensityMatrix or PureState
    phi : PureState, ProductState or array
        Any unit vector on the same space.
    """
    rho = as_density(rho)
    if isinstance(phi, ProductState):
        f = phi.vector()
    elif isinstance(phi, PureState):
        f = phi.amplitudes
    else:
        f = np.asarray(phi, dtype=complex).reshape(-1)
    if f.size != rho.space.total_dim:
        raise DimensionError("phi does not live on the state's space")
    f = f / np.linalg.norm(f)
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > SUPPORT_TOL
    pool = [(float(w[i]), v[:, i].copy()) for i in np.nonzero(keep)[0][::-1]]
    total = sum(p for p, _ in pool)
    pool = [(p / total, vec) for p, vec in pool]
    g = float(np.real(np.vdot(f, rho.matrix @ f)))
    out: list[tuple[float, np.ndarray]] = []
    while len(pool) > 1:
        ov = np.array([abs(np.vdot(f, vec)) ** 2 for _, vec in pool])
        gap = ov - g
        hit = np.nonzero(np.abs(gap) <= 1e-13)[0]
        if hit.size:
            out.append(pool.pop(int(hit[0])))
            continue
        i1 = int(np.argmin(gap))
        i2 = int(np.argmax(gap))
        (p1, v1), (p2, v2) = pool[i1], pool[i2]
        a1, a2 = np.vdot(f, v1), np.vdot(f, v2)
        th1 = np.angle(a1) if abs(a1) > 0 else 0.0
        th2 = np.angle(a2) if abs(a2) > 0 else 0.0
        ph = np.exp(1j * (th1 - th2))

        def member(theta):
            c, s = np.cos(theta / 2), np.sin(theta / 2)
            vec = c * np.sqrt(p1) * v1 + s * ph * np.sqrt(p2) * v2
            return c * c * p1 + s * s * p2, vec

        def excess(theta):
            q, vec = member(theta)
            return abs(np.vdot(f, vec)) ** 2 / q - g

        theta = _bisect(excess, 0.0, np.pi)
        q1, vec1 = member(theta)
        c, s = np.cos(theta / 2), np.sin(theta / 2)
        q2 = s * s * p1 + c * c * p2
        vec2 = -s * np.conj(ph) * np.sqrt(p1) * v1 + c * np.sqrt(p2) * v2
        out.append((q1, vec1 / np.sqrt(q1)))
        for idx in sorted((i1, i2), reverse=True):
            pool.pop(idx)
        pool.append((q2, vec2 / np.sqrt(q2)))
    out.extend(pool)
    return Decomposition(tuple((p, PureState.from_vector(rho.dims, vec)) for p, vec in out))
