"""Mixed-state extensions: trace inner product, trace distance, and a bracket
for the trace-distance entanglement."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .core import (DensityMatrix, ProductState, PureState, State, as_density,
                   partial_trace)
from .errors import DimensionError
from .pure import (DEFAULT_OPTIONS, OptimizerOptions, _as_inits, contract_except,
                   lambda2_pure, random_factors)

GT_RESTARTS = 64


@dataclass(frozen=True, eq=False)
class Lambda2mResult:
    lambda2m: float
    cps: ProductState
    converged: bool


@dataclass(frozen=True, eq=False)
class GtResult:
    value: float
    cps: ProductState
    converged: bool

    def __iter__(self):
        return iter((self.value, self.cps))


@dataclass(frozen=True, eq=False)
class TraceEntBracket:
    lower: float
    upper: float
    witness_upper: DensityMatrix
    witness_kind: str
    lower_exact: bool


def expectation(rho: DensityMatrix, phi: ProductState) -> float:
    v = phi.vector()
    return float(np.real(np.vdot(v, rho.matrix @ v)))


def _components(rho: DensityMatrix, tol: float = 1e-14) -> np.ndarray:
    """Rows sqrt(lambda_k) v_k reshaped as party tensors."""
    w, v = np.linalg.eigh(rho.matrix)
    keep = w > tol
    comps = (v[:, keep] * np.sqrt(w[keep])).T
    return comps.reshape((-1,) + rho.dims)


def _top_eigvec(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = np.linalg.eigh(m)
    top = w[..., -1:]
    idx = np.argmax(w >= top - 1e-12, axis=-1)  # lowest index within the top cluster
    vec = np.take_along_axis(v, idx[..., None, None], axis=-1)[..., 0]
    return w[..., -1], vec


def alternating_mixed(comps: np.ndarray, factors: list[np.ndarray], max_sweeps: int,
                      tol: float) -> tuple[np.ndarray, list[np.ndarray], np.ndarray]:
    """Alternating maximization of <phi|rho|phi> with rho = sum_k c_k c_k^dagger."""
    n = len(factors)
    batch = factors[0].shape[0]
    t = comps[None]
    fs = [f[:, None, :].copy() for f in factors]
    prev = np.full(batch, -1.0)
    value = np.zeros(batch)
    done = np.zeros(batch, dtype=bool)
    for _ in range(max_sweeps):
        for j in range(n):
            w = contract_except(t, fs, j)
            w = np.broadcast_to(w, (batch,) + w.shape[1:])
            m = np.einsum("bka,bkc->bac", w, w.conj())
            val, vec = _top_eigvec(m)
            fs[j] = np.where(done[:, None, None], fs[j], vec[:, None, :])
            value = np.where(done, value, val)
        done |= (value - prev) < tol
        prev = value.copy()
        if done.all():
            break
    return value, [f[:, 0, :] for f in fs], done


def lambda2_mixed(rho: State, opts: OptimizerOptions = DEFAULT_OPTIONS, *,
                  init: Sequence[ProductState] | None = None) -> Lambda2mResult:
    """Maximal <phi|rho|phi> over fully product pure states.

    The returned value is recomputed from the returned product state, hence a
    certified lower bound. Rank-one inputs use :func:`lambda2_pure`.
    """
    rho = as_density(rho)
    dims = rho.dims
    if len(dims) < 2:
        raise DimensionError("need at least two parties")
    w, v = np.linalg.eigh(rho.matrix)
    if w[-2] <= 1e-14:
        psi = PureState.from_vector(dims, v[:, -1])
        res = lambda2_pure(psi, opts, init=init)
        return Lambda2mResult(expectation(rho, res.cps), res.cps, res.converged)
    starts = random_factors(dims, opts, opts.restarts)
    extra = _as_inits(init, dims)
    if extra is not None:
        starts = [np.concatenate([e, s]) for e, s in zip(extra, starts)]
    values, factors, done = alternating_mixed(_components(rho), starts, opts.max_sweeps, opts.tol)
    best = int(np.argmax(values))
    cps = ProductState.from_vectors([f[best] for f in factors])
    return Lambda2mResult(min(1.0, expectation(rho, cps)), cps, bool(done[best]))


def gm_mixed(rho: State, opts: OptimizerOptions = DEFAULT_OPTIONS) -> tuple[float, float]:
    """Return (1 - lambda2_m, -log2 lambda2_m)."""
    lam = lambda2_mixed(rho, opts).lambda2m
    return 1.0 - lam, float(-np.log2(lam))


# trace-distance extension --------------------------------------------------

def pure_trace_distance(rho: np.ndarray, phi: np.ndarray) -> float:
    """D_T(rho, |phi><phi|) = -lambda_min(rho - |phi><phi|).

    The difference has zero trace and at most one negative eigenvalue.
    """
    w = np.linalg.eigvalsh(rho - np.outer(phi, phi.conj()))
    return float(max(0.0, -w[0]))


def _unpack(x: np.ndarray, dims: Sequence[int]) -> list[np.ndarray]:
    out, k = [], 0
    for d in dims:
        out.append(x[k:k + d] + 1j * x[k + d:k + 2 * d])
        k += 2 * d
    return out


def _pack(vs: Sequence[np.ndarray]) -> np.ndarray:
    return np.concatenate([np.concatenate([v.real, v.imag]) for v in vs])


def _gt_objective(x: np.ndarray, rho: np.ndarray, dims: Sequence[int]) -> tuple[float, np.ndarray]:
    zs = _unpack(x, dims)
    norms = [np.linalg.norm(z) for z in zs]
    phis = [z / r for z, r in zip(zs, norms)]
    phi = phis[0]
    for f in phis[1:]:
        phi = np.kron(phi, f)
    w, vecs = np.linalg.eigh(rho - np.outer(phi, phi.conj()))
    dist = -w[0]
    if dist <= 0:
        return 0.0, np.zeros_like(x)
    xv = vecs[:, 0]
    c = np.vdot(phi, xv)
    g = (4.0 * dist * np.conj(c) * xv).reshape(dims)
    grads = []
    for j, (p, r) in enumerate(zip(phis, norms)):
        gj = contract_except(g, phis, j)
        grads.append((gj - p * np.real(np.vdot(p, gj))) / r)
    return dist * dist, _pack(grads)


def gt(rho: State, opts: OptimizerOptions = DEFAULT_OPTIONS, *,
       restarts: int = GT_RESTARTS,
       init: Sequence[ProductState] | None = None) -> GtResult:
    """Minimal squared trace distance from ``rho`` to a pure product state.

    Multistart quasi-Newton descent over unnormalized factor vectors. The
    objective -lambda_min(rho - |phi><phi|) is smooth away from ``rho = |phi><phi|``
    because the relevant eigenvalue is simple. The returned value is recomputed
    at the returned product state (a certified upper bound).
    """
    rho = as_density(rho)
    dims = rho.dims
    w, v = np.linalg.eigh(rho.matrix)
    if w[-2] <= 1e-14:
        psi = PureState.from_vector(dims, v[:, -1])
        res = lambda2_pure(psi, opts, init=init)
        value = pure_trace_distance(rho.matrix, res.cps.vector()) ** 2
        return GtResult(value, res.cps, res.converged)
    starts = random_factors(dims, opts, restarts)
    seeds = [[f[k] for f in starts] for k in range(restarts)]
    if init:
        seeds = [list(p.factors) for p in init] + seeds
    best, best_val, best_ok = None, np.inf, False
    m = rho.matrix
    for s in seeds:
        res = minimize(_gt_objective, _pack(s), args=(m, dims), jac=True, method="L-BFGS-B",
                       options={"maxiter": 3000, "ftol": 1e-15, "gtol": 1e-11})
        phis = ProductState.from_vectors(_unpack(res.x, dims))
        val = pure_trace_distance(m, phis.vector()) ** 2
        if val < best_val:
            ok = bool(res.success) or float(np.linalg.norm(res.jac)) < 1e-8
            best, best_val, best_ok = phis, val, ok
    return GtResult(float(best_val), best, best_ok)


def gt_lower_bound(rho: State) -> float:
    """(1 - lambda_max)^2: valid for the distance to any pure state."""
    lam = np.linalg.eigvalsh(as_density(rho).matrix)[-1]
    return float(max(0.0, 1.0 - lam) ** 2)


# separable candidates and the bracket --------------------------------------

def is_certified_separable(sigma: np.ndarray, dims: Sequence[int], tol: float = 1e-12) -> bool:
    """Cheap sufficient tests for full separability of a (possibly subnormalized) block."""
    if len(dims) == 1:
        return True
    off = sigma - np.diag(np.diag(sigma))
    if np.max(np.abs(off), initial=0.0) <= 1e-14:
        return True
    tr = np.trace(sigma).real
    if tr <= 0:
        return True
    w, v = np.linalg.eigh(sigma / tr)
    if w[-2] <= 1e-12:
        rho = DensityMatrix.from_matrix(dims, np.outer(v[:, -1], v[:, -1].conj()))
        return all(partial_trace(rho, [j]).purity() >= 1 - tol for j in range(len(dims)))
    return False


def dephase(rho: np.ndarray, dims: Sequence[int], parties: Sequence[int]) -> tuple[np.ndarray, bool]:
    """Dephase ``parties`` in the computational basis.

    Returns the dephased matrix and whether every conditional block on the
    remaining parties passed :func:`is_certified_separable`.
    """
    n = len(dims)
    rest = [j for j in range(n) if j not in parties]
    ds = int(np.prod([dims[j] for j in parties]))
    dr = int(np.prod([dims[j] for j in rest])) if rest else 1
    t = rho.reshape(tuple(dims) * 2)
    perm = list(parties) + rest + [n + j for j in parties] + [n + j for j in rest]
    t = t.transpose(perm).reshape(ds, dr, ds, dr)
    blocks = np.stack([t[b, :, b, :] for b in range(ds)])
    rdims = [dims[j] for j in rest]
    ok = all(is_certified_separable(b, rdims) for b in blocks) if rest else True
    out = np.zeros((ds, dr, ds, dr), dtype=complex)
    for b in range(ds):
        out[b, :, b, :] = blocks[b]
    inv = np.argsort(perm)
    full = out.reshape(tuple([dims[j] for j in parties] + rdims) * 2).transpose(inv)
    return full.reshape(rho.shape), ok


def skb_css(members: Sequence[tuple[float, np.ndarray]], cps_vectors: Sequence[np.ndarray],
            lambdas: Sequence[float]) -> np.ndarray:
    """Mixture of member closest product states with weights p_i lambda_i / sum.

    With these weights Uhlmann's theorem gives F^2(rho, css) >= sum_i p_i lambda_i.
    """
    wts = np.array([p * lam for (p, _), lam in zip(members, lambdas)])
    wts = wts / wts.sum()
    dim = cps_vectors[0].size
    out = np.zeros((dim, dim), dtype=complex)
    for w, phi in zip(wts, cps_vectors):
        out += w * np.outer(phi, phi.conj())
    return out


def separable_candidates(rho: DensityMatrix, products: Sequence[ProductState] = (),
                         extra: Sequence[tuple[str, np.ndarray]] = (),
                         max_dephase_parties: int = 8) -> list[tuple[str, np.ndarray]]:
    """Named separable states used for the upper end of the bracket."""
    dims = rho.dims
    m = rho.matrix
    cands: list[tuple[str, np.ndarray]] = []
    if is_certified_separable(m, dims):
        cands.append(("self", m))
    for k, p in enumerate(products):
        v = p.vector()
        cands.append((f"product[{k}]", np.outer(v, v.conj())))
    cands.extend(extra)
    n = len(dims)
    if n <= max_dephase_parties:
        for size in range(1, n + 1):
            for sub in itertools.combinations(range(n), size):
                sigma, ok = dephase(m, dims, sub)
                if ok:
                    cands.append((f"dephase{list(sub)}", sigma))
    return cands


def trace_ent_bracket(rho: State, opts: OptimizerOptions = DEFAULT_OPTIONS, *,
                      roof=None, gt_result: GtResult | None = None,
                      lm_result: Lambda2mResult | None = None) -> TraceEntBracket:
    """Two-sided bracket for the minimal squared trace distance to separable states.

    Upper end: best candidate among closest-product projectors, the weighted
    mixture of roof members' closest product states, computational-basis
    dephasings with certified separable blocks, and pairwise mixtures of the
    best candidates. Lower end: ``(1 - lambda2)^2`` for pure inputs, 0 otherwise.
    """
    from .roof import convex_roof

    rho = as_density(rho)
    dims = rho.dims
    w, v = np.linalg.eigh(rho.matrix)
    pure = w[-2] <= 1e-14
    lm = lm_result or lambda2_mixed(rho, opts)
    g_t = gt_result or gt(rho, opts, init=[lm.cps])
    products = [lm.cps, g_t.cps]
    extra = []
    if pure:
        lower = (1.0 - lm.lambda2m) ** 2
    else:
        lower = 0.0
        r = roof or convex_roof(rho, "linear", opts)
        extra.append(("roof-css", skb_css(r.decomposition.members,
                                          [c.vector() for c in r.member_cps],
                                          r.per_member_lambda2)))
    cands = separable_candidates(rho, products, extra)
    scored = sorted(((trace_distance_sq(rho.matrix, s), i, name, s)
                     for i, (name, s) in enumerate(cands)), key=lambda t: (t[0], t[1]))
    best_val, _, best_name, best_sigma = scored[0]
    top = scored[:4]
    for (_, _, na, sa), (_, _, nb, sb) in itertools.combinations(top, 2):
        for t in np.linspace(0.05, 0.95, 19):
            s = t * sa + (1 - t) * sb
            val = trace_distance_sq(rho.matrix, s)
            if val < best_val - 1e-15:
                best_val, best_name, best_sigma = val, f"mix({na},{nb},{t:.2f})", s
    upper = min(1.0, best_val)
    lower_exact = pure and len(dims) == 2
    lower = min(lower, upper)
    return TraceEntBracket(float(lower), float(upper),
                           DensityMatrix.from_matrix(dims, best_sigma), best_name, lower_exact)


def trace_distance_sq(a: np.ndarray, b: np.ndarray) -> float:
    w = np.linalg.eigvalsh(a - b)
    return float((0.5 * np.sum(np.abs(w))) ** 2)
