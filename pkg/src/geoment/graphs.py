"""Graph states, exact minimum vertex covers, and the branch-mixture
separable state that is simultaneously closest for several distances."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import DensityMatrix, ProductState, PureState, fidelity, relative_entropy, trace_distance
from .errors import BudgetError
from .pure import DEFAULT_OPTIONS, OptimizerOptions, lambda2_pure

MAX_SEARCH_VERTICES = 24
MAX_DENSE_VERTICES = 12
MINIMAL_RANK_TOL = 1e-4


@dataclass(frozen=True)
class GraphSpec:
    vertex_count: int
    edges: frozenset[tuple[int, int]]

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int]] = ()):
        n = int(vertex_count)
        if n < 1:
            raise ValueError("need at least one vertex")
        norm = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) out of range")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "vertex_count", n)
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def parse(cls, text: str, vertex_count: int | None = None) -> "GraphSpec":
        """Parse ``"0-1,1-2"``; the vertex count defaults to the largest label + 1."""
        edges = []
        for tok in filter(None, (t.strip() for t in text.split(","))):
            a, b = tok.split("-")
            edges.append((int(a), int(b)))
        n = vertex_count if vertex_count is not None else 1 + max((max(e) for e in edges), default=0)
        return cls(n, edges)

    @classmethod
    def cluster(cls, n: int) -> "GraphSpec":
        """Linear cluster (path) on n vertices."""
        return cls(n, [(i, i + 1) for i in range(n - 1)])

    @classmethod
    def ring(cls, n: int) -> "GraphSpec":
        if n < 3:
            raise ValueError("a ring needs at least 3 vertices")
        return cls(n, [(i, (i + 1) % n) for i in range(n)])

    def neighbors(self) -> list[int]:
        """Adjacency bitmasks."""
        adj = [0] * self.vertex_count
        for a, b in self.edges:
            adj[a] |= 1 << b
            adj[b] |= 1 << a
        return adj

    def edge_list(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass(frozen=True)
class GraphAnalysis:
    alpha: tuple[int, ...]
    beta: tuple[int, ...]
    d_alpha: int
    minimal_rank: bool | None = None


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def _mis_size(adj: list[int], cand: int) -> int:
    """Size of a maximum independent set inside the vertex mask ``cand``."""
    best = 0

    def rec(cand: int, size: int):
        nonlocal best
        if cand == 0:
            best = max(best, size)
            return
        if size + bin(cand).count("1") <= best:
            return
        # vertices of degree <= 1 inside cand can always be taken
        for v in _bits(cand):
            if bin(adj[v] & cand).count("1") <= 1:
                rec(cand & ~(1 << v) & ~adj[v], size + 1)
                return
        piv = max(_bits(cand), key=lambda v: (bin(adj[v] & cand).count("1"), -v))
        rec(cand & ~(1 << piv) & ~adj[piv], size + 1)
        rec(cand & ~(1 << piv), size)

    rec(cand, 0)
    return best


def analyze_graph(g: GraphSpec) -> GraphAnalysis:
    """Exact maximum independent set; ties go to the lexicographically smallest set."""
    n = g.vertex_count
    if n > MAX_SEARCH_VERTICES:
        raise BudgetError(f"exact search limited to {MAX_SEARCH_VERTICES} vertices")
    adj = g.neighbors()
    full = (1 << n) - 1
    target = _mis_size(adj, full)
    # greedy lexicographic reconstruction: include v whenever an optimum survives
    chosen, cand, size = [], full, 0
    for v in range(n):
        if not cand >> v & 1:
            continue
        rest = cand & ~(1 << v) & ~adj[v] & ~((1 << (v + 1)) - 1)
        if size + 1 + _mis_size(adj, rest) == target:
            chosen.append(v)
            size += 1
            cand = (cand & ~adj[v]) & ~(1 << v)
        else:
            cand &= ~(1 << v)
    alpha = tuple(chosen)
    beta = tuple(v for v in range(n) if v not in alpha)
    return GraphAnalysis(alpha, beta, 2 ** len(beta))


def _check_dense(n: int):
    if n > MAX_DENSE_VERTICES:
        raise BudgetError(f"dense graph states limited to {MAX_DENSE_VERTICES} qubits")


def _basis_bits(n: int) -> np.ndarray:
    """(2^n, n) array of basis labels, qubit 0 most significant."""
    idx = np.arange(2 ** n)
    return (idx[:, None] >> (n - 1 - np.arange(n))[None, :]) & 1


def build_graph_state(g: GraphSpec) -> PureState:
    n = g.vertex_count
    _check_dense(n)
    x = _basis_bits(n)
    parity = np.zeros(2 ** n, dtype=int)
    for a, b in g.edges:
        parity ^= x[:, a] & x[:, b]
    amps = (1 - 2 * parity) / np.sqrt(2 ** n)
    return PureState.from_vector((2,) * n, amps.astype(complex), normalize=False)


def apply_generator(g: GraphSpec, j: int, vec: np.ndarray) -> np.ndarray:
    """g_j = X_j prod_{k in N(j)} Z_k applied to a dense vector."""
    n = g.vertex_count
    x = _basis_bits(n)
    idx = np.arange(2 ** n)
    sign = np.ones(2 ** n)
    for k in _bits(g.neighbors()[j]):
        sign *= 1 - 2 * x[:, k]
    flipped = idx ^ (1 << (n - 1 - j))
    out = np.empty_like(vec)
    out[flipped] = vec * sign
    return out


def measurement_branches(g: GraphSpec, analysis: GraphAnalysis) -> list[tuple[float, ProductState]]:
    """Computational-basis outcomes on beta with their product post-measurement states."""
    n = g.vertex_count
    adj = g.neighbors()
    plus = np.array([1, 1], dtype=complex) / np.sqrt(2)
    minus = np.array([1, -1], dtype=complex) / np.sqrt(2)
    out = []
    beta = analysis.beta
    for outcome in range(2 ** len(beta)):
        bits = {v: outcome >> (len(beta) - 1 - i) & 1 for i, v in enumerate(beta)}
        factors = []
        for v in range(n):
            if v in bits:
                factors.append(np.eye(2, dtype=complex)[bits[v]])
            else:
                par = sum(bits.get(k, 0) for k in _bits(adj[v])) % 2
                factors.append(minus if par else plus)
        out.append((1.0 / 2 ** len(beta), ProductState.from_vectors(factors)))
    return out


def _branch_states(g: GraphSpec, analysis: GraphAnalysis) -> list[np.ndarray]:
    """Normalized projections of |G> onto each beta outcome, built from the state itself."""
    n = g.vertex_count
    psi = build_graph_state(g).amplitudes
    x = _basis_bits(n)
    beta = list(analysis.beta)
    out = []
    for outcome in range(2 ** len(beta)):
        want = np.array([outcome >> (len(beta) - 1 - i) & 1 for i in range(len(beta))], dtype=int)
        keep = np.all(x[:, beta] == want, axis=1) if beta else np.ones(2 ** n, dtype=bool)
        v = np.where(keep, psi, 0)
        out.append(v / np.linalg.norm(v))
    return out


@dataclass(frozen=True, eq=False)
class DeltaResult:
    delta: DensityMatrix
    branches: list[tuple[float, ProductState]]
    projector_error: float
    branch_product_error: float
    lambda2: float
    minimal_rank: bool


def stabilizer_projector(g: GraphSpec, analysis: GraphAnalysis) -> np.ndarray:
    """prod_{j in alpha} (I + g_j)/2, normalized to unit trace."""
    dim = 2 ** g.vertex_count
    p = np.eye(dim, dtype=complex)
    for j in analysis.alpha:
        gp = np.stack([apply_generator(g, j, p[:, c]) for c in range(dim)], axis=1)
        p = 0.5 * (p + gp)
    return p / np.trace(p).real


def build_delta(g: GraphSpec, analysis: GraphAnalysis,
                opts: OptimizerOptions = DEFAULT_OPTIONS) -> DeltaResult:
    """Uniform mixture of the beta-measurement branches, with the stabilizer
    projector cross-check and the minimal-rank test."""
    n = g.vertex_count
    _check_dense(n)
    dims = (2,) * n
    branches = measurement_branches(g, analysis)
    delta = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for w, ps in branches:
        v = ps.vector()
        delta += w * np.outer(v, v.conj())
    proj_err = float(np.max(np.abs(delta - stabilizer_projector(g, analysis))))
    # each branch is compared with the actual projection of |G>
    worst = 0.0
    for (_, ps), v in zip(branches, _branch_states(g, analysis)):
        worst = max(worst, 1.0 - abs(np.vdot(ps.vector(), v)) ** 2)
    if n == 1:
        lam = 1.0
    else:
        lam = lambda2_pure(build_graph_state(g), opts).lambda2
    minimal = worst <= 1e-9 and abs(lam - 1.0 / analysis.d_alpha) <= MINIMAL_RANK_TOL
    return DeltaResult(DensityMatrix.from_matrix(dims, delta), branches, proj_err, worst,
                       lam, bool(minimal))


@dataclass(frozen=True, eq=False)
class CssRecord:
    graph: GraphSpec
    analysis: GraphAnalysis
    lambda2: float
    trace_distance: float
    fidelity2: float
    relative_entropy: float
    eigenvalues: np.ndarray
    eigen_error: float
    projector_error: float
    minimal_rank: bool
    status: str
    delta: DensityMatrix

    def checks(self) -> dict[str, bool]:
        d = self.analysis.d_alpha
        return {
            "lambda2": abs(self.lambda2 - 1 / d) <= 1e-6,
            "trace_distance": abs(self.trace_distance - (1 - 1 / d)) <= 1e-10,
            "fidelity2": abs(self.fidelity2 - 1 / d) <= 1e-10,
            "relative_entropy": abs(self.relative_entropy - len(self.analysis.beta)) <= 1e-9,
            "eigenvalues": self.eigen_error <= 1e-10,
            "projector": self.projector_error <= 1e-10,
        }


def verify_universal_css(g: GraphSpec, opts: OptimizerOptions = DEFAULT_OPTIONS) -> CssRecord:
    """Evaluate the identities that make delta simultaneously closest.

    When the minimal-rank test fails the record is marked ``"bounds only"``:
    the distances to delta are then upper bounds on the corresponding measures.
    """
    an = analyze_graph(g)
    dr = build_delta(g, an, opts)
    psi = build_graph_state(g)
    rho = psi.density()
    d = an.d_alpha
    ev = np.sort(np.linalg.eigvalsh(rho.matrix - dr.delta.matrix))
    dim = ev.size
    expected = np.zeros(dim)
    expected[:d - 1] = -1.0 / d
    expected[-1] = (d - 1) / d
    expected = np.sort(expected)
    an = GraphAnalysis(an.alpha, an.beta, an.d_alpha, dr.minimal_rank)
    return CssRecord(
        graph=g, analysis=an, lambda2=dr.lambda2,
        trace_distance=trace_distance(rho, dr.delta),
        fidelity2=fidelity(rho, dr.delta) ** 2,
        relative_entropy=relative_entropy(rho, dr.delta),
        eigenvalues=ev, eigen_error=float(np.max(np.abs(ev - expected))),
        projector_error=dr.projector_error, minimal_rank=dr.minimal_rank,
        status="verified" if dr.minimal_rank else "bounds only", delta=dr.delta)
