"""State carriers, distances and entropies on finite multipartite spaces.

All logarithms are base 2. Density matrices are dense ``complex128`` arrays;
the party structure is carried by a :class:`MultipartiteSpace`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import BudgetError, DimensionError, InvalidStateError

NORM_TOL = 1e-12
HERM_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
SUPPORT_TOL = 1e-10
MAX_TOTAL_DIM = 4096


@dataclass(frozen=True)
class MultipartiteSpace:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) < 1:
            raise DimensionError("a space needs at least one party")
        if any(d < 2 for d in dims):
            raise DimensionError(f"local dimensions must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def n_parties(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def subspace(self, parties: Iterable[int]) -> "MultipartiteSpace":
        return MultipartiteSpace(tuple(self.dims[j] for j in parties))


def _space(dims) -> MultipartiteSpace:
    return dims if isinstance(dims, MultipartiteSpace) else MultipartiteSpace(tuple(dims))


@dataclass(frozen=True, eq=False)
class PureState:
    space: MultipartiteSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.space.total_dim:
            raise DimensionError(
                f"{amp.size} amplitudes for a space of dimension {self.space.total_dim}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL * max(1.0, amp.size ** 0.5):
            raise InvalidStateError(f"state vector has norm {norm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def from_vector(cls, dims, vector, normalize: bool = True) -> "PureState":
        v = np.asarray(vector, dtype=complex).reshape(-1)
        if normalize:
            n = np.linalg.norm(v)
            if n == 0:
                raise InvalidStateError("zero vector")
            v = v / n
        return cls(_space(dims), v)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix(self.space, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: MultipartiteSpace
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        n = self.space.total_dim
        if m.shape != (n, n):
            raise DimensionError(f"matrix shape {m.shape} does not match dimension {n}")
        if np.max(np.abs(m - m.conj().T)) > HERM_TOL:
            raise InvalidStateError("matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TRACE_TOL * max(1.0, n ** 0.5):
            raise InvalidStateError(f"trace is {np.trace(m).real!r}, expected 1")
        m = 0.5 * (m + m.conj().T)
        if np.linalg.eigvalsh(m)[0] < -PSD_TOL:
            raise InvalidStateError("matrix has a negative eigenvalue")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_matrix(cls, dims, matrix, normalize: bool = False) -> "DensityMatrix":
        """Build from a numerically computed matrix, symmetrizing roundoff."""
        m = np.asarray(matrix, dtype=complex)
        if m.ndim == 2 and m.shape[0] == m.shape[1]:
            if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-9:
                raise InvalidStateError("matrix is not Hermitian")
            m = 0.5 * (m + m.conj().T)
        if normalize:
            m = m / np.trace(m).real
        return cls(_space(dims), m)

    @property
    def dims(self) -> tuple[int, ...]:
        return self.space.dims

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues ascending, clipped into [0, 1] below ``PSD_TOL``."""
        w, v = np.linalg.eigh(self.matrix)
        w = np.where(np.abs(w) < PSD_TOL, 0.0, w)
        return np.clip(w, 0.0, 1.0), v

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix, self.matrix)))

    def rank(self, tol: float = SUPPORT_TOL) -> int:
        return int(np.sum(np.linalg.eigvalsh(self.matrix) > tol))


@dataclass(frozen=True, eq=False)
class ProductState:
    factors: tuple[np.ndarray, ...]

    def __post_init__(self):
        fs = []
        for f in self.factors:
            f = np.asarray(f, dtype=complex).reshape(-1)
            if abs(np.linalg.norm(f) - 1.0) > NORM_TOL:
                raise InvalidStateError("product factor is not normalized")
            f = f.copy()
            f.setflags(write=False)
            fs.append(f)
        if not fs:
            raise DimensionError("product state needs at least one factor")
        object.__setattr__(self, "factors", tuple(fs))

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray]) -> "ProductState":
        return cls(tuple(np.asarray(v, dtype=complex) / np.linalg.norm(v) for v in vectors))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(f.size for f in self.factors)

    def vector(self) -> np.ndarray:
        return reduce(np.kron, self.factors)


State = Union[PureState, DensityMatrix]


def as_density(state: State) -> DensityMatrix:
    return state.density() if isinstance(state, PureState) else state


def tensor_assemble(factors: ProductState, space: MultipartiteSpace | None = None) -> PureState:
    """Kronecker product of the factors in party order."""
    if space is not None and tuple(space.dims) != factors.dims:
        raise DimensionError(f"factor dims {factors.dims} do not match space {space.dims}")
    return PureState(space or MultipartiteSpace(factors.dims), factors.vector())


def partial_trace(rho: State, kept: Iterable[int]) -> DensityMatrix:
    """Reduced state on the parties in ``kept`` (kept in ascending order)."""
    rho = as_density(rho)
    kept = sorted(set(int(k) for k in kept))
    n = rho.space.n_parties
    if not kept:
        raise DimensionError("kept set is empty")
    if kept[0] < 0 or kept[-1] >= n:
        raise DimensionError(f"party index out of range for {n} parties")
    traced = [j for j in range(n) if j not in kept]
    dims = rho.dims
    dk = int(np.prod([dims[j] for j in kept]))
    dt = int(np.prod([dims[j] for j in traced])) if traced else 1
    t = rho.matrix.reshape(dims + dims)
    perm = kept + traced + [n + j for j in kept] + [n + j for j in traced]
    t = t.transpose(perm).reshape(dk, dt, dk, dt)
    red = np.einsum("atbt->ab", t)
    return DensityMatrix.from_matrix(rho.space.subspace(kept), red)


def _check_same(rho: DensityMatrix, sigma: DensityMatrix):
    if rho.dims != sigma.dims:
        raise DimensionError(f"states live on different spaces {rho.dims} vs {sigma.dims}")


def trace_distance(rho: State, sigma: State) -> float:
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same(rho, sigma)
    w = np.linalg.eigvalsh(rho.matrix - sigma.matrix)
    return float(0.5 * np.sum(np.abs(w)))


def psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    w = np.sqrt(np.clip(w, 0.0, None))
    return (v * w) @ v.conj().T


def fidelity(rho: State, sigma: State) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)), not squared."""
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same(rho, sigma)
    for a, b in ((rho, sigma), (sigma, rho)):
        w, v = np.linalg.eigh(a.matrix)
        if w[-2] <= 1e-14:
            # pure argument: F^2 = <psi|b|psi>
            psi = v[:, -1]
            return float(min(1.0, np.sqrt(max(0.0, np.vdot(psi, b.matrix @ psi).real))))
    s = psd_sqrt(rho.matrix)
    w = np.linalg.eigvalsh(s @ sigma.matrix @ s)
    w = np.where(w > 1e-14 * max(1.0, w[-1]), w, 0.0)
    return float(min(1.0, np.sum(np.sqrt(w))))


def bures_distance(rho: State, sigma: State) -> float:
    return float(np.sqrt(max(0.0, 2.0 - 2.0 * fidelity(rho, sigma))))


def relative_entropy(rho: State, sigma: State) -> float:
    """S(rho|sigma) in bits; ``inf`` when rho is not supported inside sigma."""
    rho, sigma = as_density(rho), as_density(sigma)
    _check_same(rho, sigma)
    ws, vs = np.linalg.eigh(sigma.matrix)
    on = ws > SUPPORT_TOL
    off = vs[:, ~on]
    if off.size and np.real(np.trace(off.conj().T @ rho.matrix @ off)) > SUPPORT_TOL:
        return float("inf")
    wr = np.linalg.eigvalsh(rho.matrix)
    wr = wr[wr > SUPPORT_TOL]
    neg_entropy = float(np.sum(wr * np.log2(wr)))
    log_sigma = (vs[:, on] * np.log2(ws[on])) @ vs[:, on].conj().T
    cross = float(np.real(np.vdot(rho.matrix, log_sigma)))
    return max(0.0, neg_entropy - cross)


def entropies(rho: State) -> tuple[float, float]:
    """Return (von Neumann entropy, linear entropy)."""
    w = np.linalg.eigvalsh(as_density(rho).matrix)
    w = np.clip(w, 0.0, 1.0)
    nz = w[w > SUPPORT_TOL]
    s = float(-np.sum(nz * np.log2(nz)))
    return max(0.0, s), float(1.0 - np.sum(w * w))


def _regroup_perm(n: int) -> list[int]:
    # (a_1..a_n, b_1..b_n) -> (a_1 b_1, ..., a_n b_n)
    return [k for j in range(n) for k in (j, n + j)]


def same_space_tensor(rho: State, sigma: State) -> State:
    """Tensor product with party j carrying both party-j factors.

    Two pure inputs give a pure result; otherwise a density matrix.
    """
    if rho.space.n_parties != sigma.space.n_parties:
        raise DimensionError("party counts differ")
    n = rho.space.n_parties
    dims = tuple(a * b for a, b in zip(rho.dims, sigma.dims))
    perm = _regroup_perm(n)
    if isinstance(rho, PureState) and isinstance(sigma, PureState):
        t = np.kron(rho.amplitudes, sigma.amplitudes).reshape(rho.dims + sigma.dims)
        return PureState(MultipartiteSpace(dims), t.transpose(perm).reshape(-1))
    a, b = as_density(rho), as_density(sigma)
    t = np.kron(a.matrix, b.matrix).reshape(a.dims + b.dims + a.dims + b.dims)
    full = perm + [2 * n + k for k in perm]
    m = t.transpose(full).reshape(a.space.total_dim * b.space.total_dim, -1)
    return DensityMatrix.from_matrix(dims, m)


def projector(vector: np.ndarray, dims) -> DensityMatrix:
    v = np.asarray(vector, dtype=complex)
    v = v / np.linalg.norm(v)
    return DensityMatrix.from_matrix(dims, np.outer(v, v.conj()))


def mixture(weights: Sequence[float], states: Sequence[State]) -> DensityMatrix:
    """Convex combination of states on a common space."""
    if len(weights) != len(states) or not states:
        raise ValueError("weights and states must be non-empty and of equal length")
    dens = [as_density(s) for s in states]
    for d in dens[1:]:
        _check_same(dens[0], d)
    m = sum(float(w) * d.matrix for w, d in zip(weights, dens))
    return DensityMatrix.from_matrix(dens[0].space, m)


def computational_basis_state(dims, index: Sequence[int]) -> PureState:
    space = _space(dims)
    v = np.zeros(space.total_dim, dtype=complex)
    v[np.ravel_multi_index(tuple(index), space.dims)] = 1.0
    return PureState(space, v)


# random sampling ---------------------------------------------------------

def _gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unit_vector(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = _gaussian(rng, dim)
    return v / np.linalg.norm(v)


def random_pure(dims, rng: np.random.Generator) -> PureState:
    space = _space(dims)
    return PureState(space, random_unit_vector(space.total_dim, rng))


def random_density(dims, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Normalized G G^dagger with complex Gaussian G of shape (dim, rank)."""
    space = _space(dims)
    n = space.total_dim
    g = _gaussian(rng, (n, rank or n))
    m = g @ g.conj().T
    return DensityMatrix.from_matrix(space, m / np.trace(m).real)


def random_product(dims, rng: np.random.Generator) -> ProductState:
    return ProductState(tuple(random_unit_vector(d, rng) for d in dims))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(_gaussian(rng, (dim, dim)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def apply_local(state: State, unitaries: Sequence[np.ndarray]) -> State:
    u = reduce(np.kron, unitaries)
    if isinstance(state, PureState):
        return PureState.from_vector(state.space, u @ state.amplitudes)
    return DensityMatrix.from_matrix(state.space, u @ state.matrix @ u.conj().T)


def check_budget(dims) -> MultipartiteSpace:
    space = _space(dims)
    if space.total_dim > MAX_TOTAL_DIM:
        raise BudgetError(f"total dimension {space.total_dim} exceeds {MAX_TOTAL_DIM}")
    return space
