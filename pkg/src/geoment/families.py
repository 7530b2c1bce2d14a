"""Named state families, their closed-form measure values, and the
A/B/C/D1/D2/D3 partition of state space."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from math import comb
from typing import Any, Sequence

import numpy as np

from .appendix import gt_isotropic_closed
from .core import (DensityMatrix, MultipartiteSpace, PureState, State, apply_local, as_density,
                   partial_trace)
from .errors import DimensionError
from .mixed import is_certified_separable, lambda2_mixed
from .pure import DEFAULT_OPTIONS, OptimizerOptions
from .roof import Decomposition

E = np.e
LOG2E = np.log2(np.e)


# pure families -------------------------------------------------------------

def make_mes(d: int) -> PureState:
    """(1/sqrt d) sum_i |ii>."""
    if d < 2:
        raise ValueError("d must be >= 2")
    return PureState.from_vector((d, d), np.eye(d).reshape(-1))


def make_ghz(n: int, d: int = 2) -> PureState:
    if n < 2 or d < 2:
        raise ValueError("need n >= 2 and d >= 2")
    v = np.zeros(d ** n, dtype=complex)
    for i in range(d):
        v[np.ravel_multi_index((i,) * n, (d,) * n)] = 1.0
    return PureState.from_vector((d,) * n, v)


def make_dicke(n: int, k: int) -> PureState:
    """Symmetric n-qubit state with k excitations."""
    if n < 2 or not 0 <= k <= n:
        raise ValueError("need n >= 2 and 0 <= k <= n")
    idx = np.arange(2 ** n)
    weight = np.array([bin(i).count("1") for i in idx])
    v = (weight == k).astype(complex)
    return PureState.from_vector((2,) * n, v / np.sqrt(comb(n, k)))


def make_w(n: int) -> PureState:
    return make_dicke(n, 1)


def block_mes(d: int, levels: Sequence[int], phases: Sequence[complex] | None = None) -> np.ndarray:
    """Amplitudes of (1/sqrt k) sum_l phase_l |l l> over the given levels of a d x d pair."""
    v = np.zeros((d, d), dtype=complex)
    ph = np.ones(len(levels)) if phases is None else np.asarray(phases)
    for lvl, c in zip(levels, ph):
        v[lvl, lvl] = c
    return v.reshape(-1) / np.sqrt(len(levels))


# isotropic states ----------------------------------------------------------

@dataclass(frozen=True)
class IsotropicSpec:
    """p I/d^2 + (1-p)|Psi><Psi|, stored canonically by the singlet fraction F."""

    d: int
    F: float

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if not -1e-12 <= self.F <= 1 + 1e-12:
            raise ValueError("F must lie in [0, 1]")

    @classmethod
    def from_p(cls, d: int, p: float) -> "IsotropicSpec":
        if not -1e-12 <= p <= 1 + 1e-12:
            raise ValueError("p must lie in [0, 1]")
        return cls(d, 1.0 - p * (d * d - 1) / (d * d))

    @classmethod
    def from_F(cls, d: int, F: float) -> "IsotropicSpec":
        return cls(d, F)

    @property
    def p(self) -> float:
        d2 = self.d * self.d
        return d2 / (d2 - 1) * (1.0 - self.F)


@dataclass(frozen=True)
class IsoClosedForms:
    separable: bool
    lambda2_m: float
    g_m: float
    g_m_log: float
    g_fc: float
    g_f_log: float
    g_c_log: float
    g_t: float


def make_isotropic(spec: IsotropicSpec) -> DensityMatrix:
    d, p = spec.d, spec.p
    psi = make_mes(d).amplitudes
    m = p * np.eye(d * d) / (d * d) + (1 - p) * np.outer(psi, psi.conj())
    return DensityMatrix.from_matrix((d, d), m)


def iso_closed_forms(spec: IsotropicSpec) -> IsoClosedForms:
    d, F, p = spec.d, spec.F, spec.p
    lam_m = p / d ** 2 + (1 - p) / d
    sep = F <= 1.0 / d + 1e-15
    if sep:
        lam_f = 1.0
    else:
        lam_f = (np.sqrt(F) + np.sqrt((d - 1) * max(0.0, 1 - F))) ** 2 / d
    return IsoClosedForms(
        separable=bool(sep), lambda2_m=lam_m, g_m=1 - lam_m, g_m_log=float(-np.log2(lam_m)),
        g_fc=float(1 - lam_f), g_f_log=float(-np.log2(lam_f)), g_c_log=float(-np.log2(lam_f)),
        g_t=gt_isotropic_closed(d, min(1.0, max(0.0, p))))


# maximally correlated states ----------------------------------------------

@dataclass(frozen=True)
class MaxCorrSpec:
    """sum_i q_i |Theta_i><Theta_i| with Theta_i the MES on levels (n_{i-1}, n_i]."""

    d: int
    partition: tuple[int, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        part = tuple(int(x) for x in self.partition)
        w = tuple(float(x) for x in self.weights)
        if part[0] != 0 or part[-1] != self.d:
            raise ValueError("partition must run from 0 to d")
        if any(b <= a for a, b in zip(part, part[1:])):
            raise ValueError("partition must be strictly increasing")
        if len(w) != len(part) - 1:
            raise ValueError("need one weight per block")
        if any(not 0 < q <= 1 for q in w) or abs(sum(w) - 1) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        object.__setattr__(self, "partition", part)
        object.__setattr__(self, "weights", w)

    @classmethod
    def rank2(cls, m: int, n: int, q: float) -> "MaxCorrSpec":
        """q |Psi_m> + (1-q) |Psi_n> on the first m and the next n levels."""
        return cls(m + n, (0, m, m + n), (q, 1 - q))

    @property
    def blocks(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.partition, self.partition[1:]))

    @property
    def rank(self) -> int:
        return len(self.weights)

    def theta(self, i: int) -> PureState:
        lv = range(self.partition[i], self.partition[i + 1])
        return PureState.from_vector((self.d, self.d), block_mes(self.d, list(lv)))


@dataclass(frozen=True)
class MaxCorrClosedForms:
    g_c: float
    g_f: float
    g_f_log: float
    lambda2_m: float
    g_m: float
    g_m_log: float
    g_c_log: float | None
    g_c_log_case: str
    decomposition: Decomposition | None
    label: str | None


def make_maxcorr(spec: MaxCorrSpec) -> DensityMatrix:
    m = sum(q * spec.theta(i).density().matrix for i, q in enumerate(spec.weights))
    return DensityMatrix.from_matrix((spec.d, spec.d), m)


def rank2_case(m: int, n: int, q: float) -> int:
    """Case index (1, 2, 3) of the rank-two log-roof formula; requires m <= n."""
    if m / n >= 1 / E:
        return 1
    if q >= E * m / n:
        return 2
    return 3


def rank2_log_roof(m: float, n: float, q: float) -> tuple[float, int]:
    """Closed-form log convex roof of q Psi_m + (1-q) Psi_n, m <= n (real m, n allowed)."""
    case = rank2_case(m, n, q)
    if case == 1:
        return q * np.log2(m) + (1 - q) * np.log2(n), 1
    if case == 2:
        return float(np.log2(m / q)), 2
    return float(np.log2(n) - q * n * LOG2E / (m * E)), 3


def rank2_label(m: int, n: int, q: float) -> str:
    if m > n:
        m, n, q = n, m, 1 - q
    if m == n:
        return "D2"
    if m / n < 1 / E and q >= E * m / n:
        return "D3"
    return "D1"


def _rank2_orient(spec: MaxCorrSpec) -> tuple[int, int, float, int, int]:
    """(m, n, q, index of the m block, index of the n block) with m <= n."""
    a, b = spec.blocks
    if a <= b:
        return a, b, spec.weights[0], 0, 1
    return b, a, spec.weights[1], 1, 0


def _rank2_decomposition(spec: MaxCorrSpec) -> Decomposition:
    m, n, q, im, in_ = _rank2_orient(spec)
    tm, tn = spec.theta(im).amplitudes, spec.theta(in_).amplitudes
    dims = (spec.d, spec.d)
    case = rank2_case(m, n, q)
    if case == 1:
        return Decomposition(((q, PureState(MultipartiteSpace(dims), tm)),
                              (1 - q, PureState(MultipartiteSpace(dims), tn))))
    if case == 2:
        a, b = np.sqrt(q), np.sqrt(1 - q)
        return Decomposition(((0.5, PureState.from_vector(dims, a * tm + b * tn)),
                              (0.5, PureState.from_vector(dims, a * tm - b * tn))))
    x = E * m / n
    w = n * q / (E * m)
    a, b = np.sqrt(x), np.sqrt(1 - x)
    return Decomposition(((1 - w, PureState(MultipartiteSpace(dims), tn)),
                          (w / 2, PureState.from_vector(dims, a * tm + b * tn)),
                          (w / 2, PureState.from_vector(dims, a * tm - b * tn))))


def maxcorr_closed_forms(spec: MaxCorrSpec) -> MaxCorrClosedForms:
    ratios = np.array(spec.weights) / np.array(spec.blocks)
    s = float(ratios.sum())
    lam_m = float(ratios.max())
    g_c_log, case, dec, label = None, "optimizer only", None, None
    if max(spec.blocks) == 1:
        # every block is a single product level: a diagonal, separable state
        g_c_log, case = 0.0, "separable"
        label = "A" if spec.rank == 1 else "C"
    elif spec.rank == 1:
        g_c_log, case, label = float(-np.log2(s)), "pure", "B"
    elif spec.rank == 2:
        m, n, q, _, _ = _rank2_orient(spec)
        g_c_log, k = rank2_log_roof(m, n, q)
        case = f"rank-2 case {k}"
        dec = _rank2_decomposition(spec)
        label = rank2_label(m, n, q)
    elif len(set(spec.blocks)) == 1:
        g_c_log, case, label = float(-np.log2(s)), "equal blocks", "D2"
    return MaxCorrClosedForms(
        g_c=1 - s, g_f=1 - s, g_f_log=float(-np.log2(s)), lambda2_m=lam_m, g_m=1 - lam_m,
        g_m_log=float(-np.log2(lam_m)), g_c_log=g_c_log, g_c_log_case=case,
        decomposition=dec, label=label)


# two qubits ----------------------------------------------------------------

_YY = np.kron(np.array([[0, -1j], [1j, 0]]), np.array([[0, -1j], [1j, 0]]))


@dataclass(frozen=True)
class TwoQubitClosedForms:
    concurrence: float
    g_c_log: float
    g_f_log: float
    g_c: float
    g_f: float


def concurrence(rho: State) -> float:
    m = as_density(rho).matrix
    ev = np.linalg.eigvals(m @ _YY @ m.conj() @ _YY).real
    ev = np.where(ev < 1e-12, 0.0, ev)
    lam = np.sort(np.sqrt(ev))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def two_qubit_closed_forms(rho: State) -> TwoQubitClosedForms:
    rho = as_density(rho)
    if rho.dims != (2, 2):
        raise DimensionError("two-qubit formula needs dims (2, 2)")
    c = concurrence(rho)
    g_l = float(-np.log2((1 + np.sqrt(max(0.0, 1 - c * c))) / 2))
    g = float(1 - 2.0 ** (-g_l))
    return TwoQubitClosedForms(c, g_l, g_l, g, g)


# family detection ----------------------------------------------------------

def detect_isotropic(rho: DensityMatrix, tol: float = 1e-10) -> IsotropicSpec | None:
    if len(rho.dims) != 2 or rho.dims[0] != rho.dims[1]:
        return None
    d = rho.dims[0]
    psi = make_mes(d).amplitudes
    F = float(np.real(np.vdot(psi, rho.matrix @ psi)))
    spec = IsotropicSpec(d, min(1.0, max(0.0, F)))
    if np.max(np.abs(make_isotropic(spec).matrix - rho.matrix)) <= tol:
        return spec
    return None


def detect_maxcorr(rho: DensityMatrix, tol: float = 1e-10) -> tuple[MaxCorrSpec, np.ndarray] | None:
    """Recognize sum_i q_i |Theta_i><Theta_i| over contiguous level blocks, up to
    local phases on the first party.

    Returns the spec and the diagonal unitary on party A that maps ``rho`` onto
    the standard representative.
    """
    if len(rho.dims) != 2 or rho.dims[0] != rho.dims[1]:
        return None
    d = rho.dims[0]
    diag_idx = np.arange(d) * (d + 1)
    m = rho.matrix
    mask = np.ones(m.shape, dtype=bool)
    mask[np.ix_(diag_idx, diag_idx)] = False
    if np.max(np.abs(m[mask]), initial=0.0) > tol:
        return None
    c = m[np.ix_(diag_idx, diag_idx)]
    cuts = [0]
    for i in range(1, d):
        if np.max(np.abs(c[cuts[-1]:i, i])) <= tol:
            cuts.append(i)
    cuts.append(d)
    weights = []
    phases = np.ones(d, dtype=complex)
    for a, b in zip(cuts, cuts[1:]):
        blk = c[a:b, a:b]
        val = np.real(blk[0, 0])
        if val <= tol or np.max(np.abs(np.abs(blk) - val)) > tol:
            return None
        phases[a:b] = blk[:, 0] / np.abs(blk[:, 0])
        weights.append(val * (b - a))
    try:
        spec = MaxCorrSpec(d, tuple(cuts), tuple(np.array(weights) / sum(weights)))
    except ValueError:
        return None
    ua = np.diag(phases.conj())
    std = np.kron(ua, np.eye(d)) @ m @ np.kron(ua, np.eye(d)).conj().T
    if np.max(np.abs(make_maxcorr(spec).matrix - std)) > tol:
        return None
    return spec, ua


# partition -----------------------------------------------------------------

class ClassLabel(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D1 = "D1"
    D2 = "D2"
    D3 = "D3"
    UNDECIDABLE = "undecidable"


CLASS_TOL = 1e-6


def _npt(rho: DensityMatrix) -> bool:
    """True if some bipartition has a negative partial transpose."""
    dims = rho.dims
    n = len(dims)
    t = rho.matrix.reshape(dims + dims)
    for mask in range(1, 2 ** (n - 1)):
        side = [j for j in range(n) if mask >> j & 1]
        perm = list(range(2 * n))
        for j in side:
            perm[j], perm[n + j] = n + j, j
        pt = t.transpose(perm).reshape(rho.matrix.shape)
        if np.linalg.eigvalsh(pt)[0] < -1e-10:
            return True
    return False


def classify(rho: State, opts: OptimizerOptions = DEFAULT_OPTIONS, *,
             family: MaxCorrSpec | IsotropicSpec | None = None,
             local_unitaries: Sequence[np.ndarray] | None = None,
             roof_opts=None) -> tuple[ClassLabel, dict[str, Any]]:
    """Place a state in the A/B/C/D1/D2/D3 partition.

    Analytic paths (pure states, two qubits, isotropic and maximally
    correlated states) decide exactly. Families are detected automatically,
    maximally correlated ones up to diagonal phases on the first party, or
    can be passed via ``family`` together with ``local_unitaries`` mapping
    ``rho`` onto the family representative; the match is verified. Without
    an analytic path, a separability certificate gives C, a roof upper bound
    on the log roof strictly below the known max-overlap value gives D1, and
    everything else is ``UNDECIDABLE``.
    """
    rho = as_density(rho)
    ev: dict[str, Any] = {}
    n = rho.space.n_parties
    purity = rho.purity()
    ev["purity"] = purity
    if purity >= 1 - 1e-9:
        marg = [partial_trace(rho, [j]).purity() for j in range(n)]
        product = all(x >= 1 - 1e-9 for x in marg)
        ev["path"] = "pure: single-party marginal purities"
        ev["marginal_purities"] = marg
        return (ClassLabel.A if product else ClassLabel.B), ev

    target = rho
    if local_unitaries is not None:
        target = apply_local(rho, local_unitaries)
    if family is None:
        hit = detect_maxcorr(target)
        if hit is not None:
            family, ua = hit
            target = apply_local(target, [ua, np.eye(target.dims[1])])
            ev["local_phases"] = np.diag(ua)
        else:
            family = detect_isotropic(target)
    if family is not None:
        expected = make_maxcorr(family) if isinstance(family, MaxCorrSpec) else make_isotropic(family)
        if expected.dims != target.dims or np.max(np.abs(expected.matrix - target.matrix)) > 1e-9:
            raise ValueError("state does not match the given family (after local unitaries)")
        if isinstance(family, IsotropicSpec):
            icf = iso_closed_forms(family)
            ev.update(path="isotropic closed form", spec=family,
                      g_f_log=icf.g_f_log, g_c_log=icf.g_c_log, g_m_log=icf.g_m_log)
            return (ClassLabel.C if icf.separable else ClassLabel.D2), ev
        cf = maxcorr_closed_forms(family)
        ev.update(path="maximally correlated closed form", spec=family,
                  g_f_log=cf.g_f_log, g_c_log=cf.g_c_log, g_m_log=cf.g_m_log)
        if cf.label is not None:
            return ClassLabel(cf.label), ev
        # unequal blocks, rank > 2: strictly above the fidelity value, so D1 or D3
        from .roof import DEFAULT_ROOF, convex_roof
        up = convex_roof(target, "log", opts, roof_opts or DEFAULT_ROOF).value
        ev.update(path="maximally correlated, unequal blocks", g_c_log_upper=up, excluded="D2")
        if up < cf.g_m_log - CLASS_TOL:
            return ClassLabel.D1, ev
        ev["reason"] = "log-roof upper bound does not separate D1 from D3"
        return ClassLabel.UNDECIDABLE, ev

    if rho.dims == (2, 2):
        cf2 = two_qubit_closed_forms(rho)
        lm = lambda2_mixed(rho, opts)
        ev.update(path="two-qubit concurrence", concurrence=cf2.concurrence,
                  g_f_log=cf2.g_f_log, g_c_log=cf2.g_c_log,
                  g_m_log_upper=float(-np.log2(lm.lambda2m)))
        return (ClassLabel.C if cf2.concurrence <= 1e-12 else ClassLabel.D2), ev

    if is_certified_separable(rho.matrix, rho.dims):
        ev["path"] = "separable certificate (diagonal in a product basis)"
        return ClassLabel.C, ev
    ev["npt"] = _npt(rho)
    from .roof import DEFAULT_ROOF, convex_roof
    ro = roof_opts or DEFAULT_ROOF
    lin = convex_roof(rho, "linear", opts, ro)
    ev["g_fc_upper"] = lin.value
    if lin.value <= 1e-12 and not ev["npt"]:
        ev["path"] = "roof certificate with vanishing value"
        return ClassLabel.C, ev
    log = convex_roof(rho, "log", opts, ro)
    lm = lambda2_mixed(rho, opts)
    ev.update(path="numeric bounds", g_f_log_upper=float(-np.log2(1 - lin.value)),
              g_c_log_upper=log.value, g_m_log_upper=float(-np.log2(lm.lambda2m)))
    ev["reason"] = "only one-sided bounds are available; the D subsets cannot be certified"
    return ClassLabel.UNDECIDABLE, ev
