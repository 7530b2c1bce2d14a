"""Verification batteries behind ``geoment verify`` and ``geoment incomparability``.

Every suite returns a list of :class:`Check` records. A check compares values
whose direction is certified: lower bounds are only ever compared with upper
bounds, and exact closed forms with either.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .appendix import (FhsSpec, constrained_log_min, fhs_grid_min, fhs_minimum,
                       gt_concavity_counterexample, gt_isotropic_closed)
from .core import (DensityMatrix, ProductState, State, computational_basis_state, mixture,
                   random_density)
from .families import (IsotropicSpec, MaxCorrSpec, block_mes, classify,
                       iso_closed_forms, make_isotropic, make_maxcorr, make_mes,
                       maxcorr_closed_forms, rank2_case, rank2_label, two_qubit_closed_forms)
from .graphs import GraphSpec, build_graph_state, verify_universal_css
from .mixed import gt, gt_lower_bound, lambda2_mixed, pure_trace_distance, trace_ent_bracket
from .pure import DEFAULT_OPTIONS, OptimizerOptions, restart_rng
from .roof import DEFAULT_ROOF, RoofOptions, convex_roof, fidelity_extension

SLACK = 5e-6
BATTERY_ROOF = RoofOptions(starts=1, hops=0, k_schedule=(1,), max_iter=60, search_restarts=4)


@dataclass(frozen=True, eq=False)
class Check:
    name: str
    ok: bool
    detail: str = ""
    state: State | None = None


def _fmt(x: float) -> str:
    return f"{x + 0.0:.12g}"


def _le(name: str, a: float, b: float, slack: float = SLACK, state=None) -> Check:
    return Check(name, bool(a <= b + slack), f"{_fmt(a)} <= {_fmt(b)}", state)


def _close(name: str, a: float, b: float, tol: float, state=None) -> Check:
    return Check(name, bool(abs(a - b) <= tol), f"|{_fmt(a)} - {_fmt(b)}| <= {tol:g}", state)


# hierarchy -----------------------------------------------------------------

def sample_states(dims, samples: int, seed: int) -> list[DensityMatrix]:
    """Random states of every rank from 1 to the full dimension, cycling."""
    dim = int(np.prod(dims))
    out = []
    for k in range(samples):
        rng = restart_rng(seed, 1_000_000 + k)
        out.append(random_density(dims, rng, rank=1 + k % dim))
    return out


def hierarchy_checks(rho: DensityMatrix, opts: OptimizerOptions = DEFAULT_OPTIONS,
                     roof_opts: RoofOptions = BATTERY_ROOF, tag: str = "") -> list[Check]:
    """The inequality chains for one state.

    On two qubits the roof-based values are the exact closed forms; elsewhere
    they are roof certificates (upper bounds) and only enter comparisons in
    which an upper bound is the larger side.
    """
    lm = lambda2_mixed(rho, opts)
    g_m, g_ml = 1.0 - lm.lambda2m, float(-np.log2(lm.lambda2m))
    g_t = gt(rho, opts, init=[lm.cps], restarts=16)
    closed = rho.dims == (2, 2)
    if closed:
        cf = two_qubit_closed_forms(rho)
        g_fc, g_fl, g_cl = cf.g_c, cf.g_f_log, cf.g_c_log
        roof = None
    else:
        roof = convex_roof(rho, "linear", opts, roof_opts)
        g_fc = roof.value
        g_fl = float(-np.log2(1 - g_fc))
        g_cl = None
    br = trace_ent_bracket(rho, opts, roof=roof, gt_result=g_t, lm_result=lm)
    t = f"{tag} " if tag else ""
    out = [
        _le(f"{t}E_T <= G_t", br.lower, g_t.value, state=rho),
        _le(f"{t}G_t lower bound <= G_t", gt_lower_bound(rho), g_t.value, state=rho),
        _le(f"{t}G_t <= G_m", g_t.value, g_m, state=rho),
        _le(f"{t}E_T <= G_fc", br.lower, g_fc, state=rho),
        _le(f"{t}G_fc <= G_m", g_fc, g_m, state=rho),
        _le(f"{t}G_m <= G_m_log", g_m, g_ml, 1e-9, state=rho),
        _le(f"{t}G_fc <= G_f_log", g_fc, g_fl, 1e-9, state=rho),
    ]
    if closed:
        out += [_le(f"{t}G_f_log <= G_c_log", g_fl, g_cl, state=rho),
                _le(f"{t}G_c_log <= G_m_log", g_cl, g_ml, state=rho)]
    return out


def suite_hierarchy(samples: int = 20, seed: int = 0, dims=(2, 2),
                    opts: OptimizerOptions = DEFAULT_OPTIONS,
                    roof_opts: RoofOptions = BATTERY_ROOF) -> list[Check]:
    out = []
    for k, rho in enumerate(sample_states(dims, samples, seed)):
        out += hierarchy_checks(rho, opts, roof_opts, tag=f"state[{k}]")
    return out


# partition -----------------------------------------------------------------

def _dm(d: int, comps) -> DensityMatrix:
    m = sum(w * np.outer(v, v.conj()) for w, v in comps)
    return DensityMatrix.from_matrix((d, d), m)


def nonconvexity_witnesses(q: float = 0.95) -> dict[str, tuple[list[DensityMatrix], str, str]]:
    """Families of states with a common label whose mixture changes label.

    Values are (states, label of each, label of the uniform mixture).
    """
    d = 6
    p12, p34, p56 = (block_mes(d, lv) for lv in ([0, 1], [2, 3], [4, 5]))
    rho_pm = [_dm(d, [(0.5, p12), (0.5, (p34 + s * p56) / np.sqrt(2))]) for s in (1, -1)]
    d = 8
    w = np.exp(2j * np.pi / 3)
    b = [block_mes(d, lv) for lv in ([0, 1], [2, 3], [4, 5], [6, 7])]
    sig = [_dm(d, [(q, b[0]), (1 - q, (b[1] + w ** i * b[2] + w ** (2 * i) * b[3]) / np.sqrt(3))])
           for i in (1, 2, 3)]
    d = 4
    bell = [block_mes(d, [0, 1], [1, s]) for s in (1, -1)]
    bell2 = [block_mes(d, [2, 3], [1, s]) for s in (1, -1)]
    pair = [_dm(d, [(0.5, bell[i]), (0.5, bell2[i])]) for i in (0, 1)]
    return {"D1 pair": (rho_pm, "D1", "D2"), "D3 triple": (sig, "D3", "D2"),
            "D2 pair": (pair, "D2", "C")}


RANK2_GRID = [(m, n, q) for m, n in ((3, 3), (2, 2), (1, 2), (1, 3), (1, 4), (2, 3), (1, 5), (2, 7),
                                      (1, 6), (3, 10))
              for q in (0.3, 0.95)]


def suite_partition(opts: OptimizerOptions = DEFAULT_OPTIONS) -> list[Check]:
    out = []
    basic = [("|00>", computational_basis_state((2, 2), (0, 0)), "A"),
             ("Bell", make_mes(2), "B"),
             ("I/4", DensityMatrix.from_matrix((2, 2), np.eye(4) / 4), "C"),
             ("isotropic d=3 F=0.9", make_isotropic(IsotropicSpec(3, 0.9)), "D2"),
             ("isotropic d=3 F=1/3", make_isotropic(IsotropicSpec(3, 1 / 3)), "C")]
    for name, st, want in basic:
        got = classify(st, opts)[0].value
        out.append(Check(f"classify {name}", got == want, f"{got} (expected {want})", st))
    for m, n, q in RANK2_GRID:
        spec = MaxCorrSpec.rank2(m, n, q)
        got = classify(make_maxcorr(spec), opts)[0].value
        want = rank2_label(m, n, q)
        out.append(Check(f"maxcorr ({m},{n},{q})", got == want, f"{got} (expected {want})",
                         make_maxcorr(spec)))
    for name, (states, each, mixed) in nonconvexity_witnesses().items():
        labels = [classify(s, opts)[0].value for s in states]
        mix = mixture([1 / len(states)] * len(states), states)
        lm = classify(mix, opts)[0].value
        ok = all(x == each for x in labels) and lm == mixed
        out.append(Check(f"non-convexity {name}", ok,
                         f"members {labels} (expected {each}), mixture {lm} (expected {mixed})", mix))
    return out


# graphs --------------------------------------------------------------------

GRAPH_BATTERY = {"edge": GraphSpec(2, [(0, 1)]), "P4 cluster": GraphSpec.cluster(4),
                 "C4 ring": GraphSpec.ring(4), "C6 ring": GraphSpec.ring(6)}


def suite_graph(opts: OptimizerOptions = DEFAULT_OPTIONS) -> list[Check]:
    out = []
    for name, g in GRAPH_BATTERY.items():
        rec = verify_universal_css(g, opts)
        for key, ok in rec.checks().items():
            out.append(Check(f"{name}: {key}", ok, rec.status))
    tri = verify_universal_css(GraphSpec(3, [(0, 1), (1, 2), (0, 2)]), opts)
    out.append(Check("triangle: minimal-rank flag raised", not tri.minimal_rank,
                     f"lambda2 = {_fmt(tri.lambda2)}"))
    for n in (2, 4, 6):
        st = build_graph_state(GraphSpec.cluster(n))
        br = trace_ent_bracket(st, opts)
        g_t = gt(st, opts).value
        want = (1 - 2.0 ** (-n / 2)) ** 2
        out.append(_close(f"cluster {n}: bracket lower", br.lower, want, 1e-6))
        out.append(_close(f"cluster {n}: bracket upper", br.upper, want, 1e-6))
        out.append(Check(f"cluster {n}: bracket strictly below G_t", br.upper <= g_t - 1e-3,
                         f"{_fmt(br.upper)} vs {_fmt(g_t)}"))
    return out


# appendix ------------------------------------------------------------------

FHS_TRIPLES = [(2, 2, 0.5), (1, 2, 0.3), (2, 3, 0.7), (2, 5, 0.1), (3, 4, 0.9),
               (1, 3, 0.95), (1, 4, 0.8), (1, 5, 0.6), (1, 10, 0.5), (2, 9, 0.95),
               (1, 3, 0.5), (1, 4, 0.2), (1, 5, 0.1), (1, 10, 0.1), (2, 7, 0.4)]


def suite_appendix(opts: OptimizerOptions = DEFAULT_OPTIONS, gt_grid: bool = True) -> list[Check]:
    out = []
    for d in (2, 3, 4):
        for p in np.round(np.arange(1, 10) / 10, 1):
            cc = gt_concavity_counterexample(d, p)
            out.append(Check(f"concavity fails d={d} p={p}", cc.violated,
                             f"{_fmt(cc.lhs)} < {_fmt(cc.rhs)}"))
            if gt_grid:
                rho = make_isotropic(IsotropicSpec.from_p(d, p))
                out.append(_close(f"G_t isotropic d={d} p={p}", gt(rho, opts).value,
                                  gt_isotropic_closed(d, p), 1e-4, rho))
    for m, n, q in FHS_TRIPLES:
        sp = FhsSpec(m, n, q)
        fm = fhs_minimum(sp)
        grid, _ = fhs_grid_min(sp)
        out.append(_close(f"fhs ({m},{n},{q}) case {fm.case}", fm.value, grid, 2e-4))
    for k, n, X, Y in ((1, 2.0, 1.0, 0.5), (3, 1.0, 1.0, 1.0), (4, 3.0, 0.7, 0.0), (5, 0.5, 2.0, 3.0)):
        r = constrained_log_min(k, n, X, Y, seed=0)
        out.append(Check(f"log-min k={k} n={n} X={X} Y={Y}", r.ok,
                         f"formula {_fmt(r.value)}, best sample {_fmt(r.sampled_min)}"))
    return out


# families ------------------------------------------------------------------

def suite_families(samples: int = 5, seed: int = 0, opts: OptimizerOptions = DEFAULT_OPTIONS,
                   roof_opts: RoofOptions = DEFAULT_ROOF) -> list[Check]:
    out = []
    for m, n, q in ((1, 2, 0.5), (1, 3, 0.95), (1, 3, 0.5), (2, 3, 0.3), (1, 4, 0.9)):
        spec = MaxCorrSpec.rank2(m, n, q)
        rho = make_maxcorr(spec)
        cf = maxcorr_closed_forms(spec)
        r = convex_roof(rho, "log", opts, roof_opts)
        out.append(_close(f"maxcorr ({m},{n},{q}) log roof, case {rank2_case(m, n, q)}",
                          r.value, cf.g_c_log, 1e-4, rho))
    for d, F in ((2, 0.8), (3, 0.6)):
        rho = make_isotropic(IsotropicSpec(d, F))
        cf = iso_closed_forms(IsotropicSpec(d, F))
        fe = fidelity_extension(rho, opts, roof_opts)
        out.append(_close(f"isotropic d={d} F={F} G_fc", fe.g_f, cf.g_fc, 1e-4, rho))
    for k in range(samples):
        rho = random_density((2, 2), restart_rng(seed, 2_000_000 + k), rank=1 + k % 4)
        r = convex_roof(rho, "log", opts, roof_opts)
        out.append(_close(f"two-qubit[{k}] log roof", r.value,
                          two_qubit_closed_forms(rho).g_c_log, 1e-4, rho))
    return out


# incomparability -----------------------------------------------------------

def incomparability(opts: OptimizerOptions = DEFAULT_OPTIONS, q: float = 0.75) -> list[Check]:
    """Witness pairs showing that several measures are not ordered."""
    out = []
    rho1 = DensityMatrix.from_matrix((2, 2), np.diag([0.5, 0, 0, 0.5]).astype(complex))
    g_m1 = 1 - lambda2_mixed(rho1, opts).lambda2m  # upper bound
    lower_m1 = 1 - np.linalg.eigvalsh(rho1.matrix)[-1]  # Lambda2_m <= largest eigenvalue
    roof1 = convex_roof(rho1, "log", opts)
    g_t1 = gt(rho1, opts).value
    out.append(Check("separable mixed: G_m > 0 = G_c_log",
                     lower_m1 > 0 and roof1.value <= 1e-12,
                     f"G_m in [{_fmt(lower_m1)}, {_fmt(g_m1)}], G_c_log <= {_fmt(roof1.value)}"))
    out.append(Check("separable mixed: G_t > 0 = G_c_log",
                     gt_lower_bound(rho1) > 0 and roof1.value <= 1e-12,
                     f"G_t >= {_fmt(gt_lower_bound(rho1))} (optimizer {_fmt(g_t1)})"))
    bell = make_mes(2)
    g_m2 = 1 - lambda2_mixed(bell, opts).lambda2m
    g_l2 = convex_roof(bell, "log", opts).value
    g_t2 = gt(bell, opts).value
    out.append(Check("pure entangled: G_m < G_c_log = G_f_log", g_m2 < g_l2 - 1e-9,
                     f"{_fmt(g_m2)} < {_fmt(g_l2)} (both exact on two parties)"))
    out.append(Check("pure entangled: G_t < G_c_log = G_f_log", g_t2 < g_l2 - 1e-9,
                     f"{_fmt(g_t2)} < {_fmt(g_l2)}"))
    # two-qutrit maximally correlated state, q |00> + (1-q) (|11> + |22>)/sqrt2
    spec = MaxCorrSpec(3, (0, 1, 3), (q, 1 - q))
    rho2 = make_maxcorr(spec)
    phi = ProductState.from_vectors([np.eye(3)[0], np.eye(3)[0]])
    gt_bound = pure_trace_distance(rho2.matrix, phi.vector()) ** 2
    g_fc = maxcorr_closed_forms(spec).g_c
    out.append(Check(f"two-qutrit q={q}: G_t <= (1-q)^2 < G_fc",
                     gt_bound <= (1 - q) ** 2 + 1e-12 and gt_bound < g_fc,
                     f"G_t <= {_fmt(gt_bound)} (product |00>), G_fc = {_fmt(g_fc)}"))
    out.append(Check("separable mixed: G_t > 0 = G_fc", gt_lower_bound(rho1) > 0,
                     f"G_t >= {_fmt(gt_lower_bound(rho1))}"))
    # same G_fc, opposite G_c_log ordering
    a = MaxCorrSpec(6, (0, 3, 6), (0.5, 0.5))
    b = MaxCorrSpec(6, (0, 2, 6), (1 / 3, 2 / 3))
    ca, cb = maxcorr_closed_forms(a), maxcorr_closed_forms(b)
    ra = convex_roof(make_maxcorr(a), "log", opts).value
    out.append(Check("six-level pair: equal G_fc", abs(ca.g_c - cb.g_c) <= 1e-12 and
                     abs(ca.g_c - 2 / 3) <= 1e-12, f"{_fmt(ca.g_c)} and {_fmt(cb.g_c)}"))
    out.append(Check("six-level pair: G_c_log ordered strictly",
                     ra <= ca.g_c_log + 1e-9 and ra < cb.g_c_log,
                     f"{_fmt(ra)} (roof certificate, closed form {_fmt(ca.g_c_log)}) "
                     f"< {_fmt(cb.g_c_log)}"))
    return out


SUITES: dict[str, Callable[..., list[Check]]] = {
    "hierarchy": suite_hierarchy, "partition": suite_partition, "graph": suite_graph,
    "appendix": suite_appendix, "families": suite_families,
}
