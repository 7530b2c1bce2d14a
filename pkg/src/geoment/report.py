"""All measures of one state, each with a recomputable certificate, plus the
consistency checks between them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .core import DensityMatrix, State, as_density, entropies
from .families import (detect_isotropic, detect_maxcorr, iso_closed_forms, maxcorr_closed_forms,
                       two_qubit_closed_forms)
from .mixed import (expectation, gt, lambda2_mixed, pure_trace_distance, trace_distance_sq,
                    trace_ent_bracket)
from .pure import DEFAULT_OPTIONS, OptimizerOptions
from .roof import DEFAULT_ROOF, RoofOptions, RoofResult, best_of, convex_roof, cross_evaluate

HIERARCHY_SLACK = 5e-6


@dataclass(frozen=True, eq=False)
class MeasureEntry:
    name: str
    value: float
    kind: str  # exact | lower-bound | upper-bound | bracket
    provenance: str
    certificate: Any = None
    upper: float | None = None  # bracket entries only

    @property
    def certified(self) -> float:
        """The end of the value that the certificate backs."""
        return self.upper if self.upper is not None else self.value


@dataclass(eq=False)
class MeasureReport:
    dims: tuple[int, ...]
    entries: list[MeasureEntry]
    violations: list[str] = field(default_factory=list)

    def get(self, name: str) -> MeasureEntry:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def value(self, name: str) -> float:
        return self.get(name).value

    def names(self) -> list[str]:
        return [e.name for e in self.entries]


def _g(x: float) -> str:
    return f"{x + 0.0:.12g}"


def _roof_cert(r: RoofResult) -> dict:
    return {"decomposition": r.decomposition, "member_cps": r.member_cps,
            "member_lambda2": r.per_member_lambda2}


def build_report(state: State, opts: OptimizerOptions = DEFAULT_OPTIONS,
                 roof_opts: RoofOptions = DEFAULT_ROOF) -> MeasureReport:
    rho = as_density(state)
    w = np.linalg.eigvalsh(rho.matrix)
    pure = w[-2] <= 1e-14
    bip = len(rho.dims) == 2
    opt_kind = "exact" if pure and bip else "upper-bound"
    entries: list[MeasureEntry] = []

    lm = lambda2_mixed(rho, opts)
    gt_res = gt(rho, opts, init=[lm.cps])
    lin = convex_roof(rho, "linear", opts, roof_opts)
    log = convex_roof(rho, "log", opts, roof_opts)
    lin = best_of(lin, cross_evaluate(rho, log, "linear"))
    log = best_of(log, cross_evaluate(rho, lin, "log"))
    br = trace_ent_bracket(rho, opts, roof=lin, gt_result=gt_res, lm_result=lm)

    g_fc = lin.value
    entries += [
        MeasureEntry("G_fc", g_fc, opt_kind, "convex roof optimizer", _roof_cert(lin)),
        MeasureEntry("G_f_log", float(-np.log2(1.0 - g_fc)), opt_kind,
                     "from G_fc", _roof_cert(lin)),
        MeasureEntry("G_c_log", log.value, opt_kind, "convex roof optimizer", _roof_cert(log)),
        MeasureEntry("G_m", 1.0 - lm.lambda2m, opt_kind, "product-state optimizer",
                     {"cps": lm.cps}),
        MeasureEntry("G_m_log", float(-np.log2(lm.lambda2m)), opt_kind,
                     "product-state optimizer", {"cps": lm.cps}),
        MeasureEntry("G_t", gt_res.value, opt_kind, "product-state optimizer",
                     {"cps": gt_res.cps}),
        MeasureEntry("E_T", br.lower, "bracket",
                     "exact lower end" if br.lower_exact else "candidate separable states",
                     {"witness": br.witness_upper, "witness_kind": br.witness_kind},
                     upper=br.upper),
    ]
    s, lin_ent = entropies(rho)
    entries += [MeasureEntry("S", s, "exact", "spectrum"),
                MeasureEntry("S_linear", lin_ent, "exact", "spectrum")]
    entries += _closed_form_entries(rho)
    rep = MeasureReport(rho.dims, entries)
    rep.violations = check_hierarchy(rep)
    return rep


def _closed_form_entries(rho: DensityMatrix) -> list[MeasureEntry]:
    out = []
    if rho.purity() >= 1 - 1e-9:
        return out
    if rho.dims == (2, 2):
        cf = two_qubit_closed_forms(rho)
        src = "two-qubit concurrence"
        vals = {"G_fc": cf.g_c, "G_f_log": cf.g_f_log, "G_c_log": cf.g_c_log}
    else:
        hit = detect_maxcorr(rho)
        if hit is not None:
            cf = maxcorr_closed_forms(hit[0])
            src = "maximally correlated closed form"
            vals = {"G_fc": cf.g_c, "G_f_log": cf.g_f_log, "G_m": cf.g_m, "G_m_log": cf.g_m_log}
            if cf.g_c_log is not None:
                vals["G_c_log"] = cf.g_c_log
        else:
            spec = detect_isotropic(rho)
            if spec is None:
                return out
            cf = iso_closed_forms(spec)
            src = "isotropic closed form"
            vals = {"G_fc": cf.g_fc, "G_f_log": cf.g_f_log, "G_c_log": cf.g_c_log,
                    "G_m": cf.g_m, "G_m_log": cf.g_m_log, "G_t": cf.g_t}
    for k, v in vals.items():
        out.append(MeasureEntry(f"{k}[closed]", float(v), "exact", src))
    return out


def check_hierarchy(rep: MeasureReport, slack: float = HIERARCHY_SLACK) -> list[str]:
    """Pairs (a, b) where a certified lower value exceeds a certified upper value."""
    v = {e.name: e for e in rep.entries}
    et = v["E_T"]
    pairs = [("E_T.lower", et.value, "E_T.upper", et.upper),
             ("E_T.upper", et.upper, "G_t", v["G_t"].value),
             ("E_T.upper", et.upper, "G_fc", v["G_fc"].value),
             ("G_t", v["G_t"].value, "G_m", v["G_m"].value),
             ("G_fc", v["G_fc"].value, "G_m", v["G_m"].value),
             ("G_m", v["G_m"].value, "G_m_log", v["G_m_log"].value),
             ("G_fc", v["G_fc"].value, "G_f_log", v["G_f_log"].value),
             ("G_f_log", v["G_f_log"].value, "G_c_log", v["G_c_log"].value),
             ("G_c_log", v["G_c_log"].value, "G_m_log", v["G_m_log"].value)]
    # exact values can never exceed certified upper bounds
    for name, e in v.items():
        if name.endswith("[closed]"):
            base = name[:-len("[closed]")]
            pairs.append((name, e.value, base, v[base].value))
            if base in ("G_fc", "G_c_log", "G_f_log"):
                up = "G_m" if base == "G_fc" else "G_m_log"
                pairs.append((name, e.value, up, v[up].value))
    out = []
    for a, va, b, vb in pairs:
        if va > vb + slack:
            out.append(f"{a} = {_g(va)} exceeds {b} = {_g(vb)}")
    return out


def recompute(entry: MeasureEntry, state: State) -> float | None:
    """Re-derive an optimizer value from its certificate alone.

    Compare the result with ``entry.certified``; brackets recompute their upper end.
    """
    rho = as_density(state)
    c = entry.certificate
    if c is None:
        return None
    if entry.name in ("G_m", "G_m_log"):
        lam = expectation(rho, c["cps"])
        return 1.0 - lam if entry.name == "G_m" else float(-np.log2(lam))
    if entry.name == "G_t":
        return pure_trace_distance(rho.matrix, c["cps"].vector()) ** 2
    if entry.name == "E_T":
        return trace_distance_sq(rho.matrix, c["witness"].matrix)
    if entry.name in ("G_fc", "G_f_log", "G_c_log"):
        dec = c["decomposition"]
        if dec.reconstruction_error(rho) > 1e-8:
            return float("nan")
        lam = np.array([abs(np.vdot(cp.vector(), psi.amplitudes)) ** 2
                        for cp, (_, psi) in zip(c["member_cps"], dec.members)])
        p = dec.weights
        if entry.name == "G_c_log":
            return float(np.sum(p * -np.log2(lam)))
        g = float(np.sum(p * (1 - lam)))
        return g if entry.name == "G_fc" else float(-np.log2(1 - g))
    return None


def render(rep: MeasureReport, fmt: str = "text") -> str:
    if fmt == "machine":
        doc = {"dims": list(rep.dims), "measures": [], "violations": rep.violations}
        for e in rep.entries:
            d = {"name": e.name, "value": _g(e.value), "kind": e.kind, "path": e.provenance}
            if e.upper is not None:
                d["upper"] = _g(e.upper)
            doc["measures"].append(d)
        return json.dumps(doc, sort_keys=True) + "\n"
    lines = [f"dims {list(rep.dims)}"]
    for e in rep.entries:
        val = f"[{_g(e.value)}, {_g(e.upper)}]" if e.upper is not None else _g(e.value)
        lines.append(f"{e.name:<16} {val:<40} {e.kind:<12} {e.provenance}")
    for v in rep.violations:
        lines.append(f"VIOLATION {v}")
    return "\n".join(lines) + "\n"


def _vec(v: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in np.asarray(v).reshape(-1)]


def certificates_json(rep: MeasureReport) -> str:
    """Certificate payloads in the state-file number format."""
    out = {}
    for e in rep.entries:
        c = e.certificate
        if c is None:
            continue
        d: dict[str, Any] = {}
        if "cps" in c:
            d["cps"] = [_vec(f) for f in c["cps"].factors]
        if "witness" in c:
            d["witness_kind"] = c["witness_kind"]
            d["witness"] = [_vec(row) for row in c["witness"].matrix]
        if "decomposition" in c:
            d["members"] = [{"weight": p, "state": _vec(s.amplitudes),
                             "cps": [_vec(f) for f in cp.factors], "lambda2": lam}
                            for (p, s), cp, lam in zip(c["decomposition"].members,
                                                       c["member_cps"], c["member_lambda2"])]
        out[e.name] = d
    return json.dumps(out) + "\n"
