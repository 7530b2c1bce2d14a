"""Command-line front end.

Exit codes: 0 success, 1 verification failures, 2 unparseable input,
3 size budget exceeded, 4 internal hierarchy violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import appendix, families, graphs
from .core import PureState, as_density
from .errors import BudgetError, DimensionError, GeomentError, InvalidStateError, StateFileError
from .mixed import gt, gt_lower_bound, lambda2_mixed, trace_ent_bracket
from .pure import OptimizerOptions, lambda2_pure
from .report import build_report, certificates_json, render
from .roof import convex_roof, equal_overlap_decomposition, fidelity_extension
from .statefile import load_state, save_state
from .verify import SUITES, incomparability

EXIT_FAIL, EXIT_PARSE, EXIT_BUDGET, EXIT_HIERARCHY = 1, 2, 3, 4


class Output:
    """Ordered key/value output, rendered as aligned text or one JSON object."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.items: list[tuple[str, Any]] = []

    def add(self, key: str, value: Any):
        self.items.append((key, value))

    @staticmethod
    def _conv(v: Any) -> Any:
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if isinstance(v, (float, np.floating)):
            return f"{float(v) + 0.0:.12g}"
        if isinstance(v, (int, np.integer)):
            return int(v)
        if isinstance(v, complex):
            return [Output._conv(v.real), Output._conv(v.imag)]
        if isinstance(v, np.ndarray):
            return [Output._conv(x) for x in v.tolist()]
        if isinstance(v, (list, tuple)):
            return [Output._conv(x) for x in v]
        if isinstance(v, dict):
            return {str(k): Output._conv(x) for k, x in v.items()}
        return str(v)

    def render(self) -> str:
        if self.fmt == "machine":
            return json.dumps({k: self._conv(v) for k, v in self.items}) + "\n"
        width = max((len(k) for k, _ in self.items), default=0)
        lines = []
        for k, v in self.items:
            c = self._conv(v)
            text = c if isinstance(c, str) else json.dumps(c)
            lines.append(f"{k:<{width}}  {text}")
        return "\n".join(lines) + "\n"


def _opts(args) -> OptimizerOptions:
    return OptimizerOptions(restarts=args.restarts, max_sweeps=args.max_sweeps, tol=args.tol,
                            seed=args.seed)


def _factors(p) -> list:
    return [np.round(f, 15) for f in p.factors]


def _load(path: str):
    return load_state(path)


# subcommands ---------------------------------------------------------------

def cmd_pure(args, out: Output):
    st = _load(args.state)
    if not isinstance(st, PureState):
        rho = as_density(st)
        w, v = np.linalg.eigh(rho.matrix)
        if w[-2] > 1e-12:
            raise InvalidStateError("the pure-state measures need a rank-one state")
        st = PureState.from_vector(rho.dims, v[:, -1])
    r = lambda2_pure(st, _opts(args))
    out.add("lambda2", r.lambda2)
    out.add("G", 1 - r.lambda2)
    out.add("G_log", -np.log2(r.lambda2))
    out.add("certificate", "exact" if len(st.dims) == 2 else "lower bound on lambda2")
    out.add("cps", _factors(r.cps))


def cmd_lambda_m(args, out: Output):
    rho = as_density(_load(args.state))
    r = lambda2_mixed(rho, _opts(args))
    out.add("lambda2_m", r.lambda2m)
    out.add("G_m", 1 - r.lambda2m)
    out.add("G_m_log", -np.log2(r.lambda2m))
    out.add("converged", r.converged)
    out.add("cps", _factors(r.cps))


def cmd_gt(args, out: Output):
    rho = as_density(_load(args.state))
    lm = lambda2_mixed(rho, _opts(args))
    r = gt(rho, _opts(args), init=[lm.cps])
    out.add("G_t", r.value)
    out.add("G_t_lower", gt_lower_bound(rho))
    out.add("converged", r.converged)
    out.add("cps", _factors(r.cps))


def cmd_tet_bracket(args, out: Output):
    rho = as_density(_load(args.state))
    br = trace_ent_bracket(rho, _opts(args))
    out.add("lower", br.lower)
    out.add("upper", br.upper)
    out.add("lower_exact", br.lower_exact)
    out.add("witness", br.witness_kind)
    if args.witness_out:
        save_state(br.witness_upper, args.witness_out)


def _roof_lines(r, out: Output):
    out.add("members", len(r.decomposition))
    out.add("weights", r.decomposition.weights)
    out.add("member_lambda2", list(r.per_member_lambda2))


def cmd_roof(args, out: Output):
    rho = _load(args.state)
    r = convex_roof(rho, args.kind, _opts(args))
    out.add(f"G_c{'_log' if r.kind == 'log' else ''}", r.value)
    out.add("certificate", "upper bound")
    _roof_lines(r, out)
    if args.dump_certs:
        _dump_decomposition(r, args.dump_certs)


def _dump_decomposition(r, path: str):
    doc = {"kind": r.kind, "value": r.value,
           "members": [{"weight": p, "state": [[z.real, z.imag] for z in s.amplitudes],
                        "lambda2": lam,
                        "cps": [[[z.real, z.imag] for z in f] for f in cp.factors]}
                       for (p, s), lam, cp in zip(r.decomposition.members, r.per_member_lambda2,
                                                  r.member_cps)]}
    Path(path).write_text(json.dumps(doc) + "\n")


def cmd_fidelity_ext(args, out: Output):
    rho = _load(args.state)
    fe = fidelity_extension(rho, _opts(args))
    out.add("G_f", fe.g_f)
    out.add("G_f_log", fe.g_f_log)
    out.add("lambda2_f", fe.lambda2f)
    out.add("css_fidelity2", fe.css_fidelity2)
    if args.css_out:
        save_state(fe.css, args.css_out)


def cmd_equal_overlap(args, out: Output):
    rho = as_density(_load(args.state))
    if args.phi:
        phi = _load(args.phi)
        if not isinstance(phi, PureState):
            raise InvalidStateError("--phi must be a pure state file")
        vec = phi.amplitudes
    else:
        vec = lambda2_mixed(rho, _opts(args)).cps.vector()
    dec = equal_overlap_decomposition(rho, vec)
    g = float(np.real(np.vdot(vec, rho.matrix @ vec)))
    out.add("target_overlap", g)
    out.add("members", len(dec))
    out.add("weights", dec.weights)
    out.add("overlaps", [abs(np.vdot(vec, s.amplitudes)) ** 2 for _, s in dec.members])
    out.add("reconstruction_error", dec.reconstruction_error(rho))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def cmd_family(args, out: Output):
    name = args.family
    parties = args.n or 3
    state = None
    if name == "mes":
        state = families.make_mes(args.d)
    elif name == "ghz":
        state = families.make_ghz(parties, args.d)
    elif name == "w":
        state = families.make_w(parties)
    elif name == "dicke":
        state = families.make_dicke(parties, args.k)
    elif name == "iso":
        if (args.p is None) == (args.F is None):
            raise ValueError("give exactly one of --p and --F")
        spec = (families.IsotropicSpec.from_p(args.d, args.p) if args.p is not None
                else families.IsotropicSpec.from_F(args.d, args.F))
        state = families.make_isotropic(spec)
        cf = families.iso_closed_forms(spec)
        out.add("d", spec.d)
        out.add("F", spec.F)
        out.add("p", spec.p)
        for k in ("separable", "lambda2_m", "g_m", "g_m_log", "g_fc", "g_f_log", "g_c_log", "g_t"):
            out.add(k, getattr(cf, k))
    elif name == "maxcorr":
        if args.partition:
            parts = [int(x) for x in args.partition.split(",")]
            spec = families.MaxCorrSpec(parts[-1], tuple(parts), tuple(_floats(args.weights)))
        else:
            spec = families.MaxCorrSpec.rank2(args.m, args.n or 2, args.q)
        state = families.make_maxcorr(spec)
        cf = families.maxcorr_closed_forms(spec)
        out.add("partition", list(spec.partition))
        out.add("weights", list(spec.weights))
        for k in ("g_c", "g_f_log", "lambda2_m", "g_m", "g_m_log", "g_c_log", "g_c_log_case", "label"):
            out.add(k, getattr(cf, k))
        if cf.decomposition is not None:
            out.add("optimal_weights", cf.decomposition.weights)
    if isinstance(state, PureState):
        r = lambda2_pure(state, _opts(args))
        out.add("lambda2", r.lambda2)
        out.add("G", 1 - r.lambda2)
        out.add("G_log", -np.log2(r.lambda2))
    if args.out:
        save_state(state, args.out)


def cmd_classify(args, out: Output):
    st = _load(args.state)
    label, ev = families.classify(st, _opts(args))
    out.add("label", label.value)
    for k in sorted(ev):
        v = ev[k]
        if k == "spec":
            v = repr(v)
        out.add(k, v)


def cmd_graph(args, out: Output):
    if args.cluster:
        g = graphs.GraphSpec.cluster(args.cluster)
    elif args.ring:
        g = graphs.GraphSpec.ring(args.ring)
    elif args.edges is not None:
        g = graphs.GraphSpec.parse(args.edges, args.vertices)
    else:
        raise ValueError("give --edges, --cluster or --ring")
    an = graphs.analyze_graph(g)
    out.add("vertices", g.vertex_count)
    out.add("edges", [list(e) for e in g.edge_list()])
    out.add("alpha", list(an.alpha))
    out.add("beta", list(an.beta))
    out.add("d_alpha", an.d_alpha)
    if args.verify or args.delta_out:
        rec = graphs.verify_universal_css(g, _opts(args))
        out.add("minimal_rank", rec.minimal_rank)
        out.add("status", rec.status)
        out.add("lambda2", rec.lambda2)
        out.add("trace_distance", rec.trace_distance)
        out.add("fidelity2", rec.fidelity2)
        out.add("relative_entropy", rec.relative_entropy)
        out.add("eigen_error", rec.eigen_error)
        out.add("projector_error", rec.projector_error)
        for k, ok in rec.checks().items():
            out.add(f"check_{k}", ok)
        if args.delta_out:
            save_state(rec.delta, args.delta_out)


def cmd_appendix(args, out: Output):
    if args.which == "gt-iso":
        out.add("G_t", appendix.gt_isotropic_closed(args.d, args.p))
        if 0 < args.p < 1:
            cc = appendix.gt_concavity_counterexample(args.d, args.p)
            out.add("chord", cc.rhs)
            out.add("concavity_violated", cc.violated)
    elif args.which == "fhs":
        sp = appendix.FhsSpec(args.m, args.n, args.q)
        fm = appendix.fhs_minimum(sp)
        out.add("value", fm.value)
        out.add("argmin", list(fm.argmin))
        out.add("case", fm.case)
        if args.grid:
            gv, ga = appendix.fhs_grid_min(sp, args.grid)
            out.add("grid_value", gv)
            out.add("grid_argmin", list(ga))
    else:
        r = appendix.constrained_log_min(args.k, args.n, args.X, args.Y, seed=args.seed)
        out.add("value", r.value)
        out.add("sampled_min", r.sampled_min)
        out.add("samples", r.samples)
        out.add("ok", r.ok)


def _run_checks(checks, out_stream, dump_dir: str | None, suite: str) -> int:
    fails = 0
    for i, c in enumerate(checks):
        if c.ok:
            out_stream.write(f"PASS {c.name}: {c.detail}\n")
            continue
        fails += 1
        line = f"FAIL {c.name}: {c.detail}"
        if c.state is not None:
            path = Path(dump_dir or ".") / f"verify-{suite}-{i}.json"
            save_state(c.state, path)
            line += f" (reproducer {path})"
        out_stream.write(line + "\n")
    out_stream.write(f"RESULT pass={len(checks) - fails} fail={fails}\n")
    return EXIT_FAIL if fails else 0


def cmd_verify(args) -> int:
    fn = SUITES[args.suite]
    opts = _opts(args)
    if args.suite == "hierarchy":
        dims = tuple(int(x) for x in args.dims.split(","))
        checks = fn(samples=args.samples, seed=args.seed, dims=dims, opts=opts)
    elif args.suite == "families":
        checks = fn(samples=args.samples, seed=args.seed, opts=opts)
    else:
        checks = fn(opts=opts)
    return _run_checks(checks, sys.stdout, args.dump_dir, args.suite)


def cmd_report(args) -> int:
    st = _load(args.state)
    rep = build_report(st, _opts(args))
    sys.stdout.write(render(rep, args.format))
    if args.dump_certs:
        Path(args.dump_certs).write_text(certificates_json(rep))
    if rep.violations:
        sys.stderr.write("internal error: measure hierarchy violated\n")
        sys.stderr.write(certificates_json(rep))
        return EXIT_HIERARCHY
    return 0


def cmd_incomparability(args) -> int:
    return _run_checks(incomparability(_opts(args)), sys.stdout, None, "incomparability")


# parser --------------------------------------------------------------------

def _common(suppress: bool) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--restarts", type=int, default=d(32))
    p.add_argument("--tol", type=float, default=d(1e-12))
    p.add_argument("--max-sweeps", type=int, default=d(10_000))
    p.add_argument("--format", choices=("text", "machine"), default=d("text"))
    p.add_argument("--dump-certs", metavar="PATH", default=d(None),
                   help="write certificates as JSON (report, roof)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="geoment", parents=[_common(False)],
                                     description="Geometric measures of entanglement.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(True)

    def add(name, help_):
        return sub.add_parser(name, parents=[common], help=help_)

    for name, help_ in (("pure", "overlap with product states of a pure state"),
                        ("lambda-m", "maximal product-state expectation"),
                        ("gt", "squared trace distance to pure product states"),
                        ("report", "all measures with certificates"),
                        ("classify", "partition label with evidence")):
        add(name, help_).add_argument("state")
    p = add("tet-bracket", "bracket for the squared trace distance to separable states")
    p.add_argument("state")
    p.add_argument("--witness-out")
    p = add("roof", "convex-roof upper bound")
    p.add_argument("state")
    p.add_argument("--kind", choices=("linear", "log"), default="linear")
    p = add("fidelity-ext", "fidelity-of-separability values")
    p.add_argument("state")
    p.add_argument("--css-out")
    p = add("equal-overlap", "decomposition with equal overlaps")
    p.add_argument("state")
    p.add_argument("--phi", help="pure state file; defaults to the closest product state")
    p = add("family", "construct a named state and its closed forms")
    p.add_argument("family", choices=("iso", "maxcorr", "mes", "ghz", "w", "dicke"))
    p.add_argument("--d", type=int, default=2)
    p.add_argument("--n", type=int, help="number of parties, or the second block size for maxcorr")
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--p", type=float)
    p.add_argument("--F", type=float)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--q", type=float, default=0.5)
    p.add_argument("--partition")
    p.add_argument("--weights")
    p.add_argument("--out")
    p = add("graph", "graph-state analysis")
    p.add_argument("--edges")
    p.add_argument("--vertices", type=int)
    p.add_argument("--cluster", type=int)
    p.add_argument("--ring", type=int)
    p.add_argument("--verify", action="store_true")
    p.add_argument("--delta-out")
    p = add("appendix", "auxiliary closed forms")
    asub = p.add_subparsers(dest="which", required=True)
    a = asub.add_parser("gt-iso", parents=[common])
    a.add_argument("--d", type=int, required=True)
    a.add_argument("--p", type=float, required=True)
    a = asub.add_parser("fhs", parents=[common])
    a.add_argument("--m", type=float, required=True)
    a.add_argument("--n", type=float, required=True)
    a.add_argument("--q", type=float, required=True)
    a.add_argument("--grid", type=int, default=0)
    a = asub.add_parser("logmin", parents=[common])
    a.add_argument("--k", type=int, required=True)
    a.add_argument("--n", type=float, required=True)
    a.add_argument("--X", type=float, required=True)
    a.add_argument("--Y", type=float, required=True)
    p = add("verify", "run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--samples", type=int, default=20)
    p.add_argument("--dims", default="2,2")
    p.add_argument("--dump-dir")
    add("incomparability", "witnesses for unordered measure pairs")
    return parser


_HANDLERS = {"pure": cmd_pure, "lambda-m": cmd_lambda_m, "gt": cmd_gt,
             "tet-bracket": cmd_tet_bracket, "roof": cmd_roof, "fidelity-ext": cmd_fidelity_ext,
             "equal-overlap": cmd_equal_overlap, "family": cmd_family, "classify": cmd_classify,
             "graph": cmd_graph, "appendix": cmd_appendix}


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args)
        if args.command == "report":
            return cmd_report(args)
        if args.command == "incomparability":
            return cmd_incomparability(args)
        out = Output(args.format)
        _HANDLERS[args.command](args, out)
        sys.stdout.write(out.render())
        return 0
    except BudgetError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_BUDGET
    except (StateFileError, DimensionError, InvalidStateError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except GeomentError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
