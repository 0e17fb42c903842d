"""Command-line front end: evaluate figure scripts, run checks, render
SVG, and drive the continued-fraction, extension and triangle tools.

Exit codes: 0 success (all checks true, nothing infeasible), 1 a check
or verdict failed, 2 parse or validation error, 3 solve overflow,
4 degenerate input.  MOEBINV_EPS overrides the comparison tolerance.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from fractions import Fraction
from typing import List, Optional

from .contfrac import (ContinuedFraction, InvalidCF, chain, convergents,
                       orthogonality_residual, quotient, seidel_stern_check,
                       tangency_residual)
from .cycle import Cycle, Metric, parse_metric
from .figure import (Degenerate, DuplicateLabel, Figure, NotEvaluated,
                     TooManyInstances, UnknownNode, nine_point_figure)
from .numerics import (RadicalClash, format_scalar, is_exact, parse_scalar,
                       to_float)
from .poincare import NotAligned, classify_intervals, extension_from_triple
from .relations import BranchOverflow, IsTangent, solve
from .render import Viewport, render_chain, render_figure

OK, FAIL, PARSE, OVERFLOW, DEGENERATE = 0, 1, 2, 3, 4

REPORT_FORMAT = "report-v1"


class CliError(Exception):
    def __init__(self, message: str, code: int = PARSE):
        super().__init__(message)
        self.code = code


def _fmt_scalar(v) -> str:
    return format_scalar(v) if is_exact(v) else repr(to_float(v))


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_script(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as err:
        raise CliError(f"cannot read {path}: {err}")
    except json.JSONDecodeError as err:
        raise CliError(
            f"{path}:{err.lineno}:{err.colno}: {err.msg}")


def _build_figure(args) -> tuple:
    obj = _load_script(args.script)
    if args.metric:
        obj["metric"] = args.metric
    if args.arith:
        obj["arithmetic"] = args.arith
    extras = {"checks": obj.pop("checks", []),
              "measures": obj.pop("measures", [])}
    try:
        fig = Figure.from_obj(obj)
    except (UnknownNode, DuplicateLabel, KeyError) as err:
        raise CliError(f"script error: {err}")
    except TooManyInstances as err:
        raise CliError(str(err), OVERFLOW)
    except NotEvaluated as err:
        raise CliError(f"script error: {err}")
    except ValueError as err:
        raise CliError(f"script error: {err}")
    return fig, extras


def _figure_report(fig: Figure) -> dict:
    nodes = []
    for label in fig.labels():
        node = fig.node(label)
        entry = {
            "label": label,
            "kind": node.kind,
            "generation": node.generation,
            "status": node.status,
            "instances": [[_fmt_scalar(v) for v in inst.cycle.row()]
                          for inst in node.instances],
        }
        if node.reason:
            entry["reason"] = node.reason
        nodes.append(entry)
    return {"format": REPORT_FORMAT,
            "metric": fig.metric.label(),
            "arithmetic": fig.arithmetic,
            "nodes": nodes,
            "violations": fig.validate()}


def _report_text(report: dict) -> str:
    lines = [f"metric {report['metric']}  arithmetic {report['arithmetic']}"]
    for node in report["nodes"]:
        head = (f"{node['label']}: gen {node['generation']} "
                f"{node['status']}")
        if node.get("reason"):
            head += f" ({node['reason']})"
        lines.append(head)
        for row in node["instances"]:
            lines.append("  (" + ", ".join(row) + ")")
    for v in report["violations"]:
        lines.append(f"violation: {v}")
    return "\n".join(lines) + "\n"


def cmd_figure_eval(args) -> int:
    fig, _ = _build_figure(args)
    report = _figure_report(fig)
    if args.format == "json":
        _emit(json.dumps(report, indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(_report_text(report), args.out)
    bad = any(n["status"] == "infeasible" for n in report["nodes"])
    return FAIL if bad or report["violations"] else OK


def cmd_figure_check(args) -> int:
    fig, extras = _build_figure(args)
    checks = extras["checks"]
    if not checks:
        raise CliError("script declares no checks")
    verdicts, details = [], []
    for spec in checks:
        try:
            results = fig.check_rel(spec["a"], spec["b"], spec["kind"])
        except (UnknownNode, KeyError) as err:
            raise CliError(f"check error: {err}")
        except NotEvaluated as err:
            raise CliError(f"check error: {err}")
        verdict = bool(results) and all(ok for _, ok, _ in results)
        verdicts.append(verdict)
        details.append({
            "a": spec["a"], "b": spec["b"], "kind": spec["kind"],
            "verdict": verdict,
            "pairs": [{"instances": list(pair), "holds": ok,
                       "residual": _fmt_scalar(res)}
                      for pair, ok, res in results]})
    measured = []
    for spec in extras["measures"]:
        values = fig.measure(spec["a"], spec["b"], spec["quantity"])
        measured.append({
            "a": spec["a"], "b": spec["b"], "quantity": spec["quantity"],
            "values": [{"instances": list(pair), "value": _fmt_scalar(v)}
                       for pair, v in values]})
    if args.format == "json":
        _emit(json.dumps({"format": REPORT_FORMAT, "checks": details,
                          "measures": measured},
                         indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [",".join("true" if v else "false" for v in verdicts)]
        for m in measured:
            vals = "; ".join(v["value"] for v in m["values"])
            lines.append(f"{m['quantity']}({m['a']}, {m['b']}) = {vals}")
        _emit("\n".join(lines) + "\n", args.out)
    return OK if all(verdicts) else FAIL


def _viewport(args) -> Viewport:
    kw = {}
    if args.viewport:
        kw.update(zip(("umin", "umax", "vmin", "vmax"), args.viewport))
    if args.size:
        kw["width"], kw["height"] = args.size
    return Viewport(**kw)


def cmd_figure_render(args) -> int:
    fig, _ = _build_figure(args)
    _emit(render_figure(fig, _viewport(args), labels=args.labels), args.out)
    return OK


def cmd_contfrac(args) -> int:
    try:
        cf = ContinuedFraction.parse(args.cf)
    except (InvalidCF, ValueError) as err:
        raise CliError(f"bad continued fraction: {err}")
    steps = args.steps if args.steps is not None else len(cf.terms)
    try:
        pairs = convergents(cf, steps)
        ch = chain(cf, steps, args.arrangement)
    except InvalidCF as err:
        raise CliError(str(err))
    report = seidel_stern_check(ch)
    # arrangement 1 makes consecutive horocycles touch, 2 and 3 make them
    # meet at right angles
    expected_zero = (tangency_residual if args.arrangement == "tangent"
                     else orthogonality_residual)
    residuals = [expected_zero(prev, here)
                 for prev, here in zip(ch.horocycles, ch.horocycles[1:])]
    payload = {
        "format": REPORT_FORMAT,
        "cf": args.cf,
        "arrangement": args.arrangement,
        "convergents": [[_fmt_scalar(p), _fmt_scalar(q)] for p, q in pairs],
        "residuals": [_fmt_scalar(r) for r in residuals],
        "nested": report.nested,
        "converges": report.converges,
    }
    if args.svg:
        _emit(render_chain(ch, _viewport(args)), args.svg)
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = [f"{args.cf} [{args.arrangement}]"]
        for p, q in pairs:
            value = quotient((p, q))
            shown = "oo" if value is None else _fmt_scalar(value)
            lines.append(f"  {_fmt_scalar(p)}/{_fmt_scalar(q)} = {shown}")
        lines.append("step residuals: "
                     + ", ".join(_fmt_scalar(r) for r in residuals))
        lines.append(f"nested: {report.nested}  converges: {report.converges}")
        _emit("\n".join(lines) + "\n", args.out)
    return OK


def _endpoint(text: str):
    if text in ("inf", "oo"):
        raise CliError("infinite endpoints are not supported here")
    try:
        return parse_scalar(text, "exact")
    except ValueError as err:
        raise CliError(f"bad endpoint {text!r}: {err}")


def cmd_poincare(args) -> int:
    pairs = []
    for spec in args.pairs:
        if ":" not in spec:
            raise CliError(f"pair {spec!r} must look like x:y")
        x, y = spec.split(":", 1)
        pairs.append((_endpoint(x), _endpoint(y)))
    if len(pairs) != 3:
        raise CliError("exactly three aligned pairs are required")
    try:
        kind, disc = classify_intervals(pairs)
        tau, form = extension_from_triple(pairs)
    except (NotAligned, ValueError) as err:
        raise CliError(f"bad triple: {err}", DEGENERATE)
    point = form.point()
    payload = {
        "format": REPORT_FORMAT,
        "kind": kind,
        "tau": tau,
        "discriminant": _fmt_scalar(disc),
        "form": [_fmt_scalar(v) for v in form],
        "point": None if point is None else [_fmt_scalar(c) for c in point],
    }
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        at = "boundary (infinity)" if point is None else \
            "(" + ", ".join(_fmt_scalar(c) for c in point) + ")"
        _emit(f"{kind} (tau {tau}), extension point {at}\n", args.out)
    return OK


def _coords(text: str, n: int = 2):
    parts = text.split(",")
    if len(parts) != n:
        raise CliError(f"expected {n} comma-separated coordinates, "
                       f"got {text!r}")
    return tuple(_endpoint(p) for p in parts)


def _ninepoint_payload(result) -> dict:
    return {
        "verdict": result.verdict,
        "kind": result.kind,
        "conic": [_fmt_scalar(v) for v in result.conic.canonical().row()],
        "points": {lab: None if pt is None else
                   [_fmt_scalar(c) for c in pt]
                   for lab, pt in sorted(result.points.items())},
    }


def cmd_ninepoint(args) -> int:
    metric = parse_metric(args.metric) if args.metric else None
    if args.random:
        rng = random.Random(args.seed)
        runs = []
        all_true = True
        done = 0
        while done < args.random:
            tri = [(Fraction(rng.randint(-9, 9), rng.randint(1, 4)),
                    Fraction(rng.randint(-9, 9), rng.randint(1, 4)))
                   for _ in range(3)]
            try:
                res = nine_point_figure(*tri, metric=metric,
                                        arithmetic=args.arith or "exact")
            except Degenerate:
                continue
            runs.append({"triangle": [[_fmt_scalar(c) for c in p]
                                      for p in tri],
                         "verdict": res.verdict, "kind": res.kind})
            all_true = all_true and res.verdict
            done += 1
        payload = {"format": REPORT_FORMAT, "runs": runs,
                   "all_true": all_true}
        if args.format == "json":
            _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                  args.out)
        else:
            _emit(f"{done} triangles, all on the conic: {all_true}\n",
                  args.out)
        return OK if all_true else FAIL
    if not args.triangle:
        raise CliError("provide --triangle or --random")
    a, b, c = (_coords(t) for t in args.triangle)
    n = None if args.n in (None, "inf") else _coords(args.n)
    try:
        res = nine_point_figure(a, b, c, n=n, metric=metric,
                                arithmetic=args.arith or "exact")
    except Degenerate as err:
        raise CliError(f"degenerate configuration: {err}", DEGENERATE)
    if args.svg:
        _emit(render_figure(res.figure, _viewport(args)), args.svg)
    payload = dict(_ninepoint_payload(res), format=REPORT_FORMAT)
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        conic = ", ".join(payload["conic"])
        _emit(f"verdict: {res.verdict}\nkind: {res.kind}\n"
              f"conic: ({conic})\n", args.out)
    return OK if res.verdict else FAIL


_SIGN_NAMES = {"e": "external", "i": "internal"}


def cmd_apollonius(args) -> int:
    metric = parse_metric(args.metric) if args.metric else Metric.named("e")
    refs = [Cycle.from_row(metric, _coords(t, metric.n + 2))
            for t in args.cycle]
    if args.arith == "float":
        refs = [c.as_float() for c in refs]
    if args.signs == "all":
        combos = [a + b + c for a in "ei" for b in "ei" for c in "ei"]
    else:
        combos = args.signs.split(",")
        for combo in combos:
            if len(combo) != 3 or any(s not in "ei" for s in combo):
                raise CliError(f"bad sign combo {combo!r}: "
                               "three letters from e/i")
    branches = []
    for combo in combos:
        rels = [IsTangent(ref, _SIGN_NAMES[s])
                for ref, s in zip(refs, combo)]
        try:
            sols = solve(rels, metric, args.arith or "exact")
        except BranchOverflow:
            raise CliError("branch overflow", OVERFLOW)
        except RadicalClash as err:
            raise CliError(f"mixed radicals stay out of reach of exact "
                           f"arithmetic ({err}); rerun with --arith float")
        entry = {"signs": combo, "status": sols.status, "solutions": []}
        for sol in sols:
            row = sol.canonical().row()
            residuals = [tangency_residual(sol, ref) for ref in refs]
            entry["solutions"].append({
                "row": [_fmt_scalar(v) for v in row],
                "residuals": [_fmt_scalar(r) for r in residuals]})
        branches.append(entry)
    payload = {"format": REPORT_FORMAT, "branches": branches}
    if args.format == "json":
        _emit(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)
    else:
        lines = []
        for entry in branches:
            lines.append(f"[{entry['signs']}] {entry['status']}")
            for sol in entry["solutions"]:
                lines.append("  (" + ", ".join(sol["row"]) + ")")
        _emit("\n".join(lines) + "\n", args.out)
    return OK


def _parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="cyclekit",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = top.add_subparsers(dest="command", required=True)

    def shared(p, svg=False):
        p.add_argument("--metric", help='e, p, h or "p,q,r"')
        p.add_argument("--arith", choices=("exact", "float"))
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write output here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="text")
        if svg:
            p.add_argument("--viewport", type=float, nargs=4,
                           metavar=("UMIN", "UMAX", "VMIN", "VMAX"))
            p.add_argument("--size", type=int, nargs=2,
                           metavar=("WIDTH", "HEIGHT"))

    p = sub.add_parser("figure-eval", help="evaluate a figure script")
    p.add_argument("script")
    shared(p)
    p.set_defaults(func=cmd_figure_eval)

    p = sub.add_parser("figure-check", help="run a script's checks")
    p.add_argument("script")
    shared(p)
    p.set_defaults(func=cmd_figure_check)

    p = sub.add_parser("figure-render", help="render a figure script to SVG")
    p.add_argument("script")
    p.add_argument("--labels", action="store_true")
    shared(p, svg=True)
    p.set_defaults(func=cmd_figure_render)

    p = sub.add_parser("contfrac",
                       help="convergents and horocycle chain of a fraction")
    p.add_argument("--cf", required=True, help='like "3;7,15,1,292"')
    p.add_argument("--steps", type=int)
    p.add_argument("--arrangement", default="tangent",
                   choices=("tangent", "orthogonal", "ortho45"))
    p.add_argument("--svg", help="also write the chain as SVG here")
    shared(p, svg=True)
    p.set_defaults(func=cmd_contfrac)

    p = sub.add_parser("poincare",
                       help="classify an aligned triple and extend it")
    p.add_argument("--pairs", nargs=3, required=True, metavar="X:Y")
    shared(p)
    p.set_defaults(func=cmd_poincare)

    p = sub.add_parser("ninepoint", help="nine-point conic of a triangle")
    p.add_argument("--triangle", nargs=3, metavar="X,Y")
    p.add_argument("--n", help='finite stand-in point "u,v" or "inf"')
    p.add_argument("--random", type=int, metavar="K",
                   help="run K random rational triangles instead")
    p.add_argument("--svg", help="also write the figure as SVG here")
    shared(p, svg=True)
    p.set_defaults(func=cmd_ninepoint)

    p = sub.add_parser("apollonius",
                       help="cycles tangent to three given cycles")
    p.add_argument("--cycle", nargs=3, required=True, metavar="K,L1,L2,M")
    p.add_argument("--signs", default="all",
                   help='comma-separated combos of e/i, or "all"')
    shared(p)
    p.set_defaults(func=cmd_apollonius)
    return top


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except TooManyInstances as err:
        print(f"error: {err}", file=sys.stderr)
        return OVERFLOW
    except Degenerate as err:
        print(f"error: {err}", file=sys.stderr)
        return DEGENERATE


if __name__ == "__main__":
    sys.exit(main())
