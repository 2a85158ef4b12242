"""Batch front end: run task files, print reports, check the axiom suites.

Exit codes: 0 success, 1 failed verdict or failed axiom suite, 2 parse or
schema error, 3 truncation still insufficient after the allowed raises.
Machine output is a single JSON document with exact rational values rendered
as strings; it is byte-identical across runs of the same task file.  Text
output appends one timing line.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
import time

from .equivariant import (
    Character,
    TorusContext,
    char_c1,
    invert_equivariant_euler,
)
from .errors import OrientError, TaskError, TruncationInsufficientError
from .fgl import (
    ADDITIVE,
    MULTIPLICATIVE,
    UNIVERSAL,
    formal_inverse,
    make_fgl,
    n_series,
)
from .localization import (
    DirectModel,
    FixedComponentSpec,
    VirtualLocalizationProblem,
    compare_with_direct,
    localize,
    run_with_auto_raise,
)
from .series import TruncatedSeries, Variable, VariableTable
from .spaces import (
    BundleSpec,
    Point,
    ProjSpace,
    Product,
    Summand,
    build_space,
    chern,
    euler,
    integrate,
    minus_divisor_pushed,
    nilpotency_index,
)
from .taskfile import (
    ExprEnv,
    THEORY_NAMES,
    evaluate_expression,
    load_task,
    parse_bundles,
    parse_space,
    parse_summand,
    series_payload,
)

EXIT_OK = 0
EXIT_VERDICT = 1
EXIT_PARSE = 2
EXIT_TRUNCATION = 3


def _theory_kind(data) -> str:
    return THEORY_NAMES[data["theory"]]


def _knobs(data, truncation=None, max_raise=None):
    trunc = dict(data.get("truncation", {}))
    if truncation is not None:
        trunc["cap"] = truncation
        trunc["order"] = max(truncation, trunc.get("order", 0))
    order = trunc.get("order")
    cap = trunc.get("cap", 6)
    raises = max_raise if max_raise is not None else trunc.get("max_raise", 8)
    return order, cap, raises


def _with_order_raises(fn, kind, order, max_raise):
    order = order or 8
    attempts = 0
    while True:
        theory = make_fgl(kind, order)
        try:
            return fn(theory), theory
        except TruncationInsufficientError as err:
            attempts += 1
            if attempts > max_raise:
                raise
            order = max(order + 2, err.needed or 0)


def run_task(data: dict, truncation=None, max_raise=None) -> dict:
    """Execute one parsed task; returns the report with an exit code."""
    kind = _theory_kind(data)
    order, cap, raises = _knobs(data, truncation, max_raise)
    task = data["task"]
    report = {
        "task": data,
        "status": "ok",
        "verdicts": [],
        "warnings": [],
    }
    try:
        if task == "integrate":
            _task_integrate(data, kind, order, raises, report)
        elif task == "localize":
            _task_localize(data, kind, order, cap, raises, report)
        elif task == "fgl-inverse":
            _task_fgl_inverse(data, kind, order, report)
        elif task == "n-series":
            _task_n_series(data, kind, order, report)
        else:
            _task_check_axioms(data, kind, order or 8, report)
    except TruncationInsufficientError as err:
        report["status"] = "insufficient-truncation"
        report["error"] = str(err)
        report["exit"] = EXIT_TRUNCATION
        return report
    failed = [v for v in report["verdicts"] if not v["pass"]]
    if failed or report["status"] != "ok":
        report["status"] = report.get("status") if report["status"] != "ok" else "verdict-failed"
        report["exit"] = EXIT_VERDICT
    else:
        report["exit"] = EXIT_OK
    return report


def _expect_verdict(report, name, expected, got) -> None:
    report["verdicts"].append({
        "name": name,
        "expected": str(expected),
        "got": str(got),
        "pass": bool(expected == got),
    })


def _parse_scalar(text, theory, pos=None, neg=None):
    ring = build_space(theory, Point())
    return evaluate_expression(text, ExprEnv(ring, pos_bound=pos, neg_bound=neg))


def _task_integrate(data, kind, order, raises, report):
    def body(theory):
        ring = build_space(theory, parse_space(data["space"]))
        bundles = parse_bundles(data.get("bundles"))
        env = ExprEnv(ring, bundles=bundles)
        text = data["integrand"]
        if not text.strip():
            report["warnings"].append("empty integrand; the result is zero")
        alpha = evaluate_expression(text, env)
        return ring, integrate(alpha, ring)

    (ring, value), theory = _with_order_raises(body, kind, order, raises)
    report["truncation"] = {"order": theory.order}
    report["result"] = {"kind": "scalar", "value": str(value),
                        "terms": series_payload(value)}
    if "expect" in data:
        expected = _parse_scalar(data["expect"], theory).convert(ring.table)
        _expect_verdict(report, "integrate", expected, value)


def _component_from_node(node, ctx):
    base = parse_space(node.get("base", {"point": True}))
    moving0 = BundleSpec([parse_summand(s) for s in node.get("moving0", [])])
    moving1 = BundleSpec([parse_summand(s) for s in node.get("moving1", [])])
    obstruction = BundleSpec([parse_summand(s) for s in node.get("obstruction", [])])
    bundles_node = node.get("bundles")
    text = str(node.get("integrand", "1"))

    def integrand(ring, pos, neg):
        env = ExprEnv(ring, ctx=ctx, bundles=parse_bundles(bundles_node),
                      pos_bound=pos, neg_bound=neg)
        return evaluate_expression(text, env)

    return FixedComponentSpec(base=base, moving0=moving0, moving1=moving1,
                              obstruction=obstruction, integrand=integrand)


def _task_localize(data, kind, order, cap, raises, report):
    if "standard_pn" in data:
        node = data["standard_pn"]
        n = node["n"]
        power = node.get("power", 0)
        rank = n + 1

        def build(theory, ctx):
            from .localization import standard_pn_fixed_data
            return compare_with_direct(standard_pn_fixed_data(n, power, theory, ctx))
    else:
        rank = data.get("torus", {}).get("rank")
        if not rank:
            raise TaskError("localize components need a torus rank")

        def build(theory, ctx):
            comps = tuple(_component_from_node(c, ctx) for c in data["components"])
            direct = None
            if "direct" in data:
                model = parse_space(data["direct"]["space"])
                text = data["direct"]["integrand"]

                def direct_integrand(ring, _text=text):
                    return evaluate_expression(
                        _text, ExprEnv(ring, bundles=parse_bundles(
                            data["direct"].get("bundles"))))

                direct = DirectModel(model, direct_integrand)
            problem = VirtualLocalizationProblem(theory, ctx, comps, direct)
            if direct is None:
                return {"localized": localize(problem), "verdict": True}
            return compare_with_direct(problem)

    rep, theory, ctx = run_with_auto_raise(build, kind, rank, cap, order, raises)
    report["truncation"] = {"order": theory.order, "cap": ctx.truncation}
    element = rep["localized"]
    result = {"kind": "localized", "element": str(element)}
    if "value" in rep and rep["value"] is not None:
        result["value"] = str(rep["value"])
        result["value_terms"] = series_payload(rep["value"])
    if "parts" in rep:
        result["parts"] = {
            target: {"pass": part["pass"], "value": str(part.get("value")),
                     "expected": str(part["expected"])}
            for target, part in rep["parts"].items()
        }
    report["result"] = result
    report["verdicts"].append({"name": "direct-comparison",
                               "expected": str(rep.get("expected", "")),
                               "got": str(rep.get("value", "")),
                               "pass": bool(rep["verdict"])})
    if "expect" in data:
        if kind == UNIVERSAL:
            raise TaskError("expected values apply to the built-in theories only")
        expected = _parse_scalar(data["expect"], theory)
        got = rep.get("value")
        if kind == MULTIPLICATIVE and got is not None:
            dim = (parse_space(data["direct"]["space"]).dim if "direct" in data
                   else data["standard_pn"]["n"])
            if dim:
                got = got * (TruncatedSeries.variable(got.table, "beta",
                                                      got.pos_bound,
                                                      got.neg_bound) ** -dim)
        _expect_verdict(report, "expected-value",
                        expected.convert(got.table, got.pos_bound, got.neg_bound)
                        if got is not None else expected, got)


def _series_in_u_payload(series, order):
    iu = series.table.index("u")
    coeffs = []
    for k in range(order):
        part = {}
        for exps, c in series.coeffs.items():
            if exps[iu] == k:
                e = list(exps)
                e[iu] = 0
                part[tuple(e)] = c
        scalar = TruncatedSeries(series.table, part)
        coeffs.append(str(scalar))
    return coeffs


def _task_fgl_inverse(data, kind, order, report):
    theory = make_fgl(kind, order or 8)
    inv = formal_inverse(theory)
    report["truncation"] = {"order": theory.order}
    report["result"] = {
        "kind": "series",
        "series": str(inv.g),
        "coefficients": _series_in_u_payload(inv.g, theory.order),
        "verified": inv.verified,
    }


def _task_n_series(data, kind, order, report):
    theory = make_fgl(kind, order or 8)
    series = n_series(theory, data["n"])
    report["truncation"] = {"order": theory.order}
    report["result"] = {
        "kind": "series",
        "series": str(series),
        "coefficients": _series_in_u_payload(series, theory.order),
    }


def _task_check_axioms(data, kind, order, report):
    results = check_axioms(kind, order, fault_inject=data.get("fault_inject", False))
    report["truncation"] = {"order": order}
    report["result"] = {"kind": "axioms",
                        "suites": [{"name": n, "pass": ok, "detail": detail}
                                   for n, ok, detail in results]}
    for name, ok, detail in results:
        report["verdicts"].append({"name": name, "expected": "pass",
                                   "got": "pass" if ok else detail, "pass": ok})


# -- the axiom and consistency suites -----------------------------------------

def check_axioms(kind: str, order: int, fault_inject: bool = False):
    """Run the axiom suites for one theory; [(name, passed, detail)]."""
    theory = make_fgl(kind, order)
    results = []

    def run(name, fn):
        try:
            ok, detail = fn()
        except OrientError as err:
            ok, detail = False, str(err)
        results.append((name, ok, detail))

    table = theory.table
    u, v = theory.u(), theory.v()
    zero = TruncatedSeries.zero(table, order)

    def unit():
        ok = (theory.law.substitute({"u": u, "v": zero}, table, order) == u and
              theory.law.substitute({"u": zero, "v": v}, table, order) == v)
        return ok, "F(u,0) = u and F(0,v) = v"

    def commutative():
        swapped = theory.law.substitute({"u": v, "v": u}, table, order)
        return swapped == theory.law, "F(u,v) = F(v,u)"

    def associative():
        wt = VariableTable(tuple(table.variables) + (Variable("w", 1),))
        uu = TruncatedSeries.variable(wt, "u", order)
        vv = TruncatedSeries.variable(wt, "v", order)
        ww = TruncatedSeries.variable(wt, "w", order)
        lhs = theory.law.substitute(
            {"u": uu, "v": theory.law.substitute({"u": vv, "v": ww}, wt, order)},
            wt, order)
        rhs = theory.law.substitute(
            {"u": theory.law.substitute({"u": uu, "v": vv}, wt, order), "v": ww},
            wt, order)
        return lhs == rhs, "F(u,F(v,w)) = F(F(u,v),w)"

    def inverse_identity():
        g = formal_inverse(theory).g
        if fault_inject:
            g = g + TruncatedSeries.monomial(table, {"u": 3}, 1, g.pos_bound)
        w = theory.u() * g
        residual = theory.law.substitute({"u": theory.u(), "v": w}, table, order)
        ok = residual.is_zero() and g.constant_term() == -1
        return ok, "F(u, u*g(u)) = 0 and g(0) = -1"

    def pb_relation():
        for model in (ProjSpace(1), ProjSpace(2),
                      Product(ProjSpace(1), ProjSpace(1))):
            build_space(theory, model)  # construction asserts the relation
        return True, "relation verified on the line, the plane, their product"

    def whitney():
        rng = random.Random(101)
        ring = build_space(theory, Product(ProjSpace(1), ProjSpace(1)))
        lines = [ring.line_class("h1"), ring.line_class("h2")]
        for _ in range(6):
            a = BundleSpec([Summand(rng.choice(lines).scale(rng.randint(-2, 2)))
                            for _ in range(rng.randint(1, 2))])
            b = BundleSpec([Summand(rng.choice(lines).scale(rng.randint(-2, 2)))
                            for _ in range(rng.randint(1, 2))])

            def total(spec):
                out = ring.zero()
                for i in range(spec.rank + 1):
                    out = out + chern(spec, i, ring)
                return out

            if total(BundleSpec(a.summands + b.summands)) != \
                    ring.mul(total(a), total(b)):
                return False, "Whitney sum failed"
        return True, "total classes multiply on random bundles"

    def euler_top():
        rng = random.Random(53)
        ring = build_space(theory, ProjSpace(2))
        h = ring.line_class("h")
        for _ in range(6):
            spec = BundleSpec([Summand(h.scale(rng.randint(-2, 2)))
                               for _ in range(rng.randint(1, 3))])
            if euler(spec, ring) != chern(spec, spec.rank, ring):
                return False, "Euler class differs from the top Chern class"
        return True, "Euler class equals the top Chern class"

    def minus_divisor():
        ring = build_space(theory, ProjSpace(2))
        h = ring.line_class("h")
        dual = ring.dual(h)
        for alpha in ring.basis():
            if minus_divisor_pushed(alpha, h, ring) != ring.mul(dual, alpha):
                return False, "operator differs from dual-class multiplication"
        return True, "pushed operator equals dual-class multiplication"

    def nilpotency():
        for n in (1, 2, 3):
            ring = build_space(theory, ProjSpace(n))
            if nilpotency_index(ring.line_class("h"), ring) != n + 1:
                return False, f"wrong nilpotency index on P{n}"
        return True, "hyperplane classes vanish exactly at the dimension bound"

    def stabilization():
        i = 4
        lam = Character((2, -1))
        lo_ctx, hi_ctx = TorusContext(2, i), TorusContext(2, i + 2)
        lo = char_c1(lam, lo_ctx, theory, lo_ctx.point_table(theory), i - 1)
        hi = char_c1(lam, hi_ctx, theory, hi_ctx.point_table(theory), i + 1)
        if hi.convert(lo.table, i - 1) != lo:
            return False, "character classes fail to restrict"
        spec = BundleSpec.of_characters([(1, 0), (1, -1)])
        inv_lo = invert_equivariant_euler(
            spec, build_space(theory, Point(), lo_ctx), lo_ctx, i - 1)
        inv_hi = invert_equivariant_euler(
            spec, build_space(theory, Point(), hi_ctx), hi_ctx, i + 1)
        restricted = inv_hi.restricted(i)
        ok = restricted.num == inv_lo.num and restricted.den == inv_lo.den
        return ok, "results at neighboring truncations restrict exactly"

    run("fgl-unit", unit)
    run("fgl-commutativity", commutative)
    run("fgl-associativity", associative)
    run("formal-inverse", inverse_identity)
    run("pb-relation", pb_relation)
    run("whitney-sum", whitney)
    run("euler-top-chern", euler_top)
    run("minus-divisor-operator", minus_divisor)
    run("nilpotency-bounds", nilpotency)
    run("equivariant-stabilization", stabilization)
    return results


# -- rendering ----------------------------------------------------------------

def render_machine(report: dict) -> str:
    payload = {k: v for k, v in report.items() if k != "exit"}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def render_text(report: dict, elapsed_ms: float) -> str:
    lines = []
    task = report["task"]
    lines.append(f"task: {task.get('task')}  theory: {task.get('theory')}")
    if "truncation" in report:
        knobs = "  ".join(f"{k}={v}" for k, v in sorted(report["truncation"].items()))
        lines.append(f"truncation: {knobs}")
    result = report.get("result", {})
    kind = result.get("kind")
    if kind == "scalar":
        lines.append(f"result: {result['value']}")
    elif kind == "series":
        lines.append(f"result: {result['series']}")
        for k, c in enumerate(result.get("coefficients", [])):
            lines.append(f"  u^{k}: {c}")
    elif kind == "localized":
        lines.append(f"localized: {result['element']}")
        if "value" in result:
            lines.append(f"value: {result['value']}")
        for target, part in sorted(result.get("parts", {}).items()):
            status = "pass" if part["pass"] else "FAIL"
            lines.append(f"  {target}: {status} (value {part['value']})")
    elif kind == "axioms":
        for suite in result["suites"]:
            status = "pass" if suite["pass"] else "FAIL"
            lines.append(f"  {suite['name']:28s} {status}  {suite['detail']}")
    for v in report.get("verdicts", []):
        status = "pass" if v["pass"] else "FAIL"
        lines.append(f"verdict {v['name']}: {status} "
                     f"(expected {v['expected']}, got {v['got']})")
    for w in report.get("warnings", []):
        lines.append(f"warning: {w}")
    if report.get("error"):
        lines.append(f"error: {report['error']}")
    lines.append(f"status: {report['status']}")
    lines.append(f"# elapsed-ms: {elapsed_ms:.1f}")
    return "\n".join(lines)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="orient",
        description="exact intersection-theory computations in a chosen theory")
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a task file")
    runp.add_argument("file")
    runp.add_argument("--truncation", type=int, default=None,
                      help="override the starting truncation")
    runp.add_argument("--max-raise", type=int, default=None,
                      help="limit automatic truncation raises")
    runp.add_argument("--output", choices=("text", "machine"), default="text")

    checkp = sub.add_parser("check-axioms", help="run the axiom suites")
    checkp.add_argument("--theory", required=True, choices=sorted(THEORY_NAMES))
    checkp.add_argument("--order", type=int, required=True)
    checkp.add_argument("--fault-inject", action="store_true")
    checkp.add_argument("--output", choices=("text", "machine"), default="text")

    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        if args.command == "run":
            data = load_task(args.file)
            report = run_task(data, args.truncation, args.max_raise)
        else:
            data = {"theory": args.theory, "task": "check-axioms",
                    "truncation": {"order": args.order}}
            if args.fault_inject:
                data["fault_inject"] = True
            report = run_task(data)
    except TaskError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_PARSE
    except TruncationInsufficientError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_TRUNCATION

    elapsed_ms = (time.monotonic() - started) * 1000.0
    if args.output == "machine":
        print(render_machine(report))
    else:
        print(render_text(report, elapsed_ms))
    return report["exit"]


if __name__ == "__main__":
    sys.exit(main())
