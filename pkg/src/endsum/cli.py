"""Command line interface: ``endsum classify|ends|endsum|iso|verify``.

Exit status: 0 success, 1 negative verdict, 2 bad input, 3 unsupported shape.
"""

import argparse
import json
import os
import sys

from . import endmodel as em
from .dsl import DslError, parse_dsl, print_surface
from .errors import EndSumError, NonlinearEnd, Unsupported
from .graphends import GraphPresentation, end_census
from .handles import (
    EndRef,
    HandleSpec,
    attach_handle_combinatorial,
    exhaustion_oracle,
    isomorphic,
    isomorphic_invariants,
    merged_component_name,
    predict_handle_invariants,
    verify_presentation_invariance,
    verify_random,
)
from .invariants import classify, describe, invariant_to_json

OK, NEGATIVE, BAD_INPUT, UNSUPPORTED = 0, 1, 2, 3


class InputError(Exception):
    pass


def _load(path, surface=None):
    try:
        with open(path, encoding="utf-8") as fh:
            doc = parse_dsl(fh.read())
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None
    except DslError as exc:
        raise InputError("\n".join(f"{path}:{d}" for d in exc.diagnostics)) from None
    try:
        return doc.surface(surface)
    except KeyError:
        raise InputError(f"{path}: no surface named {surface!r}") from None


def _emit(args, payload, text):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _invs_json(invs):
    return [dict(invariant_to_json(i), name=i.name) for i in invs]


def _invs_text(invs):
    return "\n".join(f"{i.name}: {describe(i)}" for i in invs)


def cmd_classify(args):
    d = _load(args.file, args.surface)
    invs = classify(d)
    _emit(args, {"surface": d.name, "components": _invs_json(invs)}, _invs_text(invs))
    return OK


def _census_row(a, expr):
    census = end_census(GraphPresentation.from_automaton(a))
    count = em.count_ends(expr)
    expected = {em.CountKind.FINITE: "finite", em.CountKind.COUNTABLE: "mixed",
                em.CountKind.CONTINUUM: "cantor-like"}[count.kind]
    agree = census.kind == expected and (census.kind != "finite" or census.n == count.n)
    return {"kind": census.kind, "n": census.n, "counts": list(census.counts), "agree": agree}


def cmd_ends(args):
    d = _load(args.file, args.surface)
    invs = classify(d)
    rows, lines, ok = [], [], True
    for c, inv in zip(d.components, invs):
        row = {"name": inv.name, "ends": em.expr_to_json(inv.ends), "count": str(em.count_ends(inv.ends))}
        lines.append(f"{inv.name}: {em.format_expr(inv.ends)}  [{em.count_ends(inv.ends)}]")
        if args.census:
            row["census"] = {}
            for name, a in c.anchors:
                r = _census_row(a, inv.anchor_expr(name))
                ok = ok and r["agree"]
                row["census"][name] = r
                lines.append(f"  {name}: census {r['kind']}"
                             + (f" n={r['n']}" if r["n"] is not None else "")
                             + f" counts {r['counts'][:8]}  {'agree' if r['agree'] else 'DISAGREE'}")
        rows.append(row)
    _emit(args, {"surface": d.name, "components": rows}, "\n".join(lines))
    return OK if ok else NEGATIVE


def _handle(args):
    if len(args.end) != 2:
        raise InputError("give exactly two --end arguments")
    try:
        a, b = (EndRef.parse(x) for x in args.end)
    except EndSumError as exc:
        raise InputError(str(exc)) from None
    return HandleSpec(a, b, oriented=not args.non_oriented)


def cmd_endsum(args):
    d = _load(args.file, args.surface)
    h = _handle(args)
    predicted = predict_handle_invariants(classify(d), h)
    payload = {"predicted": _invs_json(predicted), "descriptor": None, "constructed": None}
    lines = ["predicted:", _invs_text(predicted)]
    verdicts = []
    try:
        n = attach_handle_combinatorial(d, h)
    except NonlinearEnd as exc:
        lines.append(f"construction: not available ({exc})")
    else:
        built = classify(n)
        agree = isomorphic_invariants(built, predicted).isomorphic
        verdicts.append(agree)
        payload["descriptor"] = print_surface(n)
        payload["constructed"] = _invs_json(built)
        payload["construction"] = "agree" if agree else "disagree"
        lines += ["constructed:", print_surface(n).rstrip(), f"construction: {payload['construction']}"]
    run = exhaustion_oracle(d, h)
    target = next(p for p in predicted if p.name == merged_component_name(h))
    ledger = run.genus() == target.genus and (target.parity is None or run.parity() == target.parity)
    verdicts.append(ledger)
    payload["exhaustion"] = {"agree": ledger, "genus": str(run.genus()),
                             "parity": None if run.parity() is None else str(run.parity())}
    lines.append(f"exhaustion ledger: genus {run.genus()}, {'agree' if ledger else 'disagree'}")
    payload["oracle"] = "agree" if all(verdicts) else "disagree"
    lines.append(f"oracle: {payload['oracle']}")
    _emit(args, payload, "\n".join(lines))
    return OK if all(verdicts) else NEGATIVE


def cmd_iso(args):
    d1 = _load(args.file1, args.surface)
    d2 = _load(args.file2, args.surface2)
    res = isomorphic(d1, d2)
    payload = {"isomorphic": res.isomorphic, "pairs": [list(p) for p in res.pairs],
               "reason": res.reason, "field": res.field}
    text = "yes" if res.isomorphic else "no"
    if res.isomorphic:
        text += "\n" + "\n".join(f"  {x} ~ {y}" for x, y in res.pairs)
    else:
        text += f"\n  {res.reason}"
    _emit(args, payload, text)
    return OK if res.isomorphic else NEGATIVE


def cmd_verify(args):
    d = _load(args.file, args.surface)
    h = _handle(args)
    seed = int(os.environ.get("ENDSUM_SEED", args.seed))
    report = verify_presentation_invariance(d, h)
    if args.trials:
        extra = verify_random(d, h, args.trials, seed)
        report.checks.extend(extra.checks)
    payload = {"passed": report.passed, "seed": seed,
               "orientation_matters": report.orientation_matters,
               "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in report.checks]}
    text = "\n".join(report.lines()) + f"\n{'verified' if report.passed else 'FAILED'}"
    _emit(args, payload, text)
    return OK if report.passed else NEGATIVE


def build_parser():
    p = argparse.ArgumentParser(prog="endsum", description="Classify surfaces and attach 1-handles at infinity.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, file=True):
        if file:
            sp.add_argument("file")
        sp.add_argument("--surface", help="surface name inside the file (default: the first)")
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("classify", help="classification invariants per component")
    common(sp)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("ends", help="canonical end space per component")
    common(sp)
    sp.add_argument("--census", action="store_true", help="cross-check with the graph exhaustion census")
    sp.set_defaults(func=cmd_ends)

    for name, func, helptext in (("endsum", cmd_endsum, "attach a 1-handle and check both oracles"),
                                 ("verify", cmd_verify, "presentation-invariance checks")):
        sp = sub.add_parser(name, help=helptext)
        common(sp)
        sp.add_argument("--end", action="append", default=[], metavar="C.A[/i...]")
        sp.add_argument("--non-oriented", action="store_true")
        if name == "verify":
            sp.add_argument("--trials", type=int, default=0)
            sp.add_argument("--seed", type=int, default=0)
        sp.set_defaults(func=func)

    sp = sub.add_parser("iso", help="decide homeomorphism of two presented surfaces")
    sp.add_argument("file1")
    sp.add_argument("file2")
    sp.add_argument("--surface")
    sp.add_argument("--surface2")
    sp.add_argument("--json", action="store_true")
    sp.set_defaults(func=cmd_iso)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Unsupported as exc:
        print(f"endsum: unsupported: {exc}", file=sys.stderr)
        return UNSUPPORTED
    except (InputError, EndSumError) as exc:
        print(f"endsum: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
