"""Command-line interface.

Exit codes: 0 success (or a positive verdict), 1 negative verdict, 2 unknown
(budget or limit exhausted), 3 input error.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import affine
from .exact import format_matrix, format_scalar, parse_matrix
from .geometry import BudgetExceeded, RealizationError
from .invariants import double_cover, invariants_report
from .io import InputError, dumps, load_document, parse_origami, read_json, to_document
from .iso import canonical_form, canonical_labeling, find_isomorphism, marks_to_json, transport_marks
from .origami import relabel, validate
from .pdecomp import PDecomposition

OK, NEGATIVE, UNKNOWN, INPUT_ERROR = 0, 1, 2, 3


class _Out:
    def __init__(self, as_json: bool):
        self.as_json = as_json

    def emit(self, data: dict, text: str) -> None:
        sys.stdout.write(dumps(data) if self.as_json else text.rstrip("\n") + "\n")


def _field_d(P: PDecomposition) -> int:
    return to_document(P).get("field", {}).get("d", 1)


def _matrix(text: str, d: int):
    try:
        return parse_matrix(text, d)
    except ValueError as exc:
        raise InputError("-m", str(exc)) from None


def cmd_validate(args, out: _Out) -> int:
    O, _ = parse_origami(read_json(args.file), args.file)
    report = validate(O)
    data = {"valid": report.ok, "checks": {k: {"ok": ok, "witness": w} for k, (ok, w) in report.checks.items()}}
    out.emit(data, "\n".join(report.lines() + ["valid" if report.ok else "invalid"]))
    return OK if report.ok else NEGATIVE


def cmd_info(args, out: _Out) -> int:
    P = load_document(args.file)
    rep = invariants_report(P.origami)
    rep["theta"] = [str(t) for t in P.theta]
    rep["k2"] = format_scalar(P.k2)
    if P.marks is not None:
        rep["marks"] = marks_to_json(P.marks)
    rep["regular_points"] = len(P.regular)
    lines = [
        f"origami: {P.origami}",
        f"type: ({rep['genus']},{rep['punctures']})  orders: {rep['orders']}  abelian: {rep['abelian']}",
        f"x-cylinder moduli: {', '.join(rep['spectra']['x'])}",
        f"y-cylinder moduli: {', '.join(rep['spectra']['y'])}",
    ]
    out.emit(rep, "\n".join(lines))
    return OK


def cmd_canon(args, out: _Out) -> int:
    P = load_document(args.file)
    marks = dict(P.marks) if P.marks is not None else None
    key = canonical_form(P.origami, marks)
    _, sigma = canonical_labeling(P.origami, marks)
    O = relabel(P.origami, sigma)
    new_marks = transport_marks(marks, sigma) if marks is not None else None
    regular = frozenset(frozenset(sigma[i] for i in c) for c in P.regular)
    doc = to_document(PDecomposition(P.theta, P.k2, O, new_marks, regular))
    out.emit({"canonical_form": key.decode(), "document": doc}, f"{key.decode()}\n{O}")
    return OK


def cmd_iso(args, out: _Out) -> int:
    P1 = load_document(args.file1)
    P2 = load_document(args.file2)
    m1 = m2 = None
    if args.marked:
        if P1.marks is None or P2.marks is None:
            raise InputError("--marked", "both documents need marks")
        m1, m2 = dict(P1.marks), dict(P2.marks)
    iso = find_isomorphism(P1.origami, P2.origami, m1, m2)
    if iso is None:
        out.emit({"isomorphic": False}, "not isomorphic")
        return NEGATIVE
    out.emit({"isomorphic": True, "certificate": iso.to_json()},
             f"isomorphic: sigma={iso.to_json()['sigma']} rescale={iso.rescale}")
    return OK


def cmd_act(args, out: _Out) -> int:
    P = load_document(args.file)
    A = _matrix(args.matrix, _field_d(P))
    Q = affine.act(A, P)
    doc = to_document(Q)
    out.emit(doc, f"theta: {Q.theta[0]} {Q.theta[1]}\nk2: {Q.k2}\norigami: {Q.origami}")
    return OK


def cmd_member(args, out: _Out) -> int:
    P = load_document(args.file)
    A = _matrix(args.matrix, _field_d(P))
    if args.marked and P.marks is None:
        raise InputError("--marked", "the document has no marks")
    v = affine.membership(P, A, marked=args.marked, budget=args.budget)
    data = v.to_json()
    data["matrix"] = format_matrix(A)
    text = f"{format_matrix(A)}: {v.status}"
    if v.reason:
        text += f" ({v.reason}: {v.detail})"
    out.emit(data, text)
    return {affine.MEMBER: OK, affine.NOT_MEMBER: NEGATIVE}.get(v.status, UNKNOWN)


def _group(args) -> tuple[affine.CosetGraph, bool]:
    P = load_document(args.file)
    refined = False
    try:
        affine._square_tiled(P)
    except ValueError:
        P = affine.refine_rational(P)
        refined = True
    G = affine.enumerate_group(P, marked=args.marked, limit=args.limit, budget=args.budget)
    return G, refined


def cmd_group(args, out: _Out) -> int:
    if args.marked and load_document(args.file).marks is None:
        raise InputError("--marked", "the document has no marks")
    G, refined = _group(args)
    data = G.to_json()
    data["refined"] = refined
    lines = [f"index: {G.index}{'' if G.complete else ' (incomplete: limit reached)'}",
             "coset representatives: " + " ".join(w or "1" for w in G.words),
             "generators:"]
    for w in G.generators:
        lines.append(f"  {w}  =  {format_matrix(affine.word_matrix(w))}")
    out.emit(data, "\n".join(lines))
    return OK if G.complete else UNKNOWN


def cmd_refine(args, out: _Out) -> int:
    P = load_document(args.file)
    R = affine.refine_rational(P)
    doc = to_document(R)
    out.emit(doc, f"{R.origami.n} cells, k2 = {R.k2}\norigami: {R.origami}")
    return OK


def cmd_double_cover(args, out: _Out) -> int:
    P = load_document(args.file)
    D = double_cover(P.origami)
    data = D.to_json()
    data["genus"] = D.genus()
    kind = "connected double cover" if D.connected else "Abelian: the cover splits into two copies"
    out.emit(data, f"{kind}\ncells: {D.degree}, genus: {D.genus()}\n"
                   f"x: {[p + 1 for p in D.x]}\ny: {[p + 1 for p in D.y]}")
    return OK


def cmd_dot(args, out: _Out) -> int:
    G, _ = _group(args)
    sys.stdout.write(G.to_dot(schreier=args.schreier))
    return OK if G.complete else UNKNOWN


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="veechkit", description=__doc__.splitlines()[0])
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check the origami axioms").add_argument("file")
    add("info", cmd_info, "surface type, vertex orders, cylinder spectra").add_argument("file")
    add("canon", cmd_canon, "canonical form").add_argument("file")
    p = add("iso", cmd_iso, "isomorphism between two documents")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--marked", action="store_true")
    p = add("act", cmd_act, "apply a matrix to the P-decomposition")
    p.add_argument("file")
    p.add_argument("-m", "--matrix", required=True, help='"a,b;c,d"')
    p = add("member", cmd_member, "Veech group membership")
    p.add_argument("file")
    p.add_argument("-m", "--matrix", required=True, help='"a,b;c,d"')
    p.add_argument("--marked", action="store_true")
    p.add_argument("--budget", type=int, default=None, help="segment budget for tracing")
    for name, func, help_text in (("group", cmd_group, "enumerate the Veech group (square-tiled)"),
                                  ("dot", cmd_dot, "coset graph in Graphviz format")):
        p = add(name, func, help_text)
        p.add_argument("file")
        p.add_argument("--marked", action="store_true")
        p.add_argument("--limit", type=int, default=10000, help="maximal number of cosets")
        p.add_argument("--budget", type=int, default=None)
        if name == "dot":
            kind = p.add_mutually_exclusive_group()
            kind.add_argument("--coset", action="store_true", help="S edges undirected (default)")
            kind.add_argument("--schreier", action="store_true", help="all edges directed")
    add("refine", cmd_refine, "subdivide into congruent cells").add_argument("file")
    add("double-cover", cmd_double_cover, "orientation double cover").add_argument("file")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return INPUT_ERROR if exc.code else OK
    out = _Out(args.json)
    try:
        return args.func(args, out)
    except (InputError, affine.Incommensurable, RealizationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR
    except BudgetExceeded as exc:
        print(f"unknown: {exc}", file=sys.stderr)
        return UNKNOWN
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
