"""JSON input documents.

A document describes one P-decomposition::

    {
      "n": 6,
      "field": {"d": 2},                 # optional, default Q
      "moduli": ["1", "w", ...],         # optional, default all 1
      "x": [[1, 2, 3, 4], [5], [6]],     # cycles; -k stands for (k, -)
      "y": [[1, 5, -6, -4], [2, -3]],
      "theta": [["1", "0"], ["0", "1"]], # optional, default horizontal/vertical
      "k2": "1",                         # optional; or "k"; default M_1^2
      "marks": {"a": [-1], "b": [-2]},   # optional; a list gets labels "1", "2", ...
      "punctures": "all"                 # or "cone": keep unmarked 2*pi points regular
    }

Only one of each partner pair of cycles needs to be listed.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .exact import Direction, Scalar, format_scalar, parse_scalar
from .iso import MarkError, marks_to_json, resolve_marks
from .origami import ExtendedOrigami, validate
from .pdecomp import PDecomposition, regular_classes


class InputError(ValueError):
    """A document problem, with the JSON path where it was found."""

    def __init__(self, where: str, message: str):
        super().__init__(f"{where}: {message}")
        self.where = where


def _scalar(value: Any, d: int, where: str) -> Scalar:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise InputError(where, f"expected a number or a scalar string, got {value!r}")
    try:
        return parse_scalar(value, d)
    except ValueError as exc:
        raise InputError(where, str(exc)) from None


def _cycles(value: Any, n: int, where: str) -> list[list[int]]:
    if not isinstance(value, list):
        raise InputError(where, "expected a list of cycles")
    out = []
    for k, c in enumerate(value):
        here = f"{where}[{k}]"
        if not isinstance(c, list) or not c:
            raise InputError(here, "expected a non-empty list of nonzero integers")
        for m, e in enumerate(c):
            if isinstance(e, bool) or not isinstance(e, int) or e == 0:
                raise InputError(f"{here}[{m}]", f"expected a nonzero integer, got {e!r}")
            if abs(e) > n:
                raise InputError(f"{here}[{m}]", f"cell {abs(e)} out of range 1..{n}")
        out.append(c)
    return out


def parse_origami(doc: Any, source: str = "$") -> tuple[ExtendedOrigami, int]:
    """Read ``n``, ``field``, ``moduli``, ``x`` and ``y`` without validating."""
    if not isinstance(doc, dict):
        raise InputError(source, "expected a JSON object")
    d = 1
    if "field" in doc:
        fld = doc["field"]
        if not isinstance(fld, dict) or not isinstance(fld.get("d", 1), int) or fld.get("d", 1) < 1:
            raise InputError(f"{source}.field", "expected {\"d\": square-free integer}")
        d = fld.get("d", 1)
    if "x" not in doc or "y" not in doc:
        raise InputError(source, "both x and y are required")
    n = doc.get("n")
    if n is None:
        n = max((abs(e) for key in ("x", "y") for c in doc[key] if isinstance(c, list)
                 for e in c if isinstance(e, int)), default=0)
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise InputError(f"{source}.n", "expected a positive integer")
    x = _cycles(doc["x"], n, f"{source}.x")
    y = _cycles(doc["y"], n, f"{source}.y")
    moduli = None
    if "moduli" in doc:
        raw = doc["moduli"]
        if not isinstance(raw, list) or len(raw) != n:
            raise InputError(f"{source}.moduli", f"expected a list of {n} scalars")
        moduli = [_scalar(m, d, f"{source}.moduli[{k}]") for k, m in enumerate(raw)]
        for k, m in enumerate(moduli):
            if m.sign() <= 0:
                raise InputError(f"{source}.moduli[{k}]", "moduli must be positive")
    try:
        O = ExtendedOrigami.from_cycles(x, y, moduli, n=n)
    except ValueError as exc:
        raise InputError(source, str(exc)) from None
    return O, d


def parse_document(doc: Any, source: str = "$") -> PDecomposition:
    """Turn a decoded JSON document into a validated P-decomposition."""
    O, d = parse_origami(doc, source)
    report = validate(O)
    if not report.ok:
        name, witness = next(iter(report.failures().items()))
        raise InputError(source, f"invalid extended origami ({name}): {witness}")
    theta = None
    if "theta" in doc:
        raw = doc["theta"]
        if not isinstance(raw, list) or len(raw) != 2:
            raise InputError(f"{source}.theta", "expected two direction vectors")
        dirs = []
        for k, v in enumerate(raw):
            here = f"{source}.theta[{k}]"
            if not isinstance(v, list) or len(v) != 2:
                raise InputError(here, "expected a pair of scalars")
            try:
                dirs.append(Direction(_scalar(v[0], d, f"{here}[0]"), _scalar(v[1], d, f"{here}[1]")))
            except ValueError as exc:
                raise InputError(here, str(exc)) from None
        theta = tuple(dirs)
    if "k2" in doc and "k" in doc:
        raise InputError(source, "give k or k2, not both")
    k2 = None
    if "k2" in doc:
        k2 = _scalar(doc["k2"], d, f"{source}.k2")
    elif "k" in doc:
        k = _scalar(doc["k"], d, f"{source}.k")
        k2 = k * k
    if k2 is not None and k2.sign() <= 0:
        raise InputError(f"{source}.k2", "must be positive")
    marks = None
    if "marks" in doc:
        try:
            marks = resolve_marks(O, doc["marks"])
        except (MarkError, TypeError, ValueError) as exc:
            raise InputError(f"{source}.marks", str(exc)) from None
    punct = doc.get("punctures", "all")
    if punct == "all":
        regular = frozenset()
    elif punct == "cone":
        regular = regular_classes(O, marks)
    else:
        raise InputError(f"{source}.punctures", "expected \"all\" or \"cone\"")
    try:
        P = PDecomposition.standard(O, k2, marks, regular)
        if theta is not None:
            P = PDecomposition(theta, P.k2, O, marks, regular)
    except ValueError as exc:
        raise InputError(source, str(exc)) from None
    return P


def read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(str(path), exc.strerror or str(exc)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}:{exc.colno}", exc.msg) from None


def load_document(path: str | Path) -> PDecomposition:
    return parse_document(read_json(path), str(path))


def to_document(P: PDecomposition) -> dict:
    """Serialize with canonical cycle order; inverse of :func:`parse_document`."""
    O = P.origami
    d = O.field_d
    for t in P.theta:
        for c in t.vector:
            d = max(d, c.d)
    d = max(d, P.k2.d)
    doc: dict[str, Any] = {"n": O.n}
    if d != 1:
        doc["field"] = {"d": d}
    doc["moduli"] = [format_scalar(m) for m in O.moduli]
    doc["x"] = O.x_cycles()
    doc["y"] = O.y_cycles()
    doc["theta"] = [[format_scalar(c) for c in t.vector] for t in P.theta]
    doc["k2"] = format_scalar(P.k2)
    if P.marks is not None:
        doc["marks"] = {label: [sorted(cls, key=abs)[:1] for cls in classes]
                        for label, classes in marks_to_json(P.marks).items()}
    if P.regular:
        if P.regular != regular_classes(O, P.marks):
            raise ValueError("only 'all' and 'cone' puncture conventions can be serialized")
        doc["punctures"] = "cone"
    return doc


def dumps(obj: Any) -> str:
    """Stable JSON text."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"

