"""Isomorphisms and canonical forms of (marked) extended origamis.

An isomorphism is a bijection ``sigma`` of signed cells commuting with
negation and with both generators, such that the moduli agree up to one
common factor.  Because the group action together with negation is
transitive, ``sigma`` is determined by the image of one signed cell.

Marks are a mapping ``label -> frozenset of vertex classes`` where a vertex
class is given by the frozenset of signed cells in its commutator cycles.  A
marked isomorphism must carry the classes of each label onto the classes of
the same label.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Mapping, Optional

from .exact import Scalar
from .invariants import vertex_classes
from .origami import ExtendedOrigami, from_int, neg, to_int

Marks = Mapping[str, frozenset]


class MarkError(ValueError):
    pass


def resolve_marks(O: ExtendedOrigami, spec) -> dict[str, frozenset]:
    """Turn user marks into vertex-class sets.

    ``spec`` is either a list of cycles (each becomes its own label "1",
    "2", ...) or a mapping ``label -> cycle`` / ``label -> list of cycles``.
    A cycle may be given by any of its signed cells.
    """
    if spec is None:
        return {}
    if not isinstance(spec, Mapping):
        spec = {str(k + 1): c for k, c in enumerate(spec)}
    classes = vertex_classes(O)
    out = {}
    for label, cycles in spec.items():
        if cycles and not isinstance(cycles[0], (list, tuple)):
            cycles = [cycles]
        found = set()
        for c in cycles:
            elems = {from_int(int(k)) for k in c}
            for cell in elems:
                if cell >> 1 >= O.n:
                    raise MarkError(f"mark {label}: cell {abs(to_int(cell))} out of range")
            hits = [v for v in classes if elems <= v.elements]
            if not hits:
                raise MarkError(f"mark {label}: {list(c)} is not inside a single vertex class")
            found.add(hits[0].elements)
        out[str(label)] = frozenset(found)
    return out


def marks_to_json(marks: Marks) -> dict:
    """Labels mapped to lists of classes, each class a sorted list of signed cells."""
    out = {}
    for label in sorted(marks):
        out[label] = sorted(sorted(to_int(i) for i in cls) for cls in marks[label])
    return out


def transport_marks(marks: Marks, sigma) -> dict[str, frozenset]:
    return {
        label: frozenset(frozenset(sigma[i] for i in cls) for cls in classes)
        for label, classes in marks.items()
    }


@dataclass(frozen=True)
class Isomorphism:
    sigma: tuple[int, ...]
    rescale: Scalar

    def to_json(self) -> dict:
        return {
            "sigma": [to_int(s) for s in self.sigma],
            "rescale": str(self.rescale),
        }


def _extend(O1: ExtendedOrigami, O2: ExtendedOrigami, start: int, image: int) -> Optional[list[int]]:
    n2 = 2 * O1.n
    sigma = [-1] * n2
    used = [False] * n2

    def assign(a: int, b: int) -> bool:
        if sigma[a] == -1:
            if used[b]:
                return False
            sigma[a] = b
            used[b] = True
            queue.append(a)
            return True
        return sigma[a] == b

    queue: deque[int] = deque()
    if not (assign(start, image) and assign(neg(start), neg(image))):
        return None
    while queue:
        a = queue.popleft()
        b = sigma[a]
        for p1, p2 in ((O1.x, O2.x), (O1.y, O2.y), (O1.xinv, O2.xinv), (O1.yinv, O2.yinv)):
            if not assign(p1[a], p2[b]):
                return None
            if not assign(neg(p1[a]), neg(p2[b])):
                return None
    if -1 in sigma:
        return None
    return sigma


def _rescale(O1: ExtendedOrigami, O2: ExtendedOrigami, sigma) -> Optional[Scalar]:
    r = O2.moduli[sigma[0] >> 1] / O1.moduli[0]
    for lam in range(O1.n):
        if O2.moduli[sigma[2 * lam] >> 1] != r * O1.moduli[lam]:
            return None
    return r


def isomorphisms(O1: ExtendedOrigami, O2: ExtendedOrigami, marks1: Marks | None = None,
                 marks2: Marks | None = None):
    """Yield all isomorphisms ``O1 -> O2`` in order of the image of ``(1, +)``."""
    if O1.n != O2.n:
        return
    marked = marks1 is not None or marks2 is not None
    m1 = dict(marks1 or {})
    m2 = dict(marks2 or {})
    if marked and set(m1) != set(m2):
        return
    for image in range(2 * O1.n):
        sigma = _extend(O1, O2, 0, image)
        if sigma is None:
            continue
        r = _rescale(O1, O2, sigma)
        if r is None:
            continue
        if marked and transport_marks(m1, sigma) != m2:
            continue
        yield Isomorphism(tuple(sigma), r)


def find_isomorphism(O1: ExtendedOrigami, O2: ExtendedOrigami, marks1: Marks | None = None,
                     marks2: Marks | None = None) -> Optional[Isomorphism]:
    return next(isomorphisms(O1, O2, marks1, marks2), None)


def verify_isomorphism(O1: ExtendedOrigami, O2: ExtendedOrigami, iso: Isomorphism,
                       marks1: Marks | None = None, marks2: Marks | None = None) -> bool:
    """Independent re-check of all conditions on a certificate."""
    s = iso.sigma
    n2 = 2 * O1.n
    if O1.n != O2.n or sorted(s) != list(range(n2)):
        return False
    for i in range(n2):
        if s[neg(i)] != neg(s[i]):
            return False
        if s[O1.x[i]] != O2.x[s[i]] or s[O1.y[i]] != O2.y[s[i]]:
            return False
    for lam in range(O1.n):
        if O2.moduli[s[2 * lam] >> 1] != iso.rescale * O1.moduli[lam]:
            return False
    if marks1 is not None or marks2 is not None:
        if transport_marks(dict(marks1 or {}), s) != dict(marks2 or {}):
            return False
    return True


def automorphisms(O: ExtendedOrigami, marks: Marks | None = None) -> list[Isomorphism]:
    return list(isomorphisms(O, O, marks, marks))


# canonical form -------------------------------------------------------------------


def _bfs_labels(O: ExtendedOrigami, start: int) -> list[int]:
    n2 = 2 * O.n
    label = [-1] * n2
    nxt = 0
    queue: deque[int] = deque()

    def visit(a: int) -> None:
        nonlocal nxt
        if label[a] == -1:
            label[a] = nxt
            label[neg(a)] = nxt + 1
            nxt += 2
            queue.append(a)
            queue.append(neg(a))

    visit(start)
    while queue:
        a = queue.popleft()
        for p in (O.x, O.y, O.xinv, O.yinv):
            visit(p[a])
    return label


def _scalar_key(v: Scalar) -> list:
    return [v.a.numerator, v.a.denominator, v.b.numerator, v.b.denominator, v.d]


def relabel_encoding(O: ExtendedOrigami, sigma, marks: Marks | None = None) -> tuple:
    n2 = 2 * O.n
    x = [0] * n2
    y = [0] * n2
    mod = [Scalar(0)] * O.n
    for i in range(n2):
        x[sigma[i]] = sigma[O.x[i]]
        y[sigma[i]] = sigma[O.y[i]]
    for lam in range(O.n):
        mod[sigma[2 * lam] >> 1] = O.moduli[lam]
    base = mod[0]
    mods = [_scalar_key(m / base) for m in mod]
    mk = []
    if marks:
        for label in sorted(marks):
            mk.append([label, sorted(sorted(sigma[i] for i in cls) for cls in marks[label])])
    return (x, y, mods, mk)


def canonical_labeling(O: ExtendedOrigami, marks: Marks | None = None) -> tuple[tuple, list[int]]:
    """Minimal encoding over all breadth-first relabelings, and the relabeling used."""
    best = None
    best_sigma = None
    for start in range(2 * O.n):
        sigma = _bfs_labels(O, start)
        enc = relabel_encoding(O, sigma, marks)
        if best is None or enc < best:
            best, best_sigma = enc, sigma
    return best, best_sigma


def canonical_form(O: ExtendedOrigami, marks: Marks | None = None) -> bytes:
    enc, _ = canonical_labeling(O, marks)
    return json.dumps([O.n, *enc], separators=(",", ":")).encode()
