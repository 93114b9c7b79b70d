"""Matrix action on P-decompositions, Veech-group membership and enumeration.

A matrix ``A`` acts on the plane by its derivative action
``(xi, eta) -> (a*xi + b*eta, c*xi + d*eta)``.  ``A`` lies in the Veech group
iff the surface re-decomposed in the image directions is isomorphic to
``act(A, P)`` with equal cell moduli.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .exact import Mat2, Scalar, derivative_image, derivative_rho_sq
from .geometry import (
    BudgetExceeded,
    NotJenkinsStrebel,
    PlanarComplex,
    default_budget,
    realize,
    redecompose,
)
from .invariants import cylinder_spectrum, vertex_classes
from .iso import isomorphisms, verify_isomorphism
from .origami import ExtendedOrigami, solve_heights
from .pdecomp import PDecomposition

MEMBER = "Member"
NOT_MEMBER = "NotMember"
UNKNOWN = "Unknown"
PUNCTURE_LABEL = "\x00punctures"


def act(A: Mat2, P: PDecomposition) -> PDecomposition:
    """Move the directions by ``A`` and rescale ``k``; the origami is unchanged."""
    if not A.det():
        raise ValueError("singular matrix")
    t1, t2 = P.theta
    theta = (derivative_image(A, t1), derivative_image(A, t2))
    k2 = P.k2 * derivative_rho_sq(A, t1, t2)
    return PDecomposition(theta, k2, P.origami, P.marks, P.regular)


@dataclass
class PrefilterResult:
    passed: bool
    reason: str = ""
    witness: str = ""


def _spectra(P: PDecomposition):
    return tuple(cylinder_spectrum(P.origami, axis).moduli for axis in ("x", "y"))


def prefilter(P: PDecomposition, A: Mat2, budget: int | None = None,
              complex_: PlanarComplex | None = None,
              image: PDecomposition | None = None) -> PrefilterResult:
    """Compare cylinder counts and projective moduli in the image directions.

    Raises :class:`BudgetExceeded` when tracing runs out of budget.
    """
    C = complex_ if complex_ is not None else realize(P)
    Q = act(A, P)
    if image is None:
        try:
            image = redecompose(C, *Q.theta, budget=budget)
        except NotJenkinsStrebel as exc:
            return PrefilterResult(False, "NotJS", str(exc))
    before = _spectra(P)
    after = _spectra(image)
    for axis, b, a in zip("xy", before, after):
        if len(a) != len(b):
            return PrefilterResult(False, "CylinderCount",
                                   f"{axis}: {len(b)} cylinders become {len(a)}")
        if a != b:
            return PrefilterResult(False, "CylinderModuli",
                                   f"{axis}: moduli {[str(m) for m in b]} vs {[str(m) for m in a]}")
    return PrefilterResult(True)


@dataclass
class MembershipVerdict:
    status: str
    reason: str = ""
    detail: str = ""
    certificate: Optional[dict] = None

    @property
    def is_member(self) -> bool:
        return self.status == MEMBER

    def to_json(self) -> dict:
        out = {"verdict": self.status}
        if self.reason:
            out["reason"] = self.reason
        if self.detail:
            out["detail"] = self.detail
        if self.certificate is not None:
            out["certificate"] = self.certificate
        return out


def membership(P: PDecomposition, A: Mat2, marked: bool = False, budget: int | None = None,
               complex_: PlanarComplex | None = None) -> MembershipVerdict:
    """Decide whether ``A`` (up to sign) is in the Veech group of ``P``.

    With ``marked=True`` the marks of ``P`` must be preserved label by label.
    """
    if budget is None:
        budget = default_budget()
    if marked and P.marks is None:
        raise ValueError("marked membership needs marks")
    if not marked:
        P = P.without_marks()
    P = P.sign_normalized()
    C = complex_ if complex_ is not None else realize(P)
    if not marked and C.marks is not None:
        C = replace(C, marks=None)
    Q = act(A, P)
    try:
        R = redecompose(C, *Q.theta, budget=budget)
    except NotJenkinsStrebel as exc:
        return MembershipVerdict(NOT_MEMBER, "NotJS", str(exc))
    except BudgetExceeded as exc:
        return MembershipVerdict(UNKNOWN, "Budget", str(exc))
    # The spectra come from the same re-decomposition, so the prefilter is not
    # cheaper than the isomorphism test; it is reported alongside it and must
    # never contradict a positive answer.
    pre = prefilter(P, A, complex_=C, image=R)
    verdict = compare(R, Q, marked)
    if verdict.is_member and not pre.passed:
        raise AssertionError(f"prefilter rejects a member: {pre.reason}: {pre.witness}")
    if not pre.passed:
        verdict.detail += f"; prefilter also fails ({pre.reason}: {pre.witness})"
    return verdict


def compare(R: PDecomposition, Q: PDecomposition, marked: bool) -> MembershipVerdict:
    """Isomorphism plus exact scale check between a re-decomposition and ``act(A, P)``."""
    found_projective = False
    mods_r = R.cell_moduli_sq()
    mods_q = Q.cell_moduli_sq()
    m1 = dict(R.marks) if marked else None
    m2 = dict(Q.marks) if marked else None
    if R.regular or Q.regular:
        # punctures must go to punctures
        m1 = {**(m1 or {}), PUNCTURE_LABEL: R.punctured_classes()}
        m2 = {**(m2 or {}), PUNCTURE_LABEL: Q.punctured_classes()}
    for iso in isomorphisms(R.origami, Q.origami, m1, m2):
        found_projective = True
        if all(mods_r[lam] == mods_q[iso.sigma[2 * lam] >> 1] for lam in range(R.origami.n)):
            cert = {
                "sigma": iso.to_json()["sigma"],
                "rescale": str(iso.rescale),
                "k2_image": str(R.k2),
                "k2_expected": str(Q.k2),
                "directions": [str(t) for t in Q.theta],
            }
            return MembershipVerdict(MEMBER, certificate=cert)
    if found_projective:
        return MembershipVerdict(NOT_MEMBER, "ScaleMismatch",
                                 f"k^2 {R.k2} against expected {Q.k2}")
    if marked:
        plain = next(isomorphisms(R.origami, Q.origami), None)
        if plain is not None:
            table = vertex_table(R.marks, plain.sigma)
            return MembershipVerdict(NOT_MEMBER, "NoIsomorphism",
                                     f"no isomorphism preserves the marks; an unmarked one sends {table}")
    return MembershipVerdict(NOT_MEMBER, "NoIsomorphism",
                             f"re-decomposition {R.origami} is not isomorphic to {Q.origami}")


def vertex_table(marks, sigma) -> str:
    """Where each label goes, e.g. ``a->(1-) b->(2)``."""
    from .origami import fmt_elem

    parts = []
    for label in sorted(marks):
        classes = sorted(sorted(sigma[i] for i in cls) for cls in marks[label])
        parts.append(f"{label}->" + "".join("(" + " ".join(fmt_elem(i) for i in c) + ")" for c in classes))
    return " ".join(parts)


def verify_certificate(P: PDecomposition, A: Mat2, verdict: MembershipVerdict,
                       marked: bool = False, budget: int | None = None) -> bool:
    """Recompute the re-decomposition and re-check the certificate from scratch."""
    from .iso import Isomorphism
    from .origami import from_int

    if not verdict.is_member or verdict.certificate is None:
        return False
    if not marked:
        P = P.without_marks()
    P = P.sign_normalized()
    C = realize(P)
    if not marked:
        C.marks = None
    Q = act(A, P)
    R = redecompose(C, *Q.theta, budget=budget)
    sigma = tuple(from_int(k) for k in verdict.certificate["sigma"])
    rescale = Q.origami.moduli[sigma[0] >> 1] / R.origami.moduli[0]
    iso = Isomorphism(sigma, rescale)
    if not verify_isomorphism(R.origami, Q.origami, iso,
                              R.marks if marked else None, Q.marks if marked else None):
        return False
    lam_image = sigma[0] >> 1
    return R.cell_moduli_sq()[0] == Q.cell_moduli_sq()[lam_image]


# rational refinement ---------------------------------------------------------------


class Incommensurable(ValueError):
    def __init__(self, first: Scalar, second: Scalar):
        super().__init__(f"lengths {first} and {second} are not rational multiples of each other")
        self.pair = (first, second)


def _unit(values) -> tuple[Scalar, list[int]]:
    """Largest common unit ``u`` with every value an integer multiple of it."""
    base = values[0]
    ratios = []
    for v in values:
        q = v / base
        if not q.is_rational:
            raise Incommensurable(base, v)
        ratios.append(q.a)
    num = 0
    den = 1
    for q in ratios:
        num = math.gcd(num, q.numerator)
        den = den * q.denominator // math.gcd(den, q.denominator)
    unit = Fraction(num, den)
    return base * Scalar(unit), [int(q / unit) for q in ratios]


def refine_rational(P: PDecomposition) -> PDecomposition:
    """Subdivide every parallelogram into congruent pieces.

    Corners of the original cells keep their mark labels; the remaining
    original vertices are labelled ``orig`` and new grid points ``sub``.
    The result has all moduli equal to 1 and is punctured at every corner.
    """
    P = P.sign_normalized()
    O = P.origami
    sol = solve_heights(O)
    w, cols = _unit(list(sol.widths))
    h, rows = _unit(list(sol.heights))
    index = {}
    for lam in range(O.n):
        for j in range(rows[lam]):
            for i in range(cols[lam]):
                index[(lam, i, j)] = len(index)
    n = len(index)
    x = [0] * (2 * n)
    y = [0] * (2 * n)
    for (lam, i, j), c in index.items():
        p, q = cols[lam], rows[lam]
        # right neighbour; the left one follows from the symmetry
        if i + 1 < p:
            x[2 * c] = 2 * index[(lam, i + 1, j)]
        else:
            x[2 * c] = 2 * index[(O.x[2 * lam] >> 1, 0, j)]
        if i > 0:
            x[2 * c + 1] = 2 * index[(lam, i - 1, j)] + 1
        else:
            left = O.xinv[2 * lam] >> 1
            x[2 * c + 1] = 2 * index[(left, cols[left] - 1, j)] + 1
        # upper neighbour, possibly across a half-turn
        if j + 1 < q:
            y[2 * c] = 2 * index[(lam, i, j + 1)]
        else:
            up = O.y[2 * lam]
            mu = up >> 1
            if up & 1 == 0:
                y[2 * c] = 2 * index[(mu, i, 0)]
            else:
                y[2 * c] = 2 * index[(mu, cols[mu] - 1 - i, rows[mu] - 1)] + 1
        if j > 0:
            y[2 * c + 1] = 2 * index[(lam, i, j - 1)] + 1
        else:
            down = O.y[2 * lam + 1]
            mu = down >> 1
            if down & 1:
                y[2 * c + 1] = 2 * index[(mu, i, rows[mu] - 1)] + 1
            else:
                y[2 * c + 1] = 2 * index[(mu, cols[mu] - 1 - i, 0)]
    R = ExtendedOrigami(n, tuple(x), tuple(y), tuple(Scalar(1) for _ in range(n)))
    classes = vertex_classes(R)
    old_marks = P.marks or {}
    old_label = {}
    for label, cls_set in old_marks.items():
        for cls in cls_set:
            old_label[cls] = label
    where = {}
    for cls in vertex_classes(O):
        for e in cls.elements:
            where[e] = cls.elements
    new_of_old = {}
    for lam in range(O.n):
        top = index[(lam, cols[lam] - 1, rows[lam] - 1)]
        bottom = index[(lam, 0, 0)]
        new_of_old[2 * top] = where[2 * lam]
        new_of_old[2 * bottom + 1] = where[2 * lam + 1]
    marks: dict[str, set] = {}
    for cls in classes:
        olds = {new_of_old[e] for e in cls.elements if e in new_of_old}
        if len(olds) > 1:
            raise AssertionError("a refined vertex covers two original vertices")
        if olds:
            label = old_label.get(olds.pop(), "orig")
        else:
            label = "sub"
        marks.setdefault(label, set()).add(cls.elements)
    k2 = P.k2 * (h / w) ** 2 / O.moduli[0] ** 2
    frozen = {label: frozenset(v) for label, v in marks.items()}
    return PDecomposition(P.theta, k2, R, frozen)


# Veech group of square-tiled surfaces -----------------------------------------------

T_MAT = Mat2(1, 1, 0, 1)
S_MAT = Mat2(0, -1, 1, 0)
GENERATORS = {"T": T_MAT, "S": S_MAT}


def word_matrix(word: str) -> Mat2:
    """Matrix of a word in T, t (= T^-1) and S, read as a product left to right."""
    out = Mat2.identity()
    for ch in word:
        if ch == "T":
            out = out * T_MAT
        elif ch == "t":
            out = out * T_MAT.inverse()
        elif ch == "S":
            out = out * S_MAT
        else:
            raise ValueError(f"bad letter {ch!r} in word {word!r}")
    return out


def sl2z_word(A: Mat2) -> str:
    """Write ``A`` in PSL(2,Z) as a word in T, t and S (Euclid on the first column)."""
    if not A.is_integral or A.det() != Scalar(1):
        raise ValueError(f"{A} is not in SL(2,Z)")
    word = []
    a, b, c, d = (int(e.a) for e in A.entries)
    while c != 0:
        q = a // c
        # A = T^q S^-1 (S T^-q A) and S^-1 = -S
        word.append(("T" if q > 0 else "t") * abs(q))
        word.append("S")
        a, b, c, d = c, d, -(a - q * c), -(b - q * d)
    # now A = +-[[1, b'], [0, 1]] with a = d = +-1
    k = b * a
    word.append(("T" if k > 0 else "t") * abs(k))
    return "".join(word)


@dataclass
class CosetGraph:
    """Schreier graph of PSL(2,Z) acting on P-decompositions of a square-tiled surface.

    Vertex ``v`` is the surface ``M_v . X`` where ``M_v`` is the matrix of
    ``words[v]``; an edge ``v --G--> u`` means ``G . (M_v . X) = M_u . X``.
    """

    vertices: list[bytes]
    edges: dict[str, list[Optional[int]]]
    words: list[str]
    generators: list[str]
    complete: bool
    marked: bool

    @property
    def index(self) -> int:
        return len(self.vertices)

    def generator_matrices(self) -> list[Mat2]:
        return [word_matrix(w) for w in self.generators]

    def walk(self, word: str, start: int = 0) -> Optional[int]:
        """Vertex reached by acting with the matrix of ``word`` (rightmost letter first)."""
        v = start
        inverse_t = None
        for ch in reversed(word):
            if v is None:
                return None
            if ch == "t":
                if inverse_t is None:
                    inverse_t = {u: k for k, u in enumerate(self.edges["T"]) if u is not None}
                v = inverse_t.get(v)
            else:
                v = self.edges[ch][v]
        return v

    def contains(self, A: Mat2) -> bool:
        if not self.complete:
            raise ValueError("coset graph is incomplete")
        return self.walk(sl2z_word(A)) == 0

    def to_json(self) -> dict:
        from .exact import format_matrix

        return {
            "index": self.index,
            "complete": self.complete,
            "marked": self.marked,
            "coset_words": self.words,
            "edges": {g: self.edges[g] for g in sorted(self.edges)},
            "generators": [
                {"word": w, "matrix": format_matrix(word_matrix(w))} for w in self.generators
            ],
        }

    def to_dot(self, schreier: bool = False) -> str:
        lines = ["digraph cosets {", "  node [shape=circle];"]
        for v, w in enumerate(self.words):
            lines.append(f'  {v} [label="{w or "1"}"];')
        colors = {"T": "blue", "S": "red"}
        for g in sorted(self.edges):
            for v, u in enumerate(self.edges[g]):
                if u is None:
                    continue
                if schreier or g != "S" or v <= u:
                    attrs = f'label="{g}", color={colors[g]}'
                    if g == "S" and not schreier:
                        attrs += ", dir=none"
                    lines.append(f"  {v} -> {u} [{attrs}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _square_tiled(P: PDecomposition) -> None:
    from .exact import HORIZONTAL, VERTICAL

    if P.theta != (HORIZONTAL, VERTICAL):
        raise ValueError("group enumeration needs the horizontal/vertical direction pair")
    if any(m != Scalar(1) for m in P.origami.moduli) or P.k2 != Scalar(1):
        raise ValueError("group enumeration needs unit squares; apply refine_rational first")
    if any(not v.is_rational for v in solve_heights(P.origami).widths):
        raise ValueError("cell widths are not rational")


def step(Q: PDecomposition, G: Mat2, budget: int | None = None) -> PDecomposition:
    """The decomposition of ``G . X`` in the standard directions, where ``Q`` describes ``X``."""
    C = realize(Q)
    inv = G.inverse()
    R = redecompose(C, derivative_image(inv, Q.theta[0]), derivative_image(inv, Q.theta[1]), budget=budget)
    return act(G, R)


def _key(Q: PDecomposition, marked: bool) -> bytes:
    from .iso import canonical_form

    marks = dict(Q.marks) if marked and Q.marks is not None else None
    return canonical_form(Q.origami, marks)


def enumerate_group(P: PDecomposition, marked: bool = False, limit: int = 10000,
                    budget: int | None = None) -> CosetGraph:
    """Breadth-first orbit of ``P`` under T and S; stabilizer by Schreier's lemma."""
    _square_tiled(P)
    if not marked:
        P = P.without_marks()
    elif P.marks is None:
        raise ValueError("marked enumeration needs marks")
    P = P.sign_normalized()
    keys = [_key(P, marked)]
    reps = [P]
    words = [""]
    seen = {keys[0]: 0}
    edges: dict[str, list[Optional[int]]] = {"T": [None], "S": [None]}
    complete = True
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for g in ("T", "S"):
            Q = step(reps[v], GENERATORS[g], budget)
            k = _key(Q, marked)
            u = seen.get(k)
            if u is None:
                if len(keys) >= limit:
                    complete = False
                    continue
                u = len(keys)
                seen[k] = u
                keys.append(k)
                reps.append(Q)
                words.append(g + words[v])
                for lst in edges.values():
                    lst.append(None)
                queue.append(u)
            edges[g][v] = u
    generators = []
    found = set()
    for g in ("T", "S"):
        for v, u in enumerate(edges[g]):
            if u is None:
                continue
            # M_u^-1 G M_v fixes the base point
            if words[u] == g + words[v]:
                continue
            w = _reduce(_inverse_word(words[u]) + g + words[v])
            key = word_matrix(w).psl_key()
            if w and key not in found and key != Mat2.identity().psl_key():
                found.add(key)
                generators.append(w)
    return CosetGraph(keys, edges, words, generators, complete, marked)


def _inverse_word(word: str) -> str:
    swap = {"T": "t", "t": "T", "S": "S"}
    return "".join(swap[ch] for ch in reversed(word))


def _reduce(word: str) -> str:
    out: list[str] = []
    for ch in word:
        if out and {out[-1], ch} == {"T", "t"}:
            out.pop()
        elif out and out[-1] == ch == "S":
            out.pop()
        else:
            out.append(ch)
    return "".join(out)
