"""Extended origamis: signed permutation pairs with a projective moduli list.

Signed cells ``(lam, eps)`` are stored as integers ``2*(lam-1) + (eps < 0)`` so
that negation is ``i ^ 1``.  In text and JSON a signed cell is a nonzero
integer, negative for ``lam^-``.

Words in the free group on ``x, y`` are strings over ``x, X, y, Y`` (capitals
are inverses) and act with left-to-right path semantics: ``m_{w1 w2}`` is
``m_{w2}`` after ``m_{w1}``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exact import Scalar, common_field

# signed cells ---------------------------------------------------------------


def elem(lam: int, eps: int = 1) -> int:
    return 2 * (lam - 1) + (1 if eps < 0 else 0)


def from_int(k: int) -> int:
    if k == 0:
        raise ValueError("0 is not a signed cell")
    return elem(abs(k), 1 if k > 0 else -1)


def to_int(i: int) -> int:
    lam = (i >> 1) + 1
    return -lam if i & 1 else lam


def cell_of(i: int) -> int:
    """0-based cell index of a signed cell."""
    return i >> 1


def sign_of(i: int) -> int:
    return -1 if i & 1 else 1


def neg(i: int) -> int:
    return i ^ 1


def fmt_elem(i: int) -> str:
    k = to_int(i)
    return f"{-k}-" if k < 0 else str(k)


# permutations ------------------------------------------------------------------


def perm_inverse(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for i, j in enumerate(p):
        inv[j] = i
    return tuple(inv)


def perm_cycles(p: Sequence[int]) -> list[list[int]]:
    seen = [False] * len(p)
    out = []
    for i in range(len(p)):
        if seen[i]:
            continue
        c = []
        j = i
        while not seen[j]:
            seen[j] = True
            c.append(j)
            j = p[j]
        out.append(c)
    return out


def partner_cycle(c: Sequence[int]) -> list[int]:
    """The cycle forced by the negation symmetry: ``(-c_n ... -c_1)``."""
    return [neg(i) for i in reversed(c)]


def _rotate_min(c: list[int]) -> list[int]:
    k = min(range(len(c)), key=lambda t: c[t])
    return c[k:] + c[:k]


def signed_perm_from_cycles(n: int, cycles: Iterable[Sequence[int]]) -> tuple[int, ...]:
    """Build a negation-symmetric permutation of the 2n signed cells.

    ``cycles`` uses the +/- integer notation; half of the cycles may be
    omitted, the partner of each given cycle is added.  Unmentioned signed
    cells are fixed.
    """
    p: list[int | None] = [None] * (2 * n)

    def put(i: int, j: int) -> None:
        if p[i] is not None and p[i] != j:
            raise ValueError(f"signed cell {fmt_elem(i)} is mapped twice")
        p[i] = j

    for raw in cycles:
        c = [from_int(int(k)) for k in raw]
        if not c:
            raise ValueError("empty cycle")
        for i in c:
            if cell_of(i) >= n:
                raise ValueError(f"cell {abs(to_int(i))} out of range 1..{n}")
        if len(set(c)) != len(c):
            raise ValueError(f"cycle {list(raw)} repeats an element")
        for a, b in zip(c, c[1:] + c[:1]):
            put(a, b)
        pc = partner_cycle(c)
        for a, b in zip(pc, pc[1:] + pc[:1]):
            put(a, b)
    out = tuple(i if j is None else j for i, j in enumerate(p))
    if sorted(out) != list(range(2 * n)):
        raise ValueError("cycles do not define a bijection")
    return out


def half_cycles(p: Sequence[int]) -> list[list[int]]:
    """One cycle from each partner pair, in the canonical output order.

    Cycles are sorted by smallest absolute cell and rotated to start at their
    minimal element (``1 < 1- < 2 < ...``).
    """
    chosen = []
    done = set()
    for c in perm_cycles(p):
        key = frozenset(c)
        if key in done:
            continue
        pc = partner_cycle(c)
        done.add(key)
        done.add(frozenset(pc))
        # keep the member of the pair containing the smallest positive element
        best = min((c, pc), key=lambda cy: min(cy))
        chosen.append(_rotate_min(list(best)))
    chosen.sort(key=lambda cy: cy[0])
    return [[to_int(i) for i in cy] for cy in chosen]


def format_cycles(cycles: Iterable[Sequence[int]]) -> str:
    parts = []
    for c in cycles:
        parts.append("(" + " ".join(f"{-k}-" if k < 0 else str(k) for k in c) + ")")
    return "".join(parts)


# words --------------------------------------------------------------------------

_INV = {"x": "X", "X": "x", "y": "Y", "Y": "y"}


def reduce_word(w: str) -> str:
    out: list[str] = []
    for ch in w:
        if ch not in _INV:
            raise ValueError(f"bad letter {ch!r} in word {w!r}")
        if out and out[-1] == _INV[ch]:
            out.pop()
        else:
            out.append(ch)
    return "".join(out)


def invert_word(w: str) -> str:
    return "".join(_INV[ch] for ch in reversed(w))


def gamma_minus_i(w: str) -> str:
    """Image under the automorphism ``x -> x^-1, y -> y^-1``."""
    return "".join(_INV[ch] for ch in w)


COMMUTATOR = "xyXY"


# extended origamis --------------------------------------------------------------


@dataclass(frozen=True)
class ExtendedOrigami:
    """``n`` parallelograms, projective moduli, and the signed pair ``(x, y)``."""

    n: int
    x: tuple[int, ...]
    y: tuple[int, ...]
    moduli: tuple[Scalar, ...] = ()
    xinv: tuple[int, ...] = field(init=False, repr=False, compare=False)
    yinv: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("need at least one cell")
        moduli = self.moduli or (Scalar(1),) * self.n
        moduli = tuple(Scalar.coerce(m) for m in moduli)
        object.__setattr__(self, "moduli", moduli)
        if len(moduli) != self.n:
            raise ValueError(f"{len(moduli)} moduli for {self.n} cells")
        for name in ("x", "y"):
            p = tuple(getattr(self, name))
            if sorted(p) != list(range(2 * self.n)):
                raise ValueError(f"{name} is not a permutation of the {2 * self.n} signed cells")
            object.__setattr__(self, name, p)
        object.__setattr__(self, "xinv", perm_inverse(self.x))
        object.__setattr__(self, "yinv", perm_inverse(self.y))

    @classmethod
    def from_cycles(cls, x_cycles, y_cycles, moduli=None, n: int | None = None) -> "ExtendedOrigami":
        if n is None:
            n = max(abs(int(k)) for c in list(x_cycles) + list(y_cycles) for k in c)
        x = signed_perm_from_cycles(n, x_cycles)
        y = signed_perm_from_cycles(n, y_cycles)
        return cls(n, x, y, tuple(moduli) if moduli is not None else ())

    @property
    def field_d(self) -> int:
        return common_field(self.moduli)

    def gen(self, letter: str) -> tuple[int, ...]:
        return {"x": self.x, "X": self.xinv, "y": self.y, "Y": self.yinv}[letter]

    def modulus(self, i: int) -> Scalar:
        """Modulus of the cell underlying signed cell ``i``."""
        return self.moduli[i >> 1]

    def x_cycles(self) -> list[list[int]]:
        return half_cycles(self.x)

    def y_cycles(self) -> list[list[int]]:
        return half_cycles(self.y)

    def __str__(self) -> str:
        return f"x={format_cycles(self.x_cycles())} y={format_cycles(self.y_cycles())}"

    def with_moduli(self, moduli) -> "ExtendedOrigami":
        return ExtendedOrigami(self.n, self.x, self.y, tuple(moduli))


def relabel(O: ExtendedOrigami, sigma: Sequence[int]) -> ExtendedOrigami:
    """Transport ``O`` along a bijection ``sigma`` of signed cells.

    ``sigma`` must commute with negation.  The result has
    ``x' = sigma x sigma^-1`` and moduli moved to the image cells.
    """
    n2 = 2 * O.n
    x = [0] * n2
    y = [0] * n2
    for i in range(n2):
        x[sigma[i]] = sigma[O.x[i]]
        y[sigma[i]] = sigma[O.y[i]]
    moduli: list[Scalar] = [Scalar(0)] * O.n
    for lam in range(O.n):
        moduli[sigma[2 * lam] >> 1] = O.moduli[lam]
    return ExtendedOrigami(O.n, tuple(x), tuple(y), tuple(moduli))


def flip_cells(O: ExtendedOrigami, flips: Sequence[int]) -> ExtendedOrigami:
    """Reverse the sign convention of every cell with ``flips[lam] == -1``."""
    return relabel(O, flip_map(flips))


def flip_map(flips: Sequence[int]) -> tuple[int, ...]:
    sigma = []
    for lam, f in enumerate(flips):
        if f < 0:
            sigma += [2 * lam + 1, 2 * lam]
        else:
            sigma += [2 * lam, 2 * lam + 1]
    return tuple(sigma)


# monodromy and cocycle ----------------------------------------------------------


def monodromy_eval(O: ExtendedOrigami, w: str, s: int) -> int:
    for ch in w:
        s = O.gen(ch)[s]
    return s


def _k_step(O: ExtendedOrigami, s: int, ch: str) -> Scalar:
    if ch == "x":
        return O.modulus(s) / O.modulus(O.x[s])
    if ch == "y":
        return O.modulus(O.y[s]) / O.modulus(s)
    if ch == "X":
        t = O.xinv[s]
        return O.modulus(O.x[t]) / O.modulus(t)
    t = O.yinv[s]
    return O.modulus(t) / O.modulus(O.y[t])


def k_cocycle(O: ExtendedOrigami, s: int, w: str) -> Scalar:
    """``K_O(s, w)`` from the generator rules and the chain rule."""
    k = Scalar(1)
    for ch in w:
        k = k * _k_step(O, s, ch)
        s = O.gen(ch)[s]
    return k


# orbits and Schreier data -------------------------------------------------------


@dataclass
class SchreierData:
    base: int
    orbit: list[int]
    transversal: dict[int, str]
    generators: list[str]

    @property
    def index(self) -> int:
        return len(self.orbit)


def stabilizer(O: ExtendedOrigami, base: int = 0, projected: bool = False) -> SchreierData:
    """Coset table of the stabilizer of ``base`` and its Schreier generators.

    With ``projected=True`` the action on unsigned cells is used (``base`` is
    then a 0-based cell); this requires the action to descend, i.e. an
    Abelian, sign-normal origami.
    """
    if projected:
        if not (is_sign_normal(O) and is_abelian(O)):
            raise ValueError("the action on cells is only defined for sign-normal Abelian origamis")
        act = {ch: tuple(p[2 * i] >> 1 for i in range(O.n)) for ch, p in
               (("x", O.x), ("X", O.xinv), ("y", O.y), ("Y", O.yinv))}
    else:
        act = {ch: O.gen(ch) for ch in "xXyY"}
    trans = {base: ""}
    orbit = [base]
    tree_edges = set()
    queue = deque([base])
    while queue:
        p = queue.popleft()
        for ch in "xyXY":
            q = act[ch][p]
            if q not in trans:
                trans[q] = trans[p] + ch
                orbit.append(q)
                tree_edges.add((p, ch))
                tree_edges.add((q, _INV[ch]))
                queue.append(q)
    gens = []
    for p in orbit:
        for ch in "xy":
            if (p, ch) in tree_edges:
                continue
            q = act[ch][p]
            gens.append(reduce_word(trans[p] + ch + invert_word(trans[q])))
    return SchreierData(base, orbit, trans, gens)


def cell_orbit(O: ExtendedOrigami, lam: int = 0) -> set[int]:
    """0-based cells reachable from cell ``lam`` (either sign)."""
    seen = {2 * lam, 2 * lam + 1}
    queue = deque(seen)
    while queue:
        p = queue.popleft()
        for g in (O.x, O.xinv, O.y, O.yinv):
            for q in (g[p], neg(g[p])):
                if q not in seen:
                    seen.add(q)
                    queue.append(q)
    return {i >> 1 for i in seen}


def is_sign_normal(O: ExtendedOrigami) -> bool:
    return all((O.x[i] ^ i) & 1 == 0 for i in range(2 * O.n))


def is_abelian(O: ExtendedOrigami) -> bool:
    """True iff ``y`` preserves every sign (for a sign-normal origami)."""
    return all((O.y[i] ^ i) & 1 == 0 for i in range(2 * O.n))


# heights ------------------------------------------------------------------------


class InconsistentOrigami(ValueError):
    """The moduli admit no area assignment; ``witness`` is a loop at the base."""

    def __init__(self, witness: str, product: Scalar):
        super().__init__(f"K_O(1, {witness}) = {product} != 1")
        self.witness = witness
        self.product = product


@dataclass
class HeightSolution:
    """Relative areas and side lengths of the cells.

    ``areas[lam]`` is normalised so that cell 1 has area 1.  ``widths`` (side
    along the first direction) are constant on y-cylinders, ``heights`` (side
    along the second direction) on x-cylinders, and
    ``heights[lam] / widths[lam] == moduli[lam]``.
    """

    areas: tuple[Scalar, ...]
    widths: tuple[Scalar, ...]
    heights: tuple[Scalar, ...]
    x_cylinders: list[list[int]]
    y_cylinders: list[list[int]]


def _unsigned_orbits(n: int, perm: Sequence[int]) -> list[list[int]]:
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in enumerate(perm):
        ra, rb = find(i >> 1), find(j >> 1)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[int, list[int]] = {}
    for lam in range(n):
        groups.setdefault(find(lam), []).append(lam)
    return sorted(groups.values())


def x_cylinders(O: ExtendedOrigami) -> list[list[int]]:
    return _unsigned_orbits(O.n, O.x)


def y_cylinders(O: ExtendedOrigami) -> list[list[int]]:
    return _unsigned_orbits(O.n, O.y)


def solve_heights(O: ExtendedOrigami) -> HeightSolution:
    """Propagate areas from cell 1 using the two area relations.

    Raises :class:`InconsistentOrigami` with a loop word whose cocycle value
    is not 1 when the moduli are inconsistent.
    """
    base = 0
    area: dict[int, Scalar] = {base: Scalar(1)}
    path = {base: ""}
    queue = deque([base])
    while queue:
        p = queue.popleft()
        for ch in "xyXY":
            q = O.gen(ch)[p]
            val = area[p] * _k_step(O, p, ch)
            if q not in area:
                area[q] = val
                path[q] = path[p] + ch
                queue.append(q)
            elif area[q] != val:
                w = reduce_word(path[p] + ch + invert_word(path[q]))
                raise InconsistentOrigami(w, val / area[q])
    for lam in range(O.n):
        a, b = area.get(2 * lam), area.get(2 * lam + 1)
        if a is None and b is None:
            raise ValueError(f"cell {lam + 1} is not connected to cell 1")
        if a is not None and b is not None and a != b:
            # cannot happen when the symmetry axiom holds
            raise InconsistentOrigami(path[2 * lam + 1], b / a)
    areas = tuple(area[2 * lam] if 2 * lam in area else area[2 * lam + 1] for lam in range(O.n))

    xc = x_cylinders(O)
    yc = y_cylinders(O)
    xcyl = {lam: k for k, c in enumerate(xc) for lam in c}
    ycyl = {lam: k for k, c in enumerate(yc) for lam in c}
    # width per y-cylinder, height per x-cylinder, height = modulus * width
    width: dict[int, Scalar] = {ycyl[0]: Scalar(1)}
    height: dict[int, Scalar] = {}
    changed = True
    while changed:
        changed = False
        for lam in range(O.n):
            j, i = ycyl[lam], xcyl[lam]
            if j in width and i not in height:
                height[i] = O.moduli[lam] * width[j]
                changed = True
            elif i in height and j not in width:
                width[j] = height[i] / O.moduli[lam]
                changed = True
    widths = tuple(width[ycyl[lam]] for lam in range(O.n))
    heights = tuple(height[xcyl[lam]] for lam in range(O.n))
    for lam in range(O.n):
        if heights[lam] != O.moduli[lam] * widths[lam]:
            # equivalent to an area mismatch, which was excluded above
            raise AssertionError("side lengths inconsistent with areas")
    return HeightSolution(areas, widths, heights, xc, yc)


def is_consistent(O: ExtendedOrigami) -> bool:
    try:
        solve_heights(O)
    except InconsistentOrigami:
        return False
    return True


# sign normalisation ---------------------------------------------------------------


class SignNormalizationError(ValueError):
    """An x-cylinder reverses its own orientation; not data from a surface."""


def sign_flips(O: ExtendedOrigami) -> list[int]:
    """Per-cell flips making ``x`` sign preserving (first cell of each cylinder kept)."""
    flips: list[int | None] = [None] * O.n
    for lam0 in range(O.n):
        if flips[lam0] is not None:
            continue
        flips[lam0] = 1
        e = O.x[2 * lam0]
        while e != 2 * lam0:
            if e == 2 * lam0 + 1:
                raise SignNormalizationError(
                    f"x-cylinder through cell {lam0 + 1} returns with reversed orientation")
            flips[e >> 1] = sign_of(e)
            e = O.x[e]
    return [int(f) for f in flips]


def normalize_signs(O: ExtendedOrigami) -> ExtendedOrigami:
    """Flip sign conventions per x-cylinder so that ``x`` preserves signs."""
    out = flip_cells(O, sign_flips(O))
    assert is_sign_normal(out)
    return out


# validation ---------------------------------------------------------------------------


@dataclass
class ValidationReport:
    checks: dict[str, tuple[bool, str]]

    @property
    def ok(self) -> bool:
        return all(ok for ok, _ in self.checks.values())

    def failures(self) -> dict[str, str]:
        return {k: w for k, (ok, w) in self.checks.items() if not ok}

    def lines(self) -> list[str]:
        return [f"{name}: {'ok' if ok else 'FAIL ' + w}" for name, (ok, w) in self.checks.items()]


def validate(O: ExtendedOrigami) -> ValidationReport:
    checks: dict[str, tuple[bool, str]] = {}

    bad = ""
    for name, p, pinv in (("x", O.x, O.xinv), ("y", O.y, O.yinv)):
        for i in range(2 * O.n):
            if neg(p[neg(i)]) != pinv[i]:
                bad = f"{name}({fmt_elem(neg(i))}) = {fmt_elem(p[neg(i)])}"
                break
        if bad:
            break
    checks["equivariance"] = (not bad, bad)

    bad = ""
    for i in range(2 * O.n):
        if O.y[i] == neg(i):
            bad = f"y({fmt_elem(i)}) = {fmt_elem(neg(i))}"
            break
    checks["non_branching"] = (not bad, bad)

    reach = cell_orbit(O, 0)
    missing = sorted(set(range(O.n)) - reach)
    checks["connectivity"] = (not missing, f"cell {missing[0] + 1} unreachable" if missing else "")

    bad = ""
    for lam, m in enumerate(O.moduli):
        if m.sign() <= 0:
            bad = f"M_{lam + 1} = {m}"
            break
    checks["positive_moduli"] = (not bad, bad)

    try:
        sign_flips(O)
        checks["sign_normalizable"] = (True, "")
    except SignNormalizationError as exc:
        checks["sign_normalizable"] = (False, str(exc))

    if checks["equivariance"][0] and not missing:
        try:
            solve_heights(O)
            checks["consistency"] = (True, "")
        except InconsistentOrigami as exc:
            checks["consistency"] = (False, str(exc))
    else:
        checks["consistency"] = (False, "not checked: structural axioms fail")
    return ValidationReport(checks)


def ensure_valid(O: ExtendedOrigami) -> None:
    report = validate(O)
    if not report.ok:
        name, witness = next(iter(report.failures().items()))
        raise ValueError(f"invalid extended origami: {name}: {witness}")

