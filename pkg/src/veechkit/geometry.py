"""Exact planar realization, separatrix tracing and re-decomposition.

Each cell ``lam`` is the parallelogram spanned by ``E1 = a_lam * u1`` and
``E2 = b_lam * u2`` where ``(u1, u2)`` is the right-handed frame of the
direction pair.  Points are kept in local coordinates ``(s, t)`` of the unit
square.  With a sign-normal origami the edges are glued as follows:

* right edge of ``lam`` to the left edge of ``x(lam)`` by translation;
* top edge to the bottom of ``lam'`` if ``y(lam,+) = (lam',+)``, otherwise to
  the top of ``lam'`` by a half-turn ``s -> 1 - s``;
* bottom edge to the top of ``lam''`` if ``y(lam,-) = (lam'',-)``, otherwise
  to the bottom of ``lam''`` by a half-turn.

Corners are grouped into vertices.  Singular vertices (cone points and
punctures) emit separatrices; geodesics pass straight through the regular
ones.
"""

from __future__ import annotations

import os
from bisect import bisect_left, bisect_right
from collections import deque
from dataclasses import dataclass, field
from typing import Optional

from .exact import Direction, Scalar, Vec, common_field, cross, frame, norm_sq
from .origami import ExtendedOrigami, solve_heights
from .pdecomp import PDecomposition

ZERO = Scalar(0)
ONE = Scalar(1)
HALF = Scalar(1) / 2

BOTTOM, RIGHT, TOP, LEFT = "bottom", "right", "top", "left"
CORNERS = ((0, 0), (1, 0), (0, 1), (1, 1))
SIDE_ENDS = {BOTTOM: ((0, 0), (1, 0)), RIGHT: ((1, 0), (1, 1)),
             TOP: ((0, 1), (1, 1)), LEFT: ((0, 0), (0, 1))}
# edge leaving each corner with the cell on its left, and the corner it reaches
CCW_EDGE = {(0, 0): (BOTTOM, (1, 0)), (1, 0): (RIGHT, (1, 1)),
            (1, 1): (TOP, (0, 1)), (0, 1): (LEFT, (0, 0))}


def default_budget() -> int:
    return int(os.environ.get("VEECHKIT_BUDGET", "100000"))


class BudgetExceeded(RuntimeError):
    """Tracing used up its segment budget."""


class NotJenkinsStrebel(ValueError):
    """The direction is provably not a Jenkins-Strebel direction."""

    def __init__(self, direction: Direction, reason: str):
        super().__init__(f"direction {direction} is not Jenkins-Strebel: {reason}")
        self.direction = direction


class RealizationError(ValueError):
    pass


@dataclass
class PlanarComplex:
    """Glued parallelograms with exact side lengths.

    ``marks`` maps labels to sets of vertex classes of ``origami`` and
    ``regular`` lists the classes that are ordinary points of the surface.
    """

    origami: ExtendedOrigami
    u1: Vec
    u2: Vec
    a: tuple[Scalar, ...]
    b: tuple[Scalar, ...]
    marks: Optional[dict] = None
    regular: frozenset = frozenset()
    vertex_of: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        self.det = cross(self.u1, self.u2)
        self._number_vertices()
        regular_ids = {self.vertex_of_element(next(iter(cls))) for cls in self.regular}
        for v in regular_ids:
            if len(self.fans[v]) != 4:
                raise RealizationError("a regular vertex must have cone angle 2*pi")
        self.singular = frozenset(range(self.vertex_count)) - regular_ids

    @property
    def n(self) -> int:
        return self.origami.n

    # gluing ------------------------------------------------------------------

    def cross_edge(self, cell: int, side: str, s: Scalar, t: Scalar) -> tuple[int, Scalar, Scalar, int]:
        """Map a boundary point across its edge: ``(cell', s', t', eta)``."""
        O = self.origami
        if side == RIGHT:
            return O.x[2 * cell] >> 1, ZERO, t, 1
        if side == LEFT:
            return O.xinv[2 * cell] >> 1, ONE, t, 1
        if side == TOP:
            j = O.y[2 * cell]
            if j & 1 == 0:
                return j >> 1, s, ZERO, 1
            return j >> 1, ONE - s, ONE, -1
        j = O.y[2 * cell + 1]
        if j & 1:
            return j >> 1, s, ONE, 1
        return j >> 1, ONE - s, ZERO, -1

    def twin_side(self, cell: int, side: str) -> tuple[int, str]:
        s, t = {BOTTOM: (HALF, ZERO), TOP: (HALF, ONE), LEFT: (ZERO, HALF), RIGHT: (ONE, HALF)}[side]
        mu, s2, t2, _ = self.cross_edge(cell, side, s, t)
        return mu, _side_of(s2, t2)

    def edge_vector(self, side: str) -> Vec:
        return self.u1 if side in (TOP, BOTTOM) else self.u2

    # vertices ------------------------------------------------------------------

    def _number_vertices(self) -> None:
        adj: dict = {(lam, c): [] for lam in range(self.n) for c in CORNERS}
        for lam in range(self.n):
            for side, ends in SIDE_ENDS.items():
                for s, t in ends:
                    mu, s2, t2, eta = self.cross_edge(lam, side, Scalar(s), Scalar(t))
                    other = (mu, (int(s2.a), int(t2.a)))
                    adj[(lam, (s, t))].append((other, eta))
                    adj[other].append(((lam, (s, t)), eta))
        self.vertex_of = {}
        # orientation of each corner's chart relative to the first corner of its vertex
        self.corner_eta = {}
        self.fans: list[list[tuple[int, tuple[int, int]]]] = []
        for start in sorted(adj):
            if start in self.vertex_of:
                continue
            vid = len(self.fans)
            fan = [start]
            self.vertex_of[start] = vid
            self.corner_eta[start] = 1
            queue = deque([start])
            while queue:
                c = queue.popleft()
                for d, eta in adj[c]:
                    if d not in self.vertex_of:
                        self.vertex_of[d] = vid
                        self.corner_eta[d] = self.corner_eta[c] * eta
                        fan.append(d)
                        queue.append(d)
            self.fans.append(fan)
        self.vertex_count = len(self.fans)

    def corner_count(self, v: int) -> int:
        return len(self.fans[v])

    def vertex_of_element(self, i: int) -> int:
        """Vertex at the corner represented by a signed cell."""
        lam = i >> 1
        return self.vertex_of[(lam, (0, 0) if i & 1 else (1, 1))]

    def continue_through(self, cell: int, corner: tuple[int, int], eta: int, w: Vec):
        """Go straight on through a regular vertex.

        A geodesic reaches ``corner`` of ``cell`` moving along ``eta * w`` in
        that chart.  Returns ``(cell', corner', eta', edge)``: the geodesic
        leaves ``corner'`` into the interior of ``cell'`` (``edge`` None) or
        along its counter-clockwise edge ``edge``.
        """
        v = self.vertex_of[(cell, corner)]
        e_root = self.corner_eta[(cell, corner)] * eta
        for c2 in self.fans[v]:
            lam2, corner2 = c2
            e2 = self.corner_eta[c2] * e_root
            ds, dt = self.local_dir(lam2, (w[0] * e2, w[1] * e2))
            if _entering(corner2, ds, dt):
                return lam2, corner2, e2, None
            if _along_ccw(corner2, ds, dt):
                return lam2, corner2, e2, CCW_EDGE[corner2][0]
        raise AssertionError("no outgoing sector at a regular vertex")

    # coordinates ---------------------------------------------------------------

    def local_dir(self, cell: int, w: Vec) -> Vec:
        """Plane vector ``w`` in the local coordinates of ``cell``."""
        ds = cross(w, self.u2) / (self.a[cell] * self.det)
        dt = cross(self.u1, w) / (self.b[cell] * self.det)
        return ds, dt

    def area(self) -> Scalar:
        d = abs(self.det)
        return sum((self.a[i] * self.b[i] * d for i in range(self.n)), ZERO)

    def cell_area(self, cell: int) -> Scalar:
        return self.a[cell] * self.b[cell] * abs(self.det)

    def surface_point(self, cell: int, s: Scalar, t: Scalar):
        """A hashable name for the point, independent of the chart used."""
        on_s = s in (ZERO, ONE)
        on_t = t in (ZERO, ONE)
        if on_s and on_t:
            return ("v", self.vertex_of[(cell, (int(s.a), int(t.a)))])
        if on_s or on_t:
            mu, s2, t2, _ = self.cross_edge(cell, _side_of(s, t), s, t)
            return ("e",) + min(_pkey(cell, s, t), _pkey(mu, s2, t2))
        return ("i",) + _pkey(cell, s, t)


def _side_of(s: Scalar, t: Scalar) -> str:
    if s == ZERO:
        return LEFT
    if s == ONE:
        return RIGHT
    return BOTTOM if t == ZERO else TOP


def _pkey(cell: int, s: Scalar, t: Scalar) -> tuple:
    return (cell, (s.a, s.b), (t.a, t.b))


def _entering(corner: tuple[int, int], ds: Scalar, dt: Scalar) -> bool:
    cs, ct = corner
    ok_s = ds.sign() > 0 if cs == 0 else ds.sign() < 0
    ok_t = dt.sign() > 0 if ct == 0 else dt.sign() < 0
    return ok_s and ok_t


def _along_ccw(corner: tuple[int, int], ds: Scalar, dt: Scalar) -> bool:
    if corner == (0, 0):
        return dt.sign() == 0 and ds.sign() > 0
    if corner == (1, 0):
        return ds.sign() == 0 and dt.sign() > 0
    if corner == (1, 1):
        return dt.sign() == 0 and ds.sign() < 0
    return ds.sign() == 0 and dt.sign() < 0


def _exit_time(p: Scalar, dp: Scalar):
    if dp.sign() > 0:
        return (ONE - p) / dp
    if dp.sign() < 0:
        return -p / dp
    return None


def exit_step(s: Scalar, t: Scalar, ds: Scalar, dt: Scalar):
    """Time to leave the unit square and the side(s) reached."""
    ts = _exit_time(s, ds)
    tt = _exit_time(t, dt)
    if ts is None and tt is None:
        raise ValueError("zero direction")
    if tt is None or (ts is not None and ts < tt):
        return ts, (RIGHT if ds.sign() > 0 else LEFT), None
    if ts is None or tt < ts:
        return tt, (TOP if dt.sign() > 0 else BOTTOM), None
    return ts, (RIGHT if ds.sign() > 0 else LEFT), (TOP if dt.sign() > 0 else BOTTOM)


def _is_corner(s: Scalar, t: Scalar) -> bool:
    return s in (ZERO, ONE) and t in (ZERO, ONE)


def realize(P: PDecomposition) -> PlanarComplex:
    """Glue exact parallelograms according to a P-decomposition."""
    P = P.sign_normalized()
    O = P.origami
    u1, u2 = frame(*P.theta)
    sol = solve_heights(O)
    # side along u2 over side along u1 must equal k * M_lam / M_1 after scaling
    m1 = O.moduli[0]
    ratio_sq = P.k2 * norm_sq(u1) / (m1 * m1 * norm_sq(u2))
    d = common_field([*O.moduli, P.k2, *P.theta[0].vector, *P.theta[1].vector])
    r = ratio_sq.sqrt(d if d != 1 else None)
    if r is None:
        raise RealizationError(f"scale ratio sqrt({ratio_sq}) is not in the field")
    a = tuple(sol.widths)
    b = tuple(r * h for h in sol.heights)
    marks = dict(P.marks) if P.marks is not None else None
    return PlanarComplex(O, u1, u2, a, b, marks=marks, regular=frozenset(P.regular))


def marks_as_vertices(C: PlanarComplex) -> Optional[dict[str, frozenset[int]]]:
    """Mark labels mapped to sets of vertex ids of the complex."""
    if C.marks is None:
        return None
    out = {}
    for label, classes in C.marks.items():
        out[label] = frozenset(C.vertex_of_element(next(iter(cls))) for cls in classes)
    return out


# tracing ---------------------------------------------------------------------------


@dataclass
class SaddleConnection:
    start: tuple[int, tuple[int, int]]
    end: tuple[int, tuple[int, int]]
    segments: list[tuple[int, tuple[Scalar, Scalar], tuple[Scalar, Scalar]]]

    def length(self) -> int:
        return len(self.segments)


@dataclass
class TraceResult:
    """All separatrices of one direction.

    ``chords[cell]`` holds the values of ``cross(d, p)`` (``d`` the direction
    in local coordinates) of the segments crossing the interior of ``cell``;
    ``cut_edges`` lists the ``(cell, side)`` pairs lying on a separatrix.
    """

    direction: Direction
    saddle_connections: list[SaddleConnection]
    chords: list[set[Scalar]]
    cut_edges: set[tuple[int, str]]
    segments_used: int


def _is_rational_complex(C: PlanarComplex) -> bool:
    return all(v.is_rational for v in (*C.a, *C.b, *C.u1, *C.u2))


class _Tracer:
    def __init__(self, C: PlanarComplex, theta: Direction, budget: int):
        self.C = C
        self.theta = theta
        self.v = theta.vector
        self.budget = budget
        self.used = 0
        self.base = [C.local_dir(lam, self.v) for lam in range(C.n)]
        self.chords: list[set[Scalar]] = [set() for _ in range(C.n)]
        self.cut: set[tuple[int, str]] = set()

    def _tick(self) -> None:
        self.used += 1
        if self.used > self.budget:
            raise BudgetExceeded(f"direction {self.theta}: more than {self.budget} segments")

    def follow(self, cell: int, corner: tuple[int, int], e: int, edge: Optional[str]) -> SaddleConnection:
        C = self.C
        start = (cell, corner)
        s, t = Scalar(corner[0]), Scalar(corner[1])
        segs = []
        while True:
            self._tick()
            if edge is not None:
                end = CCW_EDGE[corner][1]
                s2, t2 = Scalar(end[0]), Scalar(end[1])
                segs.append((cell, (s, t), (s2, t2)))
                self.cut.add((cell, edge))
                self.cut.add(C.twin_side(cell, edge))
            else:
                ds, dt = self.base[cell]
                if e < 0:
                    ds, dt = -ds, -dt
                tau, side, _ = exit_step(s, t, ds, dt)
                s2, t2 = s + tau * ds, t + tau * dt
                segs.append((cell, (s, t), (s2, t2)))
                self.chords[cell].add(cross(self.base[cell], (s, t)))
                if not _is_corner(s2, t2):
                    cell, s, t, flip = C.cross_edge(cell, side, s2, t2)
                    e *= flip
                    continue
            key = (cell, (int(s2.a), int(t2.a)))
            if C.vertex_of[key] in C.singular:
                return SaddleConnection(start, key, segs)
            cell, corner, e, edge = C.continue_through(cell, key[1], e, self.v)
            s, t = Scalar(corner[0]), Scalar(corner[1])


def trace_direction(C: PlanarComplex, theta: Direction, budget: int | None = None) -> TraceResult:
    """Follow every separatrix in direction ``theta`` to its endpoint.

    Raises :class:`BudgetExceeded` if more than ``budget`` segments are
    needed in total and :class:`NotJenkinsStrebel` when the direction is
    irrational for a lattice (rational) complex.
    """
    if budget is None:
        budget = default_budget()
    if budget < 1:
        raise ValueError("budget must be at least 1")
    v = theta.vector
    if _is_rational_complex(C) and not (v[0].is_rational and v[1].is_rational):
        raise NotJenkinsStrebel(theta, "irrational slope on a lattice surface")
    tracer = _Tracer(C, theta, budget)
    connections = []
    for vid in sorted(C.singular):
        for lam, corner in C.fans[vid]:
            for eta in (1, -1):
                ds, dt = tracer.base[lam]
                if eta < 0:
                    ds, dt = -ds, -dt
                if _entering(corner, ds, dt):
                    connections.append(tracer.follow(lam, corner, eta, None))
                elif _along_ccw(corner, ds, dt):
                    connections.append(tracer.follow(lam, corner, eta, CCW_EDGE[corner][0]))
    return TraceResult(theta, connections, tracer.chords, tracer.cut, tracer.used)


def is_jenkins_strebel(C: PlanarComplex, theta: Direction, budget: int | None = None) -> Optional[bool]:
    """True / False, or None when the budget runs out."""
    try:
        trace_direction(C, theta, budget)
    except BudgetExceeded:
        return None
    except NotJenkinsStrebel:
        return False
    return True


# re-decomposition -------------------------------------------------------------------


def _clip(poly, d: Vec, c: Scalar, keep_above: bool):
    """Part of a convex polygon with ``cross(d, p) >= c`` (or ``<= c``)."""
    out = []
    m = len(poly)
    for k in range(m):
        p, q = poly[k], poly[(k + 1) % m]
        fp = cross(d, p) - c
        fq = cross(d, q) - c
        if not keep_above:
            fp, fq = -fp, -fq
        if fp.sign() >= 0:
            out.append(p)
        if fp.sign() * fq.sign() < 0:
            r = fp / (fp - fq)
            out.append((p[0] + r * (q[0] - p[0]), p[1] + r * (q[1] - p[1])))
    return out


def _poly_area2(poly) -> Scalar:
    total = ZERO
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        total = total + p[0] * q[1] - p[1] * q[0]
    return total


def _band(consts: list[Scalar], value: Scalar, motion: int = 0) -> int:
    """Index of the open band containing ``value`` (or entered when moving)."""
    if motion > 0:
        return bisect_right(consts, value)
    if motion < 0:
        return bisect_left(consts, value)
    k = bisect_left(consts, value)
    if k < len(consts) and consts[k] == value:
        raise AssertionError("point lies on a saddle connection")
    return k


class _Arrangement:
    """Faces cut out of every cell by the saddle connections of two directions."""

    def __init__(self, C: PlanarComplex, v1: Vec, v2: Vec, tr1: TraceResult, tr2: TraceResult):
        self.C = C
        self.v = (v1, v2)
        self.cut = (tr1.cut_edges, tr2.cut_edges)
        # chord constants were recorded with the canonical direction vectors
        self.dirs = [[C.local_dir(lam, tr.direction.vector) for lam in range(C.n)] for tr in (tr1, tr2)]
        square = [(ZERO, ZERO), (ONE, ZERO), (ONE, ONE), (ZERO, ONE)]
        self.consts: list[list[list[Scalar]]] = []
        for fam, tr in enumerate((tr1, tr2)):
            per_cell = []
            for lam in range(C.n):
                d = self.dirs[fam][lam]
                vals = [cross(d, p) for p in square]
                lo, hi = min(vals), max(vals)
                per_cell.append(sorted(c for c in tr.chords[lam] if lo < c < hi))
            self.consts.append(per_cell)
        self.faces: dict[tuple[int, int, int], list] = {}
        for lam in range(C.n):
            d1, d2 = self.dirs[0][lam], self.dirs[1][lam]
            c1, c2 = self.consts[0][lam], self.consts[1][lam]
            for i in range(len(c1) + 1):
                strip = square
                if i > 0:
                    strip = _clip(strip, d1, c1[i - 1], True)
                if i < len(c1):
                    strip = _clip(strip, d1, c1[i], False)
                for j in range(len(c2) + 1):
                    poly = strip
                    if j > 0:
                        poly = _clip(poly, d2, c2[j - 1], True)
                    if j < len(c2):
                        poly = _clip(poly, d2, c2[j], False)
                    if len(poly) >= 3 and _poly_area2(poly).sign() != 0:
                        self.faces[(lam, i, j)] = poly

    def face_at(self, cell: int, p: Vec, dl: Optional[Vec] = None) -> tuple[int, int, int]:
        key = [cell]
        for fam in (0, 1):
            d = self.dirs[fam][cell]
            motion = 0 if dl is None else cross(d, dl).sign()
            key.append(_band(self.consts[fam][cell], cross(d, p), motion))
        return tuple(key)

    def edge_is_cut(self, cell: int, side: str) -> bool:
        return (cell, side) in self.cut[0] or (cell, side) in self.cut[1]


def _union_faces(A: _Arrangement):
    """Group faces into new cells; returns (root, parity) per face."""
    parent = {f: f for f in A.faces}
    parity = {f: 1 for f in A.faces}

    def find(f):
        path = []
        while parent[f] != f:
            path.append(f)
            f = parent[f]
        root = f
        # compress, accumulating parity towards the root
        for g in reversed(path):
            p = parent[g]
            if p != root:
                parity[g] *= parity[p]
            parent[g] = root
        return root

    def par(f):
        find(f)
        return parity[f]

    C = A.C
    for f, poly in A.faces.items():
        lam = f[0]
        m = len(poly)
        for k in range(m):
            p, q = poly[k], poly[(k + 1) % m]
            side = None
            if p[0] == q[0] and p[0] in (ZERO, ONE):
                side = LEFT if p[0] == ZERO else RIGHT
            elif p[1] == q[1] and p[1] in (ZERO, ONE):
                side = BOTTOM if p[1] == ZERO else TOP
            if side is None or A.edge_is_cut(lam, side):
                continue
            mid = ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2)
            mu, s2, t2, eta = C.cross_edge(lam, side, *mid)
            g = A.face_at(mu, (s2, t2))
            rf, rg = find(f), find(g)
            want = eta * par(f) * par(g)
            if rf == rg:
                if want != 1:
                    raise AssertionError("orientation conflict inside a parallelogram")
                continue
            parent[rg] = rf
            parity[rg] = want
    groups: dict = {}
    for f in sorted(A.faces):
        groups.setdefault(find(f), []).append(f)
    comps = sorted(groups.values(), key=lambda fs: fs[0])
    orient = {}
    for comp in comps:
        base = par(comp[0])
        for f in comp:
            orient[f] = par(f) * base
    return comps, orient


def _walk(A: _Arrangement, cell: int, p: Vec, eta: int, w: Vec, stop_family: Optional[int],
          limit: Optional[Scalar] = None, budget: int = 10 ** 6):
    """Move from ``p`` along plane vector ``w``, straight through regular vertices.

    Stops at the first saddle connection of ``stop_family`` (returning the
    face entered beyond it) or after parameter ``limit``.  Returns
    ``(tau, cell, point, eta, face_after)``.
    """
    C = A.C
    s, t = p
    total = ZERO
    for _ in range(budget):
        ds, dt = C.local_dir(cell, (w[0] * eta, w[1] * eta))
        tau_e, side, _ = exit_step(s, t, ds, dt)
        if limit is not None and limit - total <= tau_e:
            r = limit - total
            return limit, cell, (s + r * ds, t + r * dt), eta, None
        q = (s + tau_e * ds, t + tau_e * dt)
        corner = _is_corner(*q)
        tau_c = None
        if stop_family is not None:
            d = A.dirs[stop_family][cell]
            f = cross(d, (s, t))
            df = cross(d, (ds, dt))
            consts = A.consts[stop_family][cell]
            if df.sign() > 0:
                k = bisect_right(consts, f)
                if k < len(consts):
                    tau_c = (consts[k] - f) / df
            elif df.sign() < 0:
                k = bisect_left(consts, f) - 1
                if k >= 0:
                    tau_c = (consts[k] - f) / df
            if (tau_c is None or tau_c > tau_e) and not corner and (cell, side) in A.cut[stop_family]:
                tau_c = tau_e
        if tau_c is not None and tau_c < tau_e:
            q = (s + tau_c * ds, t + tau_c * dt)
            return total + tau_c, cell, q, eta, A.face_at(cell, q, (ds, dt))
        total = total + tau_e
        if corner:
            key = (cell, (int(q[0].a), int(q[1].a)))
            if C.vertex_of[key] in C.singular:
                raise AssertionError("walk ran into a singular vertex")
            cell, c2, eta, _ = C.continue_through(cell, key[1], eta, w)
            s, t = Scalar(c2[0]), Scalar(c2[1])
        else:
            cell, s, t, flip = C.cross_edge(cell, side, *q)
            eta *= flip
        if tau_c is not None and tau_c == tau_e:
            dl = C.local_dir(cell, (w[0] * eta, w[1] * eta))
            return total, cell, (s, t), eta, A.face_at(cell, (s, t), dl)
    raise BudgetExceeded("walk did not terminate")


@dataclass
class Redecomposition:
    pdec: PDecomposition
    corner_points: list
    faces: int
    area: Scalar


def redecompose(C: PlanarComplex, theta1: Direction, theta2: Direction,
                budget: int | None = None) -> PDecomposition:
    return redecompose_full(C, theta1, theta2, budget).pdec


def redecompose_full(C: PlanarComplex, theta1: Direction, theta2: Direction,
                     budget: int | None = None) -> Redecomposition:
    """Cut the surface along all saddle connections of two directions."""
    from .invariants import vertex_classes
    from .origami import flip_map, relabel, sign_flips

    if budget is None:
        budget = default_budget()
    v1, v2 = frame(theta1, theta2)
    tr1 = trace_direction(C, theta1, budget)
    tr2 = trace_direction(C, theta2, budget - tr1.segments_used)
    A = _Arrangement(C, v1, v2, tr1, tr2)
    comps, orient = _union_faces(A)
    index = {f: k for k, comp in enumerate(comps) for f in comp}
    n = len(comps)
    x = [0] * (2 * n)
    y = [0] * (2 * n)
    widths, heights = [], []
    corner_key = [None] * (2 * n)
    for k, comp in enumerate(comps):
        rep = comp[0]
        poly = A.faces[rep]
        c = (sum((q[0] for q in poly), ZERO) / len(poly), sum((q[1] for q in poly), ZERO) / len(poly))
        lam = rep[0]
        taus = []
        for fam, v, perm in ((1, v1, x), (0, v2, y)):
            tp, _, _, eta, f_after = _walk(A, lam, c, 1, v, fam)
            tm, _, _, eta_m, f_before = _walk(A, lam, c, 1, (-v[0], -v[1]), fam)
            taus.append((tp, tm))
            # forward neighbour of (P,+); backward neighbour gives the image of (P,-)
            perm[2 * k] = _signed(index[f_after], eta * orient[f_after])
            perm[2 * k + 1] = _signed(index[f_before], eta_m * orient[f_before]) ^ 1
        (ap, am), (bp, bm) = taus
        widths.append(ap + am)
        heights.append(bp + bm)
        for elem, (p1, p2) in ((2 * k, (ap, bp)), (2 * k + 1, (-am, -bm))):
            w = (p1 * v1[0] + p2 * v2[0], p1 * v1[1] + p2 * v2[1])
            _, cell, q, _, _ = _walk(A, lam, c, 1, w, None, limit=ONE)
            corner_key[elem] = C.surface_point(cell, *q)
    moduli = [h / w for h, w in zip(heights, widths)]
    O = ExtendedOrigami(n, tuple(x), tuple(y), tuple(moduli))
    sigma = flip_map(sign_flips(O))
    O = relabel(O, sigma)
    keys = [None] * (2 * n)
    for e in range(2 * n):
        keys[sigma[e]] = corner_key[e]
    # every commutator class must sit at a single point of the surface
    classes = vertex_classes(O)
    for cls in classes:
        if len({keys[e] for e in cls.elements}) != 1:
            raise AssertionError("corner bookkeeping disagrees with the commutator")
    singular_points = {("v", i) for i in C.singular}
    regular = frozenset(cls.elements for cls in classes
                        if keys[next(iter(cls.elements))] not in singular_points)
    for cls in classes:
        if cls.elements in regular and cls.angle_pi != 2:
            raise AssertionError("a cone point appeared away from the singular vertices")
    marks = None
    old = marks_as_vertices(C)
    if old is not None:
        marks = {}
        for label, vs in old.items():
            marks[label] = frozenset(
                cls.elements for cls in classes if keys[next(iter(cls.elements))] in {("v", i) for i in vs}
            )
    k2 = _k2_of(O, C, v1, v2)
    pdec = PDecomposition((theta1, theta2), k2, O, marks, regular)
    area = abs(cross(v1, v2)) * sum((w * h for w, h in zip(widths, heights)), ZERO)
    return Redecomposition(pdec, keys, len(A.faces), area)


def _signed(cell: int, sign: int) -> int:
    return 2 * cell + (0 if sign > 0 else 1)


def _k2_of(O: ExtendedOrigami, C: PlanarComplex, v1: Vec, v2: Vec) -> Scalar:
    m = O.moduli[0]
    return m * m * norm_sq(v2) / norm_sq(v1)
