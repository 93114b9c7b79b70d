"""Surface invariants read off an extended origami.

Cycles of the commutator ``xyXY`` on signed cells correspond to corners of
the double cover; the deck involution pairs them.  A signed cell ``(lam, +)``
stands for the upper-right corner of cell ``lam`` and ``(lam, -)`` for the
lower-left one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exact import Scalar
from .origami import (
    COMMUTATOR,
    ExtendedOrigami,
    fmt_elem,
    is_abelian,
    is_sign_normal,
    monodromy_eval,
    neg,
    normalize_signs,
    perm_cycles,
    solve_heights,
    to_int,
    x_cylinders,
    y_cylinders,
)


def commutator_perm(O: ExtendedOrigami) -> tuple[int, ...]:
    return tuple(monodromy_eval(O, COMMUTATOR, i) for i in range(2 * O.n))


def _canonical_cycle(c: list[int]) -> tuple[int, ...]:
    k = min(range(len(c)), key=lambda t: c[t])
    return tuple(c[k:] + c[:k])


def commutator_cycles(O: ExtendedOrigami) -> list[tuple[int, ...]]:
    """Cycles of the commutator on signed cells, each starting at its minimum."""
    return sorted(_canonical_cycle(c) for c in perm_cycles(commutator_perm(O)))


def partner_element(O: ExtendedOrigami, i: int) -> int:
    """Corner of the deck-involution image: ``x^-1(y^-1(-i))``."""
    return O.xinv[O.yinv[neg(i)]]


@dataclass(frozen=True)
class VertexClass:
    """A cone point of the flat surface: one or two commutator cycles."""

    cycles: tuple[tuple[int, ...], ...]
    branch: bool

    @property
    def elements(self) -> frozenset[int]:
        return frozenset(i for c in self.cycles for i in c)

    @property
    def length(self) -> int:
        return len(self.cycles[0])

    @property
    def angle_pi(self) -> int:
        """Cone angle as a multiple of pi."""
        return self.length if self.branch else 2 * self.length

    @property
    def order(self) -> int:
        """Order of the quadratic differential at the point (-1 for a pole)."""
        return self.angle_pi - 2

    def label(self) -> str:
        return "".join("(" + " ".join(fmt_elem(i) for i in c) + ")" for c in self.cycles)

    def to_json(self) -> dict:
        return {
            "cycles": [[to_int(i) for i in c] for c in self.cycles],
            "branch": self.branch,
            "angle_pi": self.angle_pi,
            "order": self.order,
        }


class PairingError(AssertionError):
    pass


def vertex_classes(O: ExtendedOrigami) -> list[VertexClass]:
    """Commutator cycles grouped under the deck involution."""
    if not is_sign_normal(O):
        O = normalize_signs(O)
    cycles = commutator_cycles(O)
    where = {i: c for c in cycles for i in c}
    out = []
    done: set[tuple[int, ...]] = set()
    for c in cycles:
        if c in done:
            continue
        images = {where[partner_element(O, i)] for i in c}
        if len(images) != 1:
            raise PairingError(f"cycle {c} is not mapped to a single cycle")
        p = images.pop()
        if len(p) != len(c):
            raise PairingError(f"paired cycles {c} and {p} differ in length")
        back = {where[partner_element(O, i)] for i in p}
        if back != {c}:
            raise PairingError(f"pairing is not an involution at {c}")
        done.add(c)
        done.add(p)
        out.append(VertexClass(tuple(sorted({c, p})), branch=(p == c)))
    return out


def class_of(classes: list[VertexClass], i: int) -> VertexClass:
    for v in classes:
        if i in v.elements:
            return v
    raise KeyError(fmt_elem(i))


@dataclass(frozen=True)
class SurfaceType:
    genus: int
    punctures: int
    orders: tuple[int, ...]

    def to_json(self) -> dict:
        return {"genus": self.genus, "punctures": self.punctures, "orders": list(self.orders)}


def surface_type(O: ExtendedOrigami) -> SurfaceType:
    classes = vertex_classes(O)
    orders = sorted(v.order for v in classes)
    total = sum(orders)
    if (total + 4) % 4:
        raise PairingError(f"orders sum to {total}, not of the form 4g-4")
    genus = (total + 4) // 4
    if euler_genus(O, len(classes)) != genus:
        raise PairingError("Gauss-Bonnet and Euler characteristic disagree")
    return SurfaceType(genus, len(classes), tuple(orders))


def euler_genus(O: ExtendedOrigami, vertices: int | None = None) -> int:
    """Genus from V - E + F with E = 2N and F = N."""
    if vertices is None:
        vertices = len(vertex_classes(O))
    chi = vertices - O.n
    if chi % 2:
        raise PairingError("odd Euler characteristic")
    return (2 - chi) // 2


# cylinders ----------------------------------------------------------------------


@dataclass(frozen=True)
class CylinderSpectrum:
    axis: str
    moduli: tuple[Scalar, ...]

    @property
    def count(self) -> int:
        return len(self.moduli)


def projective(values) -> tuple[Scalar, ...]:
    """Sort descending and divide by the largest entry."""
    vals = sorted((Scalar.coerce(v) for v in values), reverse=True)
    top = vals[0]
    return tuple(v / top for v in vals)


def cylinder_spectrum(O: ExtendedOrigami, axis: str = "x") -> CylinderSpectrum:
    """Projective moduli (height / circumference) of the cylinders along an axis."""
    sol = solve_heights(O)
    mods = []
    if axis == "x":
        for cyl in x_cylinders(O):
            mods.append(sol.heights[cyl[0]] / sum((sol.widths[lam] for lam in cyl), Scalar(0)))
    elif axis == "y":
        for cyl in y_cylinders(O):
            mods.append(sol.widths[cyl[0]] / sum((sol.heights[lam] for lam in cyl), Scalar(0)))
    else:
        raise ValueError(f"axis must be 'x' or 'y', not {axis!r}")
    return CylinderSpectrum(axis, projective(mods))


def cell_moduli_spectrum(O: ExtendedOrigami) -> tuple[Scalar, ...]:
    return projective(O.moduli)


# double cover -------------------------------------------------------------------


@dataclass
class DoubleCover:
    """Ordinary origami(s) obtained by undoing the half-turns.

    For non-Abelian input ``x``, ``y`` act on the 2N signed cells and
    ``deck`` is the negation.  For Abelian input the cover splits and ``x``,
    ``y`` describe one of the two identical sheets on N cells.
    """

    connected: bool
    x: tuple[int, ...]
    y: tuple[int, ...]
    deck: tuple[int, ...] | None

    @property
    def degree(self) -> int:
        return len(self.x)

    def genus(self) -> int:
        c = [monodromy_eval_plain(self.x, self.y, i) for i in range(self.degree)]
        total = sum(len(cy) - 1 for cy in perm_cycles(c))
        return (total + 2) // 2

    def to_json(self) -> dict:
        return {
            "connected": self.connected,
            "cells": self.degree,
            "x": [p + 1 for p in self.x],
            "y": [p + 1 for p in self.y],
        }


def monodromy_eval_plain(x, y, i: int) -> int:
    xinv = {v: k for k, v in enumerate(x)}
    yinv = {v: k for k, v in enumerate(y)}
    return yinv[xinv[y[x[i]]]]


def double_cover(O: ExtendedOrigami) -> DoubleCover:
    O = normalize_signs(O)
    if is_abelian(O):
        x = tuple(O.x[2 * lam] >> 1 for lam in range(O.n))
        y = tuple(O.y[2 * lam] >> 1 for lam in range(O.n))
        return DoubleCover(False, x, y, None)
    deck = tuple(neg(i) for i in range(2 * O.n))
    return DoubleCover(True, O.x, O.y, deck)


def invariants_report(O: ExtendedOrigami) -> dict:
    from .exact import format_scalar

    st = surface_type(O)
    classes = vertex_classes(O)
    return {
        "cells": O.n,
        "genus": st.genus,
        "punctures": st.punctures,
        "orders": list(st.orders),
        "abelian": is_abelian(normalize_signs(O)),
        "spectra": {
            axis: [format_scalar(m) for m in cylinder_spectrum(O, axis).moduli] for axis in ("x", "y")
        },
        "vertex_classes": [v.to_json() for v in classes],
    }
