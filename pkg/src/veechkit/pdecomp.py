"""P-decompositions: an ordered direction pair, a scale and an extended origami."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

from .exact import HORIZONTAL, VERTICAL, Direction, Scalar, cross
from .iso import Marks, transport_marks
from .origami import ExtendedOrigami, flip_map, is_sign_normal, sign_flips


@dataclass(frozen=True)
class PDecomposition:
    """``theta`` is the ordered pair of directions; ``k2`` is the squared
    modulus of cell 1 (side along ``theta[1]`` over side along ``theta[0]``).

    Every corner class is a puncture except those listed in ``regular``
    (vertex classes of cone angle 2*pi that are ordinary points of the
    surface).  Classes are frozensets of signed cells.
    """

    theta: tuple[Direction, Direction]
    k2: Scalar
    origami: ExtendedOrigami
    marks: Optional[Mapping[str, frozenset]] = field(default=None)
    regular: frozenset = field(default=frozenset())

    def __post_init__(self) -> None:
        t1, t2 = self.theta
        if not cross(t1.vector, t2.vector):
            raise ValueError(f"directions {t1} and {t2} coincide")
        k2 = Scalar.coerce(self.k2)
        if k2.sign() <= 0:
            raise ValueError("k^2 must be positive")
        object.__setattr__(self, "k2", k2)

    @classmethod
    def standard(cls, O: ExtendedOrigami, k2=None, marks: Marks | None = None,
                 regular=frozenset()) -> "PDecomposition":
        """Horizontal/vertical decomposition; ``k2`` defaults to ``M_1^2``."""
        if k2 is None:
            k2 = O.moduli[0] * O.moduli[0]
        return cls((HORIZONTAL, VERTICAL), Scalar.coerce(k2), O, marks, frozenset(regular))

    @property
    def marked(self) -> bool:
        return self.marks is not None

    def cell_moduli_sq(self) -> tuple[Scalar, ...]:
        """Squares of the actual cell moduli, anchored at ``k2``."""
        m1 = self.origami.moduli[0]
        return tuple(self.k2 * (m / m1) ** 2 for m in self.origami.moduli)

    def sign_normalized(self) -> "PDecomposition":
        O = self.origami
        if is_sign_normal(O):
            return self
        sigma = flip_map(sign_flips(O))
        from .origami import relabel

        marks = transport_marks(self.marks, sigma) if self.marks is not None else None
        regular = frozenset(frozenset(sigma[i] for i in cls) for cls in self.regular)
        return PDecomposition(self.theta, self.k2, relabel(O, sigma), marks, regular)

    def without_marks(self) -> "PDecomposition":
        return PDecomposition(self.theta, self.k2, self.origami, None, self.regular)

    def punctured_classes(self) -> frozenset:
        from .invariants import vertex_classes

        return frozenset(v.elements for v in vertex_classes(self.origami)
                         if v.elements not in self.regular)


def regular_classes(O: ExtendedOrigami, marks: Marks | None = None) -> frozenset:
    """Unmarked vertex classes of cone angle 2*pi."""
    from .invariants import vertex_classes

    marked = set()
    for classes in (marks or {}).values():
        marked |= set(classes)
    return frozenset(v.elements for v in vertex_classes(O) if v.angle_pi == 2 and v.elements not in marked)
