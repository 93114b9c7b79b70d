"""Exact arithmetic over Q and real quadratic fields Q(sqrt d).

Matrices act on planar vectors by the transpose-like rule

    T_A(xi + i*eta) = (a*xi + c*eta) + i*(b*xi + d*eta)

for ``A = [[a, b], [c, d]]``.  With this rule ``T = [[1, 1], [0, 1]]`` fixes the
vertical direction and sends the horizontal one to slope 1.  Note that
``T_{AB} = T_B o T_A``.

Lengths only ever appear squared, so no square roots are materialised except
through :meth:`Scalar.sqrt`, which succeeds only on perfect squares.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Union

Number = Union[int, Fraction, "Scalar"]


class FieldError(ValueError):
    """Raised on mixing elements of different quadratic fields."""


def _squarefree(d: int) -> bool:
    if d < 1:
        return False
    f = 2
    while f * f <= d:
        if d % (f * f) == 0:
            return False
        f += 1
    return True


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    n, m = q.numerator, q.denominator
    rn, rm = math.isqrt(n), math.isqrt(m)
    if rn * rn == n and rm * rm == m:
        return Fraction(rn, rm)
    return None


@total_ordering
class Scalar:
    """An element ``a + b*sqrt(d)`` with rational ``a``, ``b``.

    Rational elements are stored with ``d = 1`` so that they combine with
    elements of any field.
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a: int | Fraction = 0, b: int | Fraction = 0, d: int = 1):
        a = Fraction(a)
        b = Fraction(b)
        if d == 1 or b == 0:
            a, b, d = a + b if d == 1 else a, Fraction(0), 1
        elif not _squarefree(d):
            raise FieldError(f"d={d} is not a square-free integer > 1")
        self.a = a
        self.b = b
        self.d = d

    @classmethod
    def coerce(cls, x: Number) -> "Scalar":
        if isinstance(x, Scalar):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x)
        raise TypeError(f"cannot coerce {x!r} to Scalar")

    def _field(self, other: "Scalar") -> int:
        if self.d == other.d or other.d == 1:
            return self.d
        if self.d == 1:
            return other.d
        raise FieldError(f"mixed fields Q(sqrt {self.d}) and Q(sqrt {other.d})")

    @property
    def is_rational(self) -> bool:
        return self.b == 0

    # arithmetic

    def __add__(self, other: Number) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                return Scalar(self.a + other, self.b, self.d)
            return NotImplemented
        return Scalar(self.a + other.a, self.b + other.b, self._field(other))

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar(-self.a, -self.b, self.d)

    def __sub__(self, other: Number) -> "Scalar":
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return self + (-Scalar.coerce(other))

    def __rsub__(self, other: Number) -> "Scalar":
        return Scalar.coerce(other) - self

    def __mul__(self, other: Number) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                return Scalar(self.a * other, self.b * other, self.d)
            return NotImplemented
        d = self._field(other)
        return Scalar(
            self.a * other.a + d * self.b * other.b,
            self.a * other.b + self.b * other.a,
            d,
        )

    __rmul__ = __mul__

    def conjugate(self) -> "Scalar":
        return Scalar(self.a, -self.b, self.d)

    def norm(self) -> Fraction:
        return self.a * self.a - self.d * self.b * self.b

    def inverse(self) -> "Scalar":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return Scalar(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other: Number) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, Fraction)):
                if other == 0:
                    raise ZeroDivisionError("division by zero")
                return Scalar(self.a / other, self.b / other, self.d)
            return NotImplemented
        if other.b == 0:
            return self / other.a
        return self * other.inverse()

    def __rtruediv__(self, other: Number) -> "Scalar":
        return Scalar.coerce(other) / self

    def __pow__(self, n: int) -> "Scalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = Scalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # order and equality

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        if b == 0:
            return sa
        sb = (b > 0) - (b < 0)
        if sa == 0 or sa == sb:
            return sb
        return sa if a * a > self.d * b * b else sb

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return self.a == other.a and self.b == other.b and (self.b == 0 or self.d == other.d)
        if isinstance(other, (int, Fraction)):
            return self.b == 0 and self.a == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.d))

    def __lt__(self, other: Number) -> bool:
        if not isinstance(other, (Scalar, int, Fraction)):
            return NotImplemented
        return (self - other).sign() < 0

    def __bool__(self) -> bool:
        return self.a != 0 or self.b != 0

    def __abs__(self) -> "Scalar":
        return -self if self.sign() < 0 else self

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * math.sqrt(self.d)

    def sqrt(self, d: int | None = None) -> "Scalar | None":
        """Positive square root inside Q(sqrt d), or ``None``.

        ``d`` defaults to the element's own field; pass it explicitly for
        rational elements that should be rooted in a quadratic field.
        """
        if self.sign() < 0:
            return None
        d = self.d if d is None or d == 1 else d
        if self.b == 0:
            r = _rational_sqrt(self.a)
            if r is not None:
                return Scalar(r)
            if d > 1:
                r = _rational_sqrt(self.a / d)
                if r is not None:
                    return Scalar(0, r, d)
            return None
        n = _rational_sqrt(self.norm())
        if n is None:
            return None
        for cand in ((self.a + n) / 2, (self.a - n) / 2):
            p = _rational_sqrt(cand)
            if p:
                root = abs(Scalar(p, self.b / (2 * p), self.d))
                if root * root == self:
                    return root
        return None

    # text

    def __repr__(self) -> str:
        return f"Scalar({self})"

    def __str__(self) -> str:
        return format_scalar(self)


def format_scalar(x: Scalar | int | Fraction) -> str:
    """Text form ``p/q+r/s*w`` where ``w`` stands for sqrt(d)."""
    x = Scalar.coerce(x)
    if x.b == 0:
        return str(x.a)
    bpart = {Fraction(1): "w", Fraction(-1): "-w"}.get(x.b, f"{x.b}*w")
    if x.a == 0:
        return bpart
    if not bpart.startswith("-"):
        bpart = "+" + bpart
    return f"{x.a}{bpart}"


_TERM = re.compile(r"\s*([+-]?)\s*(\d+(?:/\d+)?)?\s*(\*?\s*w)?\s*")


def parse_scalar(text: str | int, d: int = 1) -> Scalar:
    """Parse ``"3"``, ``"-1/2"``, ``"w"``, ``"1+w"``, ``"1/2-3/4*w"`` in Q(sqrt d)."""
    if isinstance(text, int):
        return Scalar(text)
    s = str(text).strip()
    if not s:
        raise ValueError("empty scalar")
    pos = 0
    a = Fraction(0)
    b = Fraction(0)
    nterms = 0
    while pos < len(s):
        m = _TERM.match(s, pos)
        if m is None or m.end() == pos:
            raise ValueError(f"bad scalar {text!r} at position {pos}")
        sign, num, w = m.groups()
        if num is None and w is None:
            raise ValueError(f"bad scalar {text!r} at position {pos}")
        if nterms and not sign:
            raise ValueError(f"missing operator in {text!r} at position {pos}")
        coef = Fraction(num) if num is not None else Fraction(1)
        if sign == "-":
            coef = -coef
        if w is not None:
            if d == 1:
                raise ValueError(f"{text!r} uses w but the field is Q")
            b += coef
        else:
            a += coef
        nterms += 1
        pos = m.end()
    return Scalar(a, b, d)


# planar vectors ---------------------------------------------------------------

Vec = tuple  # pair of Scalars


def vec(u: Number, v: Number) -> Vec:
    return (Scalar.coerce(u), Scalar.coerce(v))


def cross(p: Vec, q: Vec) -> Scalar:
    return p[0] * q[1] - p[1] * q[0]


def dot(p: Vec, q: Vec) -> Scalar:
    return p[0] * q[0] + p[1] * q[1]


def norm_sq(p: Vec) -> Scalar:
    return dot(p, p)


class Direction:
    """A projective direction in the plane.

    The canonical representative has first nonzero coordinate positive; for
    rational directions it is moreover a primitive integer vector, otherwise the
    first nonzero coordinate is 1.
    """

    __slots__ = ("u", "v")

    def __init__(self, u: Number, v: Number):
        u = Scalar.coerce(u)
        v = Scalar.coerce(v)
        if not u and not v:
            raise ValueError("zero vector is not a direction")
        if u:
            u, v = Scalar(1), v / u
        else:
            v = Scalar(1)
        if u.is_rational and v.is_rational:
            den = math.lcm(u.a.denominator, v.a.denominator)
            iu, iv = int(u.a * den), int(v.a * den)
            g = math.gcd(iu, iv)
            u, v = Scalar(iu // g), Scalar(iv // g)
        self.u = u
        self.v = v

    @property
    def vector(self) -> Vec:
        return (self.u, self.v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Direction):
            return NotImplemented
        return self.u == other.u and self.v == other.v

    def __hash__(self) -> int:
        return hash((self.u, self.v))

    def __repr__(self) -> str:
        return f"Direction({self.u}, {self.v})"

    def __str__(self) -> str:
        return f"({self.u},{self.v})"


HORIZONTAL = Direction(1, 0)
VERTICAL = Direction(0, 1)


def frame(theta1: Direction, theta2: Direction) -> tuple[Vec, Vec]:
    """Right-handed representative pair for an ordered direction pair."""
    u1 = theta1.vector
    u2 = theta2.vector
    c = cross(u1, u2)
    if not c:
        raise ValueError(f"degenerate direction pair {theta1}, {theta2}")
    if c.sign() < 0:
        u2 = (-u2[0], -u2[1])
    return u1, u2


class Mat2:
    """2x2 matrix ``[[a, b], [c, d]]`` with Scalar entries."""

    __slots__ = ("a", "b", "c", "d")

    def __init__(self, a: Number, b: Number, c: Number, d: Number):
        self.a = Scalar.coerce(a)
        self.b = Scalar.coerce(b)
        self.c = Scalar.coerce(c)
        self.d = Scalar.coerce(d)

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @property
    def entries(self) -> tuple[Scalar, Scalar, Scalar, Scalar]:
        return (self.a, self.b, self.c, self.d)

    def det(self) -> Scalar:
        return self.a * self.d - self.b * self.c

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def transpose(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    @property
    def is_integral(self) -> bool:
        return all(e.is_rational and e.a.denominator == 1 for e in self.entries)

    def inverse(self) -> "Mat2":
        det = self.det()
        if not det:
            raise ZeroDivisionError("singular matrix")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)

    def __pow__(self, n: int) -> "Mat2":
        if n < 0:
            return self.inverse() ** (-n)
        out = Mat2.identity()
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mat2):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def psl_equal(self, other: "Mat2") -> bool:
        return self == other or self == -other

    def psl_key(self) -> tuple:
        """Hashable key identifying ``A`` and ``-A``."""
        for e in self.entries:
            if e:
                m = self if e.sign() > 0 else -self
                return tuple((x.a, x.b, x.d) for x in m.entries)
        raise ValueError("zero matrix")

    def __repr__(self) -> str:
        return f"Mat2({format_matrix(self)})"


def format_matrix(m: Mat2) -> str:
    return f"{m.a},{m.b};{m.c},{m.d}"


def parse_matrix(text: str, d: int = 1) -> Mat2:
    """Parse ``"a,b;c,d"``; entries use the scalar syntax."""
    rows = text.split(";")
    if len(rows) != 2:
        raise ValueError(f"matrix {text!r}: expected two rows separated by ';'")
    cells = [r.split(",") for r in rows]
    if any(len(r) != 2 for r in cells):
        raise ValueError(f"matrix {text!r}: expected two entries per row")
    entries = []
    for i, row in enumerate(cells):
        for j, e in enumerate(row):
            try:
                entries.append(parse_scalar(e, d))
            except ValueError as exc:
                raise ValueError(f"matrix {text!r}, entry ({i + 1},{j + 1}): {exc}") from None
    m = Mat2(*entries)
    if not m.det():
        raise ValueError(f"matrix {text!r} is singular")
    return m


def apply_ta(A: Mat2, p: Vec) -> Vec:
    """``(xi, eta) -> (a*xi + c*eta, b*xi + d*eta)``."""
    xi, eta = p
    return (A.a * xi + A.c * eta, A.b * xi + A.d * eta)


def direction_image(A: Mat2, theta: Direction) -> Direction:
    return Direction(*apply_ta(A, theta.vector))


def rho_sq(A: Mat2, theta1: Direction, theta2: Direction) -> Scalar:
    """Square of the factor by which ``A`` multiplies parallelogram moduli."""
    u1, u2 = theta1.vector, theta2.vector
    if not cross(u1, u2):
        raise ValueError("degenerate direction pair")
    v1, v2 = apply_ta(A, u1), apply_ta(A, u2)
    return (norm_sq(v2) / norm_sq(u2)) * (norm_sq(u1) / norm_sq(v1))


def sin_sq(theta1: Direction, theta2: Direction) -> Scalar:
    u1, u2 = theta1.vector, theta2.vector
    c = cross(u1, u2)
    return c * c / (norm_sq(u1) * norm_sq(u2))


def common_field(values: Iterable[Scalar]) -> int:
    d = 1
    for v in values:
        v = Scalar.coerce(v)
        if v.d != 1:
            if d not in (1, v.d):
                raise FieldError(f"mixed fields Q(sqrt {d}) and Q(sqrt {v.d})")
            d = v.d
    return d


# The derivative action of A on the plane: (xi, eta) -> (a*xi + b*eta, c*xi + d*eta).
# It is the transpose of the T_A convention above and is what membership uses.


def apply_derivative(A: Mat2, p: Vec) -> Vec:
    return apply_ta(A.transpose(), p)


def derivative_image(A: Mat2, theta: Direction) -> Direction:
    return direction_image(A.transpose(), theta)


def derivative_rho_sq(A: Mat2, theta1: Direction, theta2: Direction) -> Scalar:
    return rho_sq(A.transpose(), theta1, theta2)
