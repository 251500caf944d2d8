"""Curves y^2 = x^3 + a x^2 + b x, their 2-isogenous duals, torsors, twists and traces."""
from __future__ import annotations

from dataclasses import dataclass

from .intcore import squarefree_part
from .localsolve import Torsor

POINT_COUNT_LIMIT = 10**7


class SingularCurve(ValueError):
    pass


class BadReduction(ValueError):
    pass


@dataclass(frozen=True)
class Curve:
    """y^2 = x^3 + a x^2 + b x; (0, 0) is always a rational 2-torsion point."""

    a: int
    b: int

    def __post_init__(self):
        if self.b == 0:
            raise SingularCurve(f"b = 0: y^2 = x^3 + {self.a}x^2 is singular at (0,0)")
        if self.a * self.a == 4 * self.b:
            raise SingularCurve(f"a^2 - 4b = 0 for (a, b) = ({self.a}, {self.b})")

    @property
    def disc(self) -> int:
        return 16 * self.b**2 * (self.a**2 - 4 * self.b)

    @property
    def c(self) -> int:
        """a^2 - 4b, the x-coefficient of the dual curve."""
        return self.a**2 - 4 * self.b

    def dual(self) -> "Curve":
        return Curve(-2 * self.a, self.c)

    def __str__(self):
        return f"y^2 = x^3 {_signed(self.a)}x^2 {_signed(self.b)}x"


def _signed(n: int) -> str:
    return f"+ {n}" if n >= 0 else f"- {-n}"


@dataclass(frozen=True)
class CurvePair:
    E: Curve
    E_dual: Curve

    def __post_init__(self):
        if self.E_dual.a != -2 * self.E.a or self.E_dual.b != self.E.c:
            raise ValueError("E_dual is not the 2-isogenous dual of E")

    def swapped(self) -> "CurvePair":
        """The pair seen from the dual side; E_dual.dual() is E rescaled by (4x, 8y)."""
        return CurvePair(self.E_dual, self.E_dual.dual())


def make_pair(a: int, b: int) -> CurvePair:
    E = Curve(a, b)
    return CurvePair(E, E.dual())


def torsor(C: Curve, d: int) -> Torsor:
    """Homogeneous space d w^2 = d^2 + a d z^2 + b z^4 for the class d.

    Comes from substituting x = d/z^2, y = d w/z^3 into C and clearing denominators.
    """
    if d == 0 or squarefree_part(d) != d:
        raise ValueError(f"d = {d} is not a nonzero squarefree integer")
    return Torsor(d, C.a * d, C.b)


def quadratic_twist(C: Curve, d: int) -> Curve:
    """Twist by d: d y^2 = x^3 + a x^2 + b x, rescaled to y^2 = x^3 + a d x^2 + b d^2 x."""
    if d == 0 or squarefree_part(d) != d:
        raise ValueError(f"d = {d} is not a nonzero squarefree integer")
    return Curve(C.a * d, C.b * d * d)


def _square_table(q: int) -> bytearray:
    table = bytearray(q)
    for x in range(1, (q + 1) // 2):
        table[x * x % q] = 1
    return table


def count_points(C: Curve, q: int) -> int:
    """#C(F_q) including the point at infinity, by enumeration over x."""
    if q >= POINT_COUNT_LIMIT:
        raise ValueError(f"point counting capped at q < {POINT_COUNT_LIMIT}")
    sq = _square_table(q)
    a, b = C.a % q, C.b % q
    n = 1
    for x in range(q):
        v = (x * (x * (x + a) + b)) % q
        if v == 0:
            n += 1
        elif sq[v]:
            n += 2
    return n


def a_q(C: Curve, q: int) -> int:
    """Frobenius trace q + 1 - #C(F_q) at an odd prime q of good reduction."""
    if q < 3 or q % 2 == 0:
        raise ValueError(f"q = {q} must be an odd prime")
    if C.disc % q == 0:
        which = "b" if C.b % q == 0 else "a^2 - 4b"
        raise BadReduction(f"q = {q} divides {which}: bad reduction")
    return q + 1 - count_points(C, q)
