"""Exact arithmetic in Q(sqrt 5), enough to round expressions involving phi."""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Union

Number = Union[int, Fraction, "Surd"]


def _sign_of(a: Fraction, b: Fraction) -> int:
    """Sign of a + b*sqrt(5), decided without floating point."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if (a > 0) == (b > 0):
        return 1 if a > 0 else -1
    # opposite signs: the larger magnitude wins
    lhs, rhs = a * a, 5 * b * b
    if lhs == rhs:
        return 0
    if lhs > rhs:
        return 1 if a > 0 else -1
    return 1 if b > 0 else -1


class Surd:
    """A number a + b*sqrt(5) with rational a, b."""

    __slots__ = ("a", "b")

    def __init__(self, a: int | Fraction = 0, b: int | Fraction = 0) -> None:
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def phi(cls) -> "Surd":
        return cls(Fraction(1, 2), Fraction(1, 2))

    @staticmethod
    def lift(x: Number) -> "Surd":
        return x if isinstance(x, Surd) else Surd(x)

    def __add__(self, other: Number) -> "Surd":
        o = Surd.lift(other)
        return Surd(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "Surd":
        return Surd(-self.a, -self.b)

    def __sub__(self, other: Number) -> "Surd":
        return self + (-Surd.lift(other))

    def __rsub__(self, other: Number) -> "Surd":
        return Surd.lift(other) - self

    def __mul__(self, other: Number) -> "Surd":
        o = Surd.lift(other)
        return Surd(self.a * o.a + 5 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def __truediv__(self, other: Number) -> "Surd":
        o = Surd.lift(other)
        norm = o.a * o.a - 5 * o.b * o.b
        if norm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 5)")
        num = self * Surd(o.a, -o.b)
        return Surd(num.a / norm, num.b / norm)

    def __rtruediv__(self, other: Number) -> "Surd":
        return Surd.lift(other) / self

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Surd(other)
        if not isinstance(other, Surd):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __repr__(self) -> str:
        return f"Surd({self.a}, {self.b})"

    def sign(self) -> int:
        return _sign_of(self.a, self.b)

    def is_rational(self) -> bool:
        return self.b == 0

    def __floor__(self) -> int:
        # initial guess from integer square roots, then settle exactly
        bb = 5 * self.b * self.b
        root = isqrt(bb.numerator * bb.denominator) // bb.denominator
        guess = (self.a.numerator // self.a.denominator) + (root if self.b >= 0 else -root - 1)
        m = guess
        while _sign_of(self.a - m, self.b) < 0:
            m -= 1
        while _sign_of(self.a - (m + 1), self.b) >= 0:
            m += 1
        return m

    def __ceil__(self) -> int:
        return -(-self).__floor__()

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * 5 ** 0.5
