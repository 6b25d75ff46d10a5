"""Exact arithmetic in Q(beta) for quadratic beta.

When beta satisfies ``beta**2 = a*beta + b`` for small integers, orbit points
of 1 under the branch maps stay in Q(beta) and can be carried as pairs
``p + q*beta`` with rational coefficients. Comparisons are decided exactly by
squaring, so deduplication of orbit points is loss-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class QuadraticField:
    a: int
    b: int

    def __post_init__(self):
        disc = self.a * self.a + 4 * self.b
        if disc <= 0 or math.isqrt(disc) ** 2 == disc:
            raise ValueError(f"beta**2 = {self.a}*beta + {self.b} has no irrational real root")

    @property
    def discriminant(self) -> int:
        return self.a * self.a + 4 * self.b

    @property
    def beta_float(self) -> float:
        return (self.a + math.sqrt(self.discriminant)) / 2

    def element(self, p, q=0) -> QuadraticNumber:
        return QuadraticNumber(Fraction(p), Fraction(q), self)

    @property
    def beta(self) -> QuadraticNumber:
        return self.element(0, 1)


@dataclass(frozen=True)
class QuadraticNumber:
    """The number ``p + q*beta``."""

    p: Fraction
    q: Fraction
    field: QuadraticField

    def _coerce(self, other) -> QuadraticNumber:
        if isinstance(other, QuadraticNumber):
            if other.field != self.field:
                raise ValueError("mixing elements of different quadratic fields")
            return other
        return QuadraticNumber(Fraction(other), Fraction(0), self.field)

    def __add__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.p + o.p, self.q + o.q, self.field)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return QuadraticNumber(self.p - o.p, self.q - o.q, self.field)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return QuadraticNumber(-self.p, -self.q, self.field)

    def __mul__(self, other):
        o = self._coerce(other)
        a, b = self.field.a, self.field.b
        # (p + q B)(r + s B) = pr + (ps + qr) B + qs (a B + b)
        qs = self.q * o.q
        return QuadraticNumber(self.p * o.p + qs * b, self.p * o.q + self.q * o.p + qs * a, self.field)

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        a, b = self.field.a, self.field.b
        return self.p * self.p + self.p * self.q * a - self.q * self.q * b

    def inverse(self) -> QuadraticNumber:
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        # conjugate of p + q B is p + q (a - B)
        return QuadraticNumber((self.p + self.q * self.field.a) / n, -self.q / n, self.field)

    def __truediv__(self, other):
        return self * self._coerce(other).inverse()

    def sign(self) -> int:
        # p + q B = (u + q sqrt(D)) / 2 with u = 2p + q a
        u = 2 * self.p + self.q * self.field.a
        w = self.q
        su = (u > 0) - (u < 0)
        sw = (w > 0) - (w < 0)
        if sw == 0 or su == sw:
            return su if su else sw
        if su == 0:
            return sw
        return su if u * u > w * w * self.field.discriminant else sw

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def __float__(self):
        return float(self.p) + float(self.q) * self.field.beta_float

    def __repr__(self):
        return f"({self.p} + {self.q}*beta)"
