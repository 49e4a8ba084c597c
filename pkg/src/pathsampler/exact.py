"""Exact arithmetic over the rationals and the quadratic field Q(sqrt 2).

Numbers are either :class:`fractions.Fraction` (or ``int``) or :class:`QSqrt2`
instances ``a + b*sqrt(2)`` with rational ``a`` and ``b``.  Everything the
samplers compare against random bits goes through :func:`leading_bits`, which
returns ``floor(2**k * x)`` exactly using integer square roots.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Union


class QSqrt2:
    """An element ``a + b*sqrt(2)`` of Q(sqrt 2), kept with reduced rationals."""

    __slots__ = ("a", "b", "_hash")

    def __init__(self, a: Union[int, Fraction] = 0, b: Union[int, Fraction] = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)
        self._hash = None

    @staticmethod
    def _lift(x) -> "QSqrt2 | None":
        if isinstance(x, QSqrt2):
            return x
        if isinstance(x, (int, Fraction)):
            return QSqrt2(x)
        return None

    def __repr__(self) -> str:
        return f"QSqrt2({self.a}, {self.b})"

    def __str__(self) -> str:
        if not self.b:
            return str(self.a)
        return f"{self.a} + {self.b}*sqrt2"

    def __neg__(self) -> "QSqrt2":
        return QSqrt2(-self.a, -self.b)

    def __pos__(self) -> "QSqrt2":
        return self

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return QSqrt2(self.a * o.a + 2 * self.b * o.b, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def conjugate(self) -> "QSqrt2":
        return QSqrt2(self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm ``a**2 - 2*b**2`` (nonzero unless the element is zero)."""
        return self.a * self.a - 2 * self.b * self.b

    def inverse(self) -> "QSqrt2":
        n = self.norm()
        if not n:
            raise ZeroDivisionError("inverse of zero in Q(sqrt 2)")
        return QSqrt2(self.a / n, -self.b / n)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, e: int) -> "QSqrt2":
        if not isinstance(e, int):
            return NotImplemented
        if e < 0:
            return self.inverse() ** (-e)
        result, base = QSqrt2(1), self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def sign(self) -> int:
        sa = (self.a > 0) - (self.a < 0)
        sb = (self.b > 0) - (self.b < 0)
        if sb == 0 or sa == sb:
            return sa or sb
        if sa == 0:
            return sb
        # opposite signs: the larger of a**2 and 2*b**2 wins
        n = self.norm()
        return sa if n > 0 else sb

    def is_rational(self) -> bool:
        return self.b == 0

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def _cmp(self, other) -> "int | None":
        o = self._lift(other)
        if o is None:
            return None
        return (self - o).sign()

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(self.a) if not self.b else hash((self.a, self.b))
        return self._hash

    def __float__(self) -> float:
        return to_float(self)


ExactNumber = Union[int, Fraction, QSqrt2]

SQRT2 = QSqrt2(0, 1)
#: ``sqrt(2) - 1``, the Schröder step parameter; ``2r + r**2 == 1``.
R = SQRT2 - 1


def exact(x) -> ExactNumber:
    """Coerce ints, Fractions, QSqrt2 and ``"p/q"`` strings to an exact number."""
    if isinstance(x, QSqrt2):
        return x.a if x.b == 0 else x
    if isinstance(x, bool):
        raise TypeError("bool is not a number here")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot use {type(x).__name__} as an exact number")


def sign(x: ExactNumber) -> int:
    if isinstance(x, QSqrt2):
        return x.sign()
    return (x > 0) - (x < 0)


def _parts(x: ExactNumber) -> tuple[int, int, int]:
    """Return integers ``(A, B, D)`` with ``x == (A + B*sqrt 2) / D`` and ``D > 0``."""
    if isinstance(x, QSqrt2):
        d = math.lcm(x.a.denominator, x.b.denominator)
        return x.a.numerator * (d // x.a.denominator), x.b.numerator * (d // x.b.denominator), d
    x = Fraction(x)
    return x.numerator, 0, x.denominator


def leading_bits(x: ExactNumber, k: int) -> int:
    """``floor(2**k * x)``, computed exactly.

    For ``B != 0`` the product ``2**k * B * sqrt 2`` is irrational, so the floor of
    ``(2**k*A + t) / D`` equals ``(2**k*A + floor(t)) // D``.
    """
    A, B, D = _parts(x)
    num = A << k
    if B:
        s = math.isqrt(2 * (B * B) << (2 * k))
        num += s if B > 0 else -s - 1
    return num // D


def is_dyadic_at(x: ExactNumber, k: int) -> bool:
    """True when ``2**k * x`` is an integer (the binary expansion stops by digit k)."""
    A, B, D = _parts(x)
    if B:
        return False
    return (A << k) % D == 0


def to_float(x: ExactNumber) -> float:
    if not isinstance(x, QSqrt2):
        return float(x)
    if not x.b:
        return float(x.a)
    # a and b may nearly cancel; scale until the floor carries >= 62 bits
    k = 64
    while True:
        f = leading_bits(x, k)
        if abs(f) >= 1 << 62:
            return float(Fraction(f, 1 << k))
        k += 64 + max(0, 62 - abs(f).bit_length())


@lru_cache(maxsize=4096)
def digit_table(x: ExactNumber, k: int) -> bytes:
    """First ``k`` binary digits of ``x`` in [0, 1) as a bytes object of 0/1 values.

    Digits are those of the terminating expansion when ``x`` is dyadic.
    """
    if not 0 <= x < 1:
        raise ValueError("digit_table needs 0 <= x < 1")
    f = leading_bits(x, k)
    return format(f, f"0{k}b").encode("ascii").translate(_ASCII_BITS)


_ASCII_BITS = bytes.maketrans(b"01", b"\x00\x01")


def entropy_bits(probs: Iterable[ExactNumber]) -> float:
    """Shannon entropy in bits of a finite distribution; zero masses contribute 0."""
    h = 0.0
    for p in probs:
        f = float(p)
        if f > 0.0:
            h -= f * math.log2(f)
    return h
