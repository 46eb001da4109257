"""Exact fractional permissions.

A permission is a rational in ``[0, 1]``.  ``1`` grants write access, any
value strictly between 0 and 1 grants read access, and ``0`` grants nothing
(a points-to with permission 0 is the empty resource).
"""

from __future__ import annotations

import enum
from math import gcd


class PermissionRangeError(ValueError):
    """A permission was constructed outside ``[0, 1]``."""


class PermissionOverflow(OverflowError):
    """A permission sum exceeds 1; the heap holding it is inconsistent."""


class Ordering(enum.IntEnum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


class Fraction:
    """A permission amount in lowest terms, always within ``[0, 1]``."""

    __slots__ = ("_num", "_den")

    def __init__(self, numerator: int = 0, denominator: int = 1) -> None:
        if not isinstance(numerator, int) or not isinstance(denominator, int):
            raise TypeError("fraction components must be integers")
        if denominator == 0:
            raise ZeroDivisionError("fraction with zero denominator")
        if denominator < 0:
            numerator, denominator = -numerator, -denominator
        if numerator < 0 or numerator > denominator:
            raise PermissionRangeError(
                f"permission {numerator}/{denominator} outside [0, 1]"
            )
        g = gcd(numerator, denominator)
        if numerator == 0:
            denominator, g = 1, 1
        self._num = numerator // g
        self._den = denominator // g

    @property
    def numerator(self) -> int:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    @classmethod
    def parse(cls, text: str) -> Fraction:
        text = text.strip()
        if "/" in text:
            n, d = text.split("/", 1)
            return cls(int(n), int(d))
        return cls(int(text), 1)

    def is_zero(self) -> bool:
        return self._num == 0

    def is_full(self) -> bool:
        return self._num == self._den

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Fraction):
            return self._num == other._num and self._den == other._den
        if isinstance(other, int):
            return self._den == 1 and self._num == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash(("perm", self._num, self._den))

    def __lt__(self, other: Fraction) -> bool:
        return frac_cmp(self, other) is Ordering.LESS

    def __le__(self, other: Fraction) -> bool:
        return frac_cmp(self, other) is not Ordering.GREATER

    def __gt__(self, other: Fraction) -> bool:
        return frac_cmp(self, other) is Ordering.GREATER

    def __ge__(self, other: Fraction) -> bool:
        return frac_cmp(self, other) is not Ordering.LESS

    def __add__(self, other: Fraction) -> Fraction:
        return frac_add(self, other)

    def __str__(self) -> str:
        if self._den == 1:
            return str(self._num)
        return f"{self._num}/{self._den}"

    def __repr__(self) -> str:
        return f"Fraction({self._num}, {self._den})"


ZERO = Fraction(0)
ONE = Fraction(1)


def frac_add(a: Fraction, b: Fraction) -> Fraction:
    """Merge two permissions; raises :class:`PermissionOverflow` above 1."""
    num = a.numerator * b.denominator + b.numerator * a.denominator
    den = a.denominator * b.denominator
    if num > den:
        raise PermissionOverflow(f"{a} + {b} exceeds 1")
    return Fraction(num, den)


def frac_cutoff_sub(a: Fraction, b: Fraction) -> Fraction:
    """``a - b`` when ``a >= b``, else 0."""
    num = a.numerator * b.denominator - b.numerator * a.denominator
    if num <= 0:
        return ZERO
    return Fraction(num, a.denominator * b.denominator)


def frac_cmp(a: Fraction, b: Fraction) -> Ordering:
    lhs = a.numerator * b.denominator
    rhs = b.numerator * a.denominator
    if lhs < rhs:
        return Ordering.LESS
    if lhs > rhs:
        return Ordering.GREATER
    return Ordering.EQUAL
