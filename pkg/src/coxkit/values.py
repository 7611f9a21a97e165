"""Plausibility values with dual exact-rational / float64 arithmetic.

A value parsed from a "p/q" string (or built from an int or Fraction)
carries its exact rational form alongside the float rounding; values
built from floats are approximate only.  A model downgrades every entry
to float when any of its entries is approximate, so comparisons inside
one model are either all rational or all float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

DEFAULT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class PValue:
    """One element of the plausibility range R.

    ``approx`` is always populated; ``exact`` is the rational form when
    the value was given exactly.  When both operands of a comparison are
    exact, rational arithmetic is used.
    """

    approx: float
    exact: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(self.approx))

    @staticmethod
    def of(value) -> "PValue":
        if isinstance(value, PValue):
            return value
        if isinstance(value, bool):
            raise TypeError("booleans are not plausibility values")
        if isinstance(value, int):
            frac = Fraction(value)
            return PValue(float(frac), frac)
        if isinstance(value, Fraction):
            return PValue(float(value), value)
        if isinstance(value, float):
            return PValue(value, None)
        if isinstance(value, str):
            frac = Fraction(value)
            return PValue(float(frac), frac)
        raise TypeError(f"cannot interpret {value!r} as a plausibility value")

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def as_float(self) -> float:
        return self.approx

    def as_fraction(self) -> Fraction:
        if self.exact is None:
            raise ValueError(f"{self} has no exact form")
        return self.exact

    def demoted(self) -> "PValue":
        """Float-only copy (used when a model downgrades to float mode)."""
        return PValue(self.approx, None)

    # Comparisons: rational when both sides are exact, float otherwise.

    def _pair(self, other):
        if isinstance(other, PValue):
            if self.exact is not None and other.exact is not None:
                return self.exact, other.exact
            return self.approx, other.approx
        return NotImplemented, None

    def __eq__(self, other):
        pair = self._pair(other)
        if pair[0] is NotImplemented:
            return NotImplemented
        return pair[0] == pair[1]

    def __lt__(self, other):
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        return a < b

    def __le__(self, other):
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        return a <= b

    def __gt__(self, other):
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        return a > b

    def __ge__(self, other):
        a, b = self._pair(other)
        if a is NotImplemented:
            return NotImplemented
        return a >= b

    def __hash__(self):
        return self._hash

    # Arithmetic stays exact when both operands are exact.

    def _combine(self, other, frac_op, float_op) -> "PValue":
        other = PValue.of(other)
        if self.exact is not None and other.exact is not None:
            frac = frac_op(self.exact, other.exact)
            return PValue(float(frac), frac)
        return PValue(float_op(self.approx, other.approx), None)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b, lambda a, b: a - b)

    def __mul__(self, other):
        return self._combine(other, lambda a, b: a * b, lambda a, b: a * b)

    def __truediv__(self, other):
        return self._combine(other, lambda a, b: a / b, lambda a, b: a / b)

    def close_to(self, other, tol: float) -> bool:
        other = PValue.of(other)
        if self.exact is not None and other.exact is not None:
            return self.exact == other.exact
        return abs(self.approx - other.approx) <= tol

    def to_json(self):
        if self.exact is not None:
            return f"{self.exact.numerator}/{self.exact.denominator}"
        return self.approx

    def __repr__(self):
        if self.exact is not None:
            return f"PValue({self.exact})"
        return f"PValue({self.approx!r})"

    def __str__(self):
        if self.exact is not None:
            return str(self.exact)
        return repr(self.approx)


ZERO = PValue.of(0)
ONE = PValue.of(1)


def cluster_representatives(values, tol: float) -> dict[PValue, PValue]:
    """Map float values whose mutual gaps are <= tol onto one representative.

    Values are clustered along the sorted order; the representative is the
    smallest member of each run.  Exact values are never clustered.
    """
    floats = sorted({v.approx for v in values if not v.is_exact})
    mapping: dict[PValue, PValue] = {}
    if not floats:
        return mapping
    rep = floats[0]
    prev = floats[0]
    for x in floats[1:]:
        if x - prev <= tol:
            mapping[PValue(x)] = PValue(rep)
        else:
            rep = x
        prev = x
    return mapping


def exact_nth_root(frac: Fraction, n: int) -> Fraction | None:
    """Exact n-th root of a nonnegative rational, or None if not perfect."""
    if frac < 0 or n <= 0:
        return None
    if frac == 0:
        return Fraction(0)
    num = _int_nth_root(frac.numerator, n)
    den = _int_nth_root(frac.denominator, n)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _int_nth_root(k: int, n: int) -> int | None:
    if k < 0:
        return None
    if n == 1:
        return k
    if n == 2:
        r = math.isqrt(k)
        return r if r * r == k else None
    r = round(k ** (1.0 / n))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**n == k:
            return cand
    return None


def exact_pow(value: Fraction, exponent: Fraction) -> Fraction | None:
    """value**exponent as an exact rational, or None when not representable."""
    if value < 0:
        return None
    if value == 0:
        return Fraction(0) if exponent > 0 else None
    powered = value**exponent.numerator
    return exact_nth_root(powered, exponent.denominator)
