"""Validated interval arithmetic over exact rationals.

A ``RationalInterval`` is a pair of ``Fraction`` endpoints ``lo <= hi``
enclosing some real number.  Endpoints are exact, so the ring operations
(+, -, *, /) are themselves exact; "outward rounding" only enters for the
irrational functions (sqrt, n-th root, log), which return enclosures of
controllable width.

Every function here is pure and safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Union

from .errors import InputError

Rat = Union[Fraction, int]


@dataclass(frozen=True)
class RationalInterval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise InputError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def point(x: Rat) -> "RationalInterval":
        x = Fraction(x)
        return RationalInterval(x, x)

    # -- basic queries -----------------------------------------------------

    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Rat) -> bool:
        return self.lo <= x <= self.hi

    def contains_interval(self, other: "RationalInterval") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def overlaps(self, other: "RationalInterval") -> bool:
        return not (self.hi < other.lo or other.hi < self.lo)

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __repr__(self):
        return f"[{self.lo}, {self.hi}]"

    def approx(self) -> float:
        """Float midpoint, for display only -- never used in a certified path."""
        return float(self.midpoint())

    # -- exact ring operations --------------------------------------------

    def __add__(self, other) -> "RationalInterval":
        other = _coerce(other)
        return RationalInterval(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other) -> "RationalInterval":
        other = _coerce(other)
        return RationalInterval(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "RationalInterval":
        return RationalInterval(-self.hi, -self.lo)

    def __mul__(self, other) -> "RationalInterval":
        other = _coerce(other)
        cands = (self.lo * other.lo, self.lo * other.hi,
                 self.hi * other.lo, self.hi * other.hi)
        return RationalInterval(min(cands), max(cands))

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return _coerce(other) - self

    def __truediv__(self, other) -> "RationalInterval":
        other = _coerce(other)
        if other.lo <= 0 <= other.hi:
            raise InputError(f"interval division by {other} (contains zero)")
        cands = (self.lo / other.lo, self.lo / other.hi,
                 self.hi / other.lo, self.hi / other.hi)
        return RationalInterval(min(cands), max(cands))

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, n: int) -> "RationalInterval":
        if not isinstance(n, int) or n < 0:
            raise InputError("interval powers take non-negative integer exponents")
        if n == 0:
            return RationalInterval.point(1)
        if n % 2 == 1 or self.lo >= 0:
            return RationalInterval(self.lo ** n, self.hi ** n)
        if self.hi <= 0:
            return RationalInterval(self.hi ** n, self.lo ** n)
        return RationalInterval(Fraction(0), max(self.lo ** n, self.hi ** n))

    # -- lattice helpers ---------------------------------------------------

    def hull(self, other: "RationalInterval") -> "RationalInterval":
        return RationalInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "RationalInterval") -> "RationalInterval":
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise InputError(f"empty intersection of {self} and {other}")
        return RationalInterval(lo, hi)

    # -- verified comparisons (three-valued: True / False mean *provable*) --

    def strictly_less(self, other) -> bool:
        return self.hi < _coerce(other).lo

    def strictly_greater(self, other) -> bool:
        return self.lo > _coerce(other).hi

    def at_most(self, other) -> bool:
        return self.hi <= _coerce(other).lo

    def at_least(self, other) -> bool:
        return self.lo >= _coerce(other).hi


def _coerce(x) -> RationalInterval:
    if isinstance(x, RationalInterval):
        return x
    return RationalInterval.point(Fraction(x))


# ---------------------------------------------------------------------------
# Outward-rounded irrational functions
# ---------------------------------------------------------------------------

def sqrt_fraction(x: Rat, bits: int = 64) -> RationalInterval:
    """Enclosure of sqrt(x) for rational x >= 0, width about 2**-bits * scale."""
    x = Fraction(x)
    if x < 0:
        raise InputError(f"sqrt of negative rational {x}")
    if x == 0:
        return RationalInterval.point(0)
    p, q = x.numerator, x.denominator
    # sqrt(p/q) = sqrt(p*q)/q; isqrt gives floor(sqrt(.)) on scaled integers.
    shift = 1 << bits
    s = isqrt(p * q * shift * shift)
    lo = Fraction(s, q * shift)
    hi = Fraction(s + 1, q * shift)
    return RationalInterval(lo, hi)


def sqrt_interval(iv: RationalInterval, bits: int = 64) -> RationalInterval:
    if iv.lo < 0:
        raise InputError(f"sqrt of interval {iv} touching negatives")
    return RationalInterval(sqrt_fraction(iv.lo, bits).lo, sqrt_fraction(iv.hi, bits).hi)


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for integers n >= 0, k >= 1."""
    if n < 0:
        raise InputError("iroot of negative integer")
    if n == 0:
        return 0
    if k == 1:
        return n
    if k == 2:
        return isqrt(n)
    hi = 1 << (n.bit_length() // k + 1)
    lo = 0
    while lo < hi - 1:
        mid = (lo + hi) // 2
        if mid ** k <= n:
            lo = mid
        else:
            hi = mid
    return lo


def nth_root_fraction(x: Rat, k: int, bits: int = 64) -> RationalInterval:
    """Enclosure of x ** (1/k) for rational x >= 0 and integer k >= 1."""
    x = Fraction(x)
    if x < 0:
        raise InputError("nth_root of negative rational")
    if k < 1:
        raise InputError("root order must be >= 1")
    if x == 0:
        return RationalInterval.point(0)
    p, q = x.numerator, x.denominator
    # (p/q)^(1/k) = (p * q^(k-1))^(1/k) / q
    shift = 1 << bits
    scaled = p * q ** (k - 1) * shift ** k
    s = _iroot(scaled, k)
    return RationalInterval(Fraction(s, q * shift), Fraction(s + 1, q * shift))


def _atanh_series(t: Fraction, terms_tol: Fraction) -> RationalInterval:
    """Enclosure of atanh(t) = sum t^(2i+1)/(2i+1) for 0 <= t < 1.

    Partial sums underestimate; the geometric tail t^(2n+1)/((2n+1)(1-t^2))
    bounds the remainder.
    """
    if not (0 <= t < 1):
        raise InputError("atanh series needs 0 <= t < 1")
    if t == 0:
        return RationalInterval.point(0)
    total = Fraction(0)
    power = t
    t2 = t * t
    i = 0
    while True:
        total += power / (2 * i + 1)
        power *= t2
        i += 1
        tail = power / ((2 * i + 1) * (1 - t2))
        if tail <= terms_tol:
            return RationalInterval(total, total + tail)


_LN2_CACHE: dict[int, RationalInterval] = {}


def log2_interval(bits: int = 64) -> RationalInterval:
    """Enclosure of ln(2)."""
    iv = _LN2_CACHE.get(bits)
    if iv is None:
        # ln 2 = 2 atanh(1/3)
        iv = _atanh_series(Fraction(1, 3), Fraction(1, 1 << (bits + 2))) * 2
        _LN2_CACHE[bits] = iv
    return iv


def log_fraction(x: Rat, bits: int = 64) -> RationalInterval:
    """Enclosure of ln(x) for rational x > 0.

    Argument reduction x = 2**k * m with m in [1, 2), then
    ln m = 2 atanh((m-1)/(m+1)) with a tail-bounded series.
    """
    x = Fraction(x)
    if x <= 0:
        raise InputError(f"log of non-positive rational {x}")
    if x < 1:
        return -log_fraction(1 / x, bits)
    k = 0
    m = x
    while m >= 2:
        m /= 2
        k += 1
    tol = Fraction(1, 1 << (bits + 2))
    ln_m = _atanh_series((m - 1) / (m + 1), tol) * 2
    return log2_interval(bits) * k + ln_m


def log_interval(iv: RationalInterval, bits: int = 64) -> RationalInterval:
    if iv.lo <= 0:
        raise InputError(f"log of interval {iv} touching non-positives")
    return RationalInterval(log_fraction(iv.lo, bits).lo, log_fraction(iv.hi, bits).hi)
