"""Exact rational helpers: parsing, integer roots, dyadic rounding and
integer-scaled value sets.

Everything here is exact. Large enumerations run on numpy integer arrays
over a shared denominator; arrays switch to ``object`` dtype (Python ints)
whenever an int64 result could overflow.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable

import numpy as np

from .errors import BudgetExceeded

Rational = Fraction

INT64_SAFE = 1 << 62

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"p/q"`` or ``"p"``. Decimal notation is rejected on purpose."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational of the form p/q: {text!r}")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(num, den)


def format_rational(x: Fraction | int) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def lcm_many(values: Iterable[int]) -> int:
    return reduce(math.lcm, values, 1)


def common_denominator(values: Iterable[Fraction]) -> int:
    return lcm_many(Fraction(v).denominator for v in values)


def iroot(n: int, k: int) -> int:
    """Floor of the k-th root of a non-negative integer."""
    if n < 0:
        raise ValueError("iroot of a negative number")
    if k == 1 or n < 2:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def exact_power(base: Fraction, exponent: Fraction) -> Fraction | None:
    """``base**exponent`` if it is rational, else None (base > 0)."""
    base = Fraction(base)
    exponent = Fraction(exponent)
    if base <= 0:
        raise ValueError("base must be positive")
    if exponent < 0:
        base, exponent = 1 / base, -exponent
    a, b = exponent.numerator, exponent.denominator
    rn, rd = iroot(base.numerator, b), iroot(base.denominator, b)
    if rn ** b != base.numerator or rd ** b != base.denominator:
        return None
    return Fraction(rn, rd) ** a


def power_floor(base: Fraction, exponent: Fraction, bits: int = 64) -> Fraction:
    """Largest m/2**bits not exceeding ``base**exponent`` (exact when rational)."""
    exact = exact_power(base, exponent)
    if exact is not None:
        return exact
    base = Fraction(base)
    exponent = Fraction(exponent)
    if exponent < 0:
        base, exponent = 1 / base, -exponent
    a, b = exponent.numerator, exponent.denominator
    p, q = base.numerator ** a, base.denominator ** a
    return Fraction(iroot((p << (bits * b)) // q, b), 1 << bits)


def power_ceil(base: Fraction, exponent: Fraction, bits: int = 64) -> Fraction:
    """Smallest m/2**bits not below ``base**exponent`` (exact when rational)."""
    exact = exact_power(base, exponent)
    if exact is not None:
        return exact
    return power_floor(base, exponent, bits) + Fraction(1, 1 << bits)


def round_up(x: Fraction, bits: int) -> Fraction:
    return Fraction(-((-x.numerator << bits) // x.denominator), 1 << bits)


def round_down(x: Fraction, bits: int) -> Fraction:
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def sqrt_ceil(x: Fraction, rel_bits: int = 32) -> Fraction:
    """Rational r with sqrt(x) <= r <= sqrt(x) * (1 + 2**-rel_bits)."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")
    if x == 0:
        return Fraction(0)
    exact = exact_power(x, Fraction(1, 2))
    if exact is not None:
        return exact
    num, den = x.numerator, x.denominator
    # sqrt(x) = sqrt(num*den)/den; absolute error of the ceiling is 1/(den*2**m)
    m = rel_bits + 2 + max(0, (den.bit_length() - num.bit_length()) // 2 + 1)
    while True:
        target = (num * den) << (2 * m)
        t = math.isqrt(target)
        if t * t < target:
            t += 1
        r = Fraction(t, den << m)
        # r - sqrt(x) <= 1/(den 2^m); require that to be <= sqrt(x) 2^-rel_bits
        if Fraction(1, den << m) ** 2 * (1 << (2 * rel_bits)) <= x:
            return r
        m += 8


def int_array(values, bound: int | None = None) -> np.ndarray:
    """Integer array (1-D, or 2-D from rows), int64 when ``bound`` is safe, else object."""
    rows = [list(v) if isinstance(v, (list, tuple, np.ndarray)) else v for v in values]
    nested = bool(rows) and isinstance(rows[0], list)
    flat = [int(x) for r in rows for x in r] if nested else [int(x) for x in rows]
    if bound is None:
        bound = max((abs(x) for x in flat), default=0)
    shape = (len(rows), len(rows[0])) if nested else (len(flat),)
    if bound < INT64_SAFE:
        return np.array(flat, dtype=np.int64).reshape(shape)
    # fill slot by slot: dtype inference would round big ints through float
    out = np.empty(len(flat), dtype=object)
    for i, x in enumerate(flat):
        out[i] = x
    return out.reshape(shape)


def max_abs(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    if arr.dtype == object:
        return max(abs(int(v)) for v in arr.ravel())
    return int(np.abs(arr).max())


def widen(arr: np.ndarray, factor_bound: int) -> np.ndarray:
    """Return ``arr`` as object dtype if multiplying by ``factor_bound`` may overflow."""
    if arr.dtype == object:
        return arr
    if max_abs(arr) * max(1, factor_bound) >= INT64_SAFE:
        return arr.astype(object)
    return arr


def narrow(arr: np.ndarray) -> np.ndarray:
    """Back to int64 when all magnitudes allow it."""
    if arr.dtype == object and max_abs(arr) < INT64_SAFE:
        return arr.astype(np.int64)
    return arr


def array_gcd(arr: np.ndarray) -> int:
    if arr.size == 0:
        return 0
    if arr.dtype == object:
        return reduce(math.gcd, (int(v) for v in arr.ravel()), 0)
    return int(np.gcd.reduce(np.abs(arr).ravel()))


def scale_fractions(values: Iterable[Fraction]) -> tuple[np.ndarray, int]:
    """Integer numerators over the least common denominator."""
    values = [Fraction(v) for v in values]
    den = common_denominator(values)
    nums = [v.numerator * (den // v.denominator) for v in values]
    return int_array(nums), den


@dataclass(frozen=True, eq=False)
class ValueSet:
    """A finite set of rationals: sorted unique numerators over one denominator.

    The representation is canonical (denominator reduced against the gcd of
    all numerators) so two equal sets compare equal structurally.
    """

    nums: np.ndarray
    den: int

    @classmethod
    def from_ints(cls, nums: np.ndarray, den: int) -> "ValueSet":
        nums = np.unique(nums)
        g = math.gcd(array_gcd(nums), den)
        if g > 1:
            nums = nums // g
            den //= g
        return cls(narrow(nums), den)

    @classmethod
    def from_fractions(cls, values: Iterable[Fraction]) -> "ValueSet":
        nums, den = scale_fractions(values)
        return cls.from_ints(nums, den)

    @classmethod
    def zero(cls) -> "ValueSet":
        return cls(np.zeros(1, dtype=np.int64), 1)

    @classmethod
    def differences(cls, nums: np.ndarray, den: int, budget: int) -> "ValueSet":
        """The difference set {p - p'} of integer projections ``nums / den``."""
        p = np.unique(nums)
        if len(p) * len(p) > budget:
            raise BudgetExceeded(
                f"difference set of {len(p)} values exceeds budget {budget}"
            )
        p = widen(p, 2)
        return cls.from_ints(np.subtract.outer(p, p).ravel(), den)

    def __len__(self) -> int:
        return len(self.nums)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ValueSet):
            return NotImplemented
        return (
            self.den == other.den
            and len(self) == len(other)
            and bool(np.all(self.nums == other.nums))
        )

    __hash__ = None  # type: ignore[assignment]

    def to_fractions(self) -> list[Fraction]:
        return [Fraction(int(v), self.den) for v in self.nums]

    def __contains__(self, x: Fraction) -> bool:
        x = Fraction(x)
        if self.den % x.denominator:
            return False
        key = x.numerator * (self.den // x.denominator)
        i = int(np.searchsorted(self.nums, key))
        return i < len(self.nums) and int(self.nums[i]) == key

    def sumset(self, other: "ValueSet", scale: Fraction = Fraction(1), budget: int = 1 << 26) -> "ValueSet":
        """{x + scale*y : x in self, y in other}, exactly."""
        scale = Fraction(scale)
        if len(self) * len(other) > budget:
            raise BudgetExceeded(
                f"sumset of sizes {len(self)} x {len(other)} exceeds budget {budget}"
            )
        oden = other.den * scale.denominator
        den = math.lcm(self.den, oden)
        f1 = den // self.den
        f2 = scale.numerator * (den // oden)
        left = widen(self.nums, f1)
        right = widen(other.nums, abs(f2))
        left = left * f1
        right = right * f2
        if max_abs(left) + max_abs(right) >= INT64_SAFE:
            left, right = left.astype(object), right.astype(object)
        return ValueSet.from_ints(np.add.outer(left, right).ravel(), den)


@dataclass(frozen=True)
class Budget:
    """Enumeration limits: point sets, materialized value sets, KM coefficient vectors."""

    points: int = 1 << 20
    values: int = 1 << 26
    km_vectors: int = 1 << 24
