"""Finite-scale Diophantine margins of power sums in gamma.

For coefficient vectors ``n`` indexed by the exponent grid ``{0..L-1}^d``
the margin is ``min |sum_l n_l gamma^l|`` over nonzero ``n`` with
``max |n_l| <= B``. A positive margin at height ``N - 1`` is exactly
injectivity of the j-representations of the power set at ``N``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded
from .exact import Budget, format_rational, int_array, lcm_many, power_ceil
from .sepset import monomials

_CHUNK = 1 << 20


@dataclass(frozen=True)
class GammaVector:
    gamma: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(Fraction(g) for g in self.gamma))
        if not self.gamma:
            raise ValueError("gamma needs d >= 1 entries")

    @property
    def d(self) -> int:
        return len(self.gamma)


@dataclass(frozen=True)
class MarginReport:
    L: int
    coeff_bound: int
    margin: Fraction
    witness: tuple[int, ...]
    rhs: Fraction | None = None
    epsilon: Fraction | None = None
    passed: bool | None = None

    def to_json(self) -> dict:
        doc = {
            "L": self.L,
            "coeff_bound": self.coeff_bound,
            "margin": format_rational(self.margin),
            "witness": list(self.witness),
            "rhs": None if self.rhs is None else format_rational(self.rhs),
        }
        if self.epsilon is not None:
            doc["epsilon"] = format_rational(self.epsilon)
            doc["passed"] = self.passed
        return doc


def _canonical_sign(vec: tuple[int, ...], signed: int) -> tuple[tuple[int, ...], int]:
    """Pick the sign of +-vec making the sum positive (first nonzero entry positive on ties)."""
    if signed < 0 or (signed == 0 and next(x for x in vec if x) < 0):
        return tuple(-x for x in vec), -signed
    return vec, signed


def km_margin(gv: GammaVector, L: int, coeff_bound: int, budget: Budget = Budget()) -> MarginReport:
    """Exhaustive minimum of ``|sum n_l gamma^l|`` over nonzero ``n`` in [-B, B]^(L^d).

    Among minimizers the witness has the smallest height ``max |n_l|``, its
    sign is chosen so the sum is positive (or the first nonzero entry is
    positive when the sum vanishes), and remaining ties go to the
    lexicographically smallest vector.
    """
    if L < 1 or coeff_bound < 1:
        raise ValueError("need L >= 1 and coeff_bound >= 1")
    mono = monomials(gv.gamma, L)
    m = len(mono)
    width = 2 * coeff_bound + 1
    total = width ** m
    if total > budget.km_vectors:
        raise BudgetExceeded(f"{total} coefficient vectors exceed budget {budget.km_vectors}")
    den = lcm_many(x.denominator for x in mono)
    M = [int(x * den) for x in mono]
    bound = coeff_bound * sum(abs(x) for x in M)
    values = np.arange(-coeff_bound, coeff_bound + 1, dtype=np.int64)

    # split coordinates into an enumerated prefix and a vectorized suffix
    p = 0
    while width ** (m - p) > _CHUNK:
        p += 1
    q = m - p
    suffix = np.indices((width,) * q).reshape(q, -1).T - coeff_bound
    Ms = int_array(M[p:], bound)
    if Ms.dtype == object:
        suffix = suffix.astype(object)
    suffix_sums = suffix @ Ms if q else np.zeros(1, dtype=Ms.dtype)
    if q == 0:
        suffix = np.zeros((1, 0), dtype=np.int64)

    best_abs: int | None = None
    cands: list[tuple[tuple[int, ...], int]] = []
    for prefix in product(values.tolist(), repeat=p):
        base = sum(c * w for c, w in zip(prefix, M[:p]))
        sums = suffix_sums + base
        absval = np.abs(sums)
        if not any(prefix):
            # exclude the zero vector
            zero_idx = int(np.flatnonzero(np.all(suffix == 0, axis=1))[0])
            absval = absval.copy()
            absval[zero_idx] = bound + 1
        lo = int(absval.min())
        if best_abs is not None and lo > best_abs:
            continue
        if best_abs is None or lo < best_abs:
            best_abs = lo
            cands = []
        for i in np.flatnonzero(absval == lo):
            vec = tuple(prefix) + tuple(int(x) for x in suffix[i])
            cands.append((vec, int(sums[i])))

    best = min(
        (_canonical_sign(v, s) for v, s in cands),
        key=lambda vs: (max(abs(x) for x in vs[0]), vs[0]),
    )
    return MarginReport(L, coeff_bound, Fraction(best_abs, den), best[0])


def km_rhs(coeff_bound: int, L: int, d: int, epsilon: Fraction) -> Fraction:
    """``coeff_bound ** -((1+eps) L^d)``: exact when rational, else rounded up at 64 bits."""
    return power_ceil(Fraction(coeff_bound), -(1 + Fraction(epsilon)) * L ** d)


def km_passes(margin: Fraction, coeff_bound: int, L: int, d: int, epsilon: Fraction) -> bool:
    """Exact test of ``margin >= coeff_bound ** -((1+eps) L^d)``."""
    e = (1 + Fraction(epsilon)) * L ** d
    a, b = e.numerator, e.denominator
    # margin^b * B^a >= 1
    return margin > 0 and margin ** b * Fraction(coeff_bound) ** a >= 1


def km_margin_curve(
    gv: GammaVector,
    L: int,
    bounds: Sequence[int],
    epsilon: Fraction | None = None,
    budget: Budget = Budget(),
) -> list[MarginReport]:
    """Margins at each height in ``bounds`` compared against the (1+eps) L^d power law."""
    if epsilon is None:
        epsilon = Fraction(1, L)
    epsilon = Fraction(epsilon)
    out = []
    for B in bounds:
        r = km_margin(gv, L, B, budget)
        out.append(
            MarginReport(
                r.L, r.coeff_bound, r.margin, r.witness,
                rhs=km_rhs(B, L, gv.d, epsilon),
                epsilon=epsilon,
                passed=km_passes(r.margin, B, L, gv.d, epsilon),
            )
        )
    return out


def separation_floor(gv: GammaVector, L: int, N: int, budget: Budget = Budget()) -> Fraction:
    """Exact minimum gap between distinct power-set sums at parameter N."""
    if N < 2:
        raise ValueError("separation_floor needs N >= 2")
    return km_margin(gv, L, N - 1, budget).margin / N
