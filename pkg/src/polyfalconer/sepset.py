"""Separated point sets with few distinct projections.

Two families are built and certified exactly:

* lattice sets ``A = (4K)^-1 * {sum_k (j_k/N) u_k a_k : j in {1..N}^K}`` with
  random parameters ``u`` in [1, 2]^K, and
* power sets ``A = (4 g^(dL))^-1 * (S0 x S0)`` where ``S0`` collects the
  sums ``sum_l (j_l/N) gamma^l`` over the exponent grid ``{0..L-1}^d``.

Each set carries its exact projection difference sets ``(A-A).b_k``, its
minimum X-distance and its minimum squared Euclidean distance.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from itertools import product
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, ExhaustedTries, ParameterCollision, RepresentationCollision
from .exact import (
    Budget,
    ValueSet,
    array_gcd,
    format_rational,
    int_array,
    lcm_many,
    max_abs,
    narrow,
    power_ceil,
    power_floor,
    widen,
)
from .neighbors import closest_pair, euclid_cell_width, euclid_sq
from .polynorm import Point2, PolygonalNorm, Slope, from_slopes

DEFAULT_GRID = 1 << 16


@dataclass(frozen=True)
class LatticeSpec:
    K: int
    N: int
    u: tuple[Fraction, ...]
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(Fraction(x) for x in self.u))
        if self.K < 2 or self.N < 2:
            raise ValueError("lattice sets need K >= 2 and N >= 2")
        if len(self.u) != self.K:
            raise ValueError(f"expected {self.K} parameters, got {len(self.u)}")
        if any(not 1 <= x <= 2 for x in self.u):
            raise ValueError("parameters u_k must lie in [1, 2]")

    def to_json(self) -> dict:
        return {
            "kind": "lattice",
            "K": self.K,
            "N": self.N,
            "u": [format_rational(x) for x in self.u],
        }


@dataclass(frozen=True)
class PowerSpec:
    d: int
    L: int
    N: int
    gamma: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(Fraction(g) for g in self.gamma))
        if self.d < 1 or len(self.gamma) != self.d:
            raise ValueError("gamma must have d >= 1 entries")
        if self.L < 2 or self.N < 2:
            raise ValueError("power sets need L >= 2 and N >= 2")

    @property
    def gamma_bar(self) -> Fraction:
        return max(abs(g) for g in self.gamma) + 1

    @property
    def grid_size(self) -> int:
        return self.L ** self.d

    def slopes(self) -> list[Slope]:
        return [Slope.of(g) for g in self.gamma] + [Slope.of(0), Slope.of(1), Slope.infinity()]

    def to_json(self) -> dict:
        return {
            "kind": "power",
            "d": self.d,
            "L": self.L,
            "N": self.N,
            "gamma": [format_rational(g) for g in self.gamma],
        }


@dataclass(frozen=True, eq=False)
class SeparatedSet:
    """Certified finite point set: ``coords / den`` are the exact points."""

    coords: np.ndarray
    den: int
    norm: PolygonalNorm
    proj_values: tuple[ValueSet, ...]
    min_distance: Fraction
    min_euclid_sq: Fraction
    spec: LatticeSpec | PowerSpec
    scale_note: str = ""

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def proj_counts(self) -> tuple[int, ...]:
        return tuple(len(v) for v in self.proj_values)

    @property
    def points(self) -> list[Point2]:
        return [Point2(Fraction(int(x), self.den), Fraction(int(y), self.den)) for x, y in self.coords]

    @property
    def seed(self) -> int | None:
        return getattr(self.spec, "seed", None)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "points": [p.to_json() for p in self.points],
            "proj_counts": list(self.proj_counts),
            "min_distance": format_rational(self.min_distance),
            "min_euclid_sq": format_rational(self.min_euclid_sq),
            "spec": self.spec.to_json(),
            "seed": self.seed,
            "norm": self.norm.to_json(),
            "scale_note": self.scale_note,
        }

    def points_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x1", "x2"])
        for p in self.points:
            w.writerow(p.to_json())
        return buf.getvalue()


def projections(coords: np.ndarray, norm: PolygonalNorm) -> tuple[list[np.ndarray], int]:
    """Integer projections ``coords . B_k``; the values are ``proj / (den * bden)``."""
    B, bden = norm.scaled_functionals()
    bound = max(abs(int(v)) for v in B.ravel())
    c = widen(coords, 2 * bound)
    out = []
    for bx, by in B:
        out.append(c[:, 0] * int(bx) + c[:, 1] * int(by))
    return out, bden


def x_distance_metric(norm: PolygonalNorm):
    """(dist, cell_width) pair for :func:`closest_pair` under the X-norm.

    dist returns ``||diff||_X * bden`` in the coordinate units; the bucket
    width uses the exact bounding box of the unit ball.
    """
    B, bden = norm.scaled_functionals()
    rho = max(norm.box_radius())
    rows = [(int(bx), int(by)) for bx, by in B]
    bound = max(max(abs(bx), abs(by)) for bx, by in rows)

    def dist(diff: np.ndarray) -> np.ndarray:
        diff = widen(diff, 2 * bound)
        vals = [np.abs(diff[:, 0] * bx + diff[:, 1] * by) for bx, by in rows]
        return np.max(np.stack(vals), axis=0)

    def cell_width(best: int) -> int:
        w = rho * best / bden
        return -(-w.numerator // w.denominator)

    return dist, cell_width, bden


def distinct_count(coords: np.ndarray) -> int:
    if coords.dtype == object:
        return len({(int(x), int(y)) for x, y in coords})
    return len(np.unique(coords, axis=0))


def certify_points(coords: np.ndarray, den: int, norm: PolygonalNorm, budget: Budget = Budget()):
    """Exact (proj_values, min X-distance, min squared Euclidean distance) of a point set."""
    projs, bden = projections(coords, norm)
    proj_values = tuple(ValueSet.differences(p, den * bden, budget.values) for p in projs)
    if len(coords) < 2:
        raise ValueError("a separated set needs at least two points")
    dist, cell_width, bden = x_distance_metric(norm)
    best, _ = closest_pair(coords, dist, cell_width)
    min_distance = Fraction(best, den * bden)
    best_sq, _ = closest_pair(coords, euclid_sq, euclid_cell_width)
    min_euclid_sq = Fraction(best_sq, den * den)
    return proj_values, min_distance, min_euclid_sq


def _reduce(coords: np.ndarray, den: int) -> tuple[np.ndarray, int]:
    g = math.gcd(array_gcd(coords), den)
    if g > 1:
        coords = coords // g
        den //= g
    return narrow(coords), den


def _check_half_ball(coords: np.ndarray, den: int) -> None:
    if max_abs(euclid_sq(coords)) * 4 > den * den:
        raise RuntimeError("point set escaped the ball B(0, 1/2)")


def _index_tuples(N: int, m: int) -> np.ndarray:
    """All tuples in {1..N}^m, row-major (first entry varies slowest)."""
    return np.indices((N,) * m).reshape(m, -1).T.astype(np.int64) + 1


def build_lattice_set(norm: PolygonalNorm, spec: LatticeSpec, budget: Budget = Budget()) -> SeparatedSet:
    if norm.K != spec.K:
        raise ValueError(f"norm has K={norm.K} but spec has K={spec.K}")
    K, N = spec.K, spec.N
    n = N ** K
    if n > budget.points:
        raise BudgetExceeded(f"N^K = {n} points exceeds budget {budget.points}")
    scale = Fraction(1, 4 * K * N)
    vecs = [ak * (uk * scale) for ak, uk in zip(norm.a, spec.u)]
    den = lcm_many(c.denominator for v in vecs for c in (v.x1, v.x2))
    W = [[int(v.x1 * den), int(v.x2 * den)] for v in vecs]
    bound = N * sum(abs(x) + abs(y) for x, y in W)
    Wa = int_array(W, bound)
    J = _index_tuples(N, K)
    if Wa.dtype == object:
        J = J.astype(object)
    coords = J @ Wa
    if distinct_count(coords) < n:
        raise ParameterCollision(
            f"u = {[format_rational(x) for x in spec.u]} lies in the bad set: |S| < N^K"
        )
    coords, den = _reduce(coords, den)
    _check_half_ball(coords, den)
    proj_values, md, me = certify_points(coords, den, norm, budget)
    return SeparatedSet(
        coords, den, norm, proj_values, md, me, spec,
        scale_note=f"A = (4K)^-1 S with K={K}; |a_k|_max = 1 scale",
    )


def _draw_spec(rng: np.random.Generator, K: int, N: int, grid: int, seed: int) -> LatticeSpec:
    q = rng.integers(grid, 2 * grid, size=K, endpoint=True)
    return LatticeSpec(K, N, tuple(Fraction(int(x), grid) for x in q), seed)


def sample_good_set(
    norm: PolygonalNorm,
    K: int,
    N: int,
    t_target: Fraction,
    max_tries: int,
    seed: int,
    grid: int = DEFAULT_GRID,
    budget: Budget = Budget(),
) -> tuple[LatticeSpec, SeparatedSet]:
    """Rejection-sample u until the set is injective and ``t``-separated."""
    t_target = Fraction(t_target)
    if t_target < 0 or max_tries < 1:
        raise ValueError("need t_target >= 0 and max_tries >= 1")
    rng = np.random.default_rng(seed)
    n = N ** K
    for _ in range(max_tries):
        spec = _draw_spec(rng, K, N, grid, seed)
        try:
            A = build_lattice_set(norm, spec, budget)
        except ParameterCollision:
            continue
        # min_distance >= t / sqrt(n), squared
        if A.min_distance ** 2 * n >= t_target ** 2:
            return spec, A
    raise ExhaustedTries(f"no parameters with separation {t_target} * n^-1/2 in {max_tries} tries")


def sample_good_parameters(
    norm: PolygonalNorm,
    K: int,
    N: int,
    t_target: Fraction,
    max_tries: int,
    seed: int,
    grid: int = DEFAULT_GRID,
    budget: Budget = Budget(),
) -> LatticeSpec:
    return sample_good_set(norm, K, N, t_target, max_tries, seed, grid, budget)[0]


def exponent_grid(d: int, L: int) -> list[tuple[int, ...]]:
    return list(product(range(L), repeat=d))


def monomials(gamma: Sequence[Fraction], L: int) -> list[Fraction]:
    out = []
    for ls in exponent_grid(len(gamma), L):
        m = Fraction(1)
        for g, l in zip(gamma, ls):
            m *= Fraction(g) ** l
        out.append(m)
    return out


def power_base_set(spec: PowerSpec, budget: Budget = Budget()) -> tuple[np.ndarray, int]:
    """Integer numerators (over a common denominator) of S0, in j-tuple order."""
    m = spec.grid_size
    size0 = spec.N ** m
    if size0 > budget.points:
        raise BudgetExceeded(f"|S0| = {size0} exceeds budget {budget.points}")
    terms = [mono / spec.N for mono in monomials(spec.gamma, spec.L)]
    den = lcm_many(t.denominator for t in terms)
    M = [int(t * den) for t in terms]
    Ma = int_array(M, spec.N * sum(abs(x) for x in M))
    J = _index_tuples(spec.N, m)
    if Ma.dtype == object:
        J = J.astype(object)
    return J @ Ma, den


def build_power_set(spec: PowerSpec, budget: Budget = Budget()) -> SeparatedSet:
    norm = from_slopes(spec.slopes())
    m = spec.grid_size
    size0 = spec.N ** m
    n = size0 * size0
    if n > budget.points:
        raise BudgetExceeded(f"N^(2 L^d) = {n} points exceeds budget {budget.points}")
    s0, den0 = power_base_set(spec, budget)
    if len(np.unique(s0)) < size0:
        raise RepresentationCollision(
            f"gamma = {[format_rational(g) for g in spec.gamma]} has coinciding "
            f"representations at L={spec.L}, N={spec.N}"
        )
    g = spec.gamma_bar ** (spec.d * spec.L)
    # A = S / (4 g): numerators times g.den, denominator den0 * 4 * g.num
    f = g.denominator
    s0 = widen(s0, f) * f
    den = den0 * 4 * g.numerator
    coords = np.stack([np.repeat(s0, size0), np.tile(s0, size0)], axis=1)
    coords, den = _reduce(coords, den)
    _check_half_ball(coords, den)
    proj_values, md, me = certify_points(coords, den, norm, budget)
    return SeparatedSet(
        coords, den, norm, proj_values, md, me, spec,
        scale_note=f"A = (4 gbar^(dL))^-1 (S0 x S0), gbar = {format_rational(spec.gamma_bar)}",
    )


@dataclass(frozen=True)
class CertificationReport:
    """Implied constants of a separated set.

    ``C[k]`` is ``proj_counts[k] / n**alpha`` rounded up to 64 fractional bits
    (exact when rational) and ``t`` is ``min_distance * n**beta`` rounded down.
    """

    n: int
    alpha: Fraction
    beta: Fraction
    proj_counts: tuple[int, ...]
    C_k: tuple[Fraction, ...]
    t: Fraction
    min_distance: Fraction
    n_alpha: str = field(default="")

    @property
    def C(self) -> Fraction:
        return max(self.C_k)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "alpha": format_rational(self.alpha),
            "beta": format_rational(self.beta),
            "proj_counts": list(self.proj_counts),
            "n_alpha": self.n_alpha,
            "C_k": [format_rational(c) for c in self.C_k],
            "C": format_rational(self.C),
            "t": format_rational(self.t),
            "min_distance": format_rational(self.min_distance),
        }


def default_exponents(A: SeparatedSet, eps: Fraction | None = None) -> tuple[Fraction, Fraction]:
    """(alpha, beta): (1 - 1/K, 1/2) for lattice sets, (1/2 + eps, 1/2 + eps) for power sets."""
    if isinstance(A.spec, LatticeSpec):
        return 1 - Fraction(1, A.spec.K), Fraction(1, 2)
    if eps is None:
        eps = Fraction(1, A.spec.L)
    return Fraction(1, 2) + eps, Fraction(1, 2) + eps


def _fmt_power(n: int, alpha: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 30
        return str(Decimal(n) ** (Decimal(alpha.numerator) / Decimal(alpha.denominator)))


def certify(A: SeparatedSet, alpha: Fraction, beta: Fraction) -> CertificationReport:
    alpha, beta = Fraction(alpha), Fraction(beta)
    n = A.n
    # count * n^-alpha = (count^b * n^-a)^(1/b) with alpha = a/b
    a, b = alpha.numerator, alpha.denominator
    C_k = tuple(
        power_ceil(Fraction(c ** b) / Fraction(n) ** a, Fraction(1, b)) for c in A.proj_counts
    )
    a, b = beta.numerator, beta.denominator
    t = power_floor(A.min_distance ** b * Fraction(n) ** a, Fraction(1, b))
    return CertificationReport(
        n, alpha, beta, A.proj_counts, C_k, t, A.min_distance, _fmt_power(n, alpha)
    )
