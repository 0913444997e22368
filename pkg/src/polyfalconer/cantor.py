"""Iterated disc-replacement construction and its natural measure.

Level j is a union of ``N_j = n_1 ... n_j`` disjoint closed discs of radius
``Delta_j = delta_1 ... delta_j``. Each level-j disc ``B(y, Delta_j)`` is
replaced by ``B(y + Delta_j x, Delta_j delta_{j+1})`` for x in the next
generator set (a pure scaling plus translation). Projection difference sets
are carried by the sumset recursion

    (D_{j+1} - D_{j+1}).b = (D_j - D_j).b  +  Delta_j (A_{j+1} - A_{j+1}).b

so they stay available when the centers themselves are too many to list.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, NonMonotone, ScheduleInfeasible
from .exact import (
    Budget,
    ValueSet,
    array_gcd,
    format_rational,
    narrow,
    power_floor,
    round_up,
    widen,
)
from .neighbors import closest_pair, euclid_cell_width, euclid_sq
from .polynorm import Point2, PolygonalNorm
from .sepset import LatticeSpec, SeparatedSet, certify

THEOREM1 = "theorem1"
THEOREM4 = "theorem4"
C_GRID_BITS = 16


@dataclass(frozen=True)
class LevelSpec:
    n: int
    gen: SeparatedSet | None
    delta: Fraction
    exponent: Fraction
    alpha: Fraction
    eps: Fraction | None = None


@dataclass(frozen=True)
class ConstructionSchedule:
    """Per-level sizes and contraction ratios, with the constants c and C-bar.

    ``delta_j = c * n_j ** -exponent_j``; when that power is irrational it is
    rounded down to 64 fractional bits (smaller discs keep every guarantee).
    Levels without a generator set (``gen is None``) come from
    :func:`plan_schedule` and only support the closed-form quantities.
    """

    K: int
    mode: str
    c: Fraction
    levels: tuple[LevelSpec, ...]
    C_bar: Fraction | None = None
    norm: PolygonalNorm | None = None

    @property
    def depth(self) -> int:
        return len(self.levels)

    def N(self, j: int) -> int:
        return math.prod(lv.n for lv in self.levels[:j])

    def Delta(self, j: int) -> Fraction:
        return math.prod((lv.delta for lv in self.levels[:j]), start=Fraction(1))

    @property
    def target_dimension(self) -> Fraction:
        return Fraction(self.K, self.K - 1) if self.mode == THEOREM1 else Fraction(2)

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "mode": self.mode,
            "c": format_rational(self.c),
            "C_bar": None if self.C_bar is None else format_rational(self.C_bar),
            "levels": [
                {
                    "n": lv.n,
                    "delta": format_rational(lv.delta),
                    "exponent": format_rational(lv.exponent),
                    "alpha": format_rational(lv.alpha),
                    "eps": None if lv.eps is None else format_rational(lv.eps),
                }
                for lv in self.levels
            ],
        }


def _exponents(K: int, mode: str, j: int, eps: Fraction | None) -> tuple[Fraction, Fraction, Fraction | None]:
    """(radius exponent, projection-count exponent, eps) for level j (1-based)."""
    if mode == THEOREM1:
        s = Fraction(K - 1, K)
        return s, s, None
    if mode == THEOREM4:
        e = Fraction(1, j + 2) if eps is None else Fraction(eps)
        return Fraction(1, 2) + 2 * e, Fraction(1, 2) + e, e
    raise ValueError(f"unknown mode {mode!r}")


def _base_radius(n: int, exponent: Fraction) -> Fraction:
    return power_floor(Fraction(n), -exponent)


def _check_monotone(ns: Sequence[int]) -> None:
    for a, b in zip(ns, ns[1:]):
        if b < a:
            raise NonMonotone(f"level sizes must be nondecreasing, got {a} then {b}")


def plan_schedule(
    K: int,
    ns: Sequence[int],
    c: Fraction,
    mode: str = THEOREM1,
    eps: Sequence[Fraction] | None = None,
) -> ConstructionSchedule:
    """Schedule from level sizes alone (no generator sets), for closed-form quantities."""
    _check_monotone(ns)
    c = Fraction(c)
    if c <= 0:
        raise ScheduleInfeasible("c must be positive")
    levels = []
    for j, n in enumerate(ns, start=1):
        s, alpha, e = _exponents(K, mode, j, None if eps is None else eps[j - 1])
        levels.append(LevelSpec(n, None, c * _base_radius(n, s), s, alpha, e))
    return ConstructionSchedule(K, mode, c, tuple(levels))


def _largest_c_disjoint(r: Fraction, min_euclid_sq: Fraction) -> Fraction:
    """Largest m / 2^16 with (2 (m/2^16) r)^2 < min_euclid_sq and (m/2^16) r <= 1/2."""
    scale = 1 << C_GRID_BITS
    X = min_euclid_sq * scale * scale / (4 * r * r)
    m = math.isqrt(X.numerator // X.denominator)
    if m * m == X:
        m -= 1
    contain = Fraction(scale, 2) / r
    m = min(m, contain.numerator // contain.denominator)
    return Fraction(max(m, 0), scale)


def make_schedule(
    K: int,
    gens: Sequence[SeparatedSet],
    c: Fraction | None = None,
    mode: str = THEOREM1,
    eps: Sequence[Fraction] | None = None,
) -> ConstructionSchedule:
    """Validated schedule over certified generator sets.

    C is the largest certified projection constant over all levels, C-bar
    its upper rounding to the 2^-16 grid. Without an explicit ``c`` the
    theorem-1 mode takes ``min(1/(4 C-bar), c_disjoint)`` and the theorem-4
    mode ``min(1, c_disjoint)``.
    """
    if not gens:
        raise ValueError("need at least one generator set")
    norm = gens[0].norm
    if any(g.norm != norm for g in gens):
        raise ValueError("all generator sets must use the same norm")
    if norm.K != K:
        raise ValueError(f"norm has K={norm.K}, schedule asks for K={K}")
    _check_monotone([g.n for g in gens])

    raw = []
    C = Fraction(0)
    for j, g in enumerate(gens, start=1):
        s, alpha, e = _exponents(K, mode, j, None if eps is None else eps[j - 1])
        beta = Fraction(1, 2) if isinstance(g.spec, LatticeSpec) else alpha
        C = max(C, certify(g, alpha, beta).C)
        raw.append((g, s, alpha, e, _base_radius(g.n, s)))
    C_bar = round_up(C, C_GRID_BITS)

    c_disjoint = min(_largest_c_disjoint(r, g.min_euclid_sq) for g, _, _, _, r in raw)
    if c is None:
        c = min(Fraction(1, 4) / C_bar, c_disjoint) if mode == THEOREM1 else min(Fraction(1), c_disjoint)
    c = Fraction(c)
    if c <= 0:
        raise ScheduleInfeasible("no positive c keeps the generator discs disjoint")
    if mode == THEOREM1 and not c * C_bar < Fraction(1, 2):
        raise ScheduleInfeasible(
            f"c*C_bar = {format_rational(c * C_bar)} is not below 1/2 "
            f"(c = {format_rational(c)}, C_bar = {format_rational(C_bar)})"
        )
    levels = []
    for j, (g, s, alpha, e, r) in enumerate(raw, start=1):
        delta = c * r
        if not (2 * delta) ** 2 < g.min_euclid_sq:
            raise ScheduleInfeasible(
                f"level {j}: discs of radius {format_rational(delta)} around the "
                f"generator points overlap (min distance^2 = {format_rational(g.min_euclid_sq)})"
            )
        if delta > Fraction(1, 2):
            raise ScheduleInfeasible(f"level {j}: radius {format_rational(delta)} leaves B(0,1)")
        levels.append(LevelSpec(g.n, g, delta, s, alpha, e))
    return ConstructionSchedule(K, mode, c, tuple(levels), C_bar, norm)


@dataclass(frozen=True, eq=False)
class CantorStage:
    """Level j: ``count`` discs of radius ``radius`` centred at ``centers / center_den``."""

    j: int
    count: int
    radius: Fraction
    proj_sets: tuple[ValueSet, ...]
    centers: np.ndarray | None
    center_den: int = 1
    parent: "CantorStage | None" = field(default=None, repr=False)

    @property
    def materialized(self) -> bool:
        return self.centers is not None

    def center_points(self) -> list[Point2]:
        if self.centers is None:
            return []
        d = self.center_den
        return [Point2(Fraction(int(x), d), Fraction(int(y), d)) for x, y in self.centers]

    def to_json(self, with_centers: bool = True) -> dict:
        return {
            "j": self.j,
            "N_j": str(self.count),
            "Delta_j": format_rational(self.radius),
            "centers": (
                [p.to_json() for p in self.center_points()]
                if with_centers and self.materialized
                else None
            ),
            "proj_set_sizes": [len(v) for v in self.proj_sets],
        }

    def proj_sets_csv(self) -> str:
        lines = ["k,value"]
        for k, vs in enumerate(self.proj_sets):
            lines.extend(f"{k},{format_rational(v)}" for v in vs.to_fractions())
        return "\n".join(lines) + "\n"


def zero_stage(K: int) -> CantorStage:
    """The unit disc B(0, 1): one center at the origin, projections {0}."""
    return CantorStage(0, 1, Fraction(1), tuple(ValueSet.zero() for _ in range(K)),
                       np.zeros((1, 2), dtype=np.int64), 1)


def iterate(stage: CantorStage, schedule: ConstructionSchedule, budget: Budget = Budget()) -> CantorStage:
    """Replace every disc of ``stage`` by the scaled copy of the next generator."""
    if stage.j >= schedule.depth:
        raise IndexOutOfRange(f"schedule has no level {stage.j + 1}")
    level = schedule.levels[stage.j]
    A = level.gen
    if A is None:
        raise ValueError("planned schedules carry no generator sets")
    Dj = stage.radius
    proj = tuple(
        ps.sumset(gv, Dj, budget.values) for ps, gv in zip(stage.proj_sets, A.proj_values)
    )
    count = stage.count * A.n
    centers, den = None, 1
    if stage.centers is not None and count <= budget.points:
        den = math.lcm(stage.center_den, Dj.denominator * A.den)
        fy = den // stage.center_den
        fx = Dj.numerator * (den // (Dj.denominator * A.den))
        y = widen(stage.centers, fy) * fy
        x = widen(A.coords, abs(fx)) * fx
        if y.dtype != x.dtype:
            y, x = y.astype(object), x.astype(object)
        centers = np.repeat(y, A.n, axis=0) + np.tile(x, (stage.count, 1))
        g = math.gcd(array_gcd(centers), den)
        if g > 1:
            centers, den = centers // g, den // g
        centers = narrow(centers)
    return CantorStage(stage.j + 1, count, Dj * level.delta, proj, centers, den, stage)


def initial_stage(schedule: ConstructionSchedule, budget: Budget = Budget()) -> CantorStage:
    return iterate(zero_stage(schedule.K), schedule, budget)


def build_stages(schedule: ConstructionSchedule, depth: int, budget: Budget = Budget()) -> list[CantorStage]:
    """Stages 0..depth."""
    stages = [zero_stage(schedule.K)]
    for _ in range(depth):
        stages.append(iterate(stages[-1], schedule, budget))
    return stages


def natural_measure(stage: CantorStage, disc_index: int) -> Fraction:
    if not 0 <= disc_index < stage.count:
        raise IndexOutOfRange(f"disc {disc_index} not in 0..{stage.count - 1}")
    return Fraction(1, stage.count)


def children(stage: CantorStage, disc_index: int, n_next: int) -> range:
    """Indices of the level-(j+1) discs inside disc ``disc_index`` of ``stage``."""
    if not 0 <= disc_index < stage.count:
        raise IndexOutOfRange(f"disc {disc_index} not in 0..{stage.count - 1}")
    return range(disc_index * n_next, (disc_index + 1) * n_next)


def check_disjoint(stage: CantorStage) -> bool:
    """Exact: every pair of centers is more than 2 * radius apart."""
    if stage.centers is None:
        raise ValueError("stage centers are not materialized")
    if stage.count < 2:
        return True
    best, _ = closest_pair(stage.centers, euclid_sq, euclid_cell_width)
    return Fraction(best, stage.center_den ** 2) > 4 * stage.radius ** 2


def check_nested(stage: CantorStage) -> bool:
    """Exact: each disc lies inside its parent, |x_child - x_parent| <= Delta_parent - Delta_child."""
    parent = stage.parent
    if parent is None or stage.centers is None or parent.centers is None:
        raise ValueError("need materialized stage and parent")
    n = stage.count // parent.count
    den = math.lcm(stage.center_den, parent.center_den)
    c = widen(stage.centers, den) * (den // stage.center_den)
    p = widen(parent.centers, den) * (den // parent.center_den)
    if c.dtype != p.dtype:
        c, p = c.astype(object), p.astype(object)
    diff = c - np.repeat(p, n, axis=0)
    worst = Fraction(int(euclid_sq(diff).max()), den * den)
    return worst <= (parent.radius - stage.radius) ** 2


def dimension_estimates(schedule: ConstructionSchedule, prec: int = 40) -> list[tuple[int, Decimal]]:
    """``log N_j / log(1/Delta_j)`` per level, from exact N_j and Delta_j."""
    out = []
    with localcontext() as ctx:
        ctx.prec = prec
        for j in range(1, schedule.depth + 1):
            Nj = Decimal(schedule.N(j))
            D = schedule.Delta(j)
            inv = Decimal(D.denominator).ln() - Decimal(D.numerator).ln()
            out.append((j, Nj.ln() / inv))
    return out
