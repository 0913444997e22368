"""Interval covers of the distance set of a construction stage.

A distance between points of two level-j discs is within ``c0 * Delta_j`` of
the X-distance of their centers, and that center distance is ``|v|`` for
some projection difference ``v``. The union of the intervals
``[|v| - c0 Delta_j, |v| + c0 Delta_j]`` (clipped at 0) therefore covers the
whole distance set of the stage.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cantor import THEOREM1, CantorStage, ConstructionSchedule, build_stages
from .errors import NotMaterialized
from .exact import INT64_SAFE, Budget, format_rational, max_abs, narrow, power_ceil, widen
from .polynorm import PolygonalNorm, eval_norm, x_radius_bound


def merge_intervals(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Union of closed integer intervals; touching intervals merge."""
    if len(lo) == 0:
        return lo, hi
    order = np.argsort(lo, kind="stable")
    lo, hi = lo[order], hi[order]
    run = np.maximum.accumulate(hi)
    starts = np.concatenate(([0], np.flatnonzero(lo[1:] > run[:-1]) + 1))
    ends = np.concatenate((starts[1:] - 1, [len(lo) - 1]))
    return lo[starts], run[ends]


@dataclass(frozen=True, eq=False)
class IntervalCover:
    """Disjoint sorted closed intervals ``[lo/den, hi/den]`` on the half-line."""

    lo: np.ndarray
    hi: np.ndarray
    den: int
    source_level: int
    raw_count: int

    @classmethod
    def from_intervals(cls, pairs: Sequence[tuple[Fraction, Fraction]], source_level: int = -1) -> "IntervalCover":
        pairs = [(max(Fraction(a), Fraction(0)), Fraction(b)) for a, b in pairs]
        den = math.lcm(*(x.denominator for p in pairs for x in p)) if pairs else 1
        lo = np.array([int(a * den) for a, _ in pairs], dtype=object)
        hi = np.array([int(b * den) for _, b in pairs], dtype=object)
        lo, hi = merge_intervals(lo, hi)
        return cls(narrow(lo), narrow(hi), den, source_level, len(pairs))

    @property
    def total_length(self) -> Fraction:
        return Fraction(int(np.sum(widen(self.hi - self.lo, len(self.lo)))), self.den)

    @property
    def intervals(self) -> list[tuple[Fraction, Fraction]]:
        return [(Fraction(int(a), self.den), Fraction(int(b), self.den)) for a, b in zip(self.lo, self.hi)]

    def __len__(self) -> int:
        return len(self.lo)

    def __contains__(self, x: Fraction) -> bool:
        x = Fraction(x)
        num, q = x.numerator, x.denominator
        # last interval with lo <= x * den
        i = int(np.searchsorted(self.lo, (num * self.den) // q, side="right")) - 1
        return i >= 0 and num * self.den <= int(self.hi[i]) * q

    def to_csv(self) -> str:
        lines = ["lo,hi"]
        lines.extend(f"{format_rational(a)},{format_rational(b)}" for a, b in self.intervals)
        return "\n".join(lines) + "\n"


def c0_bound(norm: PolygonalNorm) -> Fraction:
    """Certified upper bound for the X-diameter of the Euclidean unit disc."""
    return 2 * x_radius_bound(norm)


def cover_distance_set(stage: CantorStage, norm: PolygonalNorm) -> IntervalCover:
    h = c0_bound(norm) * stage.radius
    den = math.lcm(h.denominator, *(ps.den for ps in stage.proj_sets))
    hh = h.numerator * (den // h.denominator)
    centers = []
    for ps in stage.proj_sets:
        f = den // ps.den
        centers.append(np.abs(widen(ps.nums, f)) * f)
    raw = sum(len(c) for c in centers)
    mid = np.unique(np.concatenate(centers))
    if max_abs(mid) + hh >= INT64_SAFE:
        mid = mid.astype(object)
    lo = np.maximum(mid - hh, 0)
    hi = mid + hh
    lo, hi = merge_intervals(lo, hi)
    return IntervalCover(lo, hi, den, stage.j, raw)


@dataclass(frozen=True)
class DecayRow:
    j: int
    total_length: Fraction
    bound: Fraction
    intervals: int
    raw_intervals: int

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "total_length": format_rational(self.total_length),
            "bound": format_rational(self.bound),
            "intervals": self.intervals,
            "raw_intervals": self.raw_intervals,
        }


def decay_bound(schedule: ConstructionSchedule, norm: PolygonalNorm, j: int) -> Fraction:
    """``2 K c0 Delta_j prod_nu (C_bar * n_nu^alpha_nu)``, powers rounded up.

    In theorem-1 mode ``n^alpha * delta = c`` exactly, so this is
    ``2 K c0 (c C_bar)^j``.
    """
    if schedule.C_bar is None:
        raise ValueError("schedule has no certified constant")
    b = 2 * schedule.K * c0_bound(norm) * schedule.Delta(j)
    for lv in schedule.levels[:j]:
        b *= schedule.C_bar * power_ceil(Fraction(lv.n), lv.alpha)
    return b


def decay_report(
    schedule: ConstructionSchedule,
    norm: PolygonalNorm,
    depth: int,
    budget: Budget = Budget(),
    stages: Sequence[CantorStage] | None = None,
) -> list[DecayRow]:
    if stages is None:
        stages = build_stages(schedule, depth, budget)
    rows = []
    for j in range(1, depth + 1):
        cover = cover_distance_set(stages[j], norm)
        rows.append(DecayRow(j, cover.total_length, decay_bound(schedule, norm, j), len(cover), cover.raw_count))
    return rows


def decay_holds(rows: Sequence[DecayRow], schedule: ConstructionSchedule) -> bool:
    """Every total length is within its bound, and in theorem-1 mode the bound ratio is c*C_bar < 1/2."""
    if any(r.total_length > r.bound for r in rows):
        return False
    if schedule.mode == THEOREM1:
        ratio = schedule.c * schedule.C_bar
        if not ratio < Fraction(1, 2):
            return False
        return all(b.bound == a.bound * ratio for a, b in zip(rows, rows[1:]))
    return True


def _pair_from_index(t: int, n: int) -> tuple[int, int]:
    """The t-th pair (i, j), i < j, in row-major order."""

    def before(i: int) -> int:
        return i * (2 * n - i - 1) // 2

    lo, hi = 0, n - 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if before(mid) <= t:
            lo = mid
        else:
            hi = mid - 1
    return lo, t - before(lo) + lo + 1


def sample_distances(stage: CantorStage, norm: PolygonalNorm, max_pairs: int, seed: int) -> list[Fraction]:
    """Exact X-distances of up to ``max_pairs`` seeded-random center pairs."""
    if stage.centers is None:
        raise NotMaterialized(f"stage {stage.j} centers were not materialized")
    pts = stage.center_points()
    n = len(pts)
    total = n * (n - 1) // 2
    if max_pairs >= total:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    else:
        rng = np.random.default_rng(seed)
        picks = np.sort(rng.choice(total, size=max_pairs, replace=False))
        pairs = [_pair_from_index(int(t), n) for t in picks]
    return [eval_norm(norm, pts[i] - pts[j]) for i, j in pairs]
