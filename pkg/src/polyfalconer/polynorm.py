"""Polygonal norms: ``||x|| = max_k |x . b_k|`` for a symmetric 2K-gon unit ball."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateBall, DuplicateSlope, IndexOutOfRange
from .exact import format_rational, lcm_many, parse_rational, sqrt_ceil


@dataclass(frozen=True, slots=True)
class Point2:
    x1: Fraction
    x2: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x1", Fraction(self.x1))
        object.__setattr__(self, "x2", Fraction(self.x2))

    def __add__(self, other: "Point2") -> "Point2":
        return Point2(self.x1 + other.x1, self.x2 + other.x2)

    def __sub__(self, other: "Point2") -> "Point2":
        return Point2(self.x1 - other.x1, self.x2 - other.x2)

    def __neg__(self) -> "Point2":
        return Point2(-self.x1, -self.x2)

    def __mul__(self, lam) -> "Point2":
        lam = Fraction(lam)
        return Point2(lam * self.x1, lam * self.x2)

    __rmul__ = __mul__

    def dot(self, other: "Point2") -> Fraction:
        return self.x1 * other.x1 + self.x2 * other.x2

    def norm_sq(self) -> Fraction:
        return self.dot(self)

    def is_zero(self) -> bool:
        return self.x1 == 0 and self.x2 == 0

    def to_json(self) -> list[str]:
        return [format_rational(self.x1), format_rational(self.x2)]

    @classmethod
    def from_json(cls, pair: Sequence[str]) -> "Point2":
        return cls(parse_rational(pair[0]), parse_rational(pair[1]))


def cross(u: Point2, v: Point2) -> Fraction:
    return u.x1 * v.x2 - u.x2 * v.x1


@dataclass(frozen=True, slots=True)
class Slope:
    """Projective slope p/q; q == 0 is the vertical slope (infinity)."""

    p: int
    q: int

    def __post_init__(self):
        p, q = int(self.p), int(self.q)
        if p == 0 and q == 0:
            raise ValueError("slope (0, 0) is undefined")
        g = math.gcd(p, q)
        p, q = p // g, q // g
        if q < 0 or (q == 0 and p < 0):
            p, q = -p, -q
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @classmethod
    def of(cls, value) -> "Slope":
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @classmethod
    def infinity(cls) -> "Slope":
        return cls(1, 0)

    @classmethod
    def parse(cls, text: str) -> "Slope":
        text = text.strip()
        if text.lower() in ("inf", "infinity", "oo"):
            return cls.infinity()
        return cls.of(parse_rational(text))

    @classmethod
    def of_direction(cls, v: Point2) -> "Slope":
        # slope of the line spanned by v = (v1, v2) is v2/v1
        if v.is_zero():
            raise ValueError("zero direction has no slope")
        if v.x1 == 0:
            return cls.infinity()
        return cls.of(v.x2 / v.x1)

    @property
    def is_infinite(self) -> bool:
        return self.q == 0

    @property
    def value(self) -> Fraction:
        if self.is_infinite:
            raise ValueError("infinite slope has no rational value")
        return Fraction(self.p, self.q)

    def direction(self) -> Point2:
        return Point2(self.q, self.p)

    def __str__(self) -> str:
        return "inf" if self.is_infinite else format_rational(Fraction(self.p, self.q))


def cross_ratio(s1: Slope, s2: Slope, s3: Slope, s4: Slope) -> Fraction | None:
    """Cross-ratio of four slopes as points of the projective line (None if undefined)."""

    def det(a: Slope, b: Slope) -> int:
        return a.p * b.q - b.p * a.q

    num = det(s1, s3) * det(s2, s4)
    den = det(s1, s4) * det(s2, s3)
    if den == 0:
        return None
    return Fraction(num, den)


def _canonical_direction(b: Point2) -> Point2:
    """Side direction perpendicular to b, first nonzero entry positive, max-abs 1."""
    a = Point2(b.x2, -b.x1)
    if a.x1 < 0 or (a.x1 == 0 and a.x2 < 0):
        a = -a
    return a * (1 / max(abs(a.x1), abs(a.x2)))


@dataclass(frozen=True)
class PolygonalNorm:
    """Norm whose unit ball is the intersection of the slabs ``|x . b_k| <= 1``.

    ``a[k]`` is the side direction paired with ``b[k]`` (``a_k . b_k == 0``),
    stored with ``max(|a_k1|, |a_k2|) == 1``. Rescaling a functional rescales
    the norm: the b_k are taken literally.
    """

    b: tuple[Point2, ...]
    a: tuple[Point2, ...]

    def __post_init__(self):
        b, a = tuple(self.b), tuple(self.a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "a", a)
        if len(b) < 2 or len(a) != len(b):
            raise DegenerateBall("need K >= 2 functionals with matching directions")
        for bk, ak in zip(b, a):
            if bk.is_zero():
                raise DegenerateBall("zero functional")
            if ak.is_zero() or max(abs(ak.x1), abs(ak.x2)) != 1:
                raise ValueError(f"direction {ak} is not in canonical scale")
            if ak.dot(bk) != 0:
                raise ValueError(f"direction {ak} is not orthogonal to {bk}")
        for bi, bj in combinations(b, 2):
            if cross(bi, bj) == 0:
                raise DuplicateSlope(f"functionals {bi} and {bj} are parallel")
        # no two parallel and K >= 2 means the b_k span the plane; check anyway
        if all(cross(b[0], bk) == 0 for bk in b[1:]):
            raise DegenerateBall("unit ball is unbounded")

    @classmethod
    def from_functionals(cls, b: Iterable[Point2]) -> "PolygonalNorm":
        b = tuple(b)
        return cls(b, tuple(_canonical_direction(bk) for bk in b))

    @property
    def K(self) -> int:
        return len(self.b)

    def slopes(self) -> list[Slope]:
        return [Slope.of_direction(ak) for ak in self.a]

    def scaled_functionals(self) -> tuple[np.ndarray, int]:
        """(K, 2) integer matrix B and denominator D with b_k = B[k] / D."""
        den = lcm_many(c.denominator for bk in self.b for c in (bk.x1, bk.x2))
        rows = [[int(bk.x1 * den), int(bk.x2 * den)] for bk in self.b]
        return np.array(rows, dtype=object), den

    def vertices(self) -> list[Point2]:
        """Vertices of the unit ball, found by intersecting pairs of slab boundaries."""
        verts = set()
        for bi, bj in combinations(self.b, 2):
            det = cross(bi, bj)
            for si, sj in product((1, -1), repeat=2):
                # solve x.bi = si, x.bj = sj
                x = Point2((si * bj.x2 - sj * bi.x2) / det, (sj * bi.x1 - si * bj.x1) / det)
                if all(abs(x.dot(bk)) <= 1 for bk in self.b):
                    verts.add(x)
        return sorted(verts, key=lambda v: math.atan2(v.x2, v.x1))

    def box_radius(self) -> tuple[Fraction, Fraction]:
        """Exact max of |x_1| and |x_2| over the unit ball."""
        verts = self.vertices()
        return max(abs(v.x1) for v in verts), max(abs(v.x2) for v in verts)

    def to_json(self) -> dict:
        return {
            "K": self.K,
            "b": [bk.to_json() for bk in self.b],
            "a": [ak.to_json() for ak in self.a],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PolygonalNorm":
        b = tuple(Point2.from_json(p) for p in doc["b"])
        a = tuple(Point2.from_json(p) for p in doc["a"])
        if len(b) != doc["K"]:
            raise ValueError("K does not match the number of functionals")
        return cls(b, a)


def eval_norm(norm: PolygonalNorm, x: Point2) -> Fraction:
    return max(abs(x.dot(bk)) for bk in norm.b)


def from_slopes(slopes: Sequence[Slope]) -> PolygonalNorm:
    """Norm with one pair of parallel sides per slope: b = (-p/q, 1), or (1, 0) for infinity."""
    slopes = [s if isinstance(s, Slope) else Slope.parse(str(s)) for s in slopes]
    if len(set(slopes)) != len(slopes):
        raise DuplicateSlope(f"slopes must be distinct: {[str(s) for s in slopes]}")
    b = []
    for s in slopes:
        if s.is_infinite:
            b.append(Point2(1, 0))
        else:
            b.append(Point2(-s.value, 1))
    try:
        return PolygonalNorm.from_functionals(b)
    except DuplicateSlope:
        raise
    except ValueError as exc:
        raise DegenerateBall(str(exc)) from exc


def normalize_slopes(slopes: Sequence[Slope], i1: int, i2: int, i3: int) -> list[Slope]:
    """Change coordinates so that slopes[i1] -> 0, slopes[i2] -> 1, slopes[i3] -> inf.

    The new axes are parallel to sides i1 and i3; the second axis is rescaled
    (and reflected if needed) so that side i2 gets slope 1.
    """
    slopes = list(slopes)
    for i in (i1, i2, i3):
        if not 0 <= i < len(slopes):
            raise IndexOutOfRange(f"index {i} out of range for {len(slopes)} slopes")
    if len({i1, i2, i3}) != 3:
        raise ValueError("normalization indices must be distinct")
    if len(set(slopes)) != len(slopes):
        raise DuplicateSlope("slopes must be distinct")
    v1, v2, v3 = (slopes[i].direction() for i in (i1, i2, i3))
    # v2 = alpha v1 + beta v3
    det = cross(v1, v3)
    alpha = cross(v2, v3) / det
    beta = cross(v1, v2) / det
    e1, e2 = v1 * alpha, v3 * beta
    det_e = cross(e1, e2)
    out = []
    for s in slopes:
        w = s.direction()
        # coordinates of w in the basis (e1, e2)
        x = cross(w, e2) / det_e
        y = cross(e1, w) / det_e
        out.append(Slope.of_direction(Point2(x, y)))
    return out


def x_radius_bound(norm: PolygonalNorm) -> Fraction:
    """Certified rational upper bound on max_k |b_k| (relative slack <= 2**-32).

    The X-diameter of the Euclidean unit disc is then at most ``2 * x_radius_bound``.
    """
    return sqrt_ceil(max(bk.norm_sq() for bk in norm.b), 32)


def default_slopes(K: int) -> list[Slope]:
    """0, inf, 1, -1, 2, -2, 1/2, -1/2, 3, -3, 1/3, -1/3, ..."""
    out = [Slope.of(0), Slope.infinity()]
    m = 1
    while len(out) < K:
        for v in (Fraction(m), Fraction(-m), Fraction(1, m), Fraction(-1, m)):
            s = Slope.of(v)
            if s not in out:
                out.append(s)
        m += 1
    return out[:K]


def parse_slopes(text: str) -> list[Slope]:
    return [Slope.parse(t) for t in text.split(",") if t.strip()]
