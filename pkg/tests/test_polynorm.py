from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from polyfalconer.errors import DegenerateBall, DuplicateSlope, IndexOutOfRange
from polyfalconer.polynorm import (
    Point2, PolygonalNorm, Slope, cross_ratio, default_slopes, eval_norm, from_slopes,
    normalize_slopes, parse_slopes, x_radius_bound,
)

rats = st.fractions(min_value=-50, max_value=50, max_denominator=60)
points = st.builds(Point2, rats, rats)
slope_values = st.one_of(st.just(None), st.fractions(min_value=-20, max_value=20, max_denominator=20))


def _slope(v):
    return Slope.infinity() if v is None else Slope.of(v)


slope_lists = st.lists(slope_values, min_size=2, max_size=7, unique=True).map(lambda vs: [_slope(v) for v in vs])


def test_square_norm():
    sq = PolygonalNorm.from_functionals([Point2(1, 0), Point2(0, 1)])
    assert eval_norm(sq, Point2(3, -4)) == 4
    assert eval_norm(sq, Point2(0, 0)) == 0


def test_gamma_two_norm():
    norm = from_slopes(parse_slopes("2,0,1,inf"))
    assert norm.b == (Point2(-2, 1), Point2(0, 1), Point2(-1, 1), Point2(1, 0))
    assert eval_norm(norm, Point2(1, 1)) == 1


def test_from_slopes_three():
    norm = from_slopes(parse_slopes("0,1,inf"))
    assert norm.b == (Point2(0, 1), Point2(-1, 1), Point2(1, 0))
    assert norm.a == (Point2(1, 0), Point2(1, 1), Point2(0, 1))


def test_from_slopes_square():
    norm = from_slopes(parse_slopes("0,inf"))
    assert norm.b == (Point2(0, 1), Point2(1, 0))


def test_duplicate_slope():
    with pytest.raises(DuplicateSlope):
        from_slopes(parse_slopes("0,0"))
    with pytest.raises(DuplicateSlope):
        from_slopes(parse_slopes("1/2,2/4"))


def test_degenerate_ball():
    with pytest.raises(DegenerateBall):
        from_slopes(parse_slopes("1"))


def test_slope_parse():
    assert Slope.parse("inf").is_infinite
    assert Slope.parse("-6/4") == Slope.of(Fraction(-3, 2))
    assert str(Slope.parse("13/8")) == "13/8"
    with pytest.raises(ValueError):
        Slope.parse("0.5")


def test_normalize_fixed_points():
    sl = parse_slopes("0,1,inf,5/3")
    assert normalize_slopes(sl, 0, 1, 2) == sl


def test_normalize_three_generic():
    out = normalize_slopes(parse_slopes("1,2,3"), 0, 1, 2)
    assert out == parse_slopes("0,1,inf")


def test_normalize_fourth_slope_oracle():
    # hand map for slopes (1, 2, 3, 0): v1=(1,1), v2=(1,2), v3=(1,3), v2 = v1/2 + v3/2
    # basis e1=(1/2,1/2), e2=(1/2,3/2); w=(1,0) = 3 e1 - e2 -> slope -1/3
    out = normalize_slopes(parse_slopes("1,2,3,0"), 0, 1, 2)
    assert out[3] == Slope.of(Fraction(-1, 3))


def test_normalize_bad_index():
    with pytest.raises(IndexOutOfRange):
        normalize_slopes(parse_slopes("0,1,inf"), 0, 1, 3)


def test_x_radius_bound_examples():
    assert x_radius_bound(from_slopes(parse_slopes("0,inf"))) == 1
    for text, sq in (("0,1,inf", 2), ("2,0,1,inf", 5)):
        r = x_radius_bound(from_slopes(parse_slopes(text)))
        assert sq <= r * r <= sq * (1 + Fraction(1, 1 << 32)) ** 2


def test_default_slopes_distinct():
    for K in range(2, 12):
        sl = default_slopes(K)
        assert len(set(sl)) == K
        from_slopes(sl)


def test_json_roundtrip():
    norm = from_slopes(parse_slopes("13/8,0,1,inf"))
    assert PolygonalNorm.from_json(norm.to_json()) == norm


def test_vertices_on_boundary():
    # literal functionals: the slab of slope 1 is redundant here
    norm = from_slopes(parse_slopes("13/8,0,1,inf"))
    verts = norm.vertices()
    assert len(verts) == 6
    assert len(from_slopes(parse_slopes("0,1,inf")).vertices()) == 6
    assert all(eval_norm(norm, v) == 1 for v in verts)


@given(slope_lists, points, rats)
def test_homogeneity(sl, x, lam):
    norm = from_slopes(sl)
    assert eval_norm(norm, x * lam) == abs(lam) * eval_norm(norm, x)


@given(slope_lists, points)
def test_symmetry(sl, x):
    norm = from_slopes(sl)
    assert eval_norm(norm, -x) == eval_norm(norm, x)


@given(slope_lists, points, points)
def test_triangle(sl, x, y):
    norm = from_slopes(sl)
    assert eval_norm(norm, x + y) <= eval_norm(norm, x) + eval_norm(norm, y)


@given(slope_lists)
def test_orthogonality_and_slope_roundtrip(sl):
    norm = from_slopes(sl)
    assert all(a.dot(b) == 0 for a, b in zip(norm.a, norm.b))
    assert norm.slopes() == sl


@given(slope_lists, points)
def test_radius_bound_dominates(sl, x):
    norm = from_slopes(sl)
    r = x_radius_bound(norm)
    assert eval_norm(norm, x) ** 2 <= r * r * x.norm_sq()


@given(st.lists(slope_values, min_size=4, max_size=6, unique=True), st.data())
def test_normalize_preserves_cross_ratios(vs, data):
    sl = [_slope(v) for v in vs]
    i1, i2, i3 = data.draw(st.permutations(range(len(sl))))[:3]
    out = normalize_slopes(sl, i1, i2, i3)
    assert (out[i1], out[i2], out[i3]) == (Slope.of(0), Slope.of(1), Slope.infinity())
    for idx in ((0, 1, 2, 3), (len(sl) - 1, 0, 2, 1)):
        assert cross_ratio(*(sl[i] for i in idx)) == cross_ratio(*(out[i] for i in idx))
