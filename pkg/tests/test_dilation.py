"""Simultaneous dilation in one and two dimensions.

Random 1D families are replayed through an exact-rational reference sweep
(tests/oracles.py) so the float implementation is checked against a second
arithmetic route, not against itself.
"""

import math
import random
from fractions import Fraction

import pytest

from densitometer.dilation import (
    Rectangle,
    WitnessResult,
    contains,
    dilate_1d,
    dilate_2d,
    ratio_bound_witness,
)
from densitometer.errors import InvalidGamma, OverlappingCubes, OverlappingInputs, PointNotOutside
from densitometer.interval1d import Interval, Location

from oracles import dilate_1d_exact, measure_exact, raster_area_bracket


# -- validation ----------------------------------------------------------------

def test_gamma_must_exceed_one():
    with pytest.raises(InvalidGamma):
        dilate_1d([Interval(0.0, 1.0)], 1.0)
    with pytest.raises(InvalidGamma):
        dilate_1d([Interval(0.0, 1.0)], 0.5)
    assert dilate_1d([Interval(0.0, 1.0)], 1.0, allow_gamma_one=True).gamma == 1.0


def test_inputs_must_be_disjoint():
    with pytest.raises(OverlappingInputs):
        dilate_1d([Interval(0.0, 1.0), Interval(0.5, 2.0)], 2.0)
    with pytest.raises(OverlappingCubes):
        dilate_2d(
            [Rectangle.from_bounds(0, 1, 0, 1), Rectangle.from_bounds(0.5, 1.5, 0.5, 1.5)],
            2.0,
        )


def test_touching_cubes_are_disjoint():
    result = dilate_2d(
        [Rectangle.from_bounds(0, 1, 0, 1), Rectangle.from_bounds(1, 2, 0, 1)],
        2.0,
    )
    assert result.measure == pytest.approx(50.0, rel=1e-12)


# -- hand instances --------------------------------------------------------------

def test_single_interval():
    result = dilate_1d([Interval(0.0, 1.0)], 2.0)
    assert result.union.pairs() == ((-2.0, 3.0),)
    assert result.union.measure == 5.0
    assert result.identity_rhs == 5.0


def test_two_intervals_factor_one():
    result = dilate_1d([Interval(0.0, 1.0), Interval(2.0, 3.0)], 1.0, allow_gamma_one=True)
    assert result.union.pairs() == ((-2.0, 4.0),)
    assert result.union.measure == 6.0


def test_single_cube():
    result = dilate_2d([Rectangle.from_bounds(0, 1, 0, 1)], 1.0, allow_gamma_one=True)
    assert [r.bounds for r in result.rects] == [(-1.0, 2.0, -1.0, 2.0)]
    assert result.measure == 9.0


def test_stacked_cubes_shared_projection():
    # same x-projection: one column, y-sections dilated together
    result = dilate_2d(
        [Rectangle.from_bounds(0, 1, 0, 1), Rectangle.from_bounds(0, 1, 2, 3)],
        1.0,
        allow_gamma_one=True,
    )
    assert [r.bounds for r in result.rects] == [(-1.0, 2.0, -2.0, 4.0)]
    assert result.measure == 18.0


def test_crowding_pushes_arms_outward():
    # the middle interval's arms must skip both neighbours entirely
    result = dilate_1d([Interval(0, 1), Interval(1.5, 2.5), Interval(3, 4)], 2.0)
    assert result.union.measure == pytest.approx(15.0, rel=1e-12)
    piece = result.pieces[1]
    assert piece.hull.lo < 0.0 or piece.hull.hi > 4.0


# -- structure -------------------------------------------------------------------

def test_pieces_cover_sources():
    intervals = [Interval(0, 1), Interval(4, 4.5), Interval(10, 12)]
    result = dilate_1d(intervals, 3.0)
    for piece in result.pieces:
        assert piece.hull.lo <= piece.source.lo < piece.source.hi <= piece.hull.hi
        assert contains(result, (piece.source.lo + piece.source.hi) / 2) is Location.INSIDE


def test_contains_three_verdicts():
    result = dilate_1d([Interval(0.0, 1.0)], 2.0)
    assert contains(result, 0.5) is Location.INSIDE
    assert contains(result, -2.0) is Location.BOUNDARY
    assert contains(result, 4.0) is Location.OUTSIDE
    union2 = dilate_2d([Rectangle.from_bounds(0, 1, 0, 1)], 2.0)
    assert contains(union2, (0.5, 0.5)) is Location.INSIDE
    assert contains(union2, (-2.0, 0.5)) is Location.BOUNDARY
    assert contains(union2, (9.0, 9.0)) is Location.OUTSIDE


def _random_rational_family(rng, n_max=12):
    pairs = []
    cursor = Fraction(rng.randrange(-2048, 0), 2048)
    for _ in range(rng.randrange(1, n_max)):
        cursor += Fraction(rng.randrange(1, 2048), 2048)
        lo = cursor
        cursor += Fraction(rng.randrange(1, 2048), 2048)
        pairs.append((lo, cursor))
    return pairs


@pytest.mark.parametrize("gamma", [Fraction(3, 2), Fraction(2), Fraction(8)])
def test_1d_union_matches_exact_oracle(gamma):
    rng = random.Random(int(gamma * 100))
    for _ in range(40):
        pairs = _random_rational_family(rng)
        result = dilate_1d([Interval(float(a), float(b)) for a, b in pairs], float(gamma))
        oracle = dilate_1d_exact(pairs, gamma)
        got = result.union.pairs()
        assert len(got) == len(oracle)
        for (glo, ghi), (olo, ohi) in zip(got, oracle):
            assert glo == pytest.approx(float(olo), abs=1e-12)
            assert ghi == pytest.approx(float(ohi), abs=1e-12)
        want = (2 * gamma + 1) * measure_exact(pairs)
        assert result.union.measure == pytest.approx(float(want), rel=1e-12)


def _random_cube_family(rng, count, side_hi=0.5):
    cubes = []
    while len(cubes) < count:
        w = rng.uniform(0.02, side_hi)
        x = rng.uniform(0.0, 4.0)
        y = rng.uniform(0.0, 4.0)
        cand = Rectangle.from_bounds(x, x + w, y, y + w)
        if all(cand.overlap_area(c) == 0.0 for c in cubes):
            cubes.append(cand)
    return cubes


def test_2d_identity_and_raster():
    rng = random.Random(5)
    for trial in range(10):
        cubes = _random_cube_family(rng, rng.randrange(1, 8))
        gamma = (2.0, 4.0, 8.0)[trial % 3]
        result = dilate_2d(cubes, gamma)
        want = (2.0 * gamma + 1.0) ** 2 * math.fsum(c.area for c in cubes)
        assert result.measure == pytest.approx(want, rel=1e-9)
        lo, hi = raster_area_bracket([r.bounds for r in result.rects], cells=512)
        assert lo - 1e-9 <= result.measure <= hi + 1e-9


def test_2d_columns_disjoint_and_sorted():
    rng = random.Random(17)
    cubes = _random_cube_family(rng, 10)
    result = dilate_2d(cubes, 2.0)
    xs = [x_int for x_int, _ in result.columns]
    for a, b in zip(xs, xs[1:]):
        assert a.hi <= b.lo


# -- outside-point overlap bound ---------------------------------------------------

def test_witness_bound_holds_outside():
    rng = random.Random(23)
    cubes = _random_cube_family(rng, 6, side_hi=0.3)
    gamma = 8.0
    dil = dilate_2d(cubes, gamma)
    checked = 0
    while checked < 200:
        px = rng.uniform(-1.0, 5.0)
        py = rng.uniform(-1.0, 5.0)
        if dil.locate((px, py)) is not Location.OUTSIDE:
            continue
        w = rng.uniform(0.05, 1.0)
        h = rng.uniform(0.05, 1.0)
        rect = Rectangle.from_bounds(px - w * 0.3, px + w * 0.7, py - h * 0.4, py + h * 0.6)
        witness = ratio_bound_witness(cubes, gamma, (px, py), rect, dilation=dil)
        assert isinstance(witness, WitnessResult)
        assert witness.passed
        assert witness.lhs < witness.bound == pytest.approx(2.0 / gamma)
        checked += 1


def test_witness_rejects_inside_point():
    cubes = [Rectangle.from_bounds(0, 1, 0, 1)]
    rect = Rectangle.from_bounds(-5, 5, -5, 5)
    with pytest.raises(PointNotOutside):
        ratio_bound_witness(cubes, 4.0, (0.5, 0.5), rect)
