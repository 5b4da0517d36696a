import random

import pytest

from densitometer.interval1d import (
    DisjointIntervalSet,
    Interval,
    Location,
    atoms,
    measure,
    normalize,
)


def test_interval_rejects_empty():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)


def test_interval_locate():
    iv = Interval(0.0, 1.0)
    assert iv.locate(0.5) is Location.INSIDE
    assert iv.locate(0.0) is Location.BOUNDARY
    assert iv.locate(1.0) is Location.BOUNDARY
    assert iv.locate(-0.1) is Location.OUTSIDE


def test_disjoint_set_rejects_overlap():
    with pytest.raises(ValueError):
        DisjointIntervalSet([Interval(0.0, 1.0), Interval(0.5, 2.0)])


def test_disjoint_set_allows_touching():
    s = DisjointIntervalSet([Interval(0.0, 1.0), Interval(1.0, 2.0)])
    assert len(s) == 2
    assert s.measure == 2.0
    assert s.locate(1.0) is Location.BOUNDARY


def test_normalize_merges_overlaps():
    s = normalize([Interval(0.0, 1.0), Interval(0.5, 2.0), Interval(3.0, 4.0)])
    assert s.pairs() == ((0.0, 2.0), (3.0, 4.0))
    assert s.measure == 3.0


def test_normalize_random_measure_matches_grid():
    """Union measure against endpoint-arithmetic reference on random input."""
    rng = random.Random(3)
    for _ in range(50):
        ivs = []
        for _ in range(rng.randrange(1, 12)):
            lo = rng.uniform(-5.0, 5.0)
            ivs.append(Interval(lo, lo + rng.uniform(0.01, 3.0)))
        got = normalize(ivs).measure
        # reference: merged sorted pairs
        merged = []
        for lo, hi in sorted(iv.as_pair() for iv in ivs):
            if merged and lo <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
            else:
                merged.append((lo, hi))
        want = sum(hi - lo for lo, hi in merged)
        assert got == pytest.approx(want, rel=1e-12)


def test_atoms_partition_and_labels():
    ivs = [Interval(0.0, 2.0), Interval(1.0, 3.0)]
    dec = atoms(ivs)
    assert dec.measure == pytest.approx(3.0)
    assert dec.label_at(0.5) == frozenset({0})
    assert dec.label_at(1.5) == frozenset({0, 1})
    assert dec.label_at(2.5) == frozenset({1})
    assert dec.label_at(3.5) == frozenset()
    assert dec.label_at(1.0) is None  # shared endpoint answers no side
    classes = dec.classes()
    assert classes[frozenset({0, 1})].pairs() == ((1.0, 2.0),)


def test_atoms_measure_is_input_union():
    rng = random.Random(9)
    for _ in range(30):
        ivs = []
        for _ in range(rng.randrange(1, 10)):
            lo = rng.uniform(0.0, 4.0)
            ivs.append(Interval(lo, lo + rng.uniform(0.05, 2.0)))
        assert atoms(ivs).measure == pytest.approx(measure(ivs), rel=1e-12)
