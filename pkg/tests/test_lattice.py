from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from dyadlab.lattice import ROOT, DyadicInterval, Lattice, LatticeError, children, haar_value, parent

I = DyadicInterval


def test_children_of_root_and_right_half():
    assert children(ROOT, 3) == (I(1, 0), I(1, 1))
    assert children(I(1, 1), 3) == (I(2, 2), I(2, 3))
    assert I(2, 2).start == Fraction(1, 2) and I(2, 3).end == 1


def test_children_of_cell_fails():
    with pytest.raises(LatticeError):
        children(I(3, 5), 3)


def test_parent():
    assert parent(I(2, 1)) == I(1, 0)
    assert parent(I(1, 0)) == ROOT
    with pytest.raises(LatticeError):
        parent(ROOT)


def test_haar_value_examples():
    assert haar_value(ROOT, 0.25) == 1.0
    assert haar_value(I(1, 0), I(2, 1)) == pytest.approx(-2 ** 0.5, abs=1e-15)
    assert haar_value(I(1, 0), 0.75) == 0.0


def test_haar_value_rejects_non_descendant():
    with pytest.raises(LatticeError):
        haar_value(I(1, 0), I(1, 0))
    with pytest.raises(LatticeError):
        haar_value(I(1, 0), I(2, 3))


def test_enumerate():
    lat = Lattice(2)
    assert lat.enumerate(range(0, 2)) == [ROOT, I(1, 0), I(1, 1)]
    assert lat.enumerate(range(2, 3)) == [I(2, p) for p in range(4)]
    assert lat.enumerate(range(0)) == []


def test_invalid_intervals():
    for bad in [(-1, 0), (2, 4), (0, 1)]:
        with pytest.raises(LatticeError):
            I(*bad)
    with pytest.raises(LatticeError):
        Lattice(0)


def test_parse_round_trip():
    assert I.parse("3:5") == I(3, 5)
    assert str(I(3, 5)) == "3:5"
    with pytest.raises(LatticeError):
        I.parse("nonsense")


@given(st.integers(0, 10).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, 2 ** k - 1))))
def test_heap_index_round_trip(kp):
    iv = I(*kp)
    assert I.from_heap_index(iv.heap_index) == iv


@given(st.integers(1, 10).flatmap(lambda k: st.tuples(st.just(k), st.integers(0, 2 ** k - 1))))
def test_parent_child_inverse(kp):
    iv = I(*kp)
    p = parent(iv)
    assert iv in children(p, 10)
    assert p.strictly_contains(iv) and not iv.contains(p)
    left, right = children(p, 10)
    assert left.disjoint(right) and left.end == right.start


@given(st.integers(0, 6), st.floats(0, 1, exclude_max=True))
def test_haar_value_point_matches_sign_of_half(k, t):
    iv = I(k, int(t * 2 ** k))
    v = haar_value(iv, t)
    mid = (iv.start + iv.end) / 2
    assert v == (2 ** (k / 2) if t < mid else -(2 ** (k / 2)))


def test_ancestors():
    lat = Lattice(4)
    assert list(lat.ancestors(I(3, 5))) == [I(2, 2), I(1, 1), ROOT]
