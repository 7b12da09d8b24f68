import math

import numpy as np
import pytest
from hypothesis import given

from dyadlab.lattice import ROOT, DyadicInterval
from dyadlab.stepfun import StepFunction, analyze, haar_function
from dyadlab.symbols import (
    SymbolSequence,
    bmo_norm,
    cm_norm,
    e_sequence,
    linf_norm,
    oscillations,
    schur,
    sweep,
)
from oracles import naive_cm, naive_e, naive_sweep
from strategies import step_functions, symbol_pairs, symbol_sequences

I = DyadicInterval
LEFT = I(1, 0)


def test_schur_examples():
    a = SymbolSequence.delta(I(2, 1), 4)
    assert schur(a, a) == a
    b, d = SymbolSequence.delta(LEFT, 4), SymbolSequence.delta(I(1, 1), 4)
    assert schur(b, d) == SymbolSequence.zeros(4)


def test_sweep_examples():
    s = sweep(SymbolSequence.delta(LEFT, 3))
    expected = np.zeros(7)
    expected[0] = 1.0
    np.testing.assert_allclose(s.values, expected, atol=1e-15)
    assert not np.any(sweep(SymbolSequence.delta(ROOT, 3)).values)


def test_e_examples():
    a = SymbolSequence.delta(LEFT, 3)
    strict = e_sequence(a)
    assert strict[ROOT] == 1.0 and strict[LEFT] == 0.0
    assert e_sequence(a, "inclusive")[LEFT] == 2.0
    z = SymbolSequence.zeros(3)
    assert not np.any(e_sequence(z).values) and not np.any(e_sequence(z, "inclusive").values)
    with pytest.raises(ValueError):
        e_sequence(a, "sloppy")


def test_norm_examples():
    assert cm_norm(SymbolSequence.delta(LEFT, 3)) == pytest.approx(math.sqrt(2))
    assert cm_norm(SymbolSequence.delta(ROOT, 3)) == 1.0
    assert cm_norm(SymbolSequence.zeros(3)) == 0.0
    assert linf_norm(SymbolSequence.delta(I(2, 2), 3)) == 1.0
    assert linf_norm(SymbolSequence.zeros(3)) == 0.0
    assert linf_norm(SymbolSequence(np.array([1.0, -3.0, 2.0]))) == 3.0


def test_bmo_examples(rng):
    c = StepFunction.constant(4.0, 5)
    assert bmo_norm(c, "l2") == 0.0 and bmo_norm(c, "l1") == 0.0
    assert bmo_norm(haar_function(ROOT, 5), "l2") == pytest.approx(1.0)
    f = StepFunction(rng.standard_normal(256))
    assert abs(bmo_norm(f, "l2") - cm_norm(analyze(f).coeffs)) <= 1e-12


def test_depth_mismatch():
    with pytest.raises(ValueError):
        schur(SymbolSequence.zeros(3), SymbolSequence.zeros(4))
    with pytest.raises(ValueError):
        SymbolSequence(np.zeros(6))


def test_pairs_round_trip():
    a = SymbolSequence.from_pairs([("0:0", 1.5), ("2:3", -2.0)], 3)
    assert a[I(2, 3)] == -2.0
    assert SymbolSequence.from_pairs(a.to_pairs(), 3) == a


def test_naive_oracles_depth_6(rng):
    a = SymbolSequence(rng.uniform(-1, 1, 63))
    np.testing.assert_allclose(sweep(a).values, naive_sweep(a.values), atol=1e-12)
    np.testing.assert_allclose(e_sequence(a).values, naive_e(a.values), atol=1e-12)
    np.testing.assert_allclose(e_sequence(a, "inclusive").values, naive_e(a.values, True), atol=1e-12)
    assert cm_norm(a) == pytest.approx(naive_cm(a.values), abs=1e-12)


@given(symbol_pairs())
def test_schur_commutes(pair):
    b, d = pair
    assert schur(b, d) == schur(d, b)


@given(symbol_sequences())
def test_sweep_and_e_linear(a):
    scale = max(1.0, linf_norm(a)) * 2 ** a.depth
    np.testing.assert_allclose(sweep(a.scaled(-2.0)).values, -2.0 * sweep(a).values, atol=1e-9 * scale)
    np.testing.assert_allclose(e_sequence(a.scaled(3.0)).values, 3.0 * e_sequence(a).values, atol=1e-9 * scale)


@given(symbol_sequences())
def test_cm_dominates_sup(a):
    # the J = I term alone gives a_I**2 / |I| >= a_I**2
    assert cm_norm(a) >= linf_norm(a) * (1 - 1e-12)


@given(step_functions())
def test_bmo_identity_property(f):
    osc = oscillations(f, "l2")
    c = analyze(f).coeffs
    from dyadlab.symbols import carleson_averages

    scale = max(1.0, float(np.max(f.values ** 2)))
    assert np.max(np.abs(osc - carleson_averages(c))) <= 1e-9 * scale
    assert bmo_norm(f, "l1") <= bmo_norm(f, "l2") * (1 + 1e-9) + 1e-9
