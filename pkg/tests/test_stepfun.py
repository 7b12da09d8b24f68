import numpy as np
import pytest
from hypothesis import given

from dyadlab.lattice import ROOT, DyadicInterval, Lattice
from dyadlab.stepfun import (
    HaarExpansion,
    StepFunction,
    analyze,
    ancestor_expansion,
    average,
    expand_average_check,
    haar_function,
    indicator,
    inner,
    interval_averages,
    l2_norm,
    synthesize,
)
from dyadlab.symbols import SymbolSequence
from oracles import haar_matrix, naive_analyze
from strategies import step_functions

I = DyadicInterval


def test_requires_power_of_two():
    with pytest.raises(ValueError):
        StepFunction(np.ones(6))
    with pytest.raises(ValueError):
        StepFunction(np.ones(1))


def test_values_are_read_only():
    f = StepFunction(np.ones(4))
    with pytest.raises(ValueError):
        f.values[0] = 2.0


def test_average_examples():
    c = StepFunction.constant(2.5, 4)
    assert all(average(c, iv) == 2.5 for iv in Lattice(4).enumerate(range(5)))
    h = haar_function(ROOT, 4)
    assert average(h, ROOT) == 0.0
    assert average(h, I(1, 0)) == 1.0


def test_analyze_examples():
    e = analyze(StepFunction.constant(1.0, 5))
    assert e.mean == 1.0 and not np.any(e.coeffs.values)
    e = analyze(haar_function(I(1, 0), 5))
    expected = np.zeros(31)
    expected[I(1, 0).heap_index] = 1.0
    assert e.mean == 0.0
    np.testing.assert_allclose(e.coeffs.values, expected, atol=1e-15)


def test_analyze_matches_naive_oracle(rng):
    for n in (1, 3, 5):
        vals = rng.standard_normal(1 << n)
        mean, coeffs = naive_analyze(vals)
        e = analyze(StepFunction(vals))
        assert e.mean == pytest.approx(mean, abs=1e-13)
        np.testing.assert_allclose(e.coeffs.values, coeffs, atol=1e-13)


def test_haar_system_orthonormal():
    n = 5
    h = np.array([haar_function(iv, n).values for iv in Lattice(n).symbol_intervals()])
    np.testing.assert_allclose(h, haar_matrix(n), atol=1e-15)
    np.testing.assert_allclose(h @ h.T / (1 << n), np.eye((1 << n) - 1), atol=1e-13)


def test_round_trip_depth_8(rng):
    f = StepFunction(rng.standard_normal(256))
    np.testing.assert_allclose(synthesize(analyze(f)).values, f.values, atol=1e-12)


def test_expand_average_examples(rng):
    one = StepFunction.constant(1.0, 4)
    assert all(expand_average_check(one, iv) == 0 for iv in Lattice(4).enumerate(range(5)))
    assert expand_average_check(haar_function(ROOT, 4), I(1, 0)) == 0.0
    f = StepFunction(rng.standard_normal(256))
    worst = max(expand_average_check(f, iv) for iv in Lattice(8).enumerate(range(9)))
    assert worst <= 1e-12


def test_ancestor_expansion_is_interval_averages(rng):
    f = StepFunction(rng.standard_normal(64))
    np.testing.assert_allclose(ancestor_expansion(f), interval_averages(f), atol=1e-13)


def test_indicator_and_haar_norms():
    iv = I(2, 3)
    assert l2_norm(indicator(iv, 5)) == pytest.approx(0.5)
    assert l2_norm(haar_function(iv, 5)) == pytest.approx(1.0)
    assert inner(indicator(iv, 5), haar_function(iv, 5)) == 0.0


def test_json_round_trip():
    f = StepFunction(np.array([1.0, -2.5, 3.25, 0.0]))
    g = StepFunction.from_json(f.to_json())
    assert np.array_equal(f.values, g.values)


@given(step_functions())
def test_round_trip_property(f):
    scale = max(1.0, float(np.abs(f.values).max()))
    back = synthesize(analyze(f))
    assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale


@given(step_functions())
def test_parseval_property(f):
    e = analyze(f)
    lhs = l2_norm(f) ** 2
    rhs = e.mean ** 2 + float(np.sum(e.coeffs.values ** 2))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, lhs)


@given(step_functions())
def test_synthesize_linear(f):
    e = analyze(f)
    doubled = synthesize(HaarExpansion(2 * e.mean, SymbolSequence(2 * e.coeffs.values)))
    np.testing.assert_allclose(doubled.values, 2 * f.values, atol=1e-9)
