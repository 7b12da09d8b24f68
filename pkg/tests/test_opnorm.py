import numpy as np
import pytest
from hypothesis import given, strategies as st

from dyadlab.lattice import DyadicInterval
from dyadlab.opnorm import ConvergenceError, operator_norm_l2w, operator_norm_lpw_lower
from dyadlab.paraproducts import OperatorMatrix, to_matrix
from dyadlab.stepfun import haar_function
from dyadlab.symbols import SymbolSequence
from dyadlab.weights import Weight, generate_cascade_weight
from oracles import haar_matrix
from strategies import weights


def weighted_exact(m, w):
    r = np.sqrt(w.values)
    return float(np.linalg.norm(r[:, None] * m / r[None, :], 2))


def test_identity_any_weight():
    for w in (None, generate_cascade_weight(3, 0.6, 6)):
        assert operator_norm_l2w(np.eye(64), w) == pytest.approx(1.0, rel=1e-10)


def test_diagonal_in_haar_basis():
    n = 4
    # orthonormal basis of R^16: normalized constant plus the scaled Haar rows
    h = np.vstack([np.ones(16), haar_matrix(n)]) / 4
    diag = np.ones(16)
    diag[0] = 3.0
    m = h.T @ np.diag(diag) @ h
    assert operator_norm_l2w(m) == pytest.approx(3.0, rel=1e-10)


def test_rank_one_composition():
    n = 5
    bd = SymbolSequence.delta(DyadicInterval(1, 0), n)
    m = to_matrix(("compose", {"b": bd, "d": bd}), n)
    assert operator_norm_l2w(m) == pytest.approx(2.0, rel=1e-10)


def test_zero_operator():
    assert operator_norm_l2w(np.zeros((8, 8))) == 0.0
    assert operator_norm_lpw_lower(np.zeros((8, 8)), 3.0) == 0.0


def test_matches_svd_on_random_compositions(rng):
    n = 7
    for _ in range(5):
        b = SymbolSequence(rng.uniform(-1, 1, 127))
        d = SymbolSequence(rng.uniform(-1, 1, 127))
        m = to_matrix(("compose", {"b": b, "d": d}), n).entries
        w = generate_cascade_weight(int(rng.integers(1000)), 0.4, n)
        assert operator_norm_l2w(m, w) == pytest.approx(weighted_exact(m, w), rel=1e-8)


def test_convergence_error_is_raised():
    # nearly equal top singular values stall a short power iteration
    m = np.diag([1.0, 1.0 - 1e-7] + [0.1] * 14)
    rot = np.linalg.qr(np.random.default_rng(0).standard_normal((16, 16)))[0]
    with pytest.raises(ConvergenceError) as info:
        operator_norm_l2w(rot @ m @ rot.T, tol=1e-15, max_iter=5)
    assert info.value.estimate > 0 and info.value.iterations == 5


def test_lower_bound_examples(rng):
    assert operator_norm_lpw_lower(np.eye(16), 3.0) >= 1.0 - 1e-12
    for _ in range(5):
        b = SymbolSequence(rng.uniform(-1, 1, 63))
        m = to_matrix(("compose", {"b": b, "d": b}), 6).entries
        exact = operator_norm_l2w(m)
        low = operator_norm_lpw_lower(m, 2.0)
        assert 0.95 * exact <= low <= exact * (1 + 1e-9)


def test_lower_bound_is_attained_by_some_function(rng):
    m = rng.standard_normal((16, 16))
    w = generate_cascade_weight(5, 0.5, 4)
    for p in (1.5, 3.0):
        low = operator_norm_lpw_lower(m, p, w)
        # the structured and refined candidates should beat a blind random search
        xs = rng.standard_normal((16, 4000))
        s = w.values ** (1 / p)
        a = s[:, None] * m / s[None, :]
        ratios = (np.abs(a @ xs) ** p).sum(0) ** (1 / p) / (np.abs(xs) ** p).sum(0) ** (1 / p)
        assert low >= ratios.max() * 0.9


def test_rejects_bad_p():
    with pytest.raises(ValueError):
        operator_norm_lpw_lower(np.eye(4), 1.0)


@given(weights(depth=4), st.integers(0, 2 ** 16))
def test_weighted_norm_matches_svd(w, seed):
    m = np.random.default_rng(seed).standard_normal((16, 16))
    assert operator_norm_l2w(m, w) == pytest.approx(weighted_exact(m, w), rel=1e-7)


@given(weights(depth=4))
def test_haar_projection_norm_at_least_haar_ratio(w):
    # ||P h_I||_w / ||h_I||_w <= ||P||_w for the mean-zero projection P
    p = np.eye(16) - 1 / 16
    norm = operator_norm_l2w(OperatorMatrix(p), w)
    h = haar_function(DyadicInterval(1, 1), 4).values
    num = np.sqrt(np.dot((p @ h) ** 2, w.values))
    den = np.sqrt(np.dot(h ** 2, w.values))
    assert num / den <= norm * (1 + 1e-8)
