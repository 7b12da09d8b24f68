"""Dyadic paraproducts, martingale transforms and their compositions.

Real symbols only, so adjoints are transposes.  The paraproduct is
``Pi_b f = sum_I b_I <f>_I h_I`` over the symbol intervals.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .lattice import DyadicInterval
from .stepfun import (
    StepFunction,
    analyze,
    haar_function,
    inner,
    interval_averages,
    l2_norm,
    synthesize_haar,
)
from .symbols import SymbolSequence, e_sequence, level_slice, schur, sweep

ORACLE_CAP = 12


def _same_depth(a: SymbolSequence, f: StepFunction):
    if a.depth != f.depth:
        raise ValueError(f"depth mismatch: symbol {a.depth} vs function {f.depth}")


def pi(b: SymbolSequence, f: StepFunction) -> StepFunction:
    _same_depth(b, f)
    return synthesize_haar(SymbolSequence(b.values * interval_averages(f)))


def _spread(weights: np.ndarray, depth: int) -> np.ndarray:
    """Cell values of ``sum_I weights_I 1_I`` (heap-ordered weights)."""
    acc = np.zeros(1)
    for k in range(depth):
        acc = np.repeat(acc, 2) if k else acc
        acc = acc + weights[level_slice(k)]
    return np.repeat(acc, 2)


def pi_star(b: SymbolSequence, g: StepFunction) -> StepFunction:
    """``sum_I b_I <g, h_I> 1_I / |I|``."""
    _same_depth(b, g)
    coeffs = analyze(g).coeffs.values
    inv_len = np.concatenate([np.full(1 << k, float(1 << k)) for k in range(g.depth)])
    return StepFunction(_spread(b.values * coeffs * inv_len, g.depth))


def martingale(eps: SymbolSequence, f: StepFunction) -> StepFunction:
    """Haar multiplier; the mean of ``f`` is annihilated."""
    _same_depth(eps, f)
    return synthesize_haar(SymbolSequence(eps.values * analyze(f).coeffs.values))


def compose(b: SymbolSequence, d: SymbolSequence, f: StepFunction) -> StepFunction:
    """``Pi_b^* Pi_d f``."""
    return pi_star(b, pi(d, f))


def bilinear_form(bd: SymbolSequence, f: StepFunction, g: StepFunction) -> float:
    """Closed form ``sum_I bd_I <f>_I <g>_I`` of ``<Pi_b^* Pi_d f, g>``."""
    _same_depth(bd, f)
    _same_depth(bd, g)
    return float(np.dot(bd.values, interval_averages(f) * interval_averages(g)))


def pott_smith_apply(bd: SymbolSequence, f: StepFunction, convention: str = "strict") -> StepFunction:
    """``Pi_S f + Pi_S^* f + T_E f`` with ``S`` the sweep and ``E`` the
    normalized subtree sums of ``bd``."""
    s = sweep(bd)
    e = e_sequence(bd, convention)
    return pi(s, f) + pi_star(s, f) + martingale(e, f)


def mean_sector_defect(bd: SymbolSequence, f: StepFunction) -> float:
    """Constant by which ``Pi_b^* Pi_d f`` exceeds the three-term sum.

    Only the constant component of ``f`` couples to it: the value is
    ``<f> * sum_I bd_I``.
    """
    return analyze(f).mean * float(bd.values.sum())


@dataclass(frozen=True)
class PottSmithReport:
    max_residual: float
    mean_sector_residual: float
    mean_sector_prediction_error: float
    trials: int


def _residual(b, d, f, convention):
    diff = compose(b, d, f) - pott_smith_apply(schur(b, d), f, convention)
    return l2_norm(diff) / (1.0 + l2_norm(f)), diff


def verify_pott_smith(
    b: SymbolSequence,
    d: SymbolSequence,
    trials: int = 10,
    seed=0,
    convention: str = "strict",
) -> PottSmithReport:
    """Largest relative residual of the three-term decomposition.

    ``max_residual`` runs over mean-zero inputs.  A second batch with a
    nonzero mean measures the constant-sector discrepancy, and checks it
    against :func:`mean_sector_defect`.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if b.depth != d.depth:
        raise ValueError("depth mismatch")
    rng = np.random.default_rng(seed)
    bd = schur(b, d)
    worst = mean_worst = pred_err = 0.0
    for _ in range(trials):
        vals = rng.uniform(-1.0, 1.0, 1 << b.depth)
        f = StepFunction(vals - vals.mean())
        worst = max(worst, _residual(b, d, f, convention)[0])
        g = StepFunction(vals + 1.0)
        res, diff = _residual(b, d, g, convention)
        mean_worst = max(mean_worst, res)
        predicted = StepFunction.constant(mean_sector_defect(bd, g), b.depth)
        pred_err = max(pred_err, l2_norm(diff - predicted) / (1.0 + l2_norm(g)))
    return PottSmithReport(worst, mean_worst, pred_err, trials)


def diagonal_identity_check(b: SymbolSequence, d: SymbolSequence, interval: DyadicInterval):
    """``(<Pi_b^* Pi_d h_I, h_I>, E(b o d)_I)`` with strict ``E``."""
    h = haar_function(interval, b.depth)
    lhs = inner(compose(b, d, h), h)
    rhs = e_sequence(schur(b, d))[interval]
    return lhs, rhs


# ---------------------------------------------------------------- matrices


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense realization on cell values: ``(M f)[x] = sum_y M[x, y] f[y]``."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1):
            raise ValueError("operator matrix must be square with side 2**n")
        if not np.all(np.isfinite(m)):
            raise ValueError("operator matrix entries must be finite")
        object.__setattr__(self, "entries", m)

    @property
    def depth(self) -> int:
        return self.entries.shape[0].bit_length() - 1

    def apply(self, f: StepFunction) -> StepFunction:
        return StepFunction(self.entries @ f.values)

    def adjoint(self) -> "OperatorMatrix":
        """Adjoint for the unweighted inner product (cells have equal measure)."""
        return OperatorMatrix(self.entries.T)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.entries @ other.entries)


Operator = Callable[[StepFunction], StepFunction]

OPERATOR_NAMES = ("identity", "pi", "pi_star", "martingale", "compose", "pott_smith")


def make_operator(name: str, b=None, d=None, eps=None) -> Operator:
    """Operator by name.  ``pi``/``pi_star`` use ``b``, ``martingale`` uses
    ``eps``, ``compose`` uses ``b`` and ``d``, ``pott_smith`` uses ``b o d``."""
    if name == "identity":
        return lambda f: f
    if name == "pi":
        return lambda f: pi(b, f)
    if name == "pi_star":
        return lambda f: pi_star(b, f)
    if name == "martingale":
        return lambda f: martingale(eps, f)
    if name == "compose":
        return lambda f: compose(b, d, f)
    if name == "pott_smith":
        bd = schur(b, d)
        return lambda f: pott_smith_apply(bd, f)
    raise ValueError(f"unknown operator {name!r}; choose from {', '.join(OPERATOR_NAMES)}")


def to_matrix(op: Union[Operator, tuple], depth: int, cap: int = ORACLE_CAP) -> OperatorMatrix:
    """Apply ``op`` to every cell indicator.

    ``op`` is a callable or a ``(name, kwargs)`` pair for :func:`make_operator`.
    """
    if depth > cap:
        raise ValueError(f"depth {depth} exceeds the oracle cap {cap}")
    if isinstance(op, tuple):
        name, kwargs = op
        op = make_operator(name, **kwargs)
    size = 1 << depth
    cols = np.empty((size, size))
    basis = np.zeros(size)
    for y in range(size):
        basis[y] = 1.0
        cols[:, y] = op(StepFunction(basis)).values
        basis[y] = 0.0
    return OperatorMatrix(cols)
