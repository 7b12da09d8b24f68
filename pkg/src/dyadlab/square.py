"""Dyadic square function."""

from __future__ import annotations

import numpy as np

from .stepfun import StepFunction, analyze
from .symbols import level_slice
from .weights import Weight, lp_w_norm


def square_function(f: StepFunction) -> StepFunction:
    """``Sf = (sum_I f_I**2 1_I / |I|)**(1/2)``; the mean does not enter."""
    coeffs = analyze(f).coeffs.values
    acc = np.zeros(1)
    for k in range(f.depth):
        if k:
            acc = np.repeat(acc, 2)
        acc = acc + coeffs[level_slice(k)] ** 2 * float(1 << k)
    return StepFunction(np.sqrt(np.repeat(acc, 2)))


def haar_energy(f: StepFunction, w: Weight) -> float:
    """``sum_I f_I**2 <w>_I``."""
    coeffs = analyze(f).coeffs.values
    w_avgs = np.concatenate(w.level_averages()[:-1])
    return float(np.dot(coeffs ** 2, w_avgs))


def weighted_square_identity(f: StepFunction, w: Weight) -> float:
    """Relative residual of ``||Sf||_{L2(w)}**2 = sum_I f_I**2 <w>_I``."""
    lhs = lp_w_norm(square_function(f), 2, w) ** 2
    rhs = haar_energy(f, w)
    return abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny)
