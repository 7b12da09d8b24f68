"""Operator norms on weighted spaces by power iteration."""

from __future__ import annotations

import numpy as np

from .paraproducts import OperatorMatrix
from .weights import Weight


# structured test functions stop at this level to keep the candidate block small
MAX_STRUCTURED_LEVEL = 8


class ConvergenceError(RuntimeError):
    def __init__(self, estimate: float, gap: float, iterations: int):
        super().__init__(
            f"power iteration stalled after {iterations} steps: "
            f"estimate {estimate!r}, relative gap {gap!r}"
        )
        self.estimate = estimate
        self.gap = gap
        self.iterations = iterations


def _entries(m) -> np.ndarray:
    return m.entries if isinstance(m, OperatorMatrix) else np.asarray(m, dtype=float)


def _start_vector(size: int) -> np.ndarray:
    # fixed stream: a constant start vector is annihilated by mean-killing operators
    return np.random.default_rng(20240917).standard_normal(size)


def operator_norm_l2w(m, w: Weight | None = None, tol: float = 1e-10, max_iter: int = 20000) -> float:
    """Largest singular value of ``m`` on ``L^2(w)``.

    Runs the power method on ``B^T B`` with ``B = W^(1/2) M W^(-1/2)``, which
    is the ``w``-adjoint composition in disguise.  Stops once successive
    estimates agree to ``tol`` relative; the estimate never decreases.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = _entries(m)
    if w is not None:
        root = np.sqrt(w.values)
        a = root[:, None] * a / root[None, :]
    if not np.any(a):
        return 0.0
    x = _start_vector(a.shape[0])
    x /= np.linalg.norm(x)
    est = 0.0
    gap = np.inf
    for it in range(1, max_iter + 1):
        y = a @ x
        new = float(np.linalg.norm(y))
        z = a.T @ y
        nz = np.linalg.norm(z)
        if nz == 0:
            return max(est, new)
        x = z / nz
        gap = abs(new - est) / new if new else 0.0
        est = max(est, new)
        if gap < tol:
            return est
    raise ConvergenceError(est, gap, max_iter)


def _lp_norms(vals: np.ndarray, p: float) -> np.ndarray:
    return (np.abs(vals) ** p).sum(axis=0) ** (1.0 / p)


def operator_norm_lpw_lower(m, p: float, w: Weight | None = None, trials: int = 32, seed=0,
                            refine_steps: int = 50) -> float:
    """Certified lower bound for ``||m||`` on ``L^p(w)``.

    Every candidate's ratio ``||M f|| / ||f||`` is evaluated exactly; the
    result is the best one.  Candidates are Haar functions, indicators of all
    dyadic intervals, random functions, and a dual-map power refinement of
    the best candidate.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    a = _entries(m)
    size = a.shape[0]
    depth = size.bit_length() - 1
    if w is not None:
        # u = w^(1/p) f turns L^p(w) into plain l^p (equal cell measures cancel)
        s = w.values ** (1.0 / p)
        a = s[:, None] * a / s[None, :]
    if not np.any(a):
        return 0.0

    cands = []
    for k in range(min(depth, MAX_STRUCTURED_LEVEL) + 1):
        blocks = np.repeat(np.eye(1 << k), size >> k, axis=0)
        cands.append(blocks)
        if k < depth:
            half = size >> (k + 1)
            sign = np.tile(np.r_[np.ones(half), -np.ones(half)], 1 << k)
            cands.append(blocks * sign[:, None])
    rng = np.random.default_rng(seed)
    cands.append(rng.standard_normal((size, trials)))
    cands.append(rng.uniform(0.0, 1.0, (size, trials)))
    x_all = np.hstack(cands)
    if w is not None:
        x_all = x_all * s[:, None]
    ratios = _lp_norms(a @ x_all, p) / _lp_norms(x_all, p)
    best = float(ratios.max())

    q = p / (p - 1.0)
    x = x_all[:, int(ratios.argmax())].copy()
    for _ in range(refine_steps):
        y = a @ x
        ny = _lp_norms(y, p)
        if ny == 0:
            break
        dual_y = np.sign(y) * (np.abs(y) / ny) ** (p - 1.0)
        z = a.T @ dual_y
        nz = _lp_norms(z, q)
        if nz == 0:
            break
        x = np.sign(z) * (np.abs(z) / nz) ** (q - 1.0)
        r = float(_lp_norms(a @ x, p) / _lp_norms(x, p))
        if r <= best * (1 + 1e-14):
            best = max(best, r)
            break
        best = r
    return best
