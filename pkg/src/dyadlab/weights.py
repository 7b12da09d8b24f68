"""Weights on the lattice: Muckenhoupt characteristics and weighted norms.

Suprema run over dyadic intervals of every level ``0 .. n`` (cells
included), so these are the dyadic characteristics of the step weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lattice import DyadicInterval
from .stepfun import StepFunction, level_averages


@dataclass(frozen=True, eq=False)
class Weight:
    density: StepFunction
    # per-level interval masses w(I), levels 0..n
    masses: list = field(init=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.density, StepFunction):
            object.__setattr__(self, "density", StepFunction(self.density))
        if np.any(self.density.values <= 0):
            raise ValueError("weight density must be strictly positive")
        cell = self.density.values * self.density.cell_measure
        masses = [cell]
        for _ in range(self.density.depth):
            masses.append(masses[-1][0::2] + masses[-1][1::2])
        object.__setattr__(self, "masses", masses[::-1])

    @property
    def depth(self) -> int:
        return self.density.depth

    @property
    def values(self) -> np.ndarray:
        return self.density.values

    def mass(self, interval: DyadicInterval) -> float:
        return float(self.masses[interval.level][interval.position])

    def average(self, interval: DyadicInterval) -> float:
        return self.mass(interval) * (1 << interval.level)

    def level_averages(self) -> list[np.ndarray]:
        return [m * (1 << k) for k, m in enumerate(self.masses)]

    def inverse(self) -> "Weight":
        return Weight(StepFunction(1.0 / self.values))

    def scaled(self, c: float) -> "Weight":
        return Weight(StepFunction(c * self.values))

    def power(self, s: float) -> "Weight":
        return Weight(StepFunction(self.values ** s))

    @classmethod
    def constant(cls, depth: int, value: float = 1.0) -> "Weight":
        return cls(StepFunction.constant(value, depth))


def a_p_characteristic(w: Weight, p: float) -> float:
    """``sup_I <w>_I <w**(-1/(p-1))>_I**(p-1)`` over dyadic intervals."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    w_avgs = level_averages(w.values)
    s_avgs = level_averages(w.values ** (-1.0 / (p - 1.0)))
    return float(max((a * s ** (p - 1.0)).max() for a, s in zip(w_avgs, s_avgs)))


def a_infty_characteristic(w: Weight) -> float:
    """Fujii-Wilson form ``sup_I w(I)**-1 int_I M(w 1_I)`` with the dyadic
    maximal operator, localized to ``I``."""
    avgs = w.level_averages()
    depth = w.depth
    size = 1 << depth
    best = 0.0
    for k in range(depth + 1):
        running = np.repeat(avgs[k], size >> k)
        for j in range(k + 1, depth + 1):
            np.maximum(running, np.repeat(avgs[j], size >> j), out=running)
        integrals = running.reshape(1 << k, -1).sum(axis=1) / size
        best = max(best, float((integrals / w.masses[k]).max()))
    return best


def lp_w_norm(f: StepFunction, p: float, w: Weight) -> float:
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    total = float(np.dot(np.abs(f.values) ** p, w.values)) * f.cell_measure
    return total ** (1.0 / p)


def weighted_bmo_norm(f: StepFunction, w: Weight) -> float:
    """``sup_I w(I)**-1 int_I |f - <f>_I| w`` over symbol intervals."""
    if f.depth != w.depth:
        raise ValueError("depth mismatch")
    best = 0.0
    for k in range(f.depth):
        blocks = f.values.reshape(1 << k, -1)
        wb = w.values.reshape(1 << k, -1)
        dev = np.abs(blocks - blocks.mean(axis=1, keepdims=True))
        osc = (dev * wb).sum(axis=1) / wb.sum(axis=1)
        best = max(best, float(osc.max()))
    return best


def generate_cascade_weight(seed, rho: float, depth: int) -> Weight:
    """Multiplicative cascade with splits ``(1 + x, 1 - x)``, ``x ~ U[-rho, rho]``."""
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    rng = np.random.default_rng(seed)
    dens = np.ones(1)
    for _ in range(depth):
        x = rng.uniform(-rho, rho, dens.size)
        nxt = np.empty(2 * dens.size)
        nxt[0::2] = dens * (1.0 + x)
        nxt[1::2] = dens * (1.0 - x)
        dens = nxt
    return Weight(StepFunction(dens))


def power_weight(alpha: float, x0: float, depth: int) -> Weight:
    """``|x - x0|**alpha`` sampled at cell midpoints."""
    if not -1 < alpha < 1:
        raise ValueError(f"alpha must lie in (-1, 1), got {alpha}")
    mids = (np.arange(1 << depth) + 0.5) / (1 << depth)
    dist = np.abs(mids - x0)
    if alpha != 0 and np.any(dist == 0):
        raise ValueError(f"x0={x0} is a cell midpoint; the sampled weight degenerates")
    return Weight(StepFunction(dist ** alpha))


def weight_from_spec(spec: dict | None, depth: int, seed=None) -> Weight:
    """``{"kind": "cascade", "rho": .., "seed": ..}``, ``{"kind": "power",
    "alpha": .., "x0": ..}`` or ``{"kind": "constant"}``.

    A cascade without its own seed draws from ``seed``.
    """
    spec = dict(spec or {"kind": "constant"})
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return Weight.constant(depth, float(spec.get("value", 1.0)))
    if kind == "cascade":
        s = spec["seed"] if "seed" in spec else seed
        return generate_cascade_weight(s, float(spec.get("rho", 0.3)), depth)
    if kind == "power":
        return power_weight(float(spec.get("alpha", 0.5)), float(spec.get("x0", 0.5)), depth)
    raise ValueError(f"unknown weight kind {kind!r}")
