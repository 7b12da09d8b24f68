"""Step functions on the finest cells and the fast Haar transform."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .lattice import DyadicInterval, LatticeError
from .symbols import SymbolSequence, level_slice


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Function constant on each of the ``2**n`` cells of ``[0, 1)``."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1 or arr.size < 2 or arr.size & (arr.size - 1):
            raise ValueError("a step function needs 2**n values, n >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("step function values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def depth(self) -> int:
        return self.values.size.bit_length() - 1

    @property
    def cell_measure(self) -> float:
        return 1.0 / self.values.size

    def integral(self) -> float:
        return float(self.values.sum()) * self.cell_measure

    def __add__(self, other: "StepFunction") -> "StepFunction":
        return StepFunction(self.values + _values_like(self, other))

    def __sub__(self, other: "StepFunction") -> "StepFunction":
        return StepFunction(self.values - _values_like(self, other))

    def __neg__(self) -> "StepFunction":
        return StepFunction(-self.values)

    def scaled(self, c: float) -> "StepFunction":
        return StepFunction(c * self.values)

    def abs(self) -> "StepFunction":
        return StepFunction(np.abs(self.values))

    @classmethod
    def constant(cls, c: float, depth: int) -> "StepFunction":
        return cls(np.full(1 << depth, float(c)))

    def to_json(self) -> str:
        return json.dumps({"depth": self.depth, "values": self.values.tolist()})

    @classmethod
    def from_json(cls, text: str) -> "StepFunction":
        data = json.loads(text)
        f = cls(data["values"])
        if f.depth != data["depth"]:
            raise ValueError(f"depth {data['depth']} does not match {f.values.size} values")
        return f


def _values_like(f: StepFunction, g: StepFunction) -> np.ndarray:
    if g.values.size != f.values.size:
        raise ValueError(f"depth mismatch: {f.depth} vs {g.depth}")
    return g.values


@dataclass(frozen=True)
class HaarExpansion:
    mean: float
    coeffs: SymbolSequence

    @property
    def depth(self) -> int:
        return self.coeffs.depth


def indicator(interval: DyadicInterval, depth: int) -> StepFunction:
    vals = np.zeros(1 << depth)
    cells = interval.cell_range(depth)
    vals[cells.start:cells.stop] = 1.0
    return StepFunction(vals)


def haar_function(interval: DyadicInterval, depth: int) -> StepFunction:
    if interval.level >= depth:
        raise LatticeError(f"h_{interval} is not resolved at depth {depth}")
    vals = np.zeros(1 << depth)
    cells = interval.cell_range(depth)
    half = len(cells) // 2
    amp = 2.0 ** (interval.level / 2)
    vals[cells.start:cells.start + half] = amp
    vals[cells.start + half:cells.stop] = -amp
    return StepFunction(vals)


def level_averages(values: np.ndarray) -> list[np.ndarray]:
    """``out[k][j]`` is the average over interval ``(k, j)``, ``k = 0 .. n``."""
    vals = np.asarray(values, dtype=float)
    depth = vals.size.bit_length() - 1
    out = [vals]
    for _ in range(depth):
        out.append(0.5 * (out[-1][0::2] + out[-1][1::2]))
    return out[::-1]


def interval_averages(f: StepFunction) -> np.ndarray:
    """``<f>_I`` for every symbol interval, heap order."""
    return np.concatenate(level_averages(f.values)[:-1])


def average(f: StepFunction, interval: DyadicInterval) -> float:
    cells = interval.cell_range(f.depth)
    return float(f.values[cells.start:cells.stop].mean())


def analyze(f: StepFunction) -> HaarExpansion:
    """Mean and all Haar coefficients in one bottom-up pass.

    ``<f, h_I> = sqrt|I| * (<f>_{I+} - <f>_{I-}) / 2``.
    """
    avgs = level_averages(f.values)
    coeffs = np.empty(f.values.size - 1)
    for k in range(f.depth):
        child = avgs[k + 1]
        coeffs[level_slice(k)] = (child[0::2] - child[1::2]) * 2.0 ** (-k / 2 - 1)
    return HaarExpansion(float(avgs[0][0]), SymbolSequence(coeffs))


def synthesize(expansion: HaarExpansion) -> StepFunction:
    """Inverse of :func:`analyze`, top-down from the mean."""
    coeffs = expansion.coeffs.values
    avg = np.array([expansion.mean])
    for k in range(expansion.depth):
        step = coeffs[level_slice(k)] * 2.0 ** (k / 2)
        nxt = np.empty(2 * avg.size)
        nxt[0::2] = avg + step
        nxt[1::2] = avg - step
        avg = nxt
    return StepFunction(avg)


def synthesize_haar(coeffs: SymbolSequence, mean: float = 0.0) -> StepFunction:
    return synthesize(HaarExpansion(mean, coeffs))


def inner(f: StepFunction, g: StepFunction) -> float:
    return float(np.dot(f.values, _values_like(f, g))) * f.cell_measure


def l2_norm(f: StepFunction) -> float:
    return float(np.sqrt(np.dot(f.values, f.values) * f.cell_measure))


def ancestor_expansion(f: StepFunction) -> np.ndarray:
    """``c0 + sum_{J strictly containing I} f_J h_J(I)`` for every symbol
    interval ``I`` (heap order), accumulated top-down."""
    e = analyze(f)
    coeffs = e.coeffs.values
    out = np.empty_like(coeffs)
    acc = np.array([e.mean])
    for k in range(f.depth):
        out[level_slice(k)] = acc
        step = coeffs[level_slice(k)] * 2.0 ** (k / 2)
        nxt = np.empty(2 * acc.size)
        nxt[0::2] = acc + step
        nxt[1::2] = acc - step
        acc = nxt
    return out


def expand_average_check(f: StepFunction, interval: DyadicInterval) -> float:
    """Residual of the ancestor expansion of ``<f>_I``.

    The constant term ``c0`` stands in for the ancestors above ``[0,1)``.
    """
    e = analyze(f)
    total = e.mean
    level, pos = interval.level - 1, interval.position // 2
    while level >= 0:
        left = (interval.position >> (interval.level - level - 1)) & 1 == 0
        h = 2.0 ** (level / 2) * (1.0 if left else -1.0)
        total += e.coeffs.values[(1 << level) - 1 + pos] * h
        level, pos = level - 1, pos // 2
    return abs(average(f, interval) - total)
