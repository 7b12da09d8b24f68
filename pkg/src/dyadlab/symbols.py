"""Symbol sequences over the lattice and their norms.

A :class:`SymbolSequence` holds one real entry per symbol-index interval
(levels ``0 .. n-1``) in heap order.  Every tree aggregate here runs in
``O(2**n)`` through subtree sums computed level by level.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .lattice import DyadicInterval, LatticeError


def _depth_from_symbols(size: int) -> int:
    depth = (size + 1).bit_length() - 1
    if size < 1 or (1 << depth) - 1 != size:
        raise ValueError(f"{size} entries is not 2**n - 1 for any n >= 1")
    return depth


def level_slice(level: int) -> slice:
    return slice((1 << level) - 1, (1 << (level + 1)) - 1)


@dataclass(frozen=True, eq=False)
class SymbolSequence:
    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        if arr.ndim != 1:
            raise ValueError("symbol values must be one-dimensional")
        _depth_from_symbols(arr.size)
        if not np.all(np.isfinite(arr)):
            raise ValueError("symbol entries must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def depth(self) -> int:
        return _depth_from_symbols(self.values.size)

    def level(self, k: int) -> np.ndarray:
        return self.values[level_slice(k)]

    def __getitem__(self, interval: DyadicInterval) -> float:
        if interval.level >= self.depth:
            raise LatticeError(f"{interval} is not a symbol index at depth {self.depth}")
        return float(self.values[interval.heap_index])

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other) -> bool:
        return isinstance(other, SymbolSequence) and np.array_equal(self.values, other.values)

    def __neg__(self) -> "SymbolSequence":
        return SymbolSequence(-self.values)

    def scaled(self, c: float) -> "SymbolSequence":
        return SymbolSequence(c * self.values)

    @classmethod
    def zeros(cls, depth: int) -> "SymbolSequence":
        return cls(np.zeros((1 << depth) - 1))

    @classmethod
    def delta(cls, interval: DyadicInterval, depth: int, value: float = 1.0) -> "SymbolSequence":
        if interval.level >= depth:
            raise LatticeError(f"{interval} is not a symbol index at depth {depth}")
        vals = np.zeros((1 << depth) - 1)
        vals[interval.heap_index] = value
        return cls(vals)

    @classmethod
    def from_pairs(cls, pairs: Iterable, depth: int) -> "SymbolSequence":
        """Build from ``("level:position", value)`` pairs; missing entries are 0."""
        vals = np.zeros((1 << depth) - 1)
        for key, value in pairs:
            interval = key if isinstance(key, DyadicInterval) else DyadicInterval.parse(key)
            if interval.level >= depth:
                raise LatticeError(f"{interval} is not a symbol index at depth {depth}")
            vals[interval.heap_index] = value
        return cls(vals)

    def to_pairs(self) -> list[tuple[str, float]]:
        return [
            (str(DyadicInterval.from_heap_index(i)), float(v))
            for i, v in enumerate(self.values)
        ]


def _require_same_depth(*seqs: SymbolSequence) -> int:
    depths = {s.depth for s in seqs}
    if len(depths) != 1:
        raise ValueError(f"depth mismatch: {sorted(depths)}")
    return depths.pop()


def subtree_sums(values: np.ndarray) -> np.ndarray:
    """``sigma(K) = sum of values[J]`` over symbol intervals ``J`` inside ``K``."""
    depth = _depth_from_symbols(values.size)
    out = np.array(values, dtype=float)
    for k in range(depth - 2, -1, -1):
        below = out[level_slice(k + 1)]
        out[level_slice(k)] += below[0::2] + below[1::2]
    return out


def _lengths(depth: int) -> np.ndarray:
    """``|I|`` for every symbol interval, heap order."""
    return np.concatenate([np.full(1 << k, 2.0 ** -k) for k in range(depth)])


def schur(b: SymbolSequence, d: SymbolSequence) -> SymbolSequence:
    _require_same_depth(b, d)
    return SymbolSequence(b.values * d.values)


def sweep(a: SymbolSequence) -> SymbolSequence:
    """Sweep: entry ``I`` is ``sum over J strictly inside I of a_J h_I(J)``.

    Equals ``(sigma(I+) - sigma(I-)) / sqrt|I|``; the deepest symbol level has
    no strict descendants and gets 0.
    """
    depth = a.depth
    sigma = subtree_sums(a.values)
    out = np.zeros_like(sigma)
    for k in range(depth - 1):
        below = sigma[level_slice(k + 1)]
        out[level_slice(k)] = (below[0::2] - below[1::2]) * 2.0 ** (k / 2)
    return SymbolSequence(out)


def e_sequence(a: SymbolSequence, convention: str = "strict") -> SymbolSequence:
    """Normalized subtree sums ``(1/|I|) sum_{J in I} a_J``.

    ``strict`` excludes ``J = I``; ``inclusive`` keeps it.
    """
    sigma = subtree_sums(a.values)
    if convention == "strict":
        sigma = sigma - a.values
    elif convention != "inclusive":
        raise ValueError(f"unknown convention {convention!r}")
    return SymbolSequence(sigma / _lengths(a.depth))


def carleson_averages(a: SymbolSequence) -> np.ndarray:
    """``(1/|I|) sum_{J subset I} a_J**2`` for every symbol interval."""
    return subtree_sums(a.values ** 2) / _lengths(a.depth)


def cm_norm(a: SymbolSequence) -> float:
    # rescale by the sup so squaring cannot underflow or overflow
    top = linf_norm(a)
    if top == 0 or not np.isfinite(top):
        return top
    return top * float(np.sqrt(carleson_averages(a.scaled(1.0 / top)).max()))


def linf_norm(a: SymbolSequence) -> float:
    return float(np.abs(a.values).max())


def oscillations(f, flavor: str = "l2") -> np.ndarray:
    """Mean oscillation of ``f`` on every symbol interval, heap order.

    ``l2``: ``(1/|I|) int_I |f - <f>_I|**2`` (squared, not rooted);
    ``l1``: ``(1/|I|) int_I |f - <f>_I|``.
    """
    vals = np.asarray(getattr(f, "values", f), dtype=float)
    depth = vals.size.bit_length() - 1
    parts = []
    for k in range(depth):
        blocks = vals.reshape(1 << k, -1)
        dev = blocks - blocks.mean(axis=1, keepdims=True)
        if flavor == "l2":
            parts.append((dev ** 2).mean(axis=1))
        elif flavor == "l1":
            parts.append(np.abs(dev).mean(axis=1))
        else:
            raise ValueError(f"unknown BMO flavor {flavor!r}")
    return np.concatenate(parts)


def bmo_norm(f, flavor: str = "l2") -> float:
    """Dyadic BMO norm by direct cell sums; ``l2`` equals the CM norm of the
    Haar coefficients."""
    osc = oscillations(f, flavor).max()
    return float(np.sqrt(osc)) if flavor == "l2" else float(osc)
