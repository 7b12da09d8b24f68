"""Finite dyadic lattice of [0, 1).

Intervals are integer pairs ``(level, position)`` denoting
``[position * 2**-level, (position + 1) * 2**-level)``.  Containment and
disjointness are decided by index arithmetic only.

Symbol-indexed data (Haar coefficients, symbol sequences) lives in flat arrays
in heap order: interval ``(k, j)`` sits at ``2**k - 1 + j``.  At depth ``n``
the symbol index set is levels ``0 .. n-1`` (``2**n - 1`` intervals); level
``n`` holds the ``2**n`` finest cells.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

MAX_DEPTH = 30


class LatticeError(ValueError):
    """Raised for navigation outside the lattice."""


@dataclass(frozen=True, order=True)
class DyadicInterval:
    level: int
    position: int

    def __post_init__(self):
        # accept numpy integers, reject floats
        try:
            object.__setattr__(self, "level", operator.index(self.level))
            object.__setattr__(self, "position", operator.index(self.position))
        except TypeError as exc:
            raise LatticeError(f"level and position must be integers: {exc}") from None
        if self.level < 0:
            raise LatticeError(f"negative level {self.level}")
        if not 0 <= self.position < (1 << self.level):
            raise LatticeError(
                f"position {self.position} out of range for level {self.level}"
            )

    @property
    def length(self) -> Fraction:
        return Fraction(1, 1 << self.level)

    @property
    def start(self) -> Fraction:
        return Fraction(self.position, 1 << self.level)

    @property
    def end(self) -> Fraction:
        return Fraction(self.position + 1, 1 << self.level)

    @property
    def heap_index(self) -> int:
        return (1 << self.level) - 1 + self.position

    @classmethod
    def from_heap_index(cls, index: int) -> "DyadicInterval":
        index = operator.index(index)
        if index < 0:
            raise LatticeError(f"negative heap index {index}")
        level = (index + 1).bit_length() - 1
        return cls(level, index + 1 - (1 << level))

    def contains(self, other: "DyadicInterval") -> bool:
        """True when ``other`` is a (not necessarily strict) subinterval."""
        shift = other.level - self.level
        return shift >= 0 and (other.position >> shift) == self.position

    def strictly_contains(self, other: "DyadicInterval") -> bool:
        return other.level > self.level and self.contains(other)

    def disjoint(self, other: "DyadicInterval") -> bool:
        return not (self.contains(other) or other.contains(self))

    def cell_range(self, depth: int) -> range:
        """Indices of the finest cells of a depth-``depth`` lattice inside."""
        shift = depth - self.level
        if shift < 0:
            raise LatticeError(f"{self} is finer than depth {depth}")
        return range(self.position << shift, (self.position + 1) << shift)

    def contains_point(self, t: float) -> bool:
        scaled = t * (1 << self.level)
        return self.position <= scaled < self.position + 1

    def __str__(self) -> str:
        return f"{self.level}:{self.position}"

    @classmethod
    def parse(cls, text: str) -> "DyadicInterval":
        level, _, position = text.partition(":")
        try:
            return cls(int(level), int(position))
        except ValueError as exc:
            raise LatticeError(f"bad interval literal {text!r}") from exc


ROOT = DyadicInterval(0, 0)


@dataclass(frozen=True)
class Lattice:
    """Depth-``n`` truncation: cells of length ``2**-n``."""

    depth: int

    def __post_init__(self):
        if not 1 <= self.depth <= MAX_DEPTH:
            raise LatticeError(f"depth must be in [1, {MAX_DEPTH}], got {self.depth}")

    @property
    def n_cells(self) -> int:
        return 1 << self.depth

    @property
    def n_symbols(self) -> int:
        return (1 << self.depth) - 1

    def check(self, interval: DyadicInterval) -> DyadicInterval:
        if interval.level > self.depth:
            raise LatticeError(f"{interval} is below depth {self.depth}")
        return interval

    def children(self, interval: DyadicInterval) -> tuple[DyadicInterval, DyadicInterval]:
        """Left child ``I+`` and right child ``I-``."""
        self.check(interval)
        if interval.level >= self.depth:
            raise LatticeError(f"{interval} is a finest cell and has no children")
        level, pos = interval.level + 1, 2 * interval.position
        return DyadicInterval(level, pos), DyadicInterval(level, pos + 1)

    def parent(self, interval: DyadicInterval) -> DyadicInterval:
        self.check(interval)
        if interval.level == 0:
            raise LatticeError("the root [0,1) has no parent")
        return DyadicInterval(interval.level - 1, interval.position // 2)

    def enumerate(self, levels: Iterable[int]) -> list[DyadicInterval]:
        """Level-major, position-minor listing of all intervals on ``levels``."""
        out = []
        for level in sorted(set(levels)):
            if not 0 <= level <= self.depth:
                raise LatticeError(f"level {level} outside [0, {self.depth}]")
            out.extend(DyadicInterval(level, j) for j in range(1 << level))
        return out

    def symbol_intervals(self) -> list[DyadicInterval]:
        return self.enumerate(range(self.depth))

    def ancestors(self, interval: DyadicInterval, strict: bool = True) -> Iterator[DyadicInterval]:
        """Ancestors from the parent (or ``interval`` itself) up to the root."""
        self.check(interval)
        level, pos = interval.level, interval.position
        if strict:
            level, pos = level - 1, pos // 2
        while level >= 0:
            yield DyadicInterval(level, pos)
            level, pos = level - 1, pos // 2


def children(interval: DyadicInterval, depth: int) -> tuple[DyadicInterval, DyadicInterval]:
    return Lattice(depth).children(interval)


def parent(interval: DyadicInterval) -> DyadicInterval:
    if interval.level == 0:
        raise LatticeError("the root [0,1) has no parent")
    return DyadicInterval(interval.level - 1, interval.position // 2)


def haar_value(interval: DyadicInterval, at) -> float:
    """Value of ``h_I`` at a point ``t`` or on a strict subinterval ``J``.

    ``h_I`` is ``+|I|**-0.5`` on the left half, ``-|I|**-0.5`` on the right
    half and zero elsewhere.  The interval form requires ``J`` strictly inside
    ``I``, since ``h_I`` is not constant on ``I`` itself.
    """
    scale = 2.0 ** (interval.level / 2)
    if isinstance(at, DyadicInterval):
        if not interval.strictly_contains(at):
            raise LatticeError(f"h_{interval} is not constant on {at}")
        left = (at.position >> (at.level - interval.level - 1)) & 1 == 0
        return scale if left else -scale
    t = float(at)
    if not interval.contains_point(t):
        return 0.0
    frac = t * (1 << interval.level) - interval.position
    return scale if frac < 0.5 else -scale
