"""Sparse collections, Carleson families and stopping-time constructions.

A member's set ``E_Q`` is stored as cells of the finest level, each cell
split into ``subdivision`` equal atoms; ``atoms[i]`` atoms of ``cells[i]``
belong to ``E_Q``.  With ``subdivision == 1`` this is a plain set of cells.
All sparsity checks are integer/rational arithmetic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, NamedTuple

import numpy as np

from .lattice import ROOT, DyadicInterval
from .opnorm import operator_norm_l2w
from .paraproducts import OperatorMatrix
from .paraproducts import martingale
from .stepfun import StepFunction, analyze, indicator, level_averages
from .symbols import SymbolSequence, level_slice, linf_norm
from .weights import Weight

STOPPING_RATIO = 4


class SparseConstructionError(ValueError):
    def __init__(self, message: str, achieved=None):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True, eq=False)
class SparseMember:
    interval: DyadicInterval
    cells: np.ndarray
    atoms: np.ndarray

    @classmethod
    def whole(cls, interval: DyadicInterval, depth: int, subdivision: int = 1) -> "SparseMember":
        r = interval.cell_range(depth)
        return cls(interval, np.arange(r.start, r.stop), np.full(len(r), subdivision))

    @classmethod
    def from_cells(cls, interval: DyadicInterval, cells) -> "SparseMember":
        cells = np.asarray(sorted(cells), dtype=int)
        return cls(interval, cells, np.ones(cells.size, dtype=int))

    def measure_atoms(self) -> int:
        return int(self.atoms.sum())


@dataclass(frozen=True, eq=False)
class SparseCollection:
    members: tuple
    eta: Fraction
    depth: int
    subdivision: int = 1

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "eta", _as_fraction(self.eta))

    @property
    def intervals(self) -> list[DyadicInterval]:
        return [m.interval for m in self.members]

    def __len__(self) -> int:
        return len(self.members)

    def to_dict(self) -> dict:
        members = []
        for m in self.members:
            if self.subdivision == 1:
                e = [int(c) for c in m.cells]
            else:
                e = [[int(c), int(a)] for c, a in zip(m.cells, m.atoms)]
            members.append({"Q": str(m.interval), "E": e})
        return {
            "eta": f"{self.eta.numerator}/{self.eta.denominator}",
            "depth": self.depth,
            "subdivision": self.subdivision,
            "members": members,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SparseCollection":
        sub = int(data.get("subdivision", 1))
        members = []
        for item in data["members"]:
            q = DyadicInterval.parse(item["Q"])
            if sub == 1:
                members.append(SparseMember.from_cells(q, item["E"]))
            else:
                pairs = sorted((int(c), int(a)) for c, a in item["E"])
                members.append(SparseMember(
                    q,
                    np.array([c for c, _ in pairs], dtype=int),
                    np.array([a for _, a in pairs], dtype=int),
                ))
        return cls(tuple(members), Fraction(data["eta"]), int(data["depth"]), sub)


def _as_fraction(eta) -> Fraction:
    if isinstance(eta, Fraction):
        return eta
    if isinstance(eta, int):
        return Fraction(eta)
    if isinstance(eta, str):
        return Fraction(eta)
    return Fraction(eta).limit_denominator(1 << 20)


class SparseVerdict(NamedTuple):
    valid: bool
    worst_ratio: Fraction
    problems: tuple


def verify_sparse(s: SparseCollection) -> SparseVerdict:
    """Check ``E_Q`` inside ``Q``, pairwise disjointness and ``|E_Q| >= eta |Q|``."""
    m = s.subdivision
    used = np.zeros(1 << s.depth, dtype=np.int64)
    problems = []
    seen = set()
    worst = Fraction(1)
    for mem in s.members:
        q = mem.interval
        if q in seen:
            problems.append(f"{q}: listed twice")
        seen.add(q)
        if q.level > s.depth:
            problems.append(f"{q}: below lattice depth")
            continue
        r = q.cell_range(s.depth)
        cells, atoms = np.asarray(mem.cells), np.asarray(mem.atoms)
        if cells.shape != atoms.shape:
            problems.append(f"{q}: cells/atoms shape mismatch")
            continue
        if cells.size and (cells.min() < r.start or cells.max() >= r.stop):
            problems.append(f"{q}: E_Q leaves Q")
            continue
        if np.unique(cells).size != cells.size:
            problems.append(f"{q}: repeated cell in E_Q")
        if atoms.size and (atoms.min() < 1 or atoms.max() > m):
            problems.append(f"{q}: atom count outside [1, {m}]")
        np.add.at(used, cells, atoms)
        ratio = Fraction(int(atoms.sum()), m * len(r))
        worst = min(worst, ratio)
        if ratio < s.eta:
            problems.append(f"{q}: |E_Q|/|Q| = {ratio} < eta = {s.eta}")
    if np.any(used > m):
        over = np.flatnonzero(used > m)
        problems.append(f"E_Q sets overlap on cells {over[:8].tolist()}")
    return SparseVerdict(not problems, worst, tuple(problems))


def carleson_constant(family: Iterable[DyadicInterval]) -> Fraction:
    """``sup_I |I|^-1 sum_{Q in family, Q subset I} |Q|``.

    The supremum is attained on a member, so only members are scanned.
    """
    fam = set(family)
    if not fam:
        return Fraction(0)
    totals = {q: Fraction(0) for q in fam}
    for q in fam:
        length = q.length
        level, pos = q.level, q.position
        while level >= 0:
            anc = DyadicInterval(level, pos)
            if anc in totals:
                totals[anc] += length
            level, pos = level - 1, pos // 2
    return max(t / q.length for q, t in totals.items())


def _greedy_fill(family, depth, demand_of, m) -> list | None:
    """Bottom-up assignment of atoms; optimal for nested (dyadic) families."""
    used = np.zeros(1 << depth, dtype=np.int64)
    members = []
    for q in sorted(family, key=lambda i: (-i.level, i.position)):
        r = q.cell_range(depth)
        free = m - used[r.start:r.stop]
        need = demand_of(q)
        cum = np.cumsum(free)
        if cum[-1] < need:
            return None
        take = np.clip(need - (cum - free), 0, free)
        used[r.start:r.stop] += take
        nz = np.flatnonzero(take)
        members.append(SparseMember(q, nz + r.start, take[nz]))
    members.sort(key=lambda mem: (mem.interval.level, mem.interval.position))
    return members


def carleson_to_sparse(family: Iterable[DyadicInterval], eta, depth: int,
                       subdivision: int | None = None) -> SparseCollection:
    """Sparse sets for a Carleson family with ``eta <= 1 / Lambda``.

    Whole cells are tried first; when rounding blocks that, cells are split
    into ``eta.denominator`` atoms, where the bottom-up fill cannot fail.
    """
    fam = sorted(set(family))
    eta = _as_fraction(eta)
    if not 0 < eta <= 1:
        raise ValueError(f"eta must lie in (0, 1], got {eta}")
    if not fam:
        return SparseCollection((), eta, depth, 1)
    lam = carleson_constant(fam)
    if eta * lam > 1:
        raise SparseConstructionError(
            f"eta={eta} exceeds 1/Lambda={1 / lam} for this family", achieved=1 / lam
        )
    tries = [subdivision] if subdivision else [1, eta.denominator]
    for m in tries:
        def demand(q, m=m):
            return math.ceil(eta * m * len(q.cell_range(depth)))
        members = _greedy_fill(fam, depth, demand, m)
        if members is not None:
            s = SparseCollection(tuple(members), eta, depth, m)
            verdict = verify_sparse(s)
            if not verdict.valid:
                raise SparseConstructionError(
                    "constructed collection failed verification: " + "; ".join(verdict.problems),
                    achieved=verdict.worst_ratio,
                )
            return s
    raise SparseConstructionError(
        f"no assignment reaches eta={eta} at subdivision {tries[-1]}", achieved=1 / lam
    )


# ------------------------------------------------------------ stopping times


def _restrict(f: StepFunction, interval: DyadicInterval) -> StepFunction:
    return StepFunction(f.values * indicator(interval, f.depth).values)


def _stopping_family(root: DyadicInterval, depth: int, children_rule):
    """Generic stopping tree.

    ``children_rule(q)`` returns the per-level stop flags below ``q``
    (list indexed by level offset ``1 .. depth - q.level``, each a bool array
    over the descendants of ``q`` on that level).  Returns the members with
    ``E_Q = Q`` minus the next generation.
    """
    members = []
    queue = [root]
    while queue:
        q = queue.pop()
        flags = children_rule(q)
        covered = np.zeros(1, dtype=bool)
        stopped = []
        for off, flag in enumerate(flags, start=1):
            covered = np.repeat(covered, 2)
            new = flag & ~covered
            base = q.position << off
            stopped.extend(DyadicInterval(q.level + off, base + int(j)) for j in np.flatnonzero(new))
            covered |= new
        r = q.cell_range(depth)
        free = np.flatnonzero(~covered) + r.start
        members.append(SparseMember.from_cells(q, free))
        queue.extend(stopped)
    members.sort(key=lambda mem: (mem.interval.level, mem.interval.position))
    return members


def _block(avgs, q: DyadicInterval, level: int) -> np.ndarray:
    off = level - q.level
    return avgs[level][q.position << off:(q.position + 1) << off]


def stopping_sparse_pair(f1: StepFunction, f2: StepFunction, root: DyadicInterval = ROOT) -> SparseCollection:
    """Stop at maximal ``J`` where either ``<|f_i|>_J > 4 <|f_i|>_Q``."""
    depth = f1.depth
    a1 = level_averages(np.abs(_restrict(f1, root).values))
    a2 = level_averages(np.abs(_restrict(f2, root).values))

    def rule(q):
        t1 = STOPPING_RATIO * a1[q.level][q.position]
        t2 = STOPPING_RATIO * a2[q.level][q.position]
        return [(_block(a1, q, j) > t1) | (_block(a2, q, j) > t2) for j in range(q.level + 1, depth + 1)]

    s = SparseCollection(tuple(_stopping_family(root, depth, rule)), Fraction(1, 2), depth)
    _require_valid(s, "stopping_sparse_pair")
    return s


def _require_valid(s: SparseCollection, who: str):
    verdict = verify_sparse(s)
    if not verdict.valid:
        raise SparseConstructionError(
            f"{who} produced an invalid collection: " + "; ".join(verdict.problems),
            achieved=verdict.worst_ratio,
        )


@dataclass(frozen=True)
class LaceyDomination:
    collection: SparseCollection
    constant: float
    max_threshold: float


def _partial_sums(terms, q: DyadicInterval, depth: int) -> list[np.ndarray]:
    """``P_Q(J) = sum_{J subsetneq K subseteq Q} terms_K h_K(J)`` for every
    ``J`` strictly inside ``Q`` down to the cells; per level offset."""
    out = []
    acc = np.zeros(1)
    for level in range(q.level, depth):
        t = terms[level_slice(level)][q.position << (level - q.level):(q.position + 1) << (level - q.level)]
        step = t * 2.0 ** (level / 2)
        nxt = np.empty(2 * acc.size)
        nxt[0::2] = acc + step
        nxt[1::2] = acc - step
        acc = nxt
        out.append(acc)
    return out


def lacey_pointwise_sparse(eps: SymbolSequence, f: StepFunction, root: DyadicInterval = ROOT) -> LaceyDomination:
    """Stopping family dominating ``|T_eps f|`` pointwise on ``root``.

    ``J`` stops when ``<|f|>_J > 4 <|f|>_Q`` or when the martingale partial sum
    from ``Q`` down to ``J`` exceeds ``lam ||eps|| <|f|>_Q``.  ``lam`` is 4
    unless the stopped set would cover more than half of ``Q``; then it is
    raised to the smallest value that keeps the half.  ``constant`` is the
    exact smallest ``C`` with ``|T_eps f| <= C ||eps|| A_S|f|`` on every cell
    of ``root``.
    """
    depth = f.depth
    f = _restrict(f, root)
    norm_eps = linf_norm(eps)
    absavg = level_averages(np.abs(f.values))
    terms = eps.values * analyze(f).coeffs.values
    thresholds = []

    def rule(q):
        levels = range(q.level + 1, depth + 1)
        base = norm_eps * absavg[q.level][q.position]
        avg_flags = [_block(absavg, q, j) > STOPPING_RATIO * absavg[q.level][q.position] for j in levels]
        partial = [np.abs(p) for p in _partial_sums(terms, q, depth)]
        # per cell: avg-stopped on its chain, and max partial sum above the first avg stop
        ncell = 1 << (depth - q.level)
        avg_hit = np.zeros(1, dtype=bool)
        peak = np.zeros(1)
        for a, p in zip(avg_flags, partial):
            avg_hit = np.repeat(avg_hit, 2)
            peak = np.repeat(peak, 2)
            peak = np.where(avg_hit, peak, np.maximum(peak, np.where(a, 0.0, p)))
            avg_hit |= a
        if base == 0:
            thresholds.append(float(STOPPING_RATIO))
            return avg_flags
        cut = STOPPING_RATIO * base
        allowed = ncell // 2 - int(avg_hit.sum())
        candidates = np.sort(peak[~avg_hit])[::-1]
        if allowed < candidates.size:
            cut = max(cut, float(candidates[allowed]))
        thresholds.append(cut / base)
        return [a | (p > cut) for a, p in zip(avg_flags, partial)]

    s = SparseCollection(tuple(_stopping_family(root, depth, rule)), Fraction(1, 2), depth)
    _require_valid(s, "lacey_pointwise_sparse")

    r = root.cell_range(depth)
    tf = np.abs(martingale(eps, f).values[r.start:r.stop])
    dom = sparse_operator_apply(s, StepFunction(np.abs(f.values))).values[r.start:r.stop]
    if norm_eps == 0 or not np.any(tf):
        c = 0.0
    else:
        mask = tf > 0
        if np.any(dom[mask] <= 0):
            raise SparseConstructionError("sparse form vanishes where T_eps f does not")
        c = float((tf[mask] / (norm_eps * dom[mask])).max())
    return LaceyDomination(s, c, max(thresholds))


# ----------------------------------------------------------- sparse operators


def sparse_operator_apply(s: SparseCollection, f: StepFunction) -> StepFunction:
    """``A_S f = sum_Q <f>_Q 1_Q`` (signed averages)."""
    avgs = level_averages(f.values)
    out = np.zeros(f.values.size)
    for mem in s.members:
        q = mem.interval
        r = q.cell_range(f.depth)
        out[r.start:r.stop] += avgs[q.level][q.position]
    return StepFunction(out)


def sparse_bilinear(s: SparseCollection, f: StepFunction, g: StepFunction) -> float:
    """``sum_Q |Q| <|f|>_Q <|g|>_Q``."""
    af = level_averages(np.abs(f.values))
    ag = level_averages(np.abs(g.values))
    total = 0.0
    for mem in s.members:
        q = mem.interval
        total += 2.0 ** -q.level * af[q.level][q.position] * ag[q.level][q.position]
    return total


def sparse_matrix(s: SparseCollection) -> OperatorMatrix:
    size = 1 << s.depth
    m = np.zeros((size, size))
    for mem in s.members:
        r = mem.interval.cell_range(s.depth)
        m[r.start:r.stop, r.start:r.stop] += 1.0 / len(r)
    return OperatorMatrix(m)


def sparse_norm_l2w(s: SparseCollection, w: Weight | None = None) -> float:
    if not s.members:
        return 0.0
    return operator_norm_l2w(sparse_matrix(s), w)


def merge_three(s1: SparseCollection, s2: SparseCollection, s3: SparseCollection) -> SparseCollection:
    """One collection over the union of members.

    Carleson constants add under union, so the union is
    ``1 / (1/eta1 + 1/eta2 + 1/eta3)``-sparse.
    """
    for i, s in enumerate((s1, s2, s3), start=1):
        verdict = verify_sparse(s)
        if not verdict.valid:
            raise SparseConstructionError(f"input {i} is not sparse: " + "; ".join(verdict.problems))
    depths = {s1.depth, s2.depth, s3.depth}
    if len(depths) != 1:
        raise ValueError(f"depth mismatch: {sorted(depths)}")
    eta = 1 / (1 / s1.eta + 1 / s2.eta + 1 / s3.eta)
    union = set(s1.intervals) | set(s2.intervals) | set(s3.intervals)
    return carleson_to_sparse(union, eta, depths.pop())
