"""Ensemble experiments and their reports.

Every trial draws from its own stream ``default_rng([seed, depth, trial, ...])``
so reruns, reorderings and parallel runs agree record for record.  Hard
contracts (exact identities, sparse verification, zero-denominator
consistency) become ``violations``; empirical constants only go into the
records and the summary.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import __version__
from .config import RunConfig
from .lattice import ROOT, DyadicInterval, Lattice, LatticeError
from .opnorm import operator_norm_l2w, operator_norm_lpw_lower
from .paraproducts import (
    bilinear_form,
    compose,
    pi,
    pi_star,
    martingale,
    to_matrix,
    verify_pott_smith,
)
from .sparse import (
    SparseConstructionError,
    lacey_pointwise_sparse,
    merge_three,
    sparse_bilinear,
    sparse_norm_l2w,
    stopping_sparse_pair,
    verify_sparse,
)
from .square import haar_energy, square_function, weighted_square_identity
from .stepfun import StepFunction, analyze, haar_function, inner, synthesize_haar
from .symbols import (
    SymbolSequence,
    bmo_norm,
    carleson_averages,
    cm_norm,
    e_sequence,
    level_slice,
    linf_norm,
    oscillations,
    schur,
    sweep,
)
from .weights import (
    Weight,
    a_infty_characteristic,
    a_p_characteristic,
    lp_w_norm,
    weight_from_spec,
)

IDENTITY_TOL = 1e-12
POTT_SMITH_TOL = 1e-10
INCLUSIVE_FAIL_FLOOR = 1e-3
EQUALITY_TOL = 1e-9
# power iteration stops at 1e-10 relative; duality checks get slack above it
DUALITY_SLACK = 1e-8


# ------------------------------------------------------------------ reports


@dataclass
class ExperimentReport:
    name: str
    config: dict
    seed: int
    columns: list
    records: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "experiment": self.name,
            "seed": self.seed,
            "config": self.config,
            "columns": self.columns,
            "records": self.records,
            "summary": self.summary,
            "violations": self.violations,
            "metadata": {"dyadlab_version": __version__},
        }

    def to_json(self) -> str:
        return json.dumps(_clean(self.as_dict()), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# experiment: {self.name}\n")
        buf.write(f"# seed: {self.seed}\n")
        buf.write(f"# config: {json.dumps(_clean(self.config), sort_keys=True)}\n")
        buf.write(f"# columns: {', '.join(self.columns)}\n")
        buf.write(f"# violations: {len(self.violations)}\n")
        writer = csv.DictWriter(buf, fieldnames=self.columns, extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for rec in self.records:
            writer.writerow({k: _csv_cell(rec.get(k)) for k in self.columns})
        return buf.getvalue()


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _csv_cell(v):
    if isinstance(v, (dict, list)):
        return json.dumps(_clean(v))
    return "" if v is None else _clean(v)


def _stats(values) -> dict:
    vals = [v for v in values if v is not None and math.isfinite(v)]
    if not vals:
        return {"count": 0, "min": None, "median": None, "max": None}
    return {
        "count": len(vals),
        "min": float(min(vals)),
        "median": float(np.median(vals)),
        "max": float(max(vals)),
    }


def _growth(per_depth: dict, key: str = "max"):
    """Relative change of a per-depth statistic from the first to the last depth."""
    depths = sorted(per_depth)
    if len(depths) < 2:
        return None
    first, last = per_depth[depths[0]][key], per_depth[depths[-1]][key]
    if first is None or last is None or first == 0:
        return None
    return float(last / first - 1.0)


# ----------------------------------------------------------- random inputs


def trial_rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng([seed, *keys])


LACUNARY = (0, 1, 3, 7, 15)
SYMBOL_KINDS = ("uniform", "single", "chain", "lacunary", "mixed")


def draw_symbols(rng: np.random.Generator, depth: int, spec: dict | None = None, trial: int = 0):
    """A pair ``(b, d)`` from a generator spec ``{"kind": ...}``.

    ``uniform``: i.i.d. U[-1, 1].  ``single``: both supported on one random
    interval.  ``chain``: both supported on one random root-to-leaf branch.
    ``lacunary``: i.i.d. entries on levels 0, 1, 3, 7, ... only.  ``mixed``
    cycles through the four by trial index.
    """
    kind = (spec or {}).get("kind", "uniform")
    if kind == "mixed":
        kind = SYMBOL_KINDS[trial % 4]
    size = (1 << depth) - 1
    if kind == "uniform":
        return SymbolSequence(rng.uniform(-1, 1, size)), SymbolSequence(rng.uniform(-1, 1, size))
    mask = np.zeros(size, dtype=bool)
    if kind == "single":
        level = int(rng.integers(0, depth))
        mask[(1 << level) - 1 + int(rng.integers(0, 1 << level))] = True
    elif kind == "chain":
        leaf = int(rng.integers(0, 1 << (depth - 1)))
        for level in range(depth):
            mask[(1 << level) - 1 + (leaf >> (depth - 1 - level))] = True
    elif kind == "lacunary":
        for level in LACUNARY:
            if level < depth:
                mask[level_slice(level)] = True
    else:
        raise ValueError(f"unknown symbol kind {kind!r}")
    b = np.where(mask, rng.uniform(-1, 1, size), 0.0)
    d = np.where(mask, rng.uniform(-1, 1, size), 0.0)
    return SymbolSequence(b), SymbolSequence(d)


def draw_function(rng: np.random.Generator, depth: int, mean_zero: bool = False) -> StepFunction:
    vals = rng.uniform(-1, 1, 1 << depth)
    if mean_zero:
        vals = vals - vals.mean()
    return StepFunction(vals)


def draw_weight(cfg: RunConfig, depth: int, trial: int, default: dict | None = None) -> Weight:
    spec = dict(cfg.weight or default or {"kind": "constant"})
    base = spec.pop("seed", cfg.seed)
    return weight_from_spec(spec, depth, seed=[int(base), depth, trial, 99])


def disjoint_singletons(depth: int):
    """``b = delta_{[0,1/2)}``, ``d = delta_{[1/2,1)}``: Schur product zero."""
    b = SymbolSequence.delta(DyadicInterval(1, 0), depth)
    d = SymbolSequence.delta(DyadicInterval(1, 1), depth)
    return b, d


# ------------------------------------------------------------- quantities


def prsw_quantity(bd: SymbolSequence) -> tuple[float, float]:
    """``(||S(bd)||_CM, ||E(bd)||_inf)`` with strict ``E``."""
    return cm_norm(sweep(bd)), linf_norm(e_sequence(bd))


def composition_matrix(b: SymbolSequence, d: SymbolSequence):
    return to_matrix(lambda f: compose(b, d, f), b.depth)


def root_supported(bd: SymbolSequence) -> bool:
    return not np.any(bd.values[1:])


def testing_function(bd: SymbolSequence, interval: DyadicInterval, k: int, sub: DyadicInterval) -> StepFunction:
    """``sum S(bd)_J h_J`` over ``J`` inside ``sub`` with ``|J| > 2**-k |interval|``."""
    depth = bd.depth
    if k < 0:
        raise ValueError("k must be non-negative")
    if interval.level + k > depth:
        raise LatticeError(f"k={k} reaches below depth {depth} from {interval}")
    if not interval.contains(sub):
        raise LatticeError(f"{sub} is not inside {interval}")
    s = sweep(bd).values
    coeffs = np.zeros_like(s)
    for level in range(sub.level, interval.level + k):
        lo = sub.position << (level - sub.level)
        hi = (sub.position + 1) << (level - sub.level)
        sl = level_slice(level)
        coeffs[sl.start + lo:sl.start + hi] = s[sl.start + lo:sl.start + hi]
    return synthesize_haar(SymbolSequence(coeffs))


def petermichl_pott_ratios(f: StepFunction, w: Weight, a2: float | None = None) -> tuple[float, float]:
    """``(r_up, r_down)`` for a mean-zero ``f``."""
    scale = float(np.abs(f.values).max()) if f.values.size else 0.0
    if abs(analyze(f).mean) > 1e-12 * max(1.0, scale):
        raise ValueError("f must have mean zero: the square function ignores the mean")
    a2 = a_p_characteristic(w, 2) if a2 is None else a2
    fw = lp_w_norm(f, 2, w)
    sfw = lp_w_norm(square_function(f), 2, w)
    if fw == 0:
        return 0.0, 0.0
    return fw / (math.sqrt(a2) * sfw), sfw / (a2 * fw)


# ------------------------------------------------------------ experiments


def _report(name, cfg, columns):
    return ExperimentReport(name, _clean(cfg.echo()), cfg.seed, columns)


def pott_smith_experiment(cfg: RunConfig) -> ExperimentReport:
    rep = _report("pott-smith", cfg, [
        "depth", "trial", "residual", "mean_sector_residual",
        "mean_sector_prediction_error", "inclusive_residual",
    ])
    for depth in cfg.depth_list:
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            b, d = draw_symbols(rng, depth, cfg.symbols, t)
            inner_seed = [cfg.seed, depth, t, 1]
            strict = verify_pott_smith(b, d, trials=10, seed=inner_seed)
            incl = verify_pott_smith(b, d, trials=10, seed=inner_seed, convention="inclusive")
            rep.records.append({
                "depth": depth, "trial": t,
                "residual": strict.max_residual,
                "mean_sector_residual": strict.mean_sector_residual,
                "mean_sector_prediction_error": strict.mean_sector_prediction_error,
                "inclusive_residual": incl.max_residual,
            })
            if strict.max_residual > POTT_SMITH_TOL:
                rep.violations.append(f"depth {depth} trial {t}: residual {strict.max_residual!r}")
            if strict.mean_sector_prediction_error > POTT_SMITH_TOL:
                rep.violations.append(f"depth {depth} trial {t}: mean-sector defect not <f> sum(bd)")
    rep.summary = {
        "max_residual": max(r["residual"] for r in rep.records),
        "max_mean_sector_residual": max(r["mean_sector_residual"] for r in rep.records),
        "min_inclusive_residual": min(r["inclusive_residual"] for r in rep.records),
        "tolerance": POTT_SMITH_TOL,
    }
    rep.summary["inclusive_convention_rejected"] = rep.summary["min_inclusive_residual"] > INCLUSIVE_FAIL_FLOOR
    return rep


def diagonal_identity_experiment(cfg: RunConfig) -> ExperimentReport:
    rep = _report("diagonal-identity", cfg, ["depth", "trial", "max_deviation"])
    for depth in cfg.depth_list:
        lattice = Lattice(depth)
        haars = [haar_function(i, depth) for i in lattice.symbol_intervals()]
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            b, d = draw_symbols(rng, depth, cfg.symbols, t)
            e = e_sequence(schur(b, d)).values
            dev = max(abs(inner(compose(b, d, h), h) - e[i]) for i, h in enumerate(haars))
            rep.records.append({"depth": depth, "trial": t, "max_deviation": dev})
            if dev > IDENTITY_TOL:
                rep.violations.append(f"depth {depth} trial {t}: deviation {dev!r}")
    rep.summary = {"max_deviation": max(r["max_deviation"] for r in rep.records), "tolerance": IDENTITY_TOL}
    return rep


def norm_ratio_experiment(cfg: RunConfig) -> ExperimentReport:
    """Ratio of ``||Pi_b^* Pi_d||_{L^2}`` to ``||S(bd)||_CM + ||E(bd)||_inf``."""
    rep = _report("theorem11", cfg, [
        "depth", "trial", "norm", "sweep_cm", "e_linf", "denominator", "ratio", "branch", "lp_lower",
    ])
    per_depth = {}
    for depth in cfg.depth_list:
        ratios = []
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            b, d = draw_symbols(rng, depth, cfg.symbols, t)
            rec = _norm_ratio_record(b, d, rep, f"depth {depth} trial {t}")
            rec.update(depth=depth, trial=t, lp_lower=None)
            if cfg.p != 2:
                # p != 2: only a certified lower bound is available
                rec["lp_lower"] = operator_norm_lpw_lower(
                    composition_matrix(b, d), cfg.p, seed=[cfg.seed, depth, t, 2])
            rep.records.append(rec)
            ratios.append(rec["ratio"])
        per_depth[depth] = _stats(ratios)
    finite = [r["ratio"] for r in rep.records if r["ratio"] is not None]
    constant = max(max(finite), 1.0 / min(finite)) if finite else None
    rep.summary = {
        "per_depth": {str(k): v for k, v in per_depth.items()},
        "two_sided_constant": constant,
        "max_ratio_growth": _growth(per_depth),
        "branches": _count(rep.records, "branch"),
    }
    if cfg.p != 2:
        rep.summary["lp_lower_over_denominator"] = _stats(
            r["lp_lower"] / r["denominator"] for r in rep.records if r["denominator"])
    return rep


def _count(records, key):
    out = {}
    for r in records:
        out[r[key]] = out.get(r[key], 0) + 1
    return dict(sorted(out.items()))


def _norm_ratio_record(b, d, rep, label):
    bd = schur(b, d)
    s_cm, e_inf = prsw_quantity(bd)
    den = s_cm + e_inf
    num = operator_norm_l2w(composition_matrix(b, d))
    ratio, branch = None, "ratio"
    if den == 0:
        if num == 0:
            branch = "zero"
        elif root_supported(bd):
            branch = "root-boundary"
        else:
            branch = "inconsistent"
            rep.violations.append(f"{label}: denominator 0 but operator norm {num!r}")
    else:
        ratio = num / den
    return {"norm": num, "sweep_cm": s_cm, "e_linf": e_inf, "denominator": den,
            "ratio": ratio, "branch": branch}


def schur_bound_experiment(cfg: RunConfig) -> ExperimentReport:
    """``||S(bd)||_CM + ||E(bd)||_inf`` against ``||b||_CM ||d||_CM``."""
    rep = _report("prop14", cfg, ["depth", "trial", "lhs", "rhs", "ratio", "e_ratio"])
    for depth in cfg.depth_list:
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            b, d = draw_symbols(rng, depth, cfg.symbols, t)
            s_cm, e_inf = prsw_quantity(schur(b, d))
            rhs = cm_norm(b) * cm_norm(d)
            rec = {"depth": depth, "trial": t, "lhs": s_cm + e_inf, "rhs": rhs,
                   "ratio": (s_cm + e_inf) / rhs if rhs else None,
                   "e_ratio": e_inf / rhs if rhs else None}
            rep.records.append(rec)
            # Cauchy-Schwarz: the E part alone never exceeds the product
            if rhs and e_inf > rhs * (1 + IDENTITY_TOL):
                rep.violations.append(f"depth {depth} trial {t}: ||E||_inf {e_inf!r} > {rhs!r}")
    gap = {}
    for depth in cfg.depth_list:
        b, d = disjoint_singletons(depth)
        s_cm, e_inf = prsw_quantity(schur(b, d))
        gap[str(depth)] = {"lhs": s_cm + e_inf, "rhs": cm_norm(b) * cm_norm(d)}
        if not (s_cm + e_inf == 0 < cm_norm(b) * cm_norm(d)):
            rep.violations.append(f"depth {depth}: disjoint singletons do not give 0 < rhs")
    rep.summary = {
        "ratio": _stats(r["ratio"] for r in rep.records),
        "e_ratio": _stats(r["e_ratio"] for r in rep.records),
        "recorded_constant": _stats(r["ratio"] for r in rep.records)["max"],
        "disjoint_singletons": gap,
    }
    return rep


def upper_bound_experiment(cfg: RunConfig) -> ExperimentReport:
    """Merged sparse form against ``|<Pi_b^* Pi_d f, g>|``."""
    rep = _report("upper-bound", cfg, [
        "depth", "trial", "lhs", "norm_sum", "sparse_form", "constant",
        "c_paraproduct", "c_adjoint", "c_martingale", "lacey_constant",
        "merged_size", "merged_eta", "sparse_norm_w", "a2", "sparse_norm_ratio",
    ])
    per_depth = {}
    for depth in cfg.depth_list:
        consts = []
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            b, d = draw_symbols(rng, depth, cfg.symbols, t)
            f = draw_function(rng, depth)
            g = draw_function(rng, depth)
            w = draw_weight(cfg, depth, t, {"kind": "cascade", "rho": 0.3})
            try:
                rec = _upper_bound_record(b, d, f, g, w)
            except SparseConstructionError as exc:
                rep.violations.append(f"depth {depth} trial {t}: {exc}")
                continue
            rec.update(depth=depth, trial=t)
            rep.records.append(rec)
            consts.append(rec["constant"])
        per_depth[depth] = _stats(consts)
    rep.summary = {
        "per_depth": {str(k): v for k, v in per_depth.items()},
        "max_constant_growth": _growth(per_depth),
        "sparse_norm_ratio": _stats(r["sparse_norm_ratio"] for r in rep.records),
    }
    return rep


def _ratio(num, den):
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def _upper_bound_record(b, d, f, g, w):
    bd = schur(b, d)
    s = sweep(bd)
    e = e_sequence(bd)
    s_cm, e_inf = cm_norm(s), linf_norm(e)
    fam_pi = stopping_sparse_pair(f, g)
    fam_adj = stopping_sparse_pair(g, f)
    lacey = lacey_pointwise_sparse(e, f)
    merged = merge_three(fam_pi, fam_adj, lacey.collection)
    verdict = verify_sparse(merged)
    if not verdict.valid or verdict.worst_ratio < merged.eta:
        raise SparseConstructionError("merged family failed verification")
    lhs = abs(bilinear_form(bd, f, g))
    form = sparse_bilinear(merged, f, g)
    a2 = a_p_characteristic(w, 2)
    snorm = sparse_norm_l2w(merged, w)
    return {
        "lhs": lhs,
        "norm_sum": s_cm + e_inf,
        "sparse_form": form,
        "constant": _ratio(lhs, (s_cm + e_inf) * form),
        "c_paraproduct": _ratio(abs(inner(pi(s, f), g)), s_cm * sparse_bilinear(fam_pi, f, g)),
        "c_adjoint": _ratio(abs(inner(pi_star(s, f), g)), s_cm * sparse_bilinear(fam_adj, f, g)),
        "c_martingale": _ratio(abs(inner(martingale(e, f), g)), e_inf * sparse_bilinear(lacey.collection, f, g)),
        "lacey_constant": lacey.constant,
        "merged_size": len(merged),
        "merged_eta": f"{merged.eta.numerator}/{merged.eta.denominator}",
        "sparse_norm_w": snorm,
        "a2": a2,
        "sparse_norm_ratio": snorm / a2,
    }


def lower_bound_experiment(cfg: RunConfig) -> ExperimentReport:
    """Weighted lower bound with its two mechanism checks."""
    rep = _report("lower-bound", cfg, [
        "depth", "trial", "lhs", "norm_w", "a2", "a_infty", "c_trial", "c_a2",
        "diag_check_max", "chain_check_max",
        "equality_parent", "tested_parent", "equality_self", "tested_self",
    ])
    default_w = {"kind": "cascade", "rho": 0.3}
    per_depth = {}
    for depth in cfg.depth_list:
        consts = []
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            b, d = draw_symbols(rng, depth, cfg.symbols, t)
            w = draw_weight(cfg, depth, t, default_w)
            rec = _lower_bound_record(b, d, w, rep, f"depth {depth} trial {t}")
            rec.update(depth=depth, trial=t)
            rep.records.append(rec)
            consts.append(rec["c_trial"])
        per_depth[depth] = _stats(consts)
    equality = {}
    for reading in ("parent", "self"):
        held = sum(r[f"equality_{reading}"] for r in rep.records)
        tested = sum(r[f"tested_{reading}"] for r in rep.records)
        equality[reading] = {"holds": held, "tested": tested, "always": held == tested > 0}
    rep.summary = {
        "per_depth": {str(k): v for k, v in per_depth.items()},
        "max_constant_growth": _growth(per_depth),
        "c_a2": _stats(r["c_a2"] for r in rep.records),
        "a2": _stats(r["a2"] for r in rep.records),
        "testing_equality": equality,
    }
    return rep


def _lower_bound_record(b, d, w: Weight, rep, label):
    depth = b.depth
    bd = schur(b, d)
    s_cm, e_inf = prsw_quantity(bd)
    lhs = s_cm + e_inf
    m = composition_matrix(b, d)
    norm_w = operator_norm_l2w(m, w)
    a2 = a_p_characteristic(w, 2)
    ainf = a_infty_characteristic(w)
    big = max(a2, ainf * a2 ** 2)

    winv = w.inverse()
    w_avgs = np.concatenate(w.level_averages()[:-1])
    winv_avgs = np.concatenate(winv.level_averages()[:-1])
    # ||h_I||_{L2(w)} ||h_I||_{L2(1/w)} = (<w>_I <1/w>_I)^(1/2)
    haar_pair = np.sqrt(w_avgs * winv_avgs)
    e = e_sequence(bd).values
    bound = norm_w * haar_pair
    diag = float(np.max(np.abs(e) / np.where(bound > 0, bound, np.inf))) if norm_w > 0 else 0.0
    if norm_w == 0 and np.any(e):
        diag = math.inf
    if diag > 1 + DUALITY_SLACK:
        rep.violations.append(f"{label}: |E_I| exceeds the L2(w) duality bound ({diag!r})")

    s = sweep(bd).values
    chain = 0.0
    holds = {"self": 0, "parent": 0}
    tested = {"self": 0, "parent": 0}
    for q in Lattice(depth).symbol_intervals():
        big_f = testing_function(bd, ROOT, depth, q)
        # sum of S_J^2 over J inside q (all J inside q are admissible at k = depth)
        admissible = 0.0
        for level in range(q.level, depth):
            lo = q.position << (level - q.level)
            hi = (q.position + 1) << (level - q.level)
            sl = level_slice(level)
            admissible += float(np.sum(s[sl.start + lo:sl.start + hi] ** 2))
        f_w = lp_w_norm(big_f, 2, w)
        readings = {"self": q}
        if q.level > 0:
            readings["parent"] = DyadicInterval(q.level - 1, q.position // 2)
        for reading, khat in readings.items():
            h = haar_function(khat, depth)
            pairing = abs(bilinear_form(bd, big_f, h))
            # at the finest symbol level the sweep vanishes and both sides are 0
            if admissible > 0:
                claimed = admissible * 2.0 ** (khat.level / 2)
                tested[reading] += 1
                holds[reading] += abs(pairing - claimed) <= EQUALITY_TOL * (1 + claimed)
            cap = norm_w * f_w * math.sqrt(winv_avgs[khat.heap_index])
            if pairing > 0:
                chain = max(chain, pairing / cap if cap > 0 else math.inf)
    if chain > 1 + DUALITY_SLACK:
        rep.violations.append(f"{label}: testing pairing exceeds the L2(w) duality bound ({chain!r})")

    return {
        "lhs": lhs, "norm_w": norm_w, "a2": a2, "a_infty": ainf,
        "c_trial": _ratio(lhs, big * norm_w),
        "c_a2": _ratio(lhs, a2 * norm_w),
        "diag_check_max": diag, "chain_check_max": chain,
        "equality_parent": holds["parent"], "tested_parent": tested["parent"],
        "equality_self": holds["self"], "tested_self": tested["self"],
    }


def petermichl_pott_experiment(cfg: RunConfig) -> ExperimentReport:
    rep = _report("petermichl-pott", cfg, ["depth", "trial", "a2", "r_up", "r_down"])
    per_depth = {}
    for depth in cfg.depth_list:
        ups, downs = [], []
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            f = draw_function(rng, depth, mean_zero=True)
            w = draw_weight(cfg, depth, t, {"kind": "cascade", "rho": 0.3})
            a2 = a_p_characteristic(w, 2)
            up, down = petermichl_pott_ratios(f, w, a2)
            rep.records.append({"depth": depth, "trial": t, "a2": a2, "r_up": up, "r_down": down})
            ups.append(up)
            downs.append(down)
        per_depth[depth] = {"r_up": _stats(ups), "r_down": _stats(downs)}
    rep.summary = {
        "per_depth": {str(k): v for k, v in per_depth.items()},
        "r_up": _stats(r["r_up"] for r in rep.records),
        "r_down": _stats(r["r_down"] for r in rep.records),
    }
    return rep


def sparse_verify_experiment(cfg: RunConfig) -> ExperimentReport:
    rep = _report("sparse-verify", cfg, [
        "depth", "trial", "pair_size", "pair_ratio", "lacey_size", "lacey_ratio",
        "lacey_constant", "lacey_threshold", "merged_size", "merged_ratio",
    ])
    for depth in cfg.depth_list:
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            # heavy-tailed inputs force deep stopping chains
            f1 = StepFunction(rng.standard_normal(1 << depth) * rng.uniform(0, 1, 1 << depth) ** 4)
            f2 = draw_function(rng, depth)
            eps = SymbolSequence(rng.uniform(-1, 1, (1 << depth) - 1))
            try:
                pair = stopping_sparse_pair(f1, f2)
                lacey = lacey_pointwise_sparse(eps, f1)
                merged = merge_three(pair, stopping_sparse_pair(f2, f1), lacey.collection)
            except SparseConstructionError as exc:
                rep.violations.append(f"depth {depth} trial {t}: {exc}")
                continue
            vp, vl, vm = verify_sparse(pair), verify_sparse(lacey.collection), verify_sparse(merged)
            rec = {
                "depth": depth, "trial": t,
                "pair_size": len(pair), "pair_ratio": float(vp.worst_ratio),
                "lacey_size": len(lacey.collection), "lacey_ratio": float(vl.worst_ratio),
                "lacey_constant": lacey.constant, "lacey_threshold": lacey.max_threshold,
                "merged_size": len(merged), "merged_ratio": float(vm.worst_ratio),
            }
            rep.records.append(rec)
            label = f"depth {depth} trial {t}"
            if not (vp.valid and vp.worst_ratio >= pair.eta == 0.5):
                rep.violations.append(f"{label}: stopping pair not 1/2-sparse")
            if not (vl.valid and vl.worst_ratio >= 0.5):
                rep.violations.append(f"{label}: Lacey family not 1/2-sparse")
            if not (vm.valid and vm.worst_ratio >= merged.eta >= 1 / 6):
                rep.violations.append(f"{label}: merged family not 1/6-sparse")
            # construction bound: each stopping generation adds at most lam + 4
            if lacey.constant > lacey.max_threshold + 5:
                rep.violations.append(f"{label}: Lacey constant {lacey.constant!r} above construction bound")
    rep.summary = {
        "lacey_constant": _stats(r["lacey_constant"] for r in rep.records),
        "lacey_threshold": _stats(r["lacey_threshold"] for r in rep.records),
        "min_pair_ratio": min((r["pair_ratio"] for r in rep.records), default=None),
        "min_lacey_ratio": min((r["lacey_ratio"] for r in rep.records), default=None),
        "min_merged_ratio": min((r["merged_ratio"] for r in rep.records), default=None),
    }
    return rep


def square_identity_experiment(cfg: RunConfig) -> ExperimentReport:
    rep = _report("square-identity", cfg, ["depth", "trial", "residual"])
    for depth in cfg.depth_list:
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            f = draw_function(rng, depth)
            w = draw_weight(cfg, depth, t, {"kind": "cascade", "rho": 0.5})
            res = weighted_square_identity(f, w)
            rep.records.append({"depth": depth, "trial": t, "residual": res})
            if res > IDENTITY_TOL:
                rep.violations.append(f"depth {depth} trial {t}: residual {res!r}")
    rep.summary = {"max_residual": max(r["residual"] for r in rep.records), "tolerance": IDENTITY_TOL}
    return rep


def bmo_identity_residual(f: StepFunction) -> float:
    """``max_I |(1/|I|) int_I |f - <f>_I|^2 - (1/|I|) sum_{J subset I} f_J^2|``."""
    return float(np.max(np.abs(oscillations(f, "l2") - carleson_averages(analyze(f).coeffs))))


def bmo_identity_experiment(cfg: RunConfig) -> ExperimentReport:
    rep = _report("bmo-identity", cfg, ["depth", "trial", "max_residual", "bmo_l2", "cm", "bmo_l1"])
    for depth in cfg.depth_list:
        for t in range(cfg.trials):
            rng = trial_rng(cfg.seed, depth, t)
            f = draw_function(rng, depth)
            res = bmo_identity_residual(f)
            l2, l1 = bmo_norm(f, "l2"), bmo_norm(f, "l1")
            cm = cm_norm(analyze(f).coeffs)
            rep.records.append({"depth": depth, "trial": t, "max_residual": res,
                                "bmo_l2": l2, "cm": cm, "bmo_l1": l1})
            if res > IDENTITY_TOL:
                rep.violations.append(f"depth {depth} trial {t}: residual {res!r}")
            if l1 > l2 * (1 + IDENTITY_TOL):
                rep.violations.append(f"depth {depth} trial {t}: l1 BMO exceeds l2 BMO")
    rep.summary = {"max_residual": max(r["max_residual"] for r in rep.records), "tolerance": IDENTITY_TOL}
    return rep


@dataclass(frozen=True)
class Experiment:
    name: str
    description: str
    run: Callable[[RunConfig], ExperimentReport]


EXPERIMENTS = {
    e.name: e
    for e in (
        Experiment("pott-smith", "three-term decomposition residuals (strict vs inclusive E)", pott_smith_experiment),
        Experiment("diagonal-identity", "<Pi_b^* Pi_d h_I, h_I> against E(b o d)_I", diagonal_identity_experiment),
        Experiment("theorem11", "L2 operator norm over sweep-CM plus E-sup, ratio distribution", norm_ratio_experiment),
        Experiment("upper-bound", "bilinear sparse bound of the composition via merged families", upper_bound_experiment),
        Experiment("lower-bound", "weighted lower bound and testing-function chain", lower_bound_experiment),
        Experiment("prop14", "sweep-CM plus E-sup against the product of CM norms", schur_bound_experiment),
        Experiment("petermichl-pott", "weighted square-function ratios r_up and r_down", petermichl_pott_experiment),
        Experiment("sparse-verify", "stopping, Lacey and merged families pass the sparsity check", sparse_verify_experiment),
        Experiment("square-identity", "||Sf||_{L2(w)}^2 against sum f_I^2 <w>_I", square_identity_experiment),
        Experiment("bmo-identity", "local L2 oscillation against descendant coefficient sums", bmo_identity_experiment),
    )
}


def list_experiments() -> list[tuple[str, str]]:
    return [(e.name, e.description) for e in EXPERIMENTS.values()]


def run_experiment(cfg: RunConfig) -> ExperimentReport:
    try:
        exp = EXPERIMENTS[cfg.experiment]
    except KeyError:
        raise KeyError(f"unknown experiment {cfg.experiment!r}") from None
    return exp.run(cfg)
