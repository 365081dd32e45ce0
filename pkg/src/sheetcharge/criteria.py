"""Finite-horizon chargeability diagnostics on coefficient tables.

All statistics are reported per generation up to an explicit horizon and
never claim a limit: the divergence/convergence dichotomy they probe is
asymptotic, so only growth and decay rates across generations are
meaningful, not absolute constants.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .increments import CoefficientTable, GridSample, increment_levels

__all__ = [
    "criterion_a_statistic",
    "dichotomy_statistics",
    "criterion_b_terms",
    "criterion_b_partial_sums",
    "holder_ratio_by_level",
    "holder_ratio",
    "MomentScalingFit",
    "moment_scaling_fit",
    "CriterionReport",
    "build_report",
]


def _level_abs(tab: CoefficientTable, n: int) -> np.ndarray:
    lev = tab.level(n)
    if lev.dtype == object:
        lev = lev.astype(float)
    return np.abs(lev)


def criterion_a_statistic(tab: CoefficientTable, n: int) -> float:
    """Divergence-side statistic: 2^(-n(d/2+1)) max_r sum_k |coeff|.

    Bounded away from zero along a subsequence exactly when the expansion
    cannot converge; reported per generation, constant-free.
    """
    lam = _level_abs(tab, n)
    return 2.0 ** (-n * (tab.dim / 2.0 + 1.0)) * float(lam.sum(axis=0).max())


def dichotomy_statistics(tab: CoefficientTable, n: int) -> tuple[float, float]:
    """Mean absolute type-1 coefficient and its rescaling.

    Returns (T, S) with T = 2^(-nd) sum_k |coeff(n, k, 1)| and
    S = 2^(n(d/2-1)) T.  For the standard sheet T concentrates at
    sqrt(2/pi) ~ 0.7979 as n grows.
    """
    lam = _level_abs(tab, n)
    t = float(lam[:, 0].sum()) / 2.0 ** (n * tab.dim)
    return t, 2.0 ** (n * (tab.dim / 2.0 - 1.0)) * t


def criterion_b_terms(tab: CoefficientTable) -> np.ndarray:
    """Convergence-side series terms 2^(n(d/2-1)) max_{k,r} |coeff| per level."""
    out = np.empty(tab.max_gen + 1)
    for n in range(tab.max_gen + 1):
        lam = _level_abs(tab, n)
        out[n] = 2.0 ** (n * (tab.dim / 2.0 - 1.0)) * float(lam.max(initial=0.0))
    return out


def criterion_b_partial_sums(tab: CoefficientTable) -> np.ndarray:
    """Partial sums of the convergence-side series, one per horizon."""
    return np.cumsum(criterion_b_terms(tab))


def holder_ratio_by_level(f: GridSample, gamma: float, max_gen: int) -> np.ndarray:
    """Per-generation max_k |increment| / |cube|^gamma for n = 0..max_gen."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError(f"gamma must lie in (0, 1], got {gamma}")
    levels = increment_levels(f, max_gen)
    out = np.empty(max_gen + 1)
    for n, cells in enumerate(levels):
        flat = cells.reshape(-1)
        if flat.dtype == object:
            flat = flat.astype(float)
        vol = 2.0 ** (-n * f.dim)
        out[n] = float(np.abs(flat).max()) / vol**gamma
    return out


def holder_ratio(f: GridSample, gamma: float, max_gen: int) -> float:
    """Scale-normalized increment bound over all dyadic cubes up to max_gen."""
    return float(holder_ratio_by_level(f, gamma, max_gen).max())


@dataclass(frozen=True)
class MomentScalingFit:
    """Least-squares fit of log2 E|increment|^q against log2 |cube|."""

    q: float
    slope: float
    delta_hat: float  # slope - 1, the excess over first-order volume scaling
    points: tuple[tuple[int, float, float, int], ...]  # (n, log2 vol, log2 moment, count)
    excluded: tuple[int, ...]


def moment_scaling_fit(
    samples_by_gen: Mapping[int, Sequence[float]],
    q: float,
    dim: int,
    min_count: int = 32,
) -> MomentScalingFit:
    """Fit the moment-scaling exponent from per-generation increment samples.

    Generations with fewer than ``min_count`` samples are excluded from the
    equal-weight regression; at least two must remain.
    """
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    points = []
    excluded = []
    for n in sorted(samples_by_gen):
        arr = np.asarray(samples_by_gen[n], dtype=float).reshape(-1)
        if arr.size < min_count:
            excluded.append(n)
            continue
        moment = float(np.mean(np.abs(arr) ** q))
        points.append((n, -float(n * dim), float(np.log2(moment)), arr.size))
    if len(points) < 2:
        raise ValueError("need at least two generations with enough samples")
    xs = np.array([p[1] for p in points])
    ys = np.array([p[2] for p in points])
    slope = float(np.polyfit(xs, ys, 1)[0])
    return MomentScalingFit(q, slope, slope - 1.0, tuple(points), tuple(excluded))


@dataclass(frozen=True)
class CriterionReport:
    """Per-generation criterion statistics with serialization helpers."""

    dim: int
    max_gen: int
    criterion_a: tuple[float, ...]
    b_terms: tuple[float, ...]
    b_partial_sums: tuple[float, ...]
    t_stats: tuple[float, ...] | None = None
    s_stats: tuple[float, ...] | None = None
    hurst: tuple[float, ...] | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        want = self.max_gen + 1
        for name in ("criterion_a", "b_terms", "b_partial_sums", "t_stats", "s_stats"):
            val = getattr(self, name)
            if val is not None and len(val) != want:
                raise ValueError(f"{name} must have one entry per generation 0..{self.max_gen}")

    def rows(self) -> list[tuple[int, str, float]]:
        out = []
        for n in range(self.max_gen + 1):
            out.append((n, "criterion_a", self.criterion_a[n]))
            out.append((n, "b_term", self.b_terms[n]))
            out.append((n, "b_partial_sum", self.b_partial_sums[n]))
            if self.t_stats is not None:
                out.append((n, "mean_abs", self.t_stats[n]))
            if self.s_stats is not None:
                out.append((n, "scaled_mean_abs", self.s_stats[n]))
        return out

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "stat_name", "value"])
            for n, name, value in self.rows():
                writer.writerow([n, name, format(value, ".17g")])

    def to_json(self, path=None) -> str:
        obj = {
            "d": self.dim,
            "M": self.max_gen,
            "hurst": list(self.hurst) if self.hurst else None,
            "criterion_a": list(self.criterion_a),
            "b_terms": list(self.b_terms),
            "b_partial_sums": list(self.b_partial_sums),
            "mean_abs": list(self.t_stats) if self.t_stats else None,
            "scaled_mean_abs": list(self.s_stats) if self.s_stats else None,
            "meta": self.meta,
        }
        text = json.dumps(obj, indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def build_report(
    tab: CoefficientTable, hurst: Sequence[float] | None = None, **meta
) -> CriterionReport:
    """All per-generation statistics of a coefficient table in one report."""
    gens = range(tab.max_gen + 1)
    ts = [dichotomy_statistics(tab, n) for n in gens]
    return CriterionReport(
        dim=tab.dim,
        max_gen=tab.max_gen,
        criterion_a=tuple(criterion_a_statistic(tab, n) for n in gens),
        b_terms=tuple(criterion_b_terms(tab)),
        b_partial_sums=tuple(criterion_b_partial_sums(tab)),
        t_stats=tuple(t for t, _ in ts),
        s_stats=tuple(s for _, s in ts),
        hurst=tuple(hurst) if hurst is not None else None,
        meta=dict(meta),
    )
