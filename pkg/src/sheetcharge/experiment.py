"""Seeded experiment drivers and the thin-slab counterexample construction.

Each runner consumes a validated ExperimentConfig, writes CSV/JSON reports
plus a reproducibility manifest into the output directory, and is fully
deterministic given the config: re-running a manifest must reproduce the
CSV outputs byte for byte.  Floats are printed with 17 significant digits
so the files are stable regression artifacts.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import __version__
from .criteria import (
    build_report,
    holder_ratio_by_level,
    moment_scaling_fit,
)
from .dyadic import DyadicCube, Figure, figure_perimeter, morton_encode
from .increments import GridSample, coefficient_table, cube_increments, increment_levels
from .sampler import (
    HurstVector,
    replicate_rng,
    sample_sheet_ensemble,
    sample_standard_sheet,
    save_grid,
    grid_to_csv,
    sheet_covariance,
)

__all__ = [
    "ExperimentConfig",
    "ConfigError",
    "CounterexampleReport",
    "counterexample_figure",
    "run",
    "SUBCOMMANDS",
]


class ConfigError(ValueError):
    """Invalid experiment configuration."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment parameters shared by all subcommands."""

    subcommand: str
    d: int = 2
    N: int = 8
    M: int | None = None
    H: tuple[float, ...] | None = None
    q: tuple[float, ...] = (2.0,)
    gamma: tuple[float, ...] = (0.7,)
    seeds: tuple[int, ...] = (0,)
    replicates: int = 1
    out: str = "out"
    pairs: int = 10
    n: int = 3
    p_max: int | None = None
    hbar: float | None = None
    gens: tuple[int, ...] | None = None
    fit_min_gen: int = 3

    def __post_init__(self) -> None:
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(
                f"unknown subcommand {self.subcommand!r}; pick one of {sorted(SUBCOMMANDS)}"
            )
        if self.d < 1:
            raise ConfigError("d must be >= 1")
        if self.N < 1:
            raise ConfigError("N must be >= 1")
        m = self.M if self.M is not None else self.N - 1
        if not 0 <= m <= self.N - 1:
            raise ConfigError(f"need 0 <= M <= N-1, got M={m}, N={self.N}")
        object.__setattr__(self, "M", m)
        if not self.seeds:
            raise ConfigError("seeds must be nonempty")
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        if self.H is not None:
            hv = HurstVector(tuple(self.H))
            if hv.dim != self.d:
                raise ConfigError("H must have one component per axis")
            object.__setattr__(self, "H", hv.components)
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        pm = self.p_max if self.p_max is not None else self.N - 1
        if self.subcommand == "counterexample" and not self.n <= pm <= self.N - 1:
            raise ConfigError(f"need n <= p_max <= N-1, got n={self.n}, p_max={pm}")
        object.__setattr__(self, "p_max", pm)
        object.__setattr__(self, "q", tuple(float(x) for x in self.q))
        object.__setattr__(self, "gamma", tuple(float(x) for x in self.gamma))
        if self.gens is not None:
            object.__setattr__(self, "gens", tuple(int(g) for g in self.gens))

    @classmethod
    def from_json_obj(cls, obj: dict) -> "ExperimentConfig":
        if "config" in obj:  # manifest round-trip
            obj = obj["config"]
        known = {f for f in cls.__dataclass_fields__}
        unknown = set(obj) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(obj)
        for key in ("H", "q", "gamma", "seeds", "gens"):
            if key in kwargs and kwargs[key] is not None:
                kwargs[key] = tuple(kwargs[key])
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class CounterexampleReport:
    """Outcome of one thin-slab figure search."""

    start_gen: int
    max_gen: int
    exponent: float
    coverage: float
    increment: float
    threshold_sum: float
    volume: float
    perimeter: float
    selected_per_level: tuple[int, ...]
    low_coverage: bool


def counterexample_figure(
    f: GridSample, n: int, p_max: int, exponent: float
) -> tuple[Figure, CounterexampleReport]:
    """Greedy thin-slab figure made of bottom-layer cubes with large increments.

    Scans the cubes touching the hyperplane x_d = 0 coarse-to-fine over
    generations n..p_max and selects a cube whenever its increment is at
    least |cube|^exponent and its bottom face is not yet covered, so the
    selected cubes are maximal and pairwise disjoint.  The report records
    the covered fraction of the bottom face; a full sweep would cover it
    almost surely only in the infinite-resolution limit, so low coverage
    is flagged, never an error.
    """
    d = f.dim
    if not 0 <= n <= p_max <= f.gen - 1:
        raise ValueError(f"need 0 <= n <= p_max <= N-1, got n={n}, p_max={p_max}")
    levels = increment_levels(f, p_max)
    trans_shape = (1 << p_max,) * (d - 1)
    covered = np.zeros(trans_shape, dtype=bool)
    cubes: list[DyadicCube] = []
    per_level = []
    threshold_sum = 0.0
    increment_sum = 0.0
    coverage = Fraction(0)
    for p in range(n, p_max + 1):
        bottom = np.asarray(levels[p][..., 0])  # cubes touching x_d = 0
        if bottom.dtype == object:
            bottom = bottom.astype(float)
        threshold = 2.0 ** (-p * d * exponent)
        count = 0
        scale = 1 << (p_max - p)
        for m in np.ndindex(*((1 << p,) * (d - 1))):
            value = float(bottom[m])
            if value < threshold:
                continue
            block = tuple(slice(mi * scale, (mi + 1) * scale) for mi in m)
            if covered[block].any():
                continue
            covered[block] = True
            index = morton_encode(tuple(m) + (0,), p)
            cubes.append(DyadicCube(d, p, index))
            count += 1
            threshold_sum += threshold
            increment_sum += value
            coverage += Fraction(1, 1 << (p * (d - 1)))
        per_level.append(count)
    fig = Figure(d, tuple(cubes))
    report = CounterexampleReport(
        start_gen=n,
        max_gen=p_max,
        exponent=exponent,
        coverage=float(coverage),
        increment=increment_sum,
        threshold_sum=threshold_sum,
        volume=float(fig.volume()),
        perimeter=float(figure_perimeter(fig)) if cubes else 0.0,
        selected_per_level=tuple(per_level),
        low_coverage=coverage < Fraction(1, 2),
    )
    return fig, report


def _sample_for(cfg: ExperimentConfig, seed: int) -> GridSample:
    if cfg.H is None:
        return sample_standard_sheet(cfg.d, cfg.N, seed)
    return next(iter(sample_sheet_ensemble(cfg.H, cfg.N, seed, 1)))


def _write_manifest(cfg: ExperimentConfig, out: Path) -> Path:
    manifest = {
        "library": "sheetcharge",
        "version": __version__,
        "subcommand": cfg.subcommand,
        "config": asdict(cfg),
    }
    path = out / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def run_simulate(cfg: ExperimentConfig, out: Path) -> list[Path]:
    paths = []
    for seed in cfg.seeds:
        f = _sample_for(cfg, seed)
        binary = out / f"sample_seed{seed}.grid"
        save_grid(f, binary)
        paths.append(binary)
        if cfg.d <= 2:
            csv_path = out / f"sample_seed{seed}.csv"
            grid_to_csv(f, csv_path)
            paths.append(csv_path)
    return paths


def run_covariance_check(cfg: ExperimentConfig, out: Path) -> list[Path]:
    if cfg.H is None:
        raise ConfigError("covariance-check requires H")
    seed = cfg.seeds[0]
    n_pts = 1 << cfg.N
    picker = replicate_rng(seed, 10**6)
    pairs = []
    for _ in range(cfg.pairs):
        s = tuple(int(j) for j in picker.integers(1, n_pts + 1, size=cfg.d))
        t = tuple(int(j) for j in picker.integers(1, n_pts + 1, size=cfg.d))
        pairs.append((s, t))
    sums = np.zeros(len(pairs))
    for f in sample_sheet_ensemble(cfg.H, cfg.N, seed, cfg.replicates):
        for i, (s, t) in enumerate(pairs):
            sums[i] += f.values[s] * f.values[t]
    emp = sums / cfg.replicates
    rows = []
    for i, (s, t) in enumerate(pairs):
        sp = tuple(j / n_pts for j in s)
        tp = tuple(j / n_pts for j in t)
        exact = sheet_covariance(cfg.H, sp, tp)
        var = sheet_covariance(cfg.H, sp, sp) * sheet_covariance(cfg.H, tp, tp) + exact**2
        se = (var / cfg.replicates) ** 0.5
        z = (emp[i] - exact) / se if se > 0 else 0.0
        rows.append((f"{s}|{t}", emp[i], exact, z))
    path = out / "covariance_check.csv"
    with open(path, "w") as fh:
        fh.write("pair,empirical,exact,z\n")
        for name, e, x, z in rows:
            fh.write(f"\"{name}\",{_fmt(e)},{_fmt(x)},{_fmt(z)}\n")
    return [path]


def run_brownian_dichotomy(cfg: ExperimentConfig, out: Path) -> list[Path]:
    path = out / "brownian_dichotomy.csv"
    means = np.zeros(cfg.M + 1)
    with open(path, "w") as fh:
        fh.write("seed,n,stat_name,value\n")
        for seed in cfg.seeds:
            f = sample_standard_sheet(cfg.d, cfg.N, seed)
            rep = build_report(coefficient_table(f, cfg.M), hurst=(0.5,) * cfg.d)
            for n, name, value in rep.rows():
                fh.write(f"{seed},{n},{name},{_fmt(value)}\n")
            means += np.asarray(rep.t_stats)
    summary = {
        "mean_abs_by_gen": [m / len(cfg.seeds) for m in means],
        "half_normal_mean": float(np.sqrt(2.0 / np.pi)),
        "seeds": list(cfg.seeds),
    }
    jpath = out / "brownian_dichotomy.json"
    with open(jpath, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return [path, jpath]


def _fit_b_slope(b_terms: Sequence[float], n_min: int) -> float:
    """Per-level log2 ratio of the convergence-side terms, least squares."""
    ns = np.arange(n_min, len(b_terms))
    ys = np.log2(np.asarray(b_terms)[n_min:])
    return float(np.polyfit(ns, ys, 1)[0])


def run_fractional_criteria(cfg: ExperimentConfig, out: Path) -> list[Path]:
    if cfg.H is None:
        raise ConfigError("fractional-criteria requires H")
    path = out / "fractional_criteria.csv"
    slopes = []
    with open(path, "w") as fh:
        fh.write("seed,n,stat_name,value\n")
        for seed in cfg.seeds:
            f = next(iter(sample_sheet_ensemble(cfg.H, cfg.N, seed, 1)))
            rep = build_report(coefficient_table(f, cfg.M), hurst=cfg.H)
            for n, name, value in rep.rows():
                fh.write(f"{seed},{n},{name},{_fmt(value)}\n")
            slopes.append(_fit_b_slope(rep.b_terms, cfg.fit_min_gen))
    hbar = sum(cfg.H) / cfg.d
    summary = {
        "fitted_log2_ratio_by_seed": slopes,
        "fit_min_gen": cfg.fit_min_gen,
        "reference_rate": cfg.d - 1 - cfg.d * hbar,
        "seeds": list(cfg.seeds),
    }
    jpath = out / "fractional_criteria.json"
    with open(jpath, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return [path, jpath]


def run_holder_scan(cfg: ExperimentConfig, out: Path) -> list[Path]:
    path = out / "holder_scan.csv"
    with open(path, "w") as fh:
        fh.write("seed,gamma,n,ratio\n")
        for seed in cfg.seeds:
            f = _sample_for(cfg, seed)
            for gamma in cfg.gamma:
                ratios = holder_ratio_by_level(f, gamma, cfg.M)
                for n, r in enumerate(ratios):
                    fh.write(f"{seed},{_fmt(gamma)},{n},{_fmt(r)}\n")
    return [path]


def run_moment_scaling(cfg: ExperimentConfig, out: Path) -> list[Path]:
    if cfg.H is None:
        raise ConfigError("moment-scaling requires H")
    gens = cfg.gens if cfg.gens is not None else tuple(range(2, cfg.M + 1))
    seed = cfg.seeds[0]
    pooled: dict[int, list[np.ndarray]] = {n: [] for n in gens}
    for f in sample_sheet_ensemble(cfg.H, cfg.N, seed, cfg.replicates):
        for n in gens:
            pooled[n].append(np.asarray(cube_increments(f, n), dtype=float))
    samples = {n: np.concatenate(chunks) for n, chunks in pooled.items()}
    path = out / "moment_scaling.csv"
    fits = {}
    with open(path, "w") as fh:
        fh.write("q,n,log2_volume,log2_moment,count\n")
        for q in cfg.q:
            fit = moment_scaling_fit(samples, q, cfg.d)
            fits[q] = fit
            for n, lv, lm, count in fit.points:
                fh.write(f"{_fmt(q)},{n},{_fmt(lv)},{_fmt(lm)},{count}\n")
    hbar = sum(cfg.H) / cfg.d
    summary = {
        "fits": [
            {
                "q": q,
                "slope": fit.slope,
                "delta_hat": fit.delta_hat,
                "reference_slope": q * hbar,
                "excluded_generations": list(fit.excluded),
            }
            for q, fit in fits.items()
        ],
        "replicates": cfg.replicates,
        "seed": seed,
    }
    jpath = out / "moment_scaling.json"
    with open(jpath, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    return [path, jpath]


def run_counterexample(cfg: ExperimentConfig, out: Path) -> list[Path]:
    hbar = cfg.hbar
    if hbar is None:
        hbar = sum(cfg.H) / cfg.d if cfg.H is not None else 0.5
    path = out / "counterexample.csv"
    coverages = []
    paths = [path]
    with open(path, "w") as fh:
        fh.write("seed,coverage,increment,threshold_sum,volume,perimeter,selected\n")
        for seed in cfg.seeds:
            f = _sample_for(cfg, seed)
            fig, rep = counterexample_figure(f, cfg.n, cfg.p_max, hbar)
            coverages.append(rep.coverage)
            fh.write(
                f"{seed},{_fmt(rep.coverage)},{_fmt(rep.increment)},"
                f"{_fmt(rep.threshold_sum)},{_fmt(rep.volume)},"
                f"{_fmt(rep.perimeter)},{sum(rep.selected_per_level)}\n"
            )
            fig_path = out / f"counterexample_figure_seed{seed}.json"
            with open(fig_path, "w") as fj:
                fj.write(fig.to_json() + "\n")
            paths.append(fig_path)
    summary = {
        "median_coverage": float(np.median(coverages)),
        "exponent": hbar,
        "start_gen": cfg.n,
        "max_gen": cfg.p_max,
        "seeds": list(cfg.seeds),
    }
    jpath = out / "counterexample.json"
    with open(jpath, "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    paths.append(jpath)
    return paths


SUBCOMMANDS: dict[str, Callable[[ExperimentConfig, Path], list[Path]]] = {
    "simulate": run_simulate,
    "covariance-check": run_covariance_check,
    "brownian-dichotomy": run_brownian_dichotomy,
    "fractional-criteria": run_fractional_criteria,
    "holder-scan": run_holder_scan,
    "moment-scaling": run_moment_scaling,
    "counterexample": run_counterexample,
}


def run(cfg: ExperimentConfig) -> list[Path]:
    """Execute one subcommand: reports plus a reproducibility manifest."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = [_write_manifest(cfg, out)]
    paths.extend(SUBCOMMANDS[cfg.subcommand](cfg, out))
    return paths
