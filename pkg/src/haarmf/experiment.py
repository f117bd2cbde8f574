"""End-to-end study harness: simulate, estimate, aggregate, persist.

`run_case` produces per-replication path and estimate files for one
parameter set.  `replicate_table` sweeps (J, n) pairs, averages the raw
estimate curves across replications, and reports the difference
statistics of the averaged curve against the family's limiting profile,
alongside per-replication absolute-difference quantiles for boxplots.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .estimate import (
    EstimateSeries,
    EstimatorConfig,
    GridPath,
    estimate_hurst,
    loess_smooth,
    write_estimate_csv,
)
from .simulate import SimConfig, simulate_path, write_path_csv

# desk-scale sweep finishes in minutes; the full-scale sweep behind
# --paper-scale is hours of work at the top end
DESK_PAIRS = [(12, 9), (13, 10), (14, 10)]
DESK_REPS = 10
FULL_PAIRS = [(14, 10), (15, 11), (16, 12), (17, 13), (18, 14), (19, 15)]
FULL_REPS = 30


@dataclass(frozen=True)
class ExperimentConfig:
    """One case study: a family, synthesis and estimation settings, replication."""

    family: object
    sim: SimConfig
    est: EstimatorConfig = field(default_factory=EstimatorConfig)
    reps: int = 1
    out: Path = Path(".")
    svg: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.reps < 1:
            raise ConfigError(f"replication count must be positive, got {self.reps}")
        if self.workers < 1:
            raise ConfigError(f"worker count must be positive, got {self.workers}")


@dataclass(frozen=True)
class DiffStats:
    """Differences between an estimated curve and the true profile."""

    J: int
    n: int
    avg_abs: float
    max_abs: float
    mse: float


def diff_stats(h_true, h_est, J, n):
    """Average, maximum, and mean squared absolute difference."""
    h_true = np.asarray(h_true, dtype=float)
    h_est = np.asarray(h_est, dtype=float)
    if h_true.shape != h_est.shape:
        raise ValueError(f"curve lengths differ: {h_true.shape} vs {h_est.shape}")
    d = np.abs(h_est - h_true)
    return DiffStats(
        J=J, n=n, avg_abs=float(np.mean(d)), max_abs=float(np.max(d)), mse=float(np.mean(d * d))
    )


def _true_curve(family, mids):
    if family.limit is None:
        return None
    return family.limit_values(mids)


def _one_replication(family, sim_cfg, est_cfg, rep):
    cfg = replace(sim_cfg, seed=sim_cfg.seed + rep)
    path = simulate_path(family, cfg)
    series = estimate_hurst(GridPath(path.values), est_cfg)
    series.h_true = _true_curve(family, series.interval_mids)
    return path, series


def run_case(config):
    """Simulate and estimate ``reps`` paths, writing artifacts to ``out``.

    Writes ``path_rNNN.csv``/``.meta`` and ``estimate_rNNN.csv`` per
    replication; with more than one replication, also the across-rep
    average curve as ``estimate_avg.csv`` (raw curves averaged, then
    smoothed).  Figures are emitted only when ``svg`` is set.  Returns
    the per-replication series plus the averaged series, if any.
    """
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    def work(rep):
        return _one_replication(config.family, config.sim, config.est, rep)

    if config.workers > 1 and config.reps > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(work, range(config.reps)))
    else:
        results = [work(rep) for rep in range(config.reps)]

    for rep, (path, series) in enumerate(results):
        write_path_csv(path, out / f"path_r{rep:03d}")
        write_estimate_csv(series, out / f"estimate_r{rep:03d}.csv")
        if series.h_true is not None:
            stats = diff_stats(series.h_true, series.h_raw, config.sim.J, config.sim.n)
            print(
                f"rep {rep:03d} seed {path.config.seed}: "
                f"avg|diff| {stats.avg_abs:.4f}  max|diff| {stats.max_abs:.4f}  mse {stats.mse:.5f}"
            )
        else:
            print(
                f"rep {rep:03d} seed {path.config.seed}: "
                f"raw mean {np.mean(series.h_raw):.4f}  sd {np.std(series.h_raw):.4f}"
            )

    averaged = None
    if config.reps > 1:
        first = results[0][1]
        raw_avg = np.mean([series.h_raw for _, series in results], axis=0)
        averaged = replace_series(first, raw_avg, config.est.span)
        write_estimate_csv(averaged, out / "estimate_avg.csv")

    if config.svg:
        from . import plots

        for rep, (path, series) in enumerate(results):
            plots.path_figure(path, out / f"path_r{rep:03d}.svg")
            plots.hurst_figure(series, out / f"hurst_r{rep:03d}.svg")
        if averaged is not None:
            plots.hurst_figure(averaged, out / "hurst_avg.svg")

    return [series for _, series in results], averaged


def replace_series(template, new_raw, span):
    """A series like ``template`` but carrying ``new_raw`` (re-smoothed)."""
    return EstimateSeries(
        interval_mids=template.interval_mids,
        h_raw=new_raw,
        h_smooth=loess_smooth(template.interval_mids, new_raw, span),
        config=template.config,
        h_true=template.h_true,
    )


def replicate_table(
    family,
    pairs,
    reps,
    est=None,
    base_seed=0,
    out=None,
    svg=False,
    workers=1,
    tail_tol=0.0,
):
    """Difference statistics across a sweep of (J, n) pairs.

    For each pair, ``reps`` replications are run with seeds
    ``base_seed + r`` (the same offsets for every pair, so rows share
    randomness and differ by resolution alone).  The raw estimate
    curves are averaged across replications and compared with the
    family's limiting profile.  Writes ``table_stats.csv`` and
    ``table_boxplot.csv`` when ``out`` is given, plus figures when
    ``svg`` is set.  Returns the list of `DiffStats`, one per pair.
    """
    if family.limit is None:
        raise ConfigError(f"family {family.name!r} has no limiting profile to compare against")
    for J, n in pairs:
        if n > J:
            raise ConfigError(f"grid exponent n={n} exceeds truncation level J={J}")
    if reps < 1:
        raise ConfigError(f"replication count must be positive, got {reps}")
    est = est if est is not None else EstimatorConfig()

    all_stats = []
    box_rows = []
    pooled_abs = []
    per_rep_max = []
    for J, n in pairs:
        sim_cfg = SimConfig(J=J, n=n, seed=base_seed, tail_tol=tail_tol)

        def work(rep):
            _, series = _one_replication(family, sim_cfg, est, rep)
            return series

        if workers > 1 and reps > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                series_list = list(pool.map(work, range(reps)))
        else:
            series_list = [work(rep) for rep in range(reps)]

        truth = series_list[0].h_true
        raws = np.stack([s.h_raw for s in series_list])
        stats = diff_stats(truth, np.mean(raws, axis=0), J, n)
        all_stats.append(stats)
        print(
            f"J={J} n={n} reps={reps}: avg|diff| {stats.avg_abs:.4f}  "
            f"max|diff| {stats.max_abs:.4f}  mse {stats.mse:.5f}"
        )

        abs_diffs = np.abs(raws - truth[None, :])
        pooled_abs.append(abs_diffs.ravel())
        per_rep_max.append(abs_diffs.max(axis=1))
        for rep in range(reps):
            q = np.quantile(abs_diffs[rep], [0.0, 0.25, 0.5, 0.75, 1.0])
            box_rows.append((J, n, rep, *q))

    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "table_stats.csv", "w", newline="") as fh:
            fh.write("J,n,avg_abs_diff,max_abs_diff,mse\n")
            for s in all_stats:
                fh.write(f"{s.J},{s.n},{s.avg_abs:.17g},{s.max_abs:.17g},{s.mse:.17g}\n")
        with open(out / "table_boxplot.csv", "w", newline="") as fh:
            fh.write("J,n,rep,min,q1,median,q3,max\n")
            for J, n, rep, *qs in box_rows:
                fh.write(f"{J},{n},{rep}," + ",".join(f"{v:.17g}" for v in qs) + "\n")
        if svg:
            from . import plots

            labels = [f"({J},{n})" for J, n in pairs]
            plots.table_box_figure(labels, pooled_abs, out / "table_boxplot.svg")
            plots.maxdiff_figure(labels, per_rep_max, out / "table_maxdiff.svg")
    return all_stats
