"""Hurst-function estimation by generalized quadratic variations.

The estimator samples a path at a coarse resolution ``N`` and a fine
resolution ``Q N``, filters both with a vanishing-moment difference
filter, and compares the local mean square of the two increment arrays
on each cell of an interval partition:

    h_raw(I) = clamp( log(V_N(I) / V_QN(I)) / (2 log Q), 0, 1 ).

A tricube-weighted local linear pass (`loess_smooth`) turns the raw
per-interval values into the smooth curve reported by the CLI.
"""

import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .simulate import simulate_path, values_at

DEFAULT_SPAN = 0.25


@dataclass(frozen=True)
class EstimatorConfig:
    """Variation-estimator parameters.

    ``N`` is the coarse sampling resolution; ``None`` derives it from
    the source grid as ``2^n / Q`` so the fine pass uses every grid
    point.  ``Q`` is the resolution ratio, ``L`` the filter order
    (annihilates polynomials of degree < L), ``P`` the number of equal
    estimation cells, ``span`` the smoother's neighbor fraction.
    """

    N: int | None = None
    Q: int = 2
    L: int = 2
    P: int = 100
    span: float = DEFAULT_SPAN

    def __post_init__(self):
        if self.Q < 2:
            raise ConfigError(f"resolution ratio must be at least 2, got Q={self.Q}")
        if self.L < 2:
            raise ConfigError(f"filter order must be at least 2, got L={self.L}")
        if self.P < 1:
            raise ConfigError(f"cell count must be positive, got P={self.P}")
        if self.N is not None and self.N < self.L:
            raise ConfigError(f"resolution N={self.N} is below filter order L={self.L}")
        if not 0.0 < self.span <= 1.0:
            raise ConfigError(f"span must lie in (0, 1], got {self.span}")


@dataclass
class EstimateSeries:
    """Per-cell estimates: midpoints, raw and smoothed values."""

    interval_mids: np.ndarray
    h_raw: np.ndarray
    h_smooth: np.ndarray
    config: EstimatorConfig
    h_true: np.ndarray | None = None


def increment_filter(L):
    """Difference filter ``a_l = (-1)^(L-l) binom(L, l)``, as integers.

    Kills polynomials of degree below ``L``: ``sum a_l l^p = 0`` for
    ``p < L``, exactly.
    """
    if L < 2:
        raise ConfigError(f"filter order must be at least 2, got L={L}")
    return np.array([(-1) ** (L - l) * math.comb(L, l) for l in range(L + 1)], dtype=np.int64)


def generalized_increments(values, L):
    """Filtered increments ``d_k = sum_l a_l X((k+l)/N)`` for ``k = 0 .. N-L``.

    ``values`` holds ``X(k/N)`` for ``k = 0 .. N``, so ``N`` is implied
    by its length.
    """
    values = np.asarray(values, dtype=float)
    N = len(values) - 1
    if N < L:
        raise ConfigError(f"need at least L+1 = {L + 1} samples, got {len(values)}")
    a = increment_filter(L)
    out = a[0] * values[0 : N - L + 1]
    for l in range(1, L + 1):
        out = out + a[l] * values[l : N - L + 1 + l]
    return out


def variation_cells(N, L, interval):
    """Indices ``k`` with ``k/N`` inside the closed interval, ``k <= N - L``."""
    a, b = interval
    ks = np.arange(N - L + 1)
    return ks[(ks / N >= a) & (ks / N <= b)]


def quadratic_variation(increments, N, L, interval):
    """Mean squared increment over one cell of the partition."""
    ks = variation_cells(N, L, interval)
    if len(ks) == 0:
        raise ConfigError(
            f"no increments fall in [{interval[0]}, {interval[1]}] at resolution {N}; "
            "N is too small for this partition"
        )
    d = increments[ks]
    return float(np.mean(d * d))


def hurst_from_ratio(v_coarse, v_fine, Q):
    """Clamped log-ratio estimate, with the degenerate zero-variation rules."""
    if v_fine == 0.0:
        if v_coarse == 0.0:
            warnings.warn("flat path: both quadratic variations vanish, reporting 0")
            return 0.0
        return 1.0
    if v_coarse == 0.0:
        return 0.0
    raw = math.log(v_coarse / v_fine) / (2.0 * math.log(Q))
    return min(1.0, max(0.0, raw))


class GridPath:
    """Sample accessor over values on a uniform closed grid of [0, 1].

    Resolutions must divide the grid resolution so every requested
    point is an exact grid point; anything else is a configuration
    error rather than an interpolation.
    """

    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)
        if len(self.values) < 2:
            raise ConfigError("need at least two grid values")
        self.resolution = len(self.values) - 1

    def sample(self, resolution):
        if resolution < 1 or self.resolution % resolution != 0:
            raise ConfigError(
                f"resolution {resolution} does not divide the grid resolution {self.resolution}"
            )
        stride = self.resolution // resolution
        return self.values[::stride]


class ProcessSampler:
    """Sample accessor that evaluates the wavelet series directly.

    Falls back to exact pointwise evaluation when a requested
    resolution does not divide the dyadic grid (odd ``Q``, say), so no
    interpolation ever happens.
    """

    def __init__(self, family, config):
        self.family = family
        self.config = config
        self._grid = None

    def sample(self, resolution):
        full = 1 << self.config.n
        if resolution >= 1 and full % resolution == 0:
            if self._grid is None:
                self._grid = simulate_path(self.family, self.config).values
            return self._grid[:: full // resolution]
        ts = np.arange(resolution + 1, dtype=float) / resolution
        return values_at(self.family, self.config.J, ts, [self.config.seed])[0]


def _as_source(source):
    if hasattr(source, "sample"):
        return source
    if hasattr(source, "values"):
        return GridPath(source.values)
    return GridPath(source)


def default_partition(P):
    """The ``P`` equal closed cells ``[i/P, (i+1)/P]``."""
    edges = np.arange(P + 1, dtype=float) / P
    return list(zip(edges[:-1], edges[1:]))


def estimate_hurst(source, config, intervals=None):
    """Estimate the regularity profile of a sampled path.

    Parameters
    ----------
    source : array, PathSample, or object with ``sample(resolution)``
        Where the path values come from.  Arrays are treated as values
        on a uniform closed grid.
    config : EstimatorConfig
    intervals : list of (a, b) pairs, optional
        Estimation cells; defaults to ``P`` equal cells.

    Returns
    -------
    EstimateSeries
        Raw clamped estimates and their smoothed version, one value per
        cell, at the cell midpoints.
    """
    src = _as_source(source)
    if intervals is None:
        intervals = default_partition(config.P)
    if len(intervals) == 0:
        raise ConfigError("need at least one estimation cell")

    N = config.N
    if N is None:
        res = getattr(src, "resolution", None)
        if res is None:
            raise ConfigError("config.N must be set for sources without a grid resolution")
        if res % config.Q != 0:
            raise ConfigError(f"grid resolution {res} is not divisible by Q={config.Q}")
        N = res // config.Q
    if N < config.L:
        raise ConfigError(f"resolution N={N} is below filter order L={config.L}")

    coarse = src.sample(N)
    fine = src.sample(config.Q * N)
    d_coarse = generalized_increments(coarse, config.L)
    d_fine = generalized_increments(fine, config.L)

    mids = np.array([(a + b) / 2.0 for a, b in intervals])
    h_raw = np.empty(len(intervals))
    for i, cell in enumerate(intervals):
        v_c = quadratic_variation(d_coarse, N, config.L, cell)
        v_f = quadratic_variation(d_fine, config.Q * N, config.L, cell)
        h_raw[i] = hurst_from_ratio(v_c, v_f, config.Q)

    resolved = EstimatorConfig(N=N, Q=config.Q, L=config.L, P=len(intervals), span=config.span)
    return EstimateSeries(
        interval_mids=mids,
        h_raw=h_raw,
        h_smooth=loess_smooth(mids, h_raw, config.span),
        config=resolved,
    )


def loess_smooth(xs, ys, span=DEFAULT_SPAN):
    """Local linear smoothing with tricube weights.

    Each point is fit from its ``ceil(span * len(xs))`` nearest
    neighbors; a degenerate local design (zero spread) falls back to
    the weighted mean.  Single pass, no robustness reweighting.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    n = len(xs)
    if n != len(ys):
        raise ConfigError("xs and ys must have equal length")
    if n == 0:
        return np.empty(0)
    q = min(n, max(2, math.ceil(span * n)))
    out = np.empty(n)
    for i in range(n):
        dist = np.abs(xs - xs[i])
        scale = np.sort(dist)[q - 1]
        if scale == 0.0:
            out[i] = np.mean(ys[dist == 0.0])
            continue
        w = np.clip(1.0 - (dist / scale) ** 3, 0.0, None) ** 3
        sw = np.sum(w)
        xm = np.sum(w * xs) / sw
        ym = np.sum(w * ys) / sw
        dx = xs - xm
        sxx = np.sum(w * dx * dx)
        if sxx <= 0.0:
            out[i] = ym
        else:
            slope = np.sum(w * dx * (ys - ym)) / sxx
            out[i] = ym + slope * (xs[i] - xm)
    return out


# ---------------------------------------------------------------------------
# delimited output

_FLOAT_FMT = "%.17g"


def write_estimate_csv(series, path):
    """Write one row per cell: index, midpoint, truth (optional), raw, smooth."""
    with open(Path(path), "w", newline="") as fh:
        fh.write("interval_index,t_mid,h_true,h_raw,h_smooth\n")
        for i in range(len(series.interval_mids)):
            true_field = ""
            if series.h_true is not None:
                true_field = _FLOAT_FMT % series.h_true[i]
            fh.write(
                f"{i},{_FLOAT_FMT % series.interval_mids[i]},{true_field},"
                f"{_FLOAT_FMT % series.h_raw[i]},{_FLOAT_FMT % series.h_smooth[i]}\n"
            )


def read_estimate_csv(path, config=None):
    """Read a series written by `write_estimate_csv`."""
    mids, trues, raws, smooths = [], [], [], []
    with open(Path(path)) as fh:
        header = fh.readline()
        if not header.startswith("interval_index"):
            raise ConfigError(f"unrecognized estimate file {path}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            if len(parts) != 5:
                raise ConfigError(f"malformed row in {path}: {line!r}")
            mids.append(float(parts[1]))
            trues.append(float(parts[2]) if parts[2] else np.nan)
            raws.append(float(parts[3]))
            smooths.append(float(parts[4]))
    h_true = np.array(trues)
    if np.all(np.isnan(h_true)):
        h_true = None
    return EstimateSeries(
        interval_mids=np.array(mids),
        h_raw=np.array(raws),
        h_smooth=np.array(smooths),
        config=config if config is not None else EstimatorConfig(N=None, P=max(1, len(mids))),
        h_true=h_true,
    )
