"""Gaussian path synthesis on dyadic grids, exact second moments, and path IO.

A path is the truncated random wavelet series

    X(t) = sum_{j=0}^{J} sum_{k=0}^{2^j - 1} 2^(-j H_j(k/2^j))
           kernel(H_j(k/2^j), 2^j t - k) eps_{j,k},

evaluated on the grid ``t = i / 2^n``.  The deviates ``eps_{j,k}`` come
from the counter-based stream in `haarmf.noise`, so a path is a pure
function of ``(family, J, n, seed, tail_tol)``.

Synthesis walks levels in order and splits each level's shifts into runs
of equal exponent.  Long runs are one discrete convolution, done with a
real FFT against a cached kernel table; short runs accumulate shift by
shift with compensated summation, sharing one log table per level so the
inner loop is three ``exp`` calls.  Both routes write only grid columns
``i >= 1``, which pins ``X(0)`` to exactly zero.
"""

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import noise
from .errors import ConfigError, ResourceBudgetError
from .hurst import FAMILIES, regularity_margin
from .kernel import ENVELOPE_C, check_index, kernel

# runs of equal exponent at least this long go through the FFT route
_FFT_MIN_RUN = 32

# soft cap on planned work units (pair evaluations plus FFT-equivalents)
DEFAULT_PAIR_BUDGET = 1 << 35

_MASTER_LOGS = {}  # (j, n) with j <= n -> log tables on the dyadic arg grid
_INT_LOGS = {}  # j -> log tables on the integer arg grid (used when j > n)
_FFT_KERNELS = {}  # (j, n, H, cut) -> rfft of the padded kernel table


def clear_caches():
    """Drop all memoized kernel tables (they are value-idempotent)."""
    _MASTER_LOGS.clear()
    _INT_LOGS.clear()
    _FFT_KERNELS.clear()


@dataclass(frozen=True)
class SimConfig:
    """Synthesis parameters.

    ``J`` is the last wavelet level kept in the series, ``n`` the dyadic
    exponent of the output grid (``2^n + 1`` points on [0, 1]).
    ``tail_tol`` optionally drops far-tail kernel evaluations whose
    envelope falls below ``tail_tol`` relative to the level's leading
    scale; zero keeps everything.  ``pair_budget`` rejects runs whose
    planned work exceeds it, before any heavy allocation happens.
    """

    J: int
    n: int
    seed: int = 0
    tail_tol: float = 0.0
    pair_budget: int | None = DEFAULT_PAIR_BUDGET

    def __post_init__(self):
        if self.J < 0:
            raise ConfigError(f"truncation level must be nonnegative, got J={self.J}")
        if self.n < 1:
            raise ConfigError(f"grid exponent must be at least 1, got n={self.n}")
        if not 0 <= int(self.seed) < (1 << 64):
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        if self.tail_tol < 0.0:
            raise ConfigError(f"tail tolerance must be nonnegative, got {self.tail_tol}")
        if self.pair_budget is not None and self.pair_budget <= 0:
            raise ConfigError(f"pair budget must be positive, got {self.pair_budget}")


@dataclass
class PathSample:
    """One synthesized path with its provenance."""

    times: np.ndarray
    values: np.ndarray
    config: SimConfig | None = None
    family_name: str = ""
    family_params: dict = field(default_factory=dict)
    dropped_mass: float = 0.0

    @property
    def grid_exponent(self):
        m = len(self.values) - 1
        n = m.bit_length() - 1
        if m <= 0 or (1 << n) != m:
            raise ConfigError(f"path length {len(self.values)} is not a dyadic grid")
        return n


def grid_times(n):
    """The dyadic grid ``i / 2^n``, ``i = 0 .. 2^n``."""
    return np.arange((1 << n) + 1, dtype=float) / (1 << n)


def _master_logs(j, n):
    # args m / 2^(n-j) for m = 1 .. 2^n, stored as logs of the three
    # truncated-power branches plus the indices where each switches on
    key = (j, n)
    hit = _MASTER_LOGS.get(key)
    if hit is not None:
        return hit
    step = 1 << (n - j)
    args = np.arange(1, (1 << n) + 1, dtype=float) / step
    i1 = int(np.searchsorted(args, 0.5, side="right"))
    i2 = int(np.searchsorted(args, 1.0, side="right"))
    entry = (np.log(args), i1, np.log(args[i1:] - 0.5), i2, np.log(args[i2:] - 1.0))
    _MASTER_LOGS[key] = entry
    return entry


def _int_logs(j):
    # integer args 1 .. 2^j; the (x - 1) branch is dummy-filled at x = 1
    hit = _INT_LOGS.get(j)
    if hit is not None:
        return hit
    args = np.arange(1, (1 << j) + 1, dtype=float)
    entry = (np.log(args), np.log(args - 0.5), np.log(np.maximum(args - 1.0, 1.0)))
    _INT_LOGS[j] = entry
    return entry


def _kernel_table(j, n, h):
    # kernel values on the master arg grid of level j (dyadic when
    # j <= n, integer otherwise), as needed by the FFT route
    b = h + 0.5
    if j <= n:
        lg0, i1, lg1, i2, lg2 = _master_logs(j, n)
        g = np.exp(b * lg0)
        g[i1:] -= 2.0 * np.exp(b * lg1)
        g[i2:] += np.exp(b * lg2)
    else:
        lg0, lg1, lg2 = _int_logs(j)
        g = np.exp(b * lg0) - 2.0 * np.exp(b * lg1)
        g[1:] += np.exp(b * lg2[1:])
    return g / b


def _fft_kernel(j, n, h, cut, length):
    key = (j, n, float(h), cut)
    hit = _FFT_KERNELS.get(key)
    if hit is not None:
        return hit
    g = _kernel_table(j, n, h)
    if cut is not None:
        g = g[:cut]
    padded = np.zeros(length)
    padded[1 : 1 + len(g)] = g
    entry = np.fft.rfft(padded)
    _FFT_KERNELS[key] = entry
    return entry


def _tail_cut(j, h, h_lo, tail_tol):
    # largest master index whose envelope stays above the threshold
    # tail_tol * 2^(-j h_lo); None means keep the whole table
    if tail_tol <= 0.0:
        return None
    ratio = tail_tol * 2.0 ** (j * (h - h_lo)) / ENVELOPE_C
    if ratio <= 0.0:
        return None
    x_cut = ratio ** (1.0 / (h - 1.5)) - 3.0
    return max(0.0, x_cut)


def _runs(values):
    # consecutive runs of equal value: yields (start, stop, value)
    breaks = np.flatnonzero(np.diff(values) != 0.0) + 1
    edges = np.concatenate(([0], breaks, [len(values)]))
    for a, b in zip(edges[:-1], edges[1:]):
        yield int(a), int(b), float(values[a])


def _plan_cost(family, cfg):
    # work units: direct runs count pair evaluations exactly (j <= n)
    # or nearly (j > n); FFT runs count transform-sized units
    total = 0
    G = 1 << cfg.n
    for j in range(cfg.J + 1):
        hs = family.at_shifts(j)
        fft_len = 1 << (max(j, cfg.n) + 1)
        for a, b, _h in _runs(hs):
            if b - a >= _FFT_MIN_RUN:
                total += 3 * fft_len * max(1, fft_len.bit_length())
            elif j <= cfg.n:
                step = 1 << (cfg.n - j)
                total += (b - a) * G - step * ((a + b - 1) * (b - a) // 2)
            else:
                d = 1 << (j - cfg.n)
                total += (b - a) * (G + 1) - ((a + b - 1) * (b - a) // 2) // d
    return total


def _kahan_add(acc, comp, sl, delta):
    # compensated in-place acc[:, sl] += delta
    y = delta - comp[:, sl]
    t = acc[:, sl] + y
    comp[:, sl] = (t - acc[:, sl]) - y
    acc[:, sl] = t


def _synthesize(family, cfg, seeds):
    G = 1 << cfg.n
    R = len(seeds)
    acc = np.zeros((R, G + 1))
    comp = np.zeros((R, G + 1))
    dropped = 0.0

    margin = regularity_margin(family)
    if margin is not None and margin <= 0.0:
        warnings.warn(
            f"family {family.name!r}: limiting profile reaches {family.h_lo + 0.5 - margin:.3g}, "
            f"at or above the summability threshold h_lo + 1/2 = {family.h_lo + 0.5:.3g}; "
            "covariance tail bounds are not guaranteed",
            stacklevel=3,
        )

    if cfg.pair_budget is not None:
        cost = _plan_cost(family, cfg)
        if cost > cfg.pair_budget:
            raise ResourceBudgetError(
                f"planned work {cost:.3e} units exceeds budget {cfg.pair_budget:.3e} "
                f"(J={cfg.J}, n={cfg.n}); raise pair_budget or lower J"
            )

    for j in range(cfg.J + 1):
        hs = family.at_shifts(j)
        eps = noise.gauss_level_many(seeds, j)
        w = 2.0 ** (-j * hs) * eps  # (R, 2^j)

        if cfg.tail_tol > 0.0:
            dropped += _dropped_mass_level(j, hs, family.h_lo, cfg.tail_tol)

        if j <= cfg.n:
            step = 1 << (cfg.n - j)
            lg0, i1, lg1, i2, lg2 = _master_logs(j, cfg.n)
            for a, b, h in _runs(hs):
                cut_x = _tail_cut(j, h, family.h_lo, cfg.tail_tol)
                cut = None if cut_x is None else int(cut_x * step)
                if cut is not None and cut <= 0:
                    continue
                if b - a >= _FFT_MIN_RUN:
                    L = 1 << (cfg.n + 1)
                    spread = np.zeros((R, L))
                    spread[:, a * step : ((b - 1) * step) + 1 : step] = w[:, a:b]
                    kf = _fft_kernel(j, cfg.n, h, cut, L)
                    conv = np.fft.irfft(np.fft.rfft(spread, axis=1) * kf, n=L, axis=1)
                    acc[:, 1:] += conv[:, 1 : G + 1]
                else:
                    for k in range(a, b):
                        lk = G - k * step
                        if cut is not None:
                            lk = min(lk, cut)
                        if lk <= 0:
                            continue
                        bexp = hs[k] + 0.5
                        y = np.exp(bexp * lg0[:lk])
                        if lk > i1:
                            y[i1:lk] -= 2.0 * np.exp(bexp * lg1[: lk - i1])
                        if lk > i2:
                            y[i2:lk] += np.exp(bexp * lg2[: lk - i2])
                        col = k * step + 1
                        _kahan_add(acc, comp, slice(col, col + lk), w[:, k : k + 1] * (y / bexp))
        else:
            d = 1 << (j - cfg.n)
            m_total = 1 << j
            lg0, lg1, lg2 = _int_logs(j)
            for a, b, h in _runs(hs):
                cut_x = _tail_cut(j, h, family.h_lo, cfg.tail_tol)
                cut = None if cut_x is None else int(cut_x)
                if cut is not None and cut <= 0:
                    continue
                if b - a >= _FFT_MIN_RUN:
                    L = 1 << (j + 1)
                    spread = np.zeros((R, L))
                    spread[:, a:b] = w[:, a:b]
                    kf = _fft_kernel(j, cfg.n, h, cut, L)
                    conv = np.fft.irfft(np.fft.rfft(spread, axis=1) * kf, n=L, axis=1)
                    acc[:, 1:] += conv[:, d : (G * d) + 1 : d]
                else:
                    for k in range(a, b):
                        s0 = ((-k) % d) or d
                        hi = m_total - k
                        if cut is not None:
                            hi = min(hi, cut)
                        if hi < s0:
                            continue
                        sub = np.arange(s0, hi + 1, d)
                        idx = sub - 1
                        bexp = hs[k] + 0.5
                        y = np.exp(bexp * lg0[idx]) - 2.0 * np.exp(bexp * lg1[idx])
                        if sub[0] < 2 and len(sub) > 1:
                            y[1:] += np.exp(bexp * lg2[idx[1:]])
                        elif sub[0] >= 2:
                            y += np.exp(bexp * lg2[idx])
                        i_first = (k + s0) // d
                        _kahan_add(
                            acc,
                            comp,
                            slice(i_first, i_first + len(sub)),
                            w[:, k : k + 1] * (y / bexp),
                        )
    return acc, dropped


def _dropped_mass_level(j, hs, h_lo, tail_tol):
    # envelope mass of the pairs cut at the far end of the grid (t = 1),
    # which dominates every other column
    k = np.arange(1 << j, dtype=float)
    args = (1 << j) - k
    cuts = np.empty_like(args)
    for a, b, h in _runs(hs):
        c = _tail_cut(j, h, h_lo, tail_tol)
        cuts[a:b] = np.inf if c is None else c
    mask = args > cuts
    if not np.any(mask):
        return 0.0
    env = 2.0 ** (-j * hs[mask]) * ENVELOPE_C * (3.0 + args[mask]) ** (hs[mask] - 1.5)
    return float(np.sum(env * env))


def simulate_ensemble(family, config, seeds):
    """Paths for several seeds at once, one row per seed.

    Row ``r`` is bit-identical to ``simulate_path`` run with
    ``seeds[r]``; batching only amortizes kernel evaluations.
    """
    if len(seeds) == 0:
        raise ConfigError("need at least one seed")
    values, _ = _synthesize(family, config, list(seeds))
    return values


def simulate_path(family, config):
    """Synthesize one path on the dyadic grid of ``config``."""
    values, dropped = _synthesize(family, config, [config.seed])
    return PathSample(
        times=grid_times(config.n),
        values=values[0],
        config=config,
        family_name=family.name,
        family_params=dict(family.params),
        dropped_mass=dropped,
    )


def coefficient(family, j, k, t):
    """Deterministic series coefficient ``2^(-j H) kernel(H, 2^j t - k)``."""
    check_index(j, k)
    h = family.h_jk(j, k)
    return 2.0 ** (-j * h) * kernel(h, np.asarray(t, dtype=float) * (1 << j) - k)


def _coef_row(family, j, t):
    # all shifts' coefficients at one point, skipping the zero tail
    nk = 1 << j
    k_max = min(nk, int(math.ceil(t * nk)))
    row = np.zeros(nk)
    hs = family.at_shifts(j)
    for k in range(k_max):
        arg = t * nk - k
        if arg <= 0.0:
            continue
        h = hs[k]
        row[k] = 2.0 ** (-j * h) * kernel(h, arg)
    return row


def covariance(family, t1, t2, J):
    """Exact covariance of the truncated series at two points."""
    total = 0.0
    for j in range(J + 1):
        total += float(np.dot(_coef_row(family, j, float(t1)), _coef_row(family, j, float(t2))))
    return total


def variance(family, t, J):
    """Exact variance of the truncated series at one point."""
    return covariance(family, t, t, J)


def values_at(family, J, ts, seeds):
    """Evaluate the series exactly at arbitrary points for many seeds.

    Returns an array of shape ``(len(seeds), len(ts))``.  Unlike
    `simulate_ensemble` this needs no dyadic grid, at the price of a
    per-shift loop; meant for pointwise Monte Carlo work.
    """
    ts = np.asarray(ts, dtype=float)
    order = np.argsort(ts, kind="stable")
    sorted_ts = ts[order]
    buf = np.zeros((len(seeds), len(ts)))
    for j in range(J + 1):
        hs = family.at_shifts(j)
        eps = noise.gauss_level_many(seeds, j)
        for k in range(1 << j):
            i0 = int(np.searchsorted(sorted_ts, k / (1 << j), side="right"))
            if i0 >= len(sorted_ts):
                continue
            args = sorted_ts[i0:] * (1 << j) - k
            pos = args > 0.0
            if not np.any(pos):
                continue
            h = hs[k]
            vals = np.zeros(len(args))
            vals[pos] = 2.0 ** (-j * h) * kernel(h, args[pos])
            buf[:, i0:] += eps[:, k : k + 1] * vals
    out = np.empty_like(buf)
    out[:, order] = buf
    return out


def second_differences(path, J):
    """All dyadic second-order increments of span ``2^-J`` along a path.

    Entry ``K`` is ``X((K+1)/2^J) - 2 X((2K+1)/2^(J+1)) + X(K/2^J)``;
    the grid must resolve the half points, i.e. ``J + 1 <= n``.
    """
    n = path.grid_exponent
    if J + 1 > n:
        raise ConfigError(f"need J + 1 <= n to form second differences, got J={J}, n={n}")
    v = path.values
    s = 1 << (n - J)
    h = s >> 1
    ks = np.arange(1 << J)
    return v[(ks + 1) * s] - 2.0 * v[ks * s + h] + v[ks * s]


# ---------------------------------------------------------------------------
# delimited output

_FLOAT_FMT = "%.17g"


def write_path_csv(path, base):
    """Write ``<base>.csv`` (columns ``t,x``) and ``<base>.meta``.

    All floats use a round-tripping format, so reading the pair back
    reproduces the sample bit for bit.
    """
    base = Path(base)
    with open(base.with_suffix(".csv"), "w", newline="") as fh:
        fh.write("t,x\n")
        for t, x in zip(path.times, path.values):
            fh.write(f"{_FLOAT_FMT % t},{_FLOAT_FMT % x}\n")
    lines = []
    if path.family_name:
        lines.append(f"family = {path.family_name}")
        for key, val in sorted(path.family_params.items()):
            lines.append(f"family.{key} = {_FLOAT_FMT % val}")
    if path.config is not None:
        lines.append(f"J = {path.config.J}")
        lines.append(f"n = {path.config.n}")
        lines.append(f"seed = {path.config.seed}")
        lines.append(f"tail_tol = {_FLOAT_FMT % path.config.tail_tol}")
    lines.append(f"dropped_mass = {_FLOAT_FMT % path.dropped_mass}")
    base.with_suffix(".meta").write_text("\n".join(lines) + "\n")


def read_path_csv(csv_path):
    """Read a path written by `write_path_csv`; metadata is optional."""
    csv_path = Path(csv_path)
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2:
        raise ConfigError(f"expected two columns t,x in {csv_path}")
    times, values = data[:, 0], data[:, 1]

    meta_path = csv_path.with_suffix(".meta")
    config = None
    family_name = ""
    family_params = {}
    dropped = 0.0
    if meta_path.exists():
        meta = {}
        for line in meta_path.read_text().splitlines():
            line = line.strip()
            if not line or "=" not in line:
                continue
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
        family_name = meta.get("family", "")
        family_params = {
            key[len("family.") :]: float(val)
            for key, val in meta.items()
            if key.startswith("family.")
        }
        if "J" in meta and "n" in meta:
            config = SimConfig(
                J=int(meta["J"]),
                n=int(meta["n"]),
                seed=int(meta.get("seed", 0)),
                tail_tol=float(meta.get("tail_tol", 0.0)),
            )
        dropped = float(meta.get("dropped_mass", 0.0))
    return PathSample(
        times=times,
        values=values,
        config=config,
        family_name=family_name,
        family_params=family_params,
        dropped_mass=dropped,
    )


def family_from_meta(sample):
    """Rebuild the profile family recorded in a sample's metadata, if any."""
    if not sample.family_name or sample.family_name not in FAMILIES:
        return None
    try:
        return FAMILIES[sample.family_name](**sample.family_params)
    except (TypeError, ConfigError):
        return None
