"""Regularity profiles driving the level-dependent synthesis.

A profile family assigns to every dyadic level ``j`` a function
``H_j : [0, 1] -> (0, 1)``; the simulator reads it only at the dyadic
shifts ``k / 2^j``.  Families may genuinely depend on ``j`` (see `ramp`)
or be a single function repeated at every level.
"""

import inspect
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .kernel import check_index


@dataclass(frozen=True)
class HurstFamily:
    """A level-indexed family of regularity profiles.

    Parameters
    ----------
    name : str
        Registry name, also written to path metadata.
    profile : callable
        ``profile(j, t)`` with ``t`` a float ndarray in [0, 1], returning
        the profile values at level ``j``.  Values must stay inside
        ``[h_lo, h_hi]``.
    h_lo, h_hi : float
        Compact range of the family, ``0 < h_lo <= h_hi < 1``.
    limit : callable or None
        Pointwise limit of ``H_j`` as ``j`` grows, when known.  Used as
        the ground truth column in estimation reports.
    params : dict
        Constructor arguments, kept for metadata round-trips.
    lip : callable or None
        Closed-form Lipschitz norm ``j -> sup|H_j| + sup slope`` when
        available; cross-checked against the grid measurement in tests.
    """

    name: str
    profile: Callable
    h_lo: float
    h_hi: float
    limit: Callable | None = None
    params: dict = field(default_factory=dict)
    lip: Callable | None = None

    def __post_init__(self):
        if not (0.0 < self.h_lo <= self.h_hi < 1.0):
            raise ConfigError(
                f"profile range must satisfy 0 < lo <= hi < 1, got [{self.h_lo}, {self.h_hi}]"
            )

    def values(self, j, t):
        """Evaluate ``H_j`` at points ``t``, enforcing the declared range."""
        arr = np.asarray(t, dtype=float)
        out = np.asarray(self.profile(j, arr), dtype=float)
        if not np.all((out >= self.h_lo) & (out <= self.h_hi)):
            raise ConfigError(
                f"family {self.name!r} left its declared range [{self.h_lo}, {self.h_hi}] at level {j}"
            )
        if np.isscalar(t) or arr.ndim == 0:
            return float(out)
        return out

    def at_shifts(self, j):
        """Profile values at the dyadic shifts ``k / 2^j``, ``k = 0 .. 2^j - 1``."""
        return self.values(j, np.arange(1 << j, dtype=float) / (1 << j))

    def h_jk(self, j, k):
        """Single regularity exponent for the wavelet at level ``j``, shift ``k``."""
        check_index(j, k)
        return self.values(j, k / (1 << j))

    def limit_values(self, t):
        if self.limit is None:
            raise ConfigError(f"family {self.name!r} has no known limiting profile")
        arr = np.asarray(t, dtype=float)
        out = np.asarray(self.limit(arr), dtype=float)
        if np.isscalar(t) or arr.ndim == 0:
            return float(out)
        return out


@dataclass(frozen=True)
class LipschitzEstimate:
    j: int
    value: float
    grid_step: float


def lipschitz_norm(family, j, grid_step=None):
    """Measure ``sup |H_j| + sup slope`` on a uniform grid.

    ``grid_step`` defaults to ``2^-j`` and must not exceed it, so every
    dyadic feature of level ``j`` is resolved.
    """
    if grid_step is None:
        grid_step = 2.0 ** (-j)
    if not 0.0 < grid_step <= 2.0 ** (-j):
        raise ConfigError(f"grid step {grid_step} too coarse for level {j}")
    m = max(1, round(1.0 / grid_step))
    t = np.linspace(0.0, 1.0, m + 1)
    vals = family.values(j, t)
    slope = np.max(np.abs(np.diff(vals))) * m if m > 0 else 0.0
    return LipschitzEstimate(j=j, value=float(np.max(np.abs(vals)) + slope), grid_step=1.0 / m)


def check_growth(family, c, j_max):
    """True when the measured Lipschitz norms satisfy ``nu_j <= c (1 + j)``."""
    for j in range(j_max + 1):
        step = min(2.0 ** (-j), 2.0 ** (-10))
        if lipschitz_norm(family, j, step).value > c * (1 + j):
            return False
    return True


def regularity_margin(family, grid=4096):
    """Distance ``h_lo + 1/2 - sup limit``; None when the limit is unknown.

    A nonpositive margin means the limiting profile is too smooth
    relative to the roughest exponent in play, so covariance tails are
    not summable in the regime the theory covers.  Callers warn, never
    fail, on that.
    """
    if family.limit is None:
        return None
    t = np.linspace(0.0, 1.0, grid + 1)
    return float(family.h_lo + 0.5 - np.max(family.limit_values(t)))


def constant(h=0.5):
    """Profile fixed at ``h`` for every level and every point."""
    h = float(h)
    return HurstFamily(
        name="constant",
        profile=lambda j, t: np.full_like(t, h),
        h_lo=h,
        h_hi=h,
        limit=lambda t: np.full_like(np.asarray(t, dtype=float), h),
        params={"h": h},
        lip=lambda j: h,
    )


def linear(a=0.2, b=0.45):
    """Affine profile ``a + b t``, identical at every level."""
    a, b = float(a), float(b)
    lo, hi = min(a, a + b), max(a, a + b)
    return HurstFamily(
        name="linear",
        profile=lambda j, t: a + b * t,
        h_lo=lo,
        h_hi=hi,
        limit=lambda t: a + b * np.asarray(t, dtype=float),
        params={"a": a, "b": b},
        lip=lambda j: max(abs(a), abs(a + b)) + abs(b),
    )


def sinusoidal(center=0.5, amplitude=0.4, cycles=3.0):
    """Oscillating profile ``center - amplitude sin(2 pi cycles t)``."""
    center, amplitude, cycles = float(center), float(amplitude), float(cycles)
    w = 2.0 * np.pi * cycles
    return HurstFamily(
        name="sinusoidal",
        profile=lambda j, t: center - amplitude * np.sin(w * t),
        h_lo=center - abs(amplitude),
        h_hi=center + abs(amplitude),
        limit=lambda t: center - amplitude * np.sin(w * np.asarray(t, dtype=float)),
        params={"center": center, "amplitude": amplitude, "cycles": cycles},
        lip=lambda j: center + abs(amplitude) + abs(amplitude) * w,
    )


def _ramp_profile(j, t):
    if j == 0:
        return np.full_like(t, 0.5)
    lo = 0.5 - 0.5 / j
    hi = 0.5 + 0.5 / j
    # clip guards against 1-ulp overshoot on non-dyadic grids
    mid = np.clip(0.5 * j * t + 0.5 - 0.25 * j, 0.25, 0.75)
    return np.where(t <= lo, 0.25, np.where(t >= hi, 0.75, mid))


def ramp():
    """Level-steepening ramp from 1/4 to 3/4 around ``t = 1/2``.

    At level ``j >= 1`` the profile is flat at 1/4 up to ``1/2 - 1/(2j)``,
    flat at 3/4 from ``1/2 + 1/(2j)``, and linear in between with slope
    ``j/2``; level 0 is flat at 1/2.  The pointwise limit is the step
    taking 1/4 on [0, 1/2] and 3/4 above.  Slopes grow linearly in ``j``,
    making this the stock example of a genuinely level-dependent family.
    """
    return HurstFamily(
        name="ramp",
        profile=_ramp_profile,
        h_lo=0.25,
        h_hi=0.75,
        limit=lambda t: np.where(np.asarray(t, dtype=float) <= 0.5, 0.25, 0.75),
        params={},
        lip=lambda j: 0.5 if j == 0 else 0.75 + 0.5 * j,
    )


FAMILIES = {
    "constant": constant,
    "linear": linear,
    "sinusoidal": sinusoidal,
    "ramp": ramp,
}


def make_family(spec):
    """Build a family from a CLI-style string like ``constant:h=0.3``.

    The part before the colon names a registered builder; the rest is a
    comma list of ``key=value`` overrides.  A single bare value is
    allowed when the builder takes one argument.
    """
    name, _, rest = spec.partition(":")
    name = name.strip()
    if name not in FAMILIES:
        raise ConfigError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}")
    builder = FAMILIES[name]
    kwargs = {}
    if rest.strip():
        sig_params = list(inspect.signature(builder).parameters)
        for tok in rest.split(","):
            tok = tok.strip()
            if not tok:
                continue
            if "=" in tok:
                key, _, val = tok.partition("=")
                key = key.strip()
            else:
                if len(sig_params) != 1:
                    raise ConfigError(f"family {name!r} needs key=value arguments, got {tok!r}")
                key, val = sig_params[0], tok
            if key not in sig_params:
                raise ConfigError(f"family {name!r} has no parameter {key!r}")
            try:
                kwargs[key] = float(val)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {val!r}") from exc
    return builder(**kwargs)
