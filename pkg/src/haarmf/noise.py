"""Counter-based Gaussian deviates, one per dyadic index.

Every wavelet slot ``(j, k)`` owns the flat counter ``m = 2^j - 1 + k``,
and its deviate is a pure function of ``(seed, m)``.  Draws therefore do
not depend on evaluation order, batching, or thread schedule, which is
what makes byte-identical reruns possible.  The generator is the
standard 64-bit splitmix finalizer applied to a seed-keyed counter, and
the uniform is pushed through the exact normal quantile.
"""

import numpy as np
from scipy.special import ndtri

_MASK = (1 << 64) - 1
_GOLD = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_SALT = 0x5851F42D4C957F2D


def _mix_int(z):
    # splitmix64 finalizer on plain Python ints
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def _mix_arr(z):
    # same finalizer, vectorized on uint64 arrays (wraparound intended)
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX1)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


def _base_state(seed):
    if not 0 <= int(seed) < (1 << 64):
        raise ValueError(f"seed must fit in 64 bits, got {seed}")
    return _mix_int(int(seed) ^ _SALT)


def _uniform(raw):
    # top 53 bits, centered in (0, 1); never returns 0 or 1
    return (np.right_shift(raw, np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def gauss_at(seed, j, k):
    """Deviates for explicit counters: level ``j``, shifts ``k`` (scalar or array)."""
    k_arr = np.atleast_1d(np.asarray(k, dtype=np.uint64))
    base = _base_state(seed)
    m = np.uint64((1 << j) - 1) + k_arr
    z = np.uint64(base) + (m + np.uint64(1)) * np.uint64(_GOLD)
    out = ndtri(_uniform(_mix_arr(z)))
    if np.isscalar(k):
        return float(out[0])
    return out


def gauss_level(seed, j):
    """All ``2^j`` deviates of level ``j`` for one seed, in shift order."""
    return gauss_at(seed, j, np.arange(1 << j, dtype=np.uint64))


def gauss_level_many(seeds, j):
    """Level ``j`` deviates for several seeds, stacked as rows.

    Row ``r`` is bit-identical to ``gauss_level(seeds[r], j)``.
    """
    k_arr = np.arange(1 << j, dtype=np.uint64)
    m1 = (np.uint64((1 << j) - 1) + k_arr + np.uint64(1)) * np.uint64(_GOLD)
    bases = np.array([_base_state(s) for s in seeds], dtype=np.uint64)
    z = bases[:, None] + m1[None, :]
    return ndtri(_uniform(_mix_arr(z)))
