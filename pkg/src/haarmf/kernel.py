"""Fractional integrals of Haar wavelets.

The building block of the whole package is the function obtained by
fractionally integrating the mother Haar wavelet: for an exponent
``lam`` in (0, 1),

    kernel(lam, x) = int_0^1 (x - s)_+^(lam - 1/2) h(s) ds,

where ``h`` is the mother Haar wavelet and ``(y)_+^b`` is the truncated
power.  The integral collapses to a three-term closed form which is what
`kernel` evaluates; `kernel_quadrature` recomputes the same quantity by
adaptive numerical quadrature and exists purely as a slow cross-check.
"""

import numpy as np
from scipy import integrate

from .errors import OracleError

# Envelope constant for `decay_bound`.  The measured supremum of
# |kernel| / (3 + |x|)^(lam - 3/2) over lam in [0.02, 0.98] is about
# 8.57; the next power of two gives headroom without being loose.
ENVELOPE_C = 16.0


def pos_pow(y, beta):
    """Truncated power ``y^beta`` for ``y > 0`` and ``0`` otherwise.

    The cutoff is strict: ``pos_pow(0.0, 0.0) == 0.0``.  Accepts scalars
    or arrays in ``y``; ``beta`` is a scalar exponent.
    """
    arr = np.asarray(y, dtype=float)
    mask = arr > 0.0
    out = np.zeros_like(arr)
    # np.power on the masked values only, so negative bases never reach it
    np.power(arr, beta, where=mask, out=out)
    if np.isscalar(y) or arr.ndim == 0:
        return float(out)
    return out


def haar_mother(s):
    """Mother Haar wavelet: 1 on [0, 1/2), -1 on [1/2, 1), 0 elsewhere."""
    arr = np.asarray(s, dtype=float)
    out = np.where((arr >= 0.0) & (arr < 0.5), 1.0, 0.0)
    out = np.where((arr >= 0.5) & (arr < 1.0), -1.0, out)
    if np.isscalar(s) or arr.ndim == 0:
        return float(out)
    return out


def check_index(j, k):
    """Validate a dyadic index pair: level ``j >= 0``, shift ``0 <= k < 2^j``."""
    if j < 0:
        raise ValueError(f"level must be nonnegative, got j={j}")
    if not 0 <= k < (1 << j):
        raise ValueError(f"shift out of range at level {j}: k={k}")


def haar_jk(j, k, s):
    """Orthonormal Haar wavelet ``2^(j/2) h(2^j s - k)`` at level ``j``, shift ``k``."""
    check_index(j, k)
    return (2.0 ** (j / 2.0)) * haar_mother(np.asarray(s, dtype=float) * (1 << j) - k)


def _check_lam(lam):
    if not 0.0 < lam < 1.0:
        raise ValueError(f"exponent must lie in (0, 1), got {lam}")


def kernel(lam, x):
    """Fractionally integrated Haar wavelet, closed form.

    Parameters
    ----------
    lam : float
        Integration exponent, strictly inside (0, 1).
    x : float or ndarray
        Evaluation points.  The function vanishes identically for
        ``x <= 0`` and decays like ``|x|^(lam - 3/2)`` as ``x -> +inf``.

    Returns
    -------
    float or ndarray
    """
    _check_lam(lam)
    b = lam + 0.5
    val = pos_pow(x, b) - 2.0 * pos_pow(np.asarray(x, dtype=float) - 0.5, b)
    val = val + pos_pow(np.asarray(x, dtype=float) - 1.0, b)
    out = val / b
    if np.isscalar(x):
        return float(out)
    return out


def decay_bound(lam, x, c=ENVELOPE_C):
    """Dominating envelope ``c (3 + |x|)^(lam - 3/2)`` for the kernel tail."""
    return c * (3.0 + np.abs(x)) ** (lam - 1.5)


def kernel_quadrature(lam, x, tol=1e-10):
    """Evaluate the kernel by adaptive quadrature instead of the closed form.

    The integrand ``(x - s)_+^(lam - 1/2) h(s)`` is integrated piecewise
    over [0, 1], splitting at the sign change of ``h`` and at ``s = x``
    where the truncated power is singular.  The singular piece is handled
    with an algebraic-endpoint weight so no closed-form antiderivative is
    involved anywhere.  Intended for validation only: slow, scalar.

    Raises
    ------
    OracleError
        If the accumulated quadrature error estimate exceeds ``tol``.
    """
    _check_lam(lam)
    x = float(x)
    if x <= 0.0:
        return 0.0
    upper = min(x, 1.0)
    # sign of h on each half of the support
    pieces = [(0.0, min(upper, 0.5), 1.0)]
    if upper > 0.5:
        pieces.append((0.5, upper, -1.0))

    beta = lam - 0.5
    total = 0.0
    err = 0.0
    for a, b, sign in pieces:
        if b <= a:
            continue
        if b == x:
            # endpoint singularity (x - s)^beta at s = b: QAWS weight
            res = integrate.quad(
                lambda s: sign,
                a,
                b,
                weight="alg",
                wvar=(0.0, beta),
                epsabs=tol / 4.0,
                epsrel=0.0,
                limit=200,
                full_output=1,
            )
        else:
            res = integrate.quad(
                lambda s: sign * (x - s) ** beta,
                a,
                b,
                epsabs=tol / 4.0,
                epsrel=0.0,
                limit=200,
                full_output=1,
            )
        if len(res) > 3:
            raise OracleError(f"quadrature trouble at lam={lam}, x={x}: {res[3]}")
        total += res[0]
        err += res[1]
    if err > tol:
        raise OracleError(f"quadrature error {err:.3e} above tol={tol:.3e} at lam={lam}, x={x}")
    return total


def coefficient_quadrature(lam, j, k, t, tol=1e-10):
    """Series coefficient ``int_0^1 (t - s)_+^(lam - 1/2) haar_jk(s) ds`` by quadrature.

    Splits the wavelet support at its sign change and at the integrand
    singularity ``s = t``, then integrates each smooth piece adaptively
    (the singular piece with an algebraic-endpoint weight).  Slow
    reference route for the rescaling identity tests; no shared code
    with the closed-form evaluation beyond the Haar sign pattern.
    """
    _check_lam(lam)
    check_index(j, k)
    t = float(t)
    lo = k / (1 << j)
    mid = (k + 0.5) / (1 << j)
    hi = (k + 1) / (1 << j)
    if t <= lo:
        return 0.0
    amp = 2.0 ** (j / 2.0)
    pieces = [(lo, min(mid, t), amp), (mid, min(hi, t), -amp)]
    beta = lam - 0.5
    total = 0.0
    err = 0.0
    for a, b, height in pieces:
        if b <= a:
            continue
        if b == t:
            res = integrate.quad(
                lambda s: height,
                a,
                b,
                weight="alg",
                wvar=(0.0, beta),
                epsabs=tol / 4.0,
                epsrel=0.0,
                limit=200,
                full_output=1,
            )
        else:
            res = integrate.quad(
                lambda s: height * (t - s) ** beta,
                a,
                b,
                epsabs=tol / 4.0,
                epsrel=0.0,
                limit=200,
                full_output=1,
            )
        if len(res) > 3:
            raise OracleError(f"quadrature trouble at lam={lam}, j={j}, k={k}, t={t}: {res[3]}")
        total += res[0]
        err += res[1]
    if err > tol:
        raise OracleError(
            f"quadrature error {err:.3e} above tol={tol:.3e} at lam={lam}, j={j}, k={k}, t={t}"
        )
    return total
