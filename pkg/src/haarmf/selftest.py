"""Fast built-in oracle suite behind the ``selftest`` subcommand.

Each check re-derives a property through an independent route (adaptive
quadrature, integer arithmetic, bitwise reruns) and prints one PASS or
FAIL line.  The suite is sized to finish in seconds, as a field check
that an installation computes what it should.
"""

import numpy as np

from .estimate import EstimatorConfig, estimate_hurst, increment_filter
from .hurst import make_family
from .kernel import coefficient_quadrature, decay_bound, kernel, kernel_quadrature
from .noise import gauss_level, gauss_level_many
from .simulate import SimConfig, coefficient, simulate_path, values_at


def _check_kernel_oracle():
    rng = np.random.default_rng(101)
    worst = 0.0
    for lam, x in zip(rng.uniform(0.05, 0.95, 100), rng.uniform(-2.0, 10.0, 100)):
        worst = max(worst, abs(kernel(lam, x) - kernel_quadrature(lam, x)))
    return worst <= 1e-8, f"max closed-vs-quadrature diff {worst:.2e}"


def _check_coefficient_identity():
    rng = np.random.default_rng(202)
    fams = [make_family(s) for s in ("constant:0.5", "linear", "sinusoidal", "ramp")]
    worst = 0.0
    for _ in range(25):
        fam = fams[rng.integers(len(fams))]
        j = int(rng.integers(0, 7))
        k = int(rng.integers(0, 1 << j))
        t = float(rng.uniform(0.0, 1.0))
        lam = fam.h_jk(j, k)
        worst = max(worst, abs(float(coefficient(fam, j, k, t)) - coefficient_quadrature(lam, j, k, t)))
    return worst <= 1e-8, f"max rescaling-identity diff {worst:.2e}"


def _check_hat():
    x = np.linspace(-0.5, 1.5, 2001)
    hat = np.clip(np.minimum(x, 1.0 - x), 0.0, None)
    worst = float(np.max(np.abs(kernel(0.5, x) - hat)))
    return worst <= 1e-14, f"max deviation from hat {worst:.2e}"


def _check_envelope():
    xs = np.linspace(-2.0, 20.0, 441)
    bad = 0
    for lam in np.linspace(0.05, 0.95, 19):
        bad += int(np.sum(np.abs(kernel(lam, xs)) > decay_bound(lam, xs)))
    return bad == 0, f"{bad} envelope violations"


def _check_filter():
    for L in range(2, 7):
        a = increment_filter(L)
        for p in range(L):
            if int(sum(int(a[l]) * l**p for l in range(L + 1))) != 0:
                return False, f"moment p={p} nonzero at L={L}"
    return True, "vanishing moments exact for L=2..6"


def _check_noise():
    single = gauss_level(31337, 12)
    batch = gauss_level_many([31337, 99], 12)
    if not np.array_equal(single, batch[0]):
        return False, "batched deviates differ from single-seed deviates"
    big = gauss_level(7, 16)
    m, v = float(np.mean(big)), float(np.var(big))
    ok = abs(m) < 0.05 and abs(v - 1.0) < 0.05
    return ok, f"2^16 draws: mean {m:+.4f}, var {v:.4f}"


def _check_synthesis():
    fam = make_family("constant:0.5")
    cfg = SimConfig(J=10, n=6, seed=5)
    p1 = simulate_path(fam, cfg)
    p2 = simulate_path(fam, cfg)
    if p1.values[0] != 0.0:
        return False, f"X(0) = {p1.values[0]!r}, expected exact 0"
    if not np.array_equal(p1.values, p2.values):
        return False, "rerun with identical config changed the path"
    pointwise = values_at(fam, cfg.J, p1.times[::4], [cfg.seed])[0]
    worst = float(np.max(np.abs(p1.values[::4] - pointwise)))
    return worst <= 1e-9, f"grid-vs-pointwise diff {worst:.2e}"


def _check_estimator():
    fam = make_family("constant:0.5")
    path = simulate_path(fam, SimConfig(J=12, n=10, seed=1))
    series = estimate_hurst(path.values, EstimatorConfig(P=20))
    m = float(np.mean(series.h_raw))
    return abs(m - 0.5) <= 0.1, f"mean raw estimate {m:.4f} for H=0.5"


_CHECKS = [
    ("kernel quadrature oracle", _check_kernel_oracle),
    ("coefficient rescaling identity", _check_coefficient_identity),
    ("hat function at lam=1/2", _check_hat),
    ("decay envelope", _check_envelope),
    ("increment filter moments", _check_filter),
    ("noise stream", _check_noise),
    ("path synthesis", _check_synthesis),
    ("variation estimator", _check_estimator),
]


def run_selftest():
    """Run every check; return 0 when all pass, 2 otherwise."""
    import warnings

    failures = 0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for name, check in _CHECKS:
            ok, detail = check()
            print(f"{'PASS' if ok else 'FAIL'}: {name} ({detail})")
            failures += 0 if ok else 1
    if failures:
        print(f"{failures} of {len(_CHECKS)} checks failed")
        return 2
    print(f"all {len(_CHECKS)} checks passed")
    return 0
