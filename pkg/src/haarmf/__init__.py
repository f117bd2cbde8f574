"""Haar wavelet synthesis of multifractional Gaussian processes.

Builds sample paths whose local regularity follows a prescribed,
possibly level-dependent Hurst function, via the exact closed form of
fractionally integrated Haar wavelets; estimates the Hurst function
back from sampled paths by generalized quadratic variations; and ships
a CLI reproducing the accompanying simulation study.
"""

from .errors import ConfigError, HaarmfError, OracleError, ResourceBudgetError
from .estimate import (
    EstimateSeries,
    EstimatorConfig,
    GridPath,
    ProcessSampler,
    estimate_hurst,
    generalized_increments,
    increment_filter,
    loess_smooth,
    quadratic_variation,
)
from .experiment import DiffStats, ExperimentConfig, diff_stats, replicate_table, run_case
from .hurst import (
    FAMILIES,
    HurstFamily,
    check_growth,
    constant,
    linear,
    lipschitz_norm,
    make_family,
    ramp,
    regularity_margin,
    sinusoidal,
)
from .kernel import (
    ENVELOPE_C,
    decay_bound,
    haar_jk,
    haar_mother,
    kernel,
    kernel_quadrature,
    pos_pow,
)
from .simulate import (
    PathSample,
    SimConfig,
    coefficient,
    covariance,
    grid_times,
    read_path_csv,
    second_differences,
    simulate_ensemble,
    simulate_path,
    values_at,
    variance,
    write_path_csv,
)

__version__ = "0.1.0"
