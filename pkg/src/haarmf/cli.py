"""Command line front end.

Subcommands cover the full study pipeline: ``simulate`` writes a path,
``estimate`` reads one back and writes the estimated profile, ``case``
does both over replications, ``table`` sweeps (J, n) pairs and writes
difference statistics, ``selftest`` runs the built-in oracle suite.
Every flag mirrors a key in an INI-style config file (``--config``);
explicit flags win over file values.
"""

import argparse
import configparser
import sys
from pathlib import Path

from .errors import ConfigError, OracleError, ResourceBudgetError
from .estimate import EstimatorConfig, GridPath, estimate_hurst, write_estimate_csv
from .experiment import (
    DESK_PAIRS,
    DESK_REPS,
    FULL_PAIRS,
    FULL_REPS,
    ExperimentConfig,
    replicate_table,
    run_case,
)
from .hurst import make_family
from .simulate import SimConfig, family_from_meta, read_path_csv, simulate_path, write_path_csv


class _Parser(argparse.ArgumentParser):
    # bad flags are configuration errors: exit 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def _bool(text):
    val = text.strip().lower()
    if val in ("1", "true", "yes", "on"):
        return True
    if val in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


class _FileConf:
    """Fallback values from the optional INI config file."""

    def __init__(self, path):
        self.cp = configparser.ConfigParser()
        if path is not None:
            p = Path(path)
            if not p.is_file():
                raise ConfigError(f"config file not found: {p}")
            try:
                self.cp.read(p)
            except configparser.Error as exc:
                raise ConfigError(f"malformed config file {p}: {exc}") from exc

    def get(self, section, key, cast, default):
        if self.cp.has_option(section, key):
            raw = self.cp.get(section, key)
            try:
                return cast(raw)
            except (ValueError, ConfigError) as exc:
                raise ConfigError(f"bad config value [{section}] {key} = {raw!r}") from exc
        return default


def _pick(flag_value, conf, section, key, cast, default):
    if flag_value is not None:
        return flag_value
    return conf.get(section, key, cast, default)


def _add_sim_flags(p):
    p.add_argument("--family", help="profile family, e.g. sinusoidal or constant:h=0.3")
    p.add_argument("--J", type=int, help="series truncation level")
    p.add_argument("--n", type=int, help="dyadic grid exponent (2^n + 1 points)")
    p.add_argument("--seed", type=int, help="base seed for the noise stream")
    p.add_argument("--tail-tol", type=float, help="kernel tail cutoff tolerance (0 = exact)")


def _add_est_flags(p):
    p.add_argument("--N", type=int, help="coarse variation resolution (default: grid/Q)")
    p.add_argument("--Q", type=int, help="fine-to-coarse resolution ratio")
    p.add_argument("--L", type=int, help="difference filter order")
    p.add_argument("--P", type=int, help="number of estimation cells")
    p.add_argument("--span", type=float, help="smoother neighbor fraction")


def _add_common_flags(p):
    p.add_argument("--out", help="output directory")
    p.add_argument("--svg", action="store_const", const=True, help="also render SVG figures")
    p.add_argument("--config", help="INI config file with fallback values")


def build_parser():
    parser = _Parser(prog="haarmf", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command")

    p_sim = sub.add_parser("simulate", help="synthesize one path and write CSV")
    _add_sim_flags(p_sim)
    _add_common_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate the profile from a path CSV")
    p_est.add_argument("path_csv", help="input path CSV (with optional sibling .meta)")
    _add_est_flags(p_est)
    _add_common_flags(p_est)
    p_est.set_defaults(func=cmd_estimate)

    p_case = sub.add_parser("case", help="simulate + estimate over replications")
    _add_sim_flags(p_case)
    _add_est_flags(p_case)
    p_case.add_argument("--reps", type=int, help="number of replications")
    p_case.add_argument("--workers", type=int, help="parallel replication workers")
    _add_common_flags(p_case)
    p_case.set_defaults(func=cmd_case)

    p_tab = sub.add_parser("table", help="difference statistics across (J, n) pairs")
    _add_sim_flags(p_tab)
    _add_est_flags(p_tab)
    p_tab.add_argument("--reps", type=int, help="replications per (J, n) pair")
    p_tab.add_argument("--workers", type=int, help="parallel replication workers")
    p_tab.add_argument(
        "--paper-scale",
        action="store_const",
        const=True,
        help="use the full-scale sweep (J,n) = (14,10)..(19,15), 30 reps",
    )
    _add_common_flags(p_tab)
    p_tab.set_defaults(func=cmd_table)

    p_self = sub.add_parser("selftest", help="run the built-in oracle suite")
    p_self.set_defaults(func=cmd_selftest)

    return parser


def _resolve_family(args, conf):
    spec = _pick(args.family, conf, "experiment", "family", str, None)
    if spec is None:
        raise ConfigError("a profile family is required (--family or config [experiment] family)")
    return make_family(spec)


def _resolve_sim(args, conf):
    return SimConfig(
        J=_pick(args.J, conf, "simulate", "J", int, 14),
        n=_pick(args.n, conf, "simulate", "n", int, 10),
        seed=_pick(args.seed, conf, "simulate", "seed", int, 0),
        tail_tol=_pick(args.tail_tol, conf, "simulate", "tail_tol", float, 0.0),
    )


def _resolve_est(args, conf):
    return EstimatorConfig(
        N=_pick(args.N, conf, "estimate", "N", int, None),
        Q=_pick(args.Q, conf, "estimate", "Q", int, 2),
        L=_pick(args.L, conf, "estimate", "L", int, 2),
        P=_pick(args.P, conf, "estimate", "P", int, 100),
        span=_pick(args.span, conf, "estimate", "span", float, 0.25),
    )


def _resolve_out(args, conf):
    out = Path(_pick(args.out, conf, "experiment", "out", str, "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_svg(args, conf):
    return _pick(args.svg, conf, "experiment", "svg", _bool, False)


def cmd_simulate(args):
    conf = _FileConf(args.config)
    family = _resolve_family(args, conf)
    sim = _resolve_sim(args, conf)
    out = _resolve_out(args, conf)
    path = simulate_path(family, sim)
    base = out / f"path_J{sim.J}_n{sim.n}_seed{sim.seed}"
    write_path_csv(path, base)
    line = f"wrote {base}.csv ({len(path.values)} points, family {family.name})"
    if sim.tail_tol > 0.0:
        line += f", dropped mass bound {path.dropped_mass:.3e}"
    print(line)
    if _resolve_svg(args, conf):
        from . import plots

        plots.path_figure(path, base.with_suffix(".svg"))
    return 0


def cmd_estimate(args):
    conf = _FileConf(args.config)
    sample = read_path_csv(args.path_csv)
    est = _resolve_est(args, conf)
    out = _resolve_out(args, conf)
    series = estimate_hurst(GridPath(sample.values), est)
    family = family_from_meta(sample)
    if family is not None and family.limit is not None:
        series.h_true = family.limit_values(series.interval_mids)
    dest = out / f"estimate_{Path(args.path_csv).stem}.csv"
    write_estimate_csv(series, dest)
    print(f"wrote {dest} ({len(series.h_raw)} cells, N={series.config.N})")
    if _resolve_svg(args, conf):
        from . import plots

        plots.hurst_figure(series, dest.with_suffix(".svg"))
    return 0


def cmd_case(args):
    conf = _FileConf(args.config)
    config = ExperimentConfig(
        family=_resolve_family(args, conf),
        sim=_resolve_sim(args, conf),
        est=_resolve_est(args, conf),
        reps=_pick(args.reps, conf, "experiment", "reps", int, 1),
        out=_resolve_out(args, conf),
        svg=_resolve_svg(args, conf),
        workers=_pick(args.workers, conf, "experiment", "workers", int, 1),
    )
    run_case(config)
    return 0


def cmd_table(args):
    conf = _FileConf(args.config)
    paper = _pick(args.paper_scale, conf, "experiment", "paper_scale", _bool, False)
    pairs = FULL_PAIRS if paper else DESK_PAIRS
    default_reps = FULL_REPS if paper else DESK_REPS
    spec = _pick(args.family, conf, "experiment", "family", str, "sinusoidal")
    replicate_table(
        family=make_family(spec),
        pairs=pairs,
        reps=_pick(args.reps, conf, "experiment", "reps", int, default_reps),
        est=_resolve_est(args, conf),
        base_seed=_pick(args.seed, conf, "simulate", "seed", int, 0),
        out=_resolve_out(args, conf),
        svg=_resolve_svg(args, conf),
        workers=_pick(args.workers, conf, "experiment", "workers", int, 1),
        tail_tol=_pick(args.tail_tol, conf, "simulate", "tail_tol", float, 0.0),
    )
    return 0


def cmd_selftest(args):
    from .selftest import run_selftest

    return run_selftest()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "func", None) is None:
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ResourceBudgetError, OracleError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
