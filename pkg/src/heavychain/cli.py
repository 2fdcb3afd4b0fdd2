"""``heavychain`` command line: run a configured sweep or utility and write its outputs.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure,
3 acceptance-band violation (only with ``--check``).
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from .experiments.config import ConfigError, ExperimentConfig
from .experiments.results import SweepResult
from .experiments.runners import run_experiment
from .linalg import NumericalError
from .samplers import TruncationError

SUBCOMMANDS = {
    "baiyin": ("baiyin",),
    "covariance": ("covariance",),
    "theorem-b": ("theorem_b",),
    "symmetrize": ("symmetrization",),
    "tail-lemma": ("tail_lemma", "weak_lp_tail"),
    "omega-check": ("omega_events",),
    "gamma": ("gamma", "gamma_sandwich"),
    "decompose-verify": ("decomposition",),
}
SEED_ENV = "HEAVYCHAIN_SEED"

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_BAND = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser():
    parser = _Parser(prog="heavychain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, kinds in SUBCOMMANDS.items():
        p = sub.add_parser(name, help=f"experiment kinds: {', '.join(kinds)}")
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--seed", type=int, default=None, help=f"master seed (overrides config, then ${SEED_ENV})")
        p.add_argument("--trials", type=int, default=None, help="trials per cell (overrides config)")
        p.add_argument("--out-dir", default=None, help="output directory (default: config output.dir or ./results)")
        p.add_argument("--format", choices=("csv", "json"), default=None, help="per-trial record format")
        p.add_argument("--plot", action="store_true", help="also write an SVG plot")
        p.add_argument("--check", action="store_true", help="exit 3 if an acceptance band is violated")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (results do not depend on it)")
    return parser


def resolve_seed(cli_seed, cfg_seed, environ=None):
    """``--seed`` over the config file over ``$HEAVYCHAIN_SEED`` over 0."""
    if cli_seed is not None:
        return cli_seed
    if cfg_seed is not None:
        return cfg_seed
    env = (os.environ if environ is None else environ).get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"${SEED_ENV} must be an integer, got {env!r}") from exc
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = ExperimentConfig.from_json(args.config)
        if cfg.experiment not in SUBCOMMANDS[args.command]:
            raise ConfigError(f"config experiment {cfg.experiment!r} does not belong to "
                              f"'{args.command}' (expected {', '.join(SUBCOMMANDS[args.command])})")
        seed = resolve_seed(args.seed, cfg.seed)
        if seed < 0:
            raise ConfigError("seed must be nonnegative")
        trials = cfg.trials if args.trials is None else args.trials
        if trials < 1:
            raise ConfigError("--trials must be positive")
        if args.jobs < 1:
            raise ConfigError("--jobs must be positive")
        cfg = dataclasses.replace(cfg, seed=seed, trials=trials)
        out_dir = args.out_dir or cfg.output.get("dir", "results")
        fmt = args.format or cfg.output.get("format", "csv")
        planned = SweepResult(cfg.experiment, [], []).output_paths(out_dir, fmt, args.plot)
        existing = [str(p) for p in planned.values() if p.exists()]
        if existing and not args.force:
            raise ConfigError(f"refusing to overwrite {existing}; pass --force")
    except ConfigError as exc:
        print(f"heavychain: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        result = run_experiment(cfg, jobs=args.jobs)
    except (ConfigError, TruncationError) as exc:
        print(f"heavychain: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, FloatingPointError, ArithmeticError) as exc:
        print(f"heavychain: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL

    try:
        paths = result.write(out_dir, fmt=fmt, plot=args.plot, force=args.force)
    except FileExistsError as exc:
        print(f"heavychain: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(result.headline)
    for p in paths.values():
        print(f"  wrote {p}", file=sys.stderr)
    if args.check and not result.passed:
        failed = [k for k, v in result.checks.items() if not v]
        print(f"heavychain: band violation: {', '.join(failed)}", file=sys.stderr)
        return EXIT_BAND
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
