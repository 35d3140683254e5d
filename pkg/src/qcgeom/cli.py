"""Command-line entry point for the experiment runners.

One subcommand per experiment; each accepts a JSON config (--config) or
falls back to a small built-in desk-scale default, with --out, --seed,
--threads, and --tolerance overriding the corresponding config fields.
Exit codes: 0 success, 2 config error, 3 numerical guard tripped.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .config import ExperimentConfig, config_from_dict, config_from_file
from .errors import ConfigError, NumericalGuardError
from .experiments import run_experiment

# subcommand -> (allowed kinds, default config dict)
SUBCOMMANDS = {
    "dc-vs-p": (
        ("dc_vs_p",),
        {
            "experiment_kind": "dc_vs_p",
            "n_values": [4],
            "p_values": list(range(1, 13)),
        },
    ),
    "spectrum-vs-p": (
        ("spectrum_vs_p",),
        {
            "experiment_kind": "spectrum_vs_p",
            "n_values": [4],
            "p_values": [2, 4, 6, 8, 10, 12],
            "num_instances": 50,
        },
    ),
    "variance": (
        ("variance_vs_p", "variance_vs_n"),
        {
            "experiment_kind": "variance_vs_p",
            "n_values": [4],
            "p_values": [2, 4, 8, 16, 24],
            "num_instances": 100,
        },
    ),
    "a-sweep": (
        ("a_sweep",),
        {
            "experiment_kind": "a_sweep",
            "n_values": [4],
            "p_values": [8],
            "a_values": [0.001, 0.01, 0.1, 1.0],
            "num_instances": 20,
        },
    ),
    "gc-zero": (
        ("gc_zero_scaling",),
        {
            "experiment_kind": "gc_zero_scaling",
            "n_values": [3, 4, 5, 6],
            "p_values": list(range(1, 41)),
            "num_instances": 8,
        },
    ),
    "prune": (
        ("prune_demo",),
        {
            "experiment_kind": "prune_demo",
            "entangler": "cphase",
            "n_values": [6],
            "p_values": [40],
        },
    ),
    "costs": (
        ("cost_table",),
        {
            "experiment_kind": "cost_table",
            "m_values": [1, 2, 5, 10, 100, 1000],
        },
    ),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcgeom",
        description="capacity, spectrum, and gradient experiments for layered circuits",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name.replace('-', ' ')} experiment")
        p.add_argument("--config", help="JSON config file (defaults to a small built-in sweep)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("--threads", type=int, help="worker processes (overrides the config)")
        p.add_argument("--tolerance", type=float, help="rank tolerance (overrides the config)")
    return parser


def _load_config(args: argparse.Namespace) -> ExperimentConfig:
    allowed_kinds, default = SUBCOMMANDS[args.command]
    if args.config:
        config = config_from_file(args.config)
        if config.experiment_kind not in allowed_kinds:
            raise ConfigError(
                f"config field 'experiment_kind': {config.experiment_kind!r} does not "
                f"match subcommand '{args.command}' (expected one of {', '.join(allowed_kinds)})"
            )
    else:
        config = config_from_dict(dict(default))

    overrides = {}
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.seed is not None:
        if not 0 <= args.seed < 2**64:
            raise ConfigError(f"config field 'master_seed': must be a u64, got {args.seed}")
        overrides["master_seed"] = args.seed
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError(f"config field 'threads': must be >= 1, got {args.threads}")
        overrides["threads"] = args.threads
    if args.tolerance is not None:
        if not 0.0 < args.tolerance < 1.0:
            raise ConfigError(
                f"config field 'rank_tolerance': must lie in (0, 1), got {args.tolerance}"
            )
        overrides["rank_tolerance"] = args.tolerance
    return replace(config, **overrides) if overrides else config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        files = run_experiment(config)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NumericalGuardError as err:
        print(f"numerical guard: {err}", file=sys.stderr)
        return 3
    for path in files:
        print(f"wrote {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
