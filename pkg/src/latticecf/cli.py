"""Command line entry point.

One subcommand per experiment kind plus a preset catalog.  Exit codes:
0 on success, 2 for configuration problems, 3 when the requested
operating point admits no valid design.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    get_preset,
    load_config,
    preset_catalog,
    run_experiment,
)
from .schemes import InfeasibleError

_COMMAND_KIND = {
    "region": "region",
    "equal-rate": "equal_rate",
    "distortion": "distortion",
    "simulate": "simulate",
    "asymptotics": "asymptotics",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latticecf",
        description="Rate regions and lattice simulations for the two-way "
                    "relay channel.")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, kind in _COMMAND_KIND.items():
        sp = sub.add_parser(command, help=f"run a {kind.replace('_', ' ')} experiment")
        sp.add_argument("--config", metavar="PATH",
                        help="JSON experiment config")
        sp.add_argument("--preset", metavar="NAME",
                        help="built-in preset name (see the presets command)")
        sp.add_argument("--seed", type=int, metavar="N",
                        help="override the Monte-Carlo seed")
        sp.add_argument("--out", metavar="STEM",
                        help="output stem; files get .csv/.png suffixes")
        sp.add_argument("--grid-alpha", type=int, metavar="N",
                        help="points on the alpha grid")
        sp.add_argument("--grid-nu", type=int, metavar="N",
                        help="points on the nu grid")
        sp.add_argument("--grid-eta", type=int, metavar="N",
                        help="points on the eta grid")
        sp.add_argument("--no-plot", action="store_true",
                        help="write tables only, skip figure rendering")
    sub.add_parser("presets", help="list built-in experiment presets")
    return parser


def _resolve_config(args, kind: str) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("choose either --config or --preset, not both")
    if args.config:
        cfg = load_config(args.config)
    elif args.preset:
        cfg = get_preset(args.preset)
    elif kind == "asymptotics":
        cfg = ExperimentConfig(kind="asymptotics")
    else:
        raise ConfigError("a --config file or --preset name is required")
    if cfg.kind != kind:
        raise ConfigError(
            f"config kind {cfg.kind!r} does not match the {args.command!r} command")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "presets":
        print(preset_catalog())
        return 0
    try:
        cfg = _resolve_config(args, _COMMAND_KIND[args.command])
        paths = run_experiment(cfg, out=args.out, seed=args.seed,
                               grid_alpha=args.grid_alpha,
                               grid_nu=args.grid_nu,
                               grid_eta=args.grid_eta,
                               no_plot=args.no_plot)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except InfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 3
    for path in paths:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
