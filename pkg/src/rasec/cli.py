"""Command-line entry point: ``rasec <experiment> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import experiments as ex
from .ao import SchemeKind
from .beamforming import EigenSolveError

EXPERIMENTS = {
    "converge": ("convergence", ex.sweep_directivity),
    "pattern": ("gain_pattern", ex.gain_patterns),
    "sweep-power": ("sweep_power", ex.sweep_power),
    "sweep-antennas": ("sweep_antennas", ex.sweep_antennas),
    "sweep-eves": ("sweep_eavesdroppers", ex.sweep_eavesdroppers),
}


def _parse_grid(text: str) -> list[float]:
    vals = [float(x) for x in text.split(",") if x.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("grid must contain at least one value")
    return vals


def _parse_schemes(text: str) -> list[SchemeKind]:
    try:
        return [SchemeKind.parse(s) for s in text.split(",") if s.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--realizations", type=int, help="fading realizations per grid point")
    common.add_argument("--out", default="results", help="output directory (default: results)")
    common.add_argument("--schemes", type=_parse_schemes,
                        help="comma-separated subset of: ra,fixed,isotropic,random")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--grid", type=_parse_grid, help="comma-separated sweep values")
    common.add_argument("--power-dbm", type=float, help="AP transmit power in dBm")
    common.add_argument("--workers", type=int, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="rasec", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("converge", parents=[common], help="AO traces for p in {1,2,4}")
    sub.add_parser("pattern", parents=[common], help="array gain versus angle")
    sub.add_parser("sweep-power", parents=[common], help="secrecy rate versus P_AP (dBm)")
    sub.add_parser("sweep-antennas", parents=[common], help="secrecy rate versus k (K = k^2)")
    sub.add_parser("sweep-eves", parents=[common], help="secrecy rate versus M")
    sub.add_parser("validate", parents=[common], help="check the configuration only")
    return parser


def resolve_config(args) -> ex.ExperimentConfig:
    base = ex.load_config(args.config).to_dict() if args.config else ex.ExperimentConfig().to_dict()
    if args.seed is not None:
        base["seed"] = args.seed
    if args.realizations is not None:
        base["realizations"] = args.realizations
    if args.schemes is not None:
        base["schemes"] = [s.value for s in args.schemes]
    if args.grid is not None:
        base["grid"] = args.grid
    if args.workers is not None:
        base["workers"] = args.workers
    if args.power_dbm is not None:
        base.pop("p_ap", None)
        base["p_ap_dbm"] = args.power_dbm
    cfg = ex.ExperimentConfig.from_dict(base)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if args.command == "validate":
            print("config ok")
            return 0
        name, fn = EXPERIMENTS[args.command]
        result = fn(cfg)
        paths = ex.emit(result, args.out, name, args.format)
    except (ValueError, OSError, EigenSolveError) as exc:
        print(f"rasec: error: {exc}", file=sys.stderr)
        return 2
    for p in paths:
        print(p)
    if args.command == "converge":
        for p, it, frac in zip(result.grid, result.iterations.mean(axis=1),
                               result.converged.mean(axis=1)):
            print(f"p={p:g}: mean outer iterations {it:.2f}, converged {frac:.1%}")
    elif args.command == "pattern" and result.user_margin.size:
        print(f"median user-vs-eavesdropper margin {np.median(result.user_margin):.2f} dB")
    return 0


if __name__ == "__main__":
    sys.exit(main())
