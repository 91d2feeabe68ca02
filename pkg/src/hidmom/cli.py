"""Command-line entry point.

Exit codes: 0 success, 2 tolerance breach under ``--check``, 3 invalid
configuration (including linear-regime guard violations).
"""

from __future__ import annotations

import argparse
import sys

from .basis import DomainError, QuantumNumbers
from .stark import LinearRegimeError
from .tables import RunConfig, cmd_appendix, cmd_figure3, cmd_figure4, cmd_hidden_momentum
from .units import HARD_NMAX

EXIT_OK, EXIT_BREACH, EXIT_CONFIG = 0, 2, 3

COMMANDS = {
    "hidden-momentum": cmd_hidden_momentum,
    "figure3": cmd_figure3,
    "figure4": cmd_figure4,
    "appendix": cmd_appendix,
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _state(text: str) -> QuantumNumbers:
    try:
        return QuantumNumbers.parse(text)
    except (ValueError, TypeError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--field", type=float, default=1e-8, help="field magnitude in atomic units")
    common.add_argument("--theta", type=float, default=0.0, help="field tilt from x toward z, radians")
    common.add_argument("--nmax", type=int, default=20, help="largest shell in the perturbed states")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write here instead of stdout")
    common.add_argument("--check", action="store_true", help="exit 2 if an acceptance tolerance is breached")
    common.add_argument("--workers", type=int, default=1, help="threads used to fill the element table")
    common.add_argument("--radial-margin", type=int, default=8)
    common.add_argument("--angular-extra", type=int, default=6)

    parser = _Parser(prog="hidmom", description="Hidden momentum of Stark-perturbed hydrogen states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    hm = sub.add_parser("hidden-momentum", parents=[common], help="one state")
    hm.add_argument("--state", type=_state, required=True, help="n,l,m")
    sub.add_parser("figure3", parents=[common], help="ratio for the eleven plotted states")
    f4 = sub.add_parser("figure4", parents=[common], help="(3,1,-1) tilt sweep")
    f4.add_argument("--theta-points", type=int, default=13)
    sub.add_parser("appendix", parents=[common], help="n=2 degenerate manifold numbers")
    return parser


def config_from_args(args) -> RunConfig:
    if not 1 <= args.nmax <= HARD_NMAX:
        raise ConfigError(f"--nmax must be in [1, {HARD_NMAX}]")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.radial_margin < 0 or args.angular_extra < 0:
        raise ConfigError("quadrature margins must be >= 0")
    points = getattr(args, "theta_points", 13)
    if points < 1:
        raise ConfigError("--theta-points must be >= 1")
    return RunConfig(
        n_max=args.nmax, field_E=args.field, theta=args.theta,
        state=getattr(args, "state", None), fmt=args.format, out=args.out,
        radial_margin=args.radial_margin, angular_extra=args.angular_extra,
        theta_points=points, workers=args.workers,
    )


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        table = COMMANDS[args.command](config)
    except (ConfigError, DomainError, LinearRegimeError, ValueError) as exc:
        print(f"hidmom: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = table.render(config.fmt)
    if config.out:
        with open(config.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.check and table.breaches:
        for b in table.breaches:
            print(f"hidmom: tolerance breach: {b}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
