"""
Subcommand modules. Each one exposes register(subparsers) and attaches a
handler(args) -> exit code through set_defaults.
"""

import argparse
import cmath
import logging

from ewalk.errors import EwalkError
from ewalk.formatter import ResultFormatter
from ewalk.models import RationalField, SU2Coin

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_DEFECT = 3

NAMED_COINS = {
    "hadamard": SU2Coin.hadamard,
    "identity": SU2Coin.identity,
}


def parse_coin(text: str) -> SU2Coin:
    """
    Coin from a name or the complex literal a.

    Args:
        text: "hadamard", "identity" or a complex literal such as "0.6+0.3j"

    Returns:
        The SU(2) coin with that a and real non-negative b
    """
    factory = NAMED_COINS.get(text.strip().lower())
    if factory is not None:
        return factory()
    try:
        a = complex(text.replace(" ", ""))
    except ValueError as exc:
        raise EwalkError(f"coin must be hadamard, identity or a complex number, got {text!r}") from exc
    return SU2Coin.from_polar(abs(a), cmath.phase(a))


def add_coin_arguments(parser: argparse.ArgumentParser):
    parser.add_argument("--coin", default="hadamard", help="hadamard, identity or the complex entry a")
    parser.add_argument("--abs-a", type=float, default=None, help="|a|, overrides --coin")
    parser.add_argument("--arg-a", type=float, default=0.0, help="arg a in radians, used with --abs-a")


def coin_from_args(args) -> SU2Coin:
    if args.abs_a is not None:
        return SU2Coin.from_polar(args.abs_a, args.arg_a)
    return parse_coin(args.coin)


def add_walk_arguments(parser: argparse.ArgumentParser, field_default: str = "1/3"):
    parser.add_argument("--kind", choices=("U", "W"), default="W", help="shift-coin U or split-step W")
    parser.add_argument("--field", default=field_default, help="Phi / 2 pi as n/m")
    add_coin_arguments(parser)


def field_from_args(args, variant: str = "plain") -> RationalField:
    return RationalField.parse(args.field, variant)


def add_output_arguments(parser: argparse.ArgumentParser, default_format: str = "json"):
    parser.add_argument("--output", default=None, help="output file, stdout when omitted")
    parser.add_argument("--format", choices=("json", "csv"), default=default_format, dest="fmt")


def emit(args, payload, columns=None):
    """Render a result in the requested format and write it out."""
    formatter = ResultFormatter()
    path = formatter.write(formatter.render(payload, args.fmt, columns), args.output)
    if path:
        logger.info(f"wrote {path}")


def verdict(name: str, defect: float, tolerance: float) -> int:
    """Exit code for a verification defect."""
    if defect > tolerance:
        logger.warning(f"{name}: defect {defect:.3e} exceeds {tolerance:.1e}")
        return EXIT_DEFECT
    logger.info(f"{name}: defect {defect:.3e} within {tolerance:.1e}")
    return EXIT_OK
