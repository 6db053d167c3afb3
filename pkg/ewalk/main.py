import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

from ewalk.commands import EXIT_INVALID, checks, spectral, trajectories
from ewalk.config import settings
from ewalk.errors import EwalkError

logger = logging.getLogger(__name__)

COMMAND_MODULES = (spectral, checks, trajectories)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ewalk",
        description="Electric quantum walks: velocities, revivals, spectra, sieving and CMV checks.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for module in COMMAND_MODULES:
        module.register(subparsers)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run one subcommand.

    Returns:
        0 on success, 2 on invalid input, 3 when a verification defect
        exceeds its tolerance
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        settings.reload()
    except EwalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID

    logging.basicConfig(
        level=settings.log_level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    logger.info(f"running {args.command}")
    try:
        code = args.handler(args)
    except EwalkError as exc:
        logger.error(f"{args.command} failed: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logger.info(f"{args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
