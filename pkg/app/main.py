"""
glmsel command-line entry point
Thin entrypoint: logging setup, subcommand dispatch and exit codes.
All subcommands live in app/commands/.

Exit codes: 0 success, 1 oracle check failed, 2 malformed input or
configuration, 3 no valid model.
"""
import argparse
import logging
import sys
from typing import List, Optional

from core.config import get_settings
from core.exceptions import (
    ConfigError, DataValidationError, DimensionMismatchError, EnumerationTooLargeError,
    GlmSelectionError, NoValidModelError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NO_MODEL = 3


def configure_logging(verbose: bool = False):
    settings = get_settings()
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format=settings.log_format, stream=sys.stderr, force=True)


def build_parser() -> argparse.ArgumentParser:
    from commands import COMMAND_REGISTRY

    parser = argparse.ArgumentParser(
        prog="glmsel",
        description="Empirical-prior Bayesian variable selection for logistic and Poisson regression",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in sorted(COMMAND_REGISTRY):
        COMMAND_REGISTRY[name].register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    configure_logging("-v" in argv or "--verbose" in argv)

    from commands import COMMAND_REGISTRY

    args = build_parser().parse_args(argv)
    try:
        return COMMAND_REGISTRY[args.command].run(args)
    except (DataValidationError, ConfigError, DimensionMismatchError, EnumerationTooLargeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except NoValidModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_MODEL
    except GlmSelectionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
