"""
Command-line entry point.

Exit codes: 0 on success, 1 on invalid input or usage, 2 on file errors.
"""
import argparse
import logging
import sys
from typing import Sequence

from src.commands.data_commands import setup_data_commands
from src.commands.eval_commands import setup_eval_commands
from src.commands.experiment_commands import setup_experiment_commands
from src.commands.train_commands import setup_train_commands
from src.config import ARTIFACT_VERSION, LOG_LEVEL
from src.errors import UsageError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_IO = 2


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that raises UsageError instead of exiting."""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}", self.format_usage())


def create_parser() -> CliParser:
    """
    Build the parser with every command registered.

    Returns:
        CliParser: Top-level parser whose help lists each command's usage
    """
    parser = CliParser(
        prog='vblc',
        description='Visibility boost and logit-constraint self-training at desk scale.',
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=f"%(prog)s {ARTIFACT_VERSION}")
    subparsers = parser.add_subparsers(dest='command', metavar='<command>')

    setup_data_commands(subparsers)
    setup_train_commands(subparsers)
    setup_eval_commands(subparsers)
    setup_experiment_commands(subparsers)

    parser.epilog = 'command usage:\n' + ''.join(
        '  ' + sub.format_usage().removeprefix('usage: ') for sub in subparsers.choices.values())
    return parser


def resolve_log_level(name: str) -> int:
    """Numeric level for a level name, INFO for names logging does not know."""
    level = logging.getLevelName(name.upper())
    return level if isinstance(level, int) else logging.INFO


def _configure_logging() -> None:
    level = resolve_log_level(LOG_LEVEL)
    logging.basicConfig(level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def run_cli(argv: Sequence[str] | None = None) -> int:
    """
    Parse ``argv``, run the selected command and map failures to exit codes.

    Args:
        argv (Sequence[str] | None): Arguments without the program name;
            ``sys.argv[1:]`` when None

    Returns:
        int: Process exit code
    """
    _configure_logging()
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK

    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID

    logger.info("Running %s", args.command)
    try:
        return args.handler(args)
    except ValueError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_INVALID
    except OSError as exc:
        logger.error("%s failed: %s", args.command, exc)
        return EXIT_IO
