import argparse
import logging
import sys
import os
from typing import List, Optional

sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from api.models import ExitCode
from api.routes import ROUTES
from core.errors import ConfigurationError, SimulationError
from core.settings import get_settings, thread_count

logger = logging.getLogger(__name__)


GLOBAL_FLAGS = (
    (("--config",), {"help": "key = value [unit] parameter file"}),
    (("--out",), {"help": "output directory (default: RYDEIT_OUTPUT_DIR or ./out)"}),
    (("--threads",), {"type": int, "help": "worker threads"}),
    (("--verbose",), {"action": "store_true", "default": False, "help": "debug logging"}),
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydeit",
        description="Few-photon propagation through a Rydberg EIT medium",
    )
    for flags, options in GLOBAL_FLAGS:
        parser.add_argument(*flags, **{"default": None, **options})

    subparsers = parser.add_subparsers(dest="command", required=True)
    for route in ROUTES:
        route.register(subparsers)
    # global flags are also accepted after the subcommand; SUPPRESS keeps the top-level value otherwise
    for subparser in subparsers.choices.values():
        for flags, options in GLOBAL_FLAGS:
            subparser.add_argument(*flags, **{**options, "default": argparse.SUPPRESS})
    return parser


def configure_logging(verbose: bool):
    settings = get_settings()
    level = logging.DEBUG if verbose else getattr(logging, settings.log_level.upper(), logging.INFO)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", force=True)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    args.threads = thread_count(args.threads)
    if args.out is None:
        args.out = get_settings().output_dir

    try:
        code = args.handler(args)
    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return int(ExitCode.CONFIG_ERROR)
    except SimulationError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return int(ExitCode.CHECK_FAILED)
    return int(code)


if __name__ == "__main__":
    sys.exit(main())
