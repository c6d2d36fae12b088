"""Shared pieces every subcommand needs: the prepared config and the output directory"""

import logging
from pathlib import Path

from core.config_file import PreparedRun, load_config, prepare
from core.errors import ConfigurationError

logger = logging.getLogger(__name__)


def get_prepared_run(args) -> PreparedRun:
    if not args.config:
        raise ConfigurationError("--config is required for this subcommand")
    return prepare(load_config(args.config))


def get_output_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def parse_float_list(text: str, flag: str):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigurationError(f"{flag}: expected comma-separated numbers, got '{text}'")
