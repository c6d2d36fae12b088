import logging

from api.dependencies import get_output_dir
from api.models import ExitCode
from core.errors import ConfigurationError
from core.scan import RunRecord, check_golden, read_scan_csv

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("check-golden", help="compare a scan.csv against a golden file")
    parser.add_argument("--golden", required=True, help="golden scan.csv")
    parser.add_argument("--scan", default=None, help="scan.csv to check (default: <out>/scan.csv)")
    parser.add_argument("--rtol", type=float, default=None, help="relative tolerance (default RYDEIT_GOLDEN_RTOL)")
    parser.set_defaults(handler=run)


def run(args) -> ExitCode:
    path = args.scan or str(get_output_dir(args) / "scan.csv")
    try:
        _, rows = read_scan_csv(path)
    except OSError as e:
        raise ConfigurationError(f"cannot read scan file {path}: {e}")
    records = [RunRecord(**{k: v for k, v in row.items() if v is not None}) for row in rows]
    check_golden(records, args.golden, rtol=args.rtol)
    logger.info(f"{path} matches {args.golden}")
    return ExitCode.OK
