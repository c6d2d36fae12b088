import logging

from pydantic import ValidationError

from api.dependencies import get_output_dir, get_prepared_run, parse_float_list
from api.models import CheckOutcome, ExitCode, ReportKV
from core.errors import ConfigurationError
from core.scan import (
    OBSERVABLES, RADIUS_KEYS, SWEEPABLE_KEYS, ScanMode, ScanSpec, check_golden, compare_to_analytic, emit_golden,
    run_scan, write_points, write_scan_csv,
)

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("scan", help="sweep one parameter and tabulate the observables")
    parser.add_argument("--key", required=True, choices=SWEEPABLE_KEYS, help="parameter to sweep")
    parser.add_argument("--values", required=True, help="comma-separated, strictly monotone values")
    parser.add_argument("--unit", default="", choices=["", "sigma"], help="unit of the swept values")
    parser.add_argument("--mode", default=ScanMode.COUNTER.value, choices=[m.value for m in ScanMode])
    parser.add_argument("--hold", default=None, choices=RADIUS_KEYS,
                        help="keep this blockade quantity at its base value while sweeping")
    parser.add_argument("--observables", default=",".join(OBSERVABLES),
                        help=f"comma-separated subset of {','.join(OBSERVABLES)} to keep in the table")
    parser.add_argument("--check", action="store_true", help="compare against the closed forms")
    parser.add_argument("--golden", default=None, help="golden scan.csv to compare against")
    parser.add_argument("--emit-golden", default=None, help="write the records as a golden file")
    parser.set_defaults(handler=run)


def run(args) -> ExitCode:
    prepared = get_prepared_run(args)
    out_dir = get_output_dir(args)
    try:
        spec = ScanSpec(swept_key=args.key, values=parse_float_list(args.values, "--values"),
                        base_params=prepared.params, base_run=prepared.run, mode=ScanMode(args.mode),
                        unit=args.unit, hold=args.hold,
                        observables=[o.strip() for o in args.observables.split(",") if o.strip()])
    except ValidationError as e:
        raise ConfigurationError(f"bad scan spec: {e}")

    records = run_scan(spec, threads=args.threads)
    write_scan_csv(records, out_dir / "scan.csv")
    write_points(records, out_dir / "points.jsonl")
    failed = [r for r in records if not r.ok]
    ReportKV().add({"points": len(records), "failed": len(failed)}).write(out_dir / "report.kv")
    if args.emit_golden:
        emit_golden(records, args.emit_golden)

    failures = [f"row {r.index}: {r.status}" for r in failed]
    if args.check:
        failures += compare_to_analytic(records, spec.mode).failures()
    if args.golden:
        check_golden(records, args.golden)
    outcome = CheckOutcome(passed=not failures, failures=failures)
    for failure in outcome.failures:
        logger.warning(f"Check failed: {failure}")
    return outcome.exit_code
