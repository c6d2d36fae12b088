import csv
import logging

from api.dependencies import get_output_dir, get_prepared_run, parse_float_list
from api.models import COUNTER_ANALYTIC_COLUMNS, CheckOutcome, CounterAnalyticRow, ExitCode, ReportKV, format_value
from core.errors import ConfigurationError
from core.twophoton_matrices import analytic_counter, counter_phase_loss
from core.units_params import c6_for_blockade_radius, derive

logger = logging.getLogger(__name__)

PHASE_TOLERANCE = 0.05
LOSS_TOLERANCE = 0.15


def register(subparsers):
    parser = subparsers.add_parser("counter-analytic",
                                   help="counter-propagating phase and loss from the relative-coordinate equations")
    parser.add_argument("--d-B", dest="d_B", default=None,
                        help="comma-separated blockaded optical depths (default: the config's own d_B)")
    parser.add_argument("--steps-per-radius", type=int, default=16)
    parser.add_argument("--check", action="store_true", help="fail unless every row matches the closed forms")
    parser.set_defaults(handler=run)


def run(args) -> ExitCode:
    prepared = get_prepared_run(args)
    params, derived = prepared.params, prepared.derived
    if params.delta == 0:
        raise ConfigurationError("counter-analytic sweeps d_B, which is undefined on resonance (delta = 0)")
    out_dir = get_output_dir(args)
    targets = parse_float_list(args.d_B, "--d-B") if args.d_B else [derived.require("d_B")]

    rows = []
    for d_B in targets:
        z_B = d_B * params.medium_length / (2.0 * derived.require("d"))
        c6 = c6_for_blockade_radius(z_B, params.omega, abs(params.delta), params.exponent)
        point = derive(params.model_copy(update={"c6": c6 if params.c6 >= 0 else -c6}))
        numeric = counter_phase_loss(point, steps_per_radius=args.steps_per_radius)
        analytic = analytic_counter(point)
        rows.append(CounterAnalyticRow(d_B=point.d_B, phi_analytic=analytic.phi, phi_numeric=numeric.phi,
                                       eta_analytic=analytic.eta, eta_numeric=numeric.eta))
        logger.info(f"d_B={point.d_B:.4g}: phi={numeric.phi:.6g} (analytic {analytic.phi:.6g}), "
                    f"eta={numeric.eta:.6g} (analytic {analytic.eta:.6g}), bright={numeric.bright_fraction:.3g}")

    path = out_dir / "counter_analytic.csv"
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(COUNTER_ANALYTIC_COLUMNS)
        for row in rows:
            writer.writerow([format_value(getattr(row, c)) for c in COUNTER_ANALYTIC_COLUMNS])
    ReportKV().add_derived(derived).add({"rows": len(rows)}).write(out_dir / "report.kv")

    if not args.check:
        return ExitCode.OK
    failures = []
    for row in rows:
        if abs(row.phi_numeric - row.phi_analytic) > PHASE_TOLERANCE * abs(row.phi_analytic):
            failures.append(f"d_B={row.d_B:.4g}: phi {row.phi_numeric:.6g} vs {row.phi_analytic:.6g}")
        if abs(row.eta_numeric - row.eta_analytic) > LOSS_TOLERANCE * abs(row.eta_analytic):
            failures.append(f"d_B={row.d_B:.4g}: eta {row.eta_numeric:.6g} vs {row.eta_analytic:.6g}")
    outcome = CheckOutcome(passed=not failures, failures=failures)
    for failure in outcome.failures:
        logger.warning(f"Check failed: {failure}")
    return outcome.exit_code
