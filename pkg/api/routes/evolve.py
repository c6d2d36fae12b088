import logging

from api.dependencies import get_output_dir, get_prepared_run
from api.models import ExitCode, ReportKV
from core.timedomain import (
    Advection, EvolutionConfig, Geometry, evolve, pair_correlation, plan_run, state_from_snapshot, write_state,
)

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser("evolve", help="time-domain evolution of the two-photon amplitudes")
    parser.add_argument("--geometry", choices=[g.value for g in Geometry], default=None,
                        help="overrides run.geometry of the config")
    parser.add_argument("--snapshots", type=int, default=None, help="write a snapshot every N steps")
    parser.add_argument("--initial", default=None, help="2D snapshot file to start from instead of the dark state")
    parser.set_defaults(handler=run)


def run(args) -> ExitCode:
    prepared = get_prepared_run(args)
    derived, settings = prepared.derived, prepared.run
    out_dir = get_output_dir(args)
    geometry = Geometry(args.geometry or settings.geometry)
    stride = args.snapshots if args.snapshots is not None else settings.snapshot_stride

    plan = plan_run(derived, geometry, settings.spatial_sigma(derived), settings.separation, settings.n_points,
                    settings.t_end, settings.dt, Advection(settings.advection), settings.pad_cells,
                    snapshot_stride=stride, threads=args.threads, snapshot_dir=str(out_dir))
    state, config = plan.state, plan.config
    if args.initial:
        state = state_from_snapshot(args.initial, geometry)
        config = EvolutionConfig(**{**config.model_dump(), "initial": "custom"})

    write_state(out_dir / "initial.csv", state)
    result = evolve(state, config, derived)
    for k, snapshot in enumerate(result.trajectory):
        write_state(out_dir / f"snapshot_{k:04d}.csv", snapshot)
    write_state(out_dir / "final.csv", result.final)

    kv = ReportKV().add_report(result.report).add_derived(derived)
    kv.add({"geometry": geometry.value, "dt": config.dt, "steps": config.n_steps,
            "n_points": state.grid.axis1.n_points, "dz": state.grid.axis1.dz})
    if geometry == Geometry.CO:
        correlation = pair_correlation(result.final, 4.0 * derived.blockade_radius)
        kv.add({"g0": correlation.at(0.0), "dip_half_width": correlation.dip_half_width()})
    kv.write(out_dir / "report.kv")
    logger.info(f"Evolution finished; {len(result.trajectory)} snapshots in {out_dir}")
    return ExitCode.OK
