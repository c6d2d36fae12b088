"""Parameter sweeps, comparison against closed forms and golden-file regression

Each scan point is computed independently from the base parameters (internal units) and
the swept value; output rows are ordered by input index whatever the worker count.
"""

import csv
import hashlib
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from core.config_file import RunSettings
from core.errors import ConfigurationError, GoldenMismatchError, SimulationError, UndefinedQuantityError
from core.settings import get_settings
from core.single_photon import PotentialProfile, analytic_single, input_pulse, propagate_single
from core.timedomain import Advection, Geometry, evolve, pair_correlation, plan_run
from core.twophoton_matrices import analytic_counter, counter_phase_loss
from core.units_params import DerivedParams, PhysicalParams, c6_for_blockade_radius, derive

logger = logging.getLogger(__name__)

PARAMETER_KEYS = ("delta", "omega", "g_sqrt_n", "c6", "medium_length", "exponent")
RADIUS_KEYS = ("z_B", "z_b", "d_B", "d_b")
SWEEPABLE_KEYS = PARAMETER_KEYS + RADIUS_KEYS + ("sigma",)
OBSERVABLES = ("phi", "eta", "delay", "g_r", "dB")
OBSERVABLE_COLUMNS = {"phi": ("phi",), "eta": ("eta",), "delay": ("delay",), "g_r": ("g0",), "dB": ("d_B", "d_b")}

CSV_COLUMNS = (
    "index", "swept_key", "value", "config_hash", "d_B", "d_b", "phi", "eta", "delay", "g0",
    "phi_analytic", "eta_analytic", "wall_time", "dt", "dz", "n_points", "status",
)
TEXT_COLUMNS = ("swept_key", "config_hash", "status")
INT_COLUMNS = ("index", "n_points")
GOLDEN_EXCLUDED = ("wall_time",)


class ScanMode(str, Enum):
    ANALYTIC = "analytic"
    SINGLE = "single"
    COUNTER = "counter"
    EVOLVE = "evolve"


class ScanSpec(BaseModel):
    swept_key: str
    values: List[float]
    base_params: PhysicalParams
    base_run: RunSettings
    mode: ScanMode = ScanMode.COUNTER
    unit: str = ""
    hold: Optional[str] = None
    observables: List[str] = list(OBSERVABLES)

    @field_validator("swept_key")
    @classmethod
    def known_key(cls, v):
        if v not in SWEEPABLE_KEYS:
            raise ValueError(f"cannot sweep '{v}' (sweepable: {', '.join(SWEEPABLE_KEYS)})")
        return v

    @field_validator("observables")
    @classmethod
    def known_observables(cls, v):
        unknown = [o for o in v if o not in OBSERVABLES]
        if unknown:
            raise ValueError(f"unknown observables {unknown}")
        return v

    @model_validator(mode="after")
    def monotone_values(self):
        if not self.values:
            raise ValueError("scan needs at least one value")
        steps = np.diff(self.values)
        if len(steps) and not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError("scan values must be strictly monotone")
        if self.hold is not None and self.hold not in RADIUS_KEYS:
            raise ValueError(f"hold must be one of {RADIUS_KEYS}")
        if self.unit not in ("", "sigma"):
            raise ValueError(f"unknown scan unit '{self.unit}'")
        return self


class RunRecord(BaseModel):
    index: int
    swept_key: str
    value: float
    config_hash: str
    d_B: Optional[float] = None
    d_b: Optional[float] = None
    phi: Optional[float] = None
    eta: Optional[float] = None
    delay: Optional[float] = None
    g0: Optional[float] = None
    phi_analytic: Optional[float] = None
    eta_analytic: Optional[float] = None
    wall_time: float = 0.0
    dt: Optional[float] = None
    dz: Optional[float] = None
    n_points: Optional[int] = None
    status: str = "ok"
    mode: ScanMode = ScanMode.COUNTER
    observables: List[str] = list(OBSERVABLES)
    # resolved point config, enough to replay the row without its scan
    params: Optional[PhysicalParams] = None
    run: Optional[RunSettings] = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def config_hash(params: PhysicalParams, run: RunSettings, mode: ScanMode) -> str:
    payload = {"params": params.model_dump(mode="json"), "run": run.model_dump(mode="json"), "mode": mode.value}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def _set_radius(params: PhysicalParams, key: str, target: float) -> PhysicalParams:
    sign = math.copysign(1.0, params.c6) if params.c6 != 0 else 1.0
    if key in ("d_B", "d_b"):
        d = derive(params).require("d")
        target = target * params.medium_length / (2.0 * d)
        key = "z_B" if key == "d_B" else "z_b"
    if key == "z_B":
        if params.delta == 0:
            raise UndefinedQuantityError("z_B", "undefined on resonance (delta = 0)")
        width = abs(params.delta)
    else:
        width = params.gamma
    return params.model_copy(update={"c6": sign * c6_for_blockade_radius(target, params.omega, width, params.exponent)})


def apply_value(spec: ScanSpec, value: float) -> Tuple[PhysicalParams, RunSettings]:
    """Base params/run settings with the swept key set (and the held quantity restored)"""
    params, run = spec.base_params, spec.base_run
    if spec.unit == "sigma":
        if run.sigma is None:
            raise ConfigurationError("scan unit 'sigma' needs run.sigma in the base config")
        value = value * run.sigma
    key = spec.swept_key
    if key == "sigma":
        run = run.model_copy(update={"sigma": value})
    elif key in RADIUS_KEYS:
        params = _set_radius(params, key, value)
    else:
        update = {key: value}
        if key == "g_sqrt_n":
            update.update(wavelength=None, density=None)
        params = params.model_copy(update=update)
    if spec.hold is not None:
        held = derive(spec.base_params).require(spec.hold)
        params = _set_radius(params, spec.hold, held)
    return params, run


def _analytics(mode: ScanMode, geometry: Geometry, derived: DerivedParams) -> Tuple[Optional[float], Optional[float]]:
    if mode == ScanMode.SINGLE:
        single = analytic_single(derived)
        return single.phase, 0.5 * single.two_eta
    if geometry == Geometry.CO and mode == ScanMode.EVOLVE:
        return None, None
    counter = analytic_counter(derived)
    return counter.phi, counter.eta


def _compute(params: PhysicalParams, run: RunSettings, mode: ScanMode, record: Dict[str, object]):
    derived = derive(params)
    record.update(d_B=derived.d_B, d_b=derived.d_b)
    geometry = Geometry(run.geometry)
    record["phi_analytic"], record["eta_analytic"] = _analytics(mode, geometry, derived)

    if mode == ScanMode.ANALYTIC:
        record.update(phi=record["phi_analytic"], eta=record["eta_analytic"])
    elif mode == ScanMode.SINGLE:
        pulse = input_pulse(derived, run.sigma, run.extent, run.n_points or 1024)
        result = propagate_single(pulse, derived, PotentialProfile.from_derived(derived))
        report = result.report
        record.update(phi=report.phase, eta=report.eta, delay=report.group_delay,
                      dz=pulse.grid.dz, n_points=pulse.grid.n_points)
    elif mode == ScanMode.COUNTER:
        loss = counter_phase_loss(derived)
        record.update(phi=loss.phi, eta=loss.eta)
    else:
        plan = plan_run(derived, geometry, run.spatial_sigma(derived), run.separation, run.n_points,
                        run.t_end, run.dt, Advection(run.advection), run.pad_cells)
        outcome = evolve(plan.state, plan.config, derived)
        record.update(dt=plan.config.dt, dz=plan.state.grid.axis1.dz, n_points=plan.state.grid.axis1.n_points)
        if geometry == Geometry.COUNTER:
            record.update(phi=outcome.report.phase, eta=outcome.report.eta, delay=outcome.report.group_delay)
        else:
            correlation = pair_correlation(outcome.final, 4.0 * derived.blockade_radius)
            record.update(g0=correlation.at(0.0), eta=outcome.report.eta)


def _select(record: Dict[str, object], observables: Sequence[str]):
    for observable, columns in OBSERVABLE_COLUMNS.items():
        if observable not in observables:
            for column in columns:
                record[column] = None


def run_point(spec: ScanSpec, index: int, value: float) -> RunRecord:
    started = time.perf_counter()
    record = {"index": index, "swept_key": spec.swept_key, "value": value, "config_hash": "", "mode": spec.mode,
              "observables": list(spec.observables)}
    try:
        params, run = apply_value(spec, value)
        record.update(config_hash=config_hash(params, run, spec.mode), params=params, run=run)
        _compute(params, run, spec.mode, record)
    except Exception as e:
        if not isinstance(e, SimulationError):
            logger.exception(f"Scan point {index} ({spec.swept_key}={value:g}) raised {type(e).__name__}")
        else:
            logger.warning(f"Scan point {index} ({spec.swept_key}={value:g}) failed: {e}")
        keep = {k: record[k] for k in ("index", "swept_key", "value", "config_hash", "mode", "observables")}
        keep.update({k: record[k] for k in ("params", "run") if k in record})
        return RunRecord(**keep, wall_time=time.perf_counter() - started, status=f"error:{type(e).__name__}: {e}")
    _select(record, spec.observables)
    record["wall_time"] = time.perf_counter() - started
    logger.info(f"Scan point {index} ({spec.swept_key}={value:g}) done in {record['wall_time']:.3g}s")
    return RunRecord(**record)


def replay(record: RunRecord) -> RunRecord:
    """Recompute a record from the parameters embedded in it"""
    if record.params is None or record.run is None:
        raise ConfigurationError(f"row {record.index} carries no resolved config to replay")
    values = {"index": record.index, "swept_key": record.swept_key, "value": record.value,
              "config_hash": config_hash(record.params, record.run, record.mode), "mode": record.mode,
              "observables": list(record.observables), "params": record.params, "run": record.run}
    started = time.perf_counter()
    _compute(record.params, record.run, record.mode, values)
    _select(values, record.observables)
    values["wall_time"] = time.perf_counter() - started
    return RunRecord(**values)


def run_scan(spec: ScanSpec, threads: int = 1) -> List[RunRecord]:
    logger.info(f"Scanning {spec.swept_key} over {len(spec.values)} values ({spec.mode.value}, {threads} workers)")
    points = list(enumerate(spec.values))
    if threads <= 1:
        return [run_point(spec, i, v) for i, v in points]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda p: run_point(spec, *p), points))


@dataclass(frozen=True)
class Criterion:
    name: str
    tolerance: float


DEFAULT_CRITERIA: Dict[ScanMode, Tuple[Criterion, ...]] = {
    ScanMode.ANALYTIC: (Criterion("phi_rel", 1e-12), Criterion("eta_rel", 1e-12)),
    ScanMode.SINGLE: (Criterion("phi_rel", 0.05), Criterion("eta_rel", 0.10)),
    ScanMode.COUNTER: (Criterion("phi_rel", 0.05), Criterion("eta_rel", 0.15)),
    ScanMode.EVOLVE: (Criterion("cos_phi_abs", 0.02), Criterion("loss_upper", 0.005), Criterion("loss_rel", 0.15)),
}


class ComparisonRow(BaseModel):
    index: int
    criterion: str
    deviation: float
    tolerance: float
    passed: bool


class Comparison(BaseModel):
    rows: List[ComparisonRow] = []
    passed: bool = True

    def failures(self) -> List[str]:
        return [f"row {r.index}: {r.criterion} deviation {r.deviation:.3g} > {r.tolerance:g}"
                for r in self.rows if not r.passed]


def _relative(value: float, reference: float) -> float:
    if reference == 0:
        return abs(value)
    return abs(value - reference) / abs(reference)


def _deviation(criterion: Criterion, record: RunRecord) -> float:
    if criterion.name == "phi_rel":
        return _relative(record.phi, record.phi_analytic)
    if criterion.name == "eta_rel":
        return _relative(record.eta, record.eta_analytic)
    if criterion.name == "cos_phi_abs":
        return abs(math.cos(record.phi) - math.cos(record.phi_analytic))
    if criterion.name == "loss_upper":
        # numeric transmission may only fall below the analytic one
        return max(0.0, math.exp(-record.eta) - math.exp(-record.eta_analytic))
    if criterion.name == "loss_rel":
        return _relative(math.exp(-record.eta), math.exp(-record.eta_analytic))
    raise ConfigurationError(f"unknown criterion '{criterion.name}'")


def compare_to_analytic(records: Sequence[RunRecord], mode: ScanMode = ScanMode.COUNTER,
                        criteria: Optional[Sequence[Criterion]] = None) -> Comparison:
    criteria = DEFAULT_CRITERIA[mode] if criteria is None else criteria
    comparison = Comparison()
    for record in records:
        if not record.ok:
            comparison.rows.append(ComparisonRow(index=record.index, criterion="status",
                                                 deviation=math.inf, tolerance=0.0, passed=False))
            continue
        if record.phi_analytic is None or record.eta_analytic is None:
            raise UndefinedQuantityError("analytic prediction", f"no closed form for row {record.index}")
        if record.phi is None or record.eta is None:
            raise ConfigurationError(f"row {record.index} carries no phi/eta observables")
        for criterion in criteria:
            deviation = _deviation(criterion, record)
            comparison.rows.append(ComparisonRow(index=record.index, criterion=criterion.name, deviation=deviation,
                                                 tolerance=criterion.tolerance,
                                                 passed=deviation <= criterion.tolerance))
    comparison.passed = all(row.passed for row in comparison.rows)
    if not comparison.passed:
        logger.warning(f"Analytic comparison failed: {'; '.join(comparison.failures()[:5])}")
    return comparison


def scaling_exponent(records: Sequence[RunRecord], observable: str = "phi") -> Tuple[float, float]:
    """Slope of log|observable| against log|value| and the largest relative residual of the fit"""
    rows = [r for r in records if r.ok and getattr(r, observable) is not None]
    if len(rows) < 2:
        raise UndefinedQuantityError("scaling exponent", "needs at least two successful points")
    x = np.log(np.abs([r.value for r in rows]))
    y = np.log(np.abs([getattr(r, observable) for r in rows]))
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.max(np.abs(np.exp(y - (slope * x + intercept)) - 1.0)))
    return float(slope), residual


def _format(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_scan_csv(records: Sequence[RunRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for record in sorted(records, key=lambda r: r.index):
            data = record.model_dump()
            writer.writerow([_format(data[c]) for c in CSV_COLUMNS])
    return path


def write_points(records: Sequence[RunRecord], path: Union[str, Path]) -> Path:
    """One JSON record per line, resolved config included"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for record in sorted(records, key=lambda r: r.index):
            f.write(record.model_dump_json() + "\n")
    return path


def read_points(path: Union[str, Path]) -> List[RunRecord]:
    with open(path) as f:
        return [RunRecord.model_validate_json(line) for line in f if line.strip()]


def _parse_cell(column: str, text: str):
    if column in TEXT_COLUMNS:
        return text
    if text == "":
        return None
    if column in INT_COLUMNS:
        return int(text)
    return float(text)


def read_scan_csv(path: Union[str, Path]) -> Tuple[List[str], List[Dict[str, object]]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, [])
        rows = [dict(zip(header, (_parse_cell(c, t) for c, t in zip(header, line)))) for line in reader]
    return header, rows


def emit_golden(records: Sequence[RunRecord], path: Union[str, Path]) -> Path:
    """scan.csv with wall_time zeroed so reruns produce identical bytes"""
    path = write_scan_csv([r.model_copy(update={"wall_time": 0.0}) for r in records], path)
    logger.info(f"Golden file written: {path}")
    return path


def _values_match(expected, actual, rtol: float) -> bool:
    if expected is None or actual is None or isinstance(expected, str) or isinstance(actual, str):
        return expected == actual
    if math.isnan(expected) or math.isnan(actual):
        return math.isnan(expected) and math.isnan(actual)
    return abs(actual - expected) <= rtol * max(abs(expected), abs(actual)) or actual == expected


def check_golden(records: Sequence[RunRecord], path: Union[str, Path], rtol: Optional[float] = None) -> bool:
    """Compare records with a golden scan.csv; raises GoldenMismatchError naming rows and columns"""
    rtol = get_settings().golden_rtol if rtol is None else rtol
    try:
        header, golden = read_scan_csv(path)
    except OSError as e:
        raise ConfigurationError(f"cannot read golden file {path}: {e}")

    mismatches: List[str] = []
    missing = [c for c in CSV_COLUMNS if c not in header]
    extra = [c for c in header if c not in CSV_COLUMNS]
    if missing:
        mismatches.append(f"schema: missing columns {missing}")
    if extra:
        mismatches.append(f"schema: unexpected columns {extra}")
    ordered = sorted(records, key=lambda r: r.index)
    if len(golden) != len(ordered):
        mismatches.append(f"row count: expected {len(golden)}, got {len(ordered)}")

    for row, (expected, record) in enumerate(zip(golden, ordered)):
        actual = record.model_dump()
        for column in CSV_COLUMNS:
            if column in GOLDEN_EXCLUDED or column not in expected:
                continue
            value = actual[column]
            if column not in TEXT_COLUMNS and value is not None:
                value = _parse_cell(column, _format(value))
            if not _values_match(expected[column], value, rtol):
                mismatches.append(f"row {row} column {column}: expected {expected[column]!r}, got {value!r}")
    if mismatches:
        raise GoldenMismatchError(mismatches)
    logger.info(f"Golden check passed: {path} ({len(ordered)} rows)")
    return True


def _set_coupling(params: PhysicalParams, g_sqrt_n: float) -> PhysicalParams:
    return params.model_copy(update={"g_sqrt_n": g_sqrt_n, "wavelength": None, "density": None})


def counter_gate_base(sigma: float = 1.0, z_B: float = 0.055) -> Tuple[PhysicalParams, RunSettings]:
    """Counter-propagating setup with delta = 20, Omega = 2 delta, g sqrt(n) = 20 delta; z_B in units of sigma"""
    params = PhysicalParams(gamma=1.0, delta=20.0, omega=40.0, g_sqrt_n=400.0, c6=1.0, medium_length=1.0)
    params = _set_radius(params, "z_B", z_B * sigma)
    return params, RunSettings(geometry="counter", sigma=sigma)


def co_pair_base(sigma: float = 1.0, z_b: float = 0.08) -> Tuple[PhysicalParams, RunSettings]:
    """Co-propagating resonant setup with Omega = gamma, g sqrt(n) = 100 gamma; z_b in units of sigma"""
    params = PhysicalParams(gamma=1.0, delta=0.0, omega=1.0, g_sqrt_n=100.0, c6=1.0, medium_length=1.0)
    params = _set_radius(params, "z_b", z_b * sigma)
    return params, RunSettings(geometry="co", sigma=sigma)


GATE_SCAN_SIGMA = 7.8125e-7
GATE_SCAN_COUPLING = 400.0


def gate_scans(sigma: float = GATE_SCAN_SIGMA, mode: ScanMode = ScanMode.EVOLVE) -> List[ScanSpec]:
    """Radius sweep at g sqrt(n) = 400 delta and coupling sweep over g sqrt(n) = 80..390 delta at z_B = 0.03 sigma

    The default sigma puts z_B = 0.0025 sigma at d_B = 0.5.
    """
    params, run = counter_gate_base(sigma)
    params = _set_coupling(params, GATE_SCAN_COUPLING * params.delta)
    radius_scan = ScanSpec(swept_key="z_B", values=list(np.linspace(0.0025, 0.03, 12)), unit="sigma",
                           base_params=params, base_run=run, mode=mode)
    params, run = counter_gate_base(sigma)
    params = _set_radius(_set_coupling(params, GATE_SCAN_COUPLING * params.delta), "z_B", 0.03 * sigma)
    coupling_scan = ScanSpec(swept_key="g_sqrt_n", values=list(np.linspace(80.0, 390.0, 11) * params.delta),
                             base_params=params, base_run=run, mode=mode)
    return [radius_scan, coupling_scan]


def detuning_ladder(d_B: float = 2.0, detunings: Sequence[float] = (10.0, 20.0, 40.0, 80.0),
                    mode: ScanMode = ScanMode.COUNTER) -> ScanSpec:
    """Delta/gamma sweep at fixed d_B; phi should scale as 1/delta"""
    params, run = counter_gate_base()
    params = _set_radius(params, "d_B", d_B)
    return ScanSpec(swept_key="delta", values=list(detunings), hold="d_B", base_params=params,
                    base_run=run, mode=mode)
