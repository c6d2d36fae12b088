"""Flat key = value config files with unit suffixes

Physical values are converted once to base units (rad/s, m, m/s, m^-3).
A file without any physical unit suffix is taken to be in internal units already.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from pydantic import BaseModel

from core.errors import ConfigurationError
from core.units_params import DerivedParams, PhysicalParams, derive, nondimensionalize

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT = 299792458.0

FREQUENCY_UNITS = {
    "hz": 2 * math.pi,
    "khz": 2 * math.pi * 1e3,
    "mhz": 2 * math.pi * 1e6,
    "ghz": 2 * math.pi * 1e9,
    "rad/s": 1.0,
    "rad/us": 1e6,
}
LENGTH_UNITS = {"nm": 1e-9, "um": 1e-6, "mm": 1e-3, "cm": 1e-2, "m": 1.0}
DENSITY_UNITS = {"m^-3": 1.0, "cm^-3": 1e6, "um^-3": 1e18, "m-3": 1.0, "cm-3": 1e6, "um-3": 1e18}
SPEED_UNITS = {"m/s": 1.0, "km/s": 1e3, "um/us": 1.0, "c": SPEED_OF_LIGHT}

FREQUENCY_KEYS = ("gamma", "delta", "omega", "g_sqrt_n")
LENGTH_KEYS = ("lambda", "medium_length")
PHYSICAL_KEYS = FREQUENCY_KEYS + LENGTH_KEYS + ("density", "c6", "light_speed")
FLAG_KEYS = ("allow_raman_regime", "hamiltonian_test_mode")
OPTIONAL_KEYS = ("exponent",) + FLAG_KEYS
RUN_KEYS = (
    "run.geometry", "run.n_points", "run.sigma", "run.separation", "run.extent",
    "run.dt", "run.t_end", "run.snapshot_stride", "run.advection", "run.pad_cells",
)

_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_.]*)\s*=\s*(\S+)\s*(.*?)\s*$")


@dataclass
class RawValue:
    text: str
    unit: str = ""

    def number(self, key: str) -> float:
        try:
            return float(self.text)
        except ValueError:
            raise ConfigurationError(f"{key}: '{self.text}' is not a number")


@dataclass
class ConfigBundle:
    """Parsed config: physical parameters in base units plus raw run.* entries"""
    params: PhysicalParams
    run: Dict[str, RawValue] = field(default_factory=dict)
    source: Optional[str] = None
    physical_units: bool = False


def parse_lines(text: str) -> Dict[str, RawValue]:
    entries: Dict[str, RawValue] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _LINE.match(line)
        if not match:
            raise ConfigurationError(f"line {number}: expected 'key = value [unit]', got '{raw.strip()}'")
        key, value, unit = match.group(1), match.group(2), match.group(3)
        if key in entries:
            raise ConfigurationError(f"line {number}: duplicate key '{key}'")
        known = key in PHYSICAL_KEYS or key in OPTIONAL_KEYS or key in RUN_KEYS
        if not known:
            raise ConfigurationError(f"line {number}: unknown key '{key}'")
        entries[key] = RawValue(text=value, unit=unit.strip())
    return entries


def _flag(key: str, raw: RawValue) -> bool:
    lowered = raw.text.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got '{raw.text}'")


def _convert_frequency(key: str, raw: RawValue, gamma: Optional[float]) -> float:
    value = raw.number(key)
    unit = raw.unit.lower()
    if unit == "gamma":
        if gamma is None:
            raise ConfigurationError(f"{key}: 'gamma' unit needs gamma itself in absolute units")
        return value * gamma
    if unit not in FREQUENCY_UNITS:
        raise ConfigurationError(f"{key}: unknown frequency unit '{raw.unit}'")
    return value * FREQUENCY_UNITS[unit]


def _convert_c6(raw: RawValue, exponent: float, gamma: Optional[float]) -> float:
    value = raw.number("c6")
    parts = [p.strip() for p in raw.unit.replace(" ", "*").split("*") if p.strip()]
    if len(parts) != 2 or "^" not in parts[1]:
        raise ConfigurationError(f"c6: expected '<frequency unit>*<length unit>^p', got '{raw.unit}'")
    freq = _convert_frequency("c6", RawValue(text="1", unit=parts[0]), gamma)
    length_unit, power = parts[1].split("^", 1)
    if length_unit.lower() not in LENGTH_UNITS:
        raise ConfigurationError(f"c6: unknown length unit '{length_unit}'")
    try:
        power = float(power)
    except ValueError:
        raise ConfigurationError(f"c6: bad power '{power}'")
    if power != exponent:
        raise ConfigurationError(f"c6: length power {power:g} does not match exponent {exponent:g}")
    return value * freq * LENGTH_UNITS[length_unit.lower()] ** power


def _lookup(key: str, raw: RawValue, table: Dict[str, float], kind: str) -> float:
    unit = raw.unit.lower().replace(" ", "")
    if unit not in table:
        raise ConfigurationError(f"{key}: unknown {kind} unit '{raw.unit}'")
    return raw.number(key) * table[unit]


def build_params(entries: Dict[str, RawValue]) -> Tuple[PhysicalParams, bool]:
    """Returns params in base units and whether physical units were used"""
    for key in ("gamma", "delta", "omega", "c6", "medium_length"):
        if key not in entries:
            raise ConfigurationError(f"missing required key '{key}'")

    physical = any(
        entries[k].unit and entries[k].unit.lower() != "gamma" for k in PHYSICAL_KEYS if k in entries
    )
    exponent = entries["exponent"].number("exponent") if "exponent" in entries else 6.0
    flags = {k: _flag(k, entries[k]) for k in FLAG_KEYS if k in entries}
    values: Dict[str, Union[float, None]] = {}

    if not physical:
        for key in PHYSICAL_KEYS:
            if key in entries:
                values[key] = entries[key].number(key)
        if entries["gamma"].unit:
            raise ConfigurationError("gamma: cannot be expressed in units of itself")
        for key in FREQUENCY_KEYS[1:]:
            if key in entries and entries[key].unit.lower() == "gamma":
                values[key] *= values["gamma"]
        values.setdefault("light_speed", 1.0)
    else:
        for key in PHYSICAL_KEYS:
            if key in entries and not entries[key].unit:
                raise ConfigurationError(f"{key}: missing unit (other values carry physical units)")
        if entries["gamma"].unit.lower() == "gamma":
            raise ConfigurationError("gamma: cannot be expressed in units of itself")
        gamma = _convert_frequency("gamma", entries["gamma"], None)
        values["gamma"] = gamma
        for key in FREQUENCY_KEYS[1:]:
            if key in entries:
                values[key] = _convert_frequency(key, entries[key], gamma)
        for key in LENGTH_KEYS:
            if key in entries:
                values[key] = _lookup(key, entries[key], LENGTH_UNITS, "length")
        if "density" in entries:
            values["density"] = _lookup("density", entries["density"], DENSITY_UNITS, "density")
        values["c6"] = _convert_c6(entries["c6"], exponent, gamma)
        if "light_speed" in entries:
            values["light_speed"] = _lookup("light_speed", entries["light_speed"], SPEED_UNITS, "speed")
        else:
            values["light_speed"] = SPEED_OF_LIGHT

    params = PhysicalParams(
        gamma=values["gamma"],
        delta=values["delta"],
        omega=values["omega"],
        g_sqrt_n=values.get("g_sqrt_n"),
        wavelength=values.get("lambda"),
        density=values.get("density"),
        c6=values["c6"],
        medium_length=values["medium_length"],
        light_speed=values["light_speed"],
        exponent=exponent,
        **flags,
    )
    return params, physical


def parse_config(text: str, source: Optional[str] = None) -> ConfigBundle:
    entries = parse_lines(text)
    params, physical = build_params(entries)
    run = {k: v for k, v in entries.items() if k.startswith("run.")}
    logger.info(f"Loaded config {source or '<text>'}: {len(entries)} keys, physical units={physical}")
    return ConfigBundle(params=params, run=run, source=source, physical_units=physical)


def load_config(path: Union[str, Path]) -> ConfigBundle:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigurationError(f"cannot read config {path}: {e}")
    return parse_config(text, source=str(path))


TIME_UNITS = {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9}
RELATIVE_LENGTH_UNITS = ("z_b", "z_B", "sigma")


class RunSettings(BaseModel):
    """Numerical run.* entries resolved to internal units (gamma = 1, c = 1)"""
    geometry: str = "counter"
    sigma: Optional[float] = None
    separation: Optional[float] = None
    n_points: Optional[int] = None
    extent: float = 12.0
    dt: Optional[float] = None
    t_end: Optional[float] = None
    snapshot_stride: int = 0
    advection: str = "spectral"
    pad_cells: int = 8

    def spatial_sigma(self, derived: DerivedParams) -> float:
        return self.sigma if self.sigma is not None else 4.0 * derived.blockade_radius


def _internal_length(key: str, raw: RawValue, params: PhysicalParams, derived: DerivedParams,
                     sigma: Optional[float]) -> float:
    value = raw.number(key)
    unit = raw.unit.strip()
    if not unit:
        return value
    if unit in ("z_b", "z_B"):
        return value * derived.require(unit)
    if unit == "sigma":
        if sigma is None:
            raise ConfigurationError(f"{key}: 'sigma' unit is not allowed here")
        return value * sigma
    if unit.lower() in LENGTH_UNITS:
        return value * LENGTH_UNITS[unit.lower()] / params.units.length
    raise ConfigurationError(f"{key}: unknown length unit '{raw.unit}'")


def _internal_time(key: str, raw: RawValue, params: PhysicalParams) -> float:
    value = raw.number(key)
    unit = raw.unit.strip().lower()
    if not unit:
        return value
    if unit not in TIME_UNITS:
        raise ConfigurationError(f"{key}: unknown time unit '{raw.unit}'")
    return value * TIME_UNITS[unit] * params.units.frequency


def _count(key: str, raw: RawValue) -> int:
    value = raw.number(key)
    if value != int(value) or value < 0:
        raise ConfigurationError(f"{key}: expected a non-negative integer, got '{raw.text}'")
    return int(value)


def resolve_run(run: Dict[str, RawValue], params: PhysicalParams, derived: DerivedParams) -> RunSettings:
    """run.* entries of a config against nondimensionalized params and their derived values

    Without run.sigma, sigma-relative lengths refer to 4 blockade radii.
    """
    values: Dict[str, object] = {}
    if "run.geometry" in run:
        geometry = run["run.geometry"].text.lower()
        if geometry not in ("counter", "co"):
            raise ConfigurationError(f"run.geometry: expected counter or co, got '{geometry}'")
        values["geometry"] = geometry
    if "run.advection" in run:
        advection = run["run.advection"].text.lower()
        if advection not in ("spectral", "lagrange"):
            raise ConfigurationError(f"run.advection: expected spectral or lagrange, got '{advection}'")
        values["advection"] = advection

    sigma = None
    if "run.sigma" in run:
        sigma = _internal_length("run.sigma", run["run.sigma"], params, derived, None)
        if sigma <= 0:
            raise ConfigurationError("run.sigma must be positive")
        values["sigma"] = sigma
    else:
        sigma = 4.0 * derived.blockade_radius
    if "run.separation" in run:
        values["separation"] = _internal_length("run.separation", run["run.separation"], params, derived, sigma)
    if "run.extent" in run:
        values["extent"] = run["run.extent"].number("run.extent")
    for key in ("run.dt", "run.t_end"):
        if key in run:
            values[key[4:]] = _internal_time(key, run[key], params)
    for key in ("run.n_points", "run.snapshot_stride", "run.pad_cells"):
        if key in run:
            values[key[4:]] = _count(key, run[key])
    settings = RunSettings(**values)
    logger.debug(f"Run settings: {settings}")
    return settings


@dataclass
class PreparedRun:
    params: PhysicalParams
    derived: DerivedParams
    run: RunSettings


def prepare(bundle: ConfigBundle) -> PreparedRun:
    """Validate, nondimensionalize and derive; the entry point used by every subcommand"""
    params = nondimensionalize(bundle.params)
    derived = derive(params)
    run = resolve_run(bundle.run, params, derived)
    logger.info(f"Derived: d={derived.d} d_b={derived.d_b} d_B={derived.d_B} v_g={derived.v_g:.6g}")
    return PreparedRun(params=params, derived=derived, run=run)
