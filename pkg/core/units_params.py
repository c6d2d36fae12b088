"""Physical parameters, validation, unit scaling and derived EIT/blockade quantities

Internal units are gamma = 1 and c = 1, so lengths are measured in c/gamma.
Frequencies are angular (rad per time unit) throughout.
"""

import logging
import math
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from core.errors import ParameterError, UndefinedQuantityError
from core.settings import get_settings

logger = logging.getLogger(__name__)


class UnitSystem(BaseModel):
    """Size of one frequency unit (rad/s) and one length unit (m) of a parameter set"""
    model_config = ConfigDict(frozen=True)

    frequency: float = 1.0
    length: float = 1.0


class PhysicalParams(BaseModel):
    """Input physical constants; V(z) = c6 / |z|**exponent"""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    gamma: float
    delta: float
    omega: float
    g_sqrt_n: Optional[float] = None
    wavelength: Optional[float] = Field(default=None, alias="lambda")
    density: Optional[float] = None
    c6: float
    medium_length: float
    light_speed: float = 1.0
    exponent: float = 6.0

    # escape hatches
    allow_raman_regime: bool = False
    hamiltonian_test_mode: bool = False

    units: UnitSystem = UnitSystem()


class Violation(BaseModel):
    field: str
    message: str


class ValidationResult(BaseModel):
    ok: bool
    violations: List[Violation] = []

    def messages(self) -> List[str]:
        return [f"{v.field}: {v.message}" for v in self.violations]


class DerivedParams(BaseModel):
    """Quantities computed once from PhysicalParams (same unit system)"""
    model_config = ConfigDict(frozen=True)

    gamma: float
    delta: float
    omega: float
    c6: float
    exponent: float
    medium_length: float
    light_speed: float
    g2n: float
    v_g: float
    d: Optional[float] = None
    z_b: Optional[float] = None
    z_B: Optional[float] = None
    d_b: Optional[float] = None
    d_B: Optional[float] = None

    @property
    def Gamma(self) -> complex:
        return complex(self.gamma, -self.delta)

    @property
    def g_sqrt_n(self) -> float:
        return math.sqrt(self.g2n)

    @property
    def blockade_radius(self) -> float:
        """z_B off resonance, z_b on resonance: the radius that sets the grids"""
        return self.z_B if self.z_B is not None else self.require("z_b")

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            if name in ("z_B", "d_B"):
                raise UndefinedQuantityError(name, "undefined on resonance (delta = 0)")
            raise UndefinedQuantityError(name, "undefined for gamma = 0 (Hamiltonian test mode)")
        return value


def validate(params: PhysicalParams) -> ValidationResult:
    """Check the stated physical assumptions; never raises"""
    violations = []

    def bad(field, message):
        violations.append(Violation(field=field, message=message))

    if params.gamma < 0 or (params.gamma == 0 and not params.hamiltonian_test_mode):
        bad("gamma", "gamma must be positive")
    if params.hamiltonian_test_mode and params.gamma == 0 and params.delta == 0:
        bad("delta", "gamma = 0 test mode needs a nonzero detuning")
    if params.omega <= 0:
        bad("omega", "omega must be positive")
    if params.medium_length <= 0:
        bad("medium_length", "medium_length must be positive")
    if params.light_speed <= 0:
        bad("light_speed", "light_speed must be positive")
    if params.exponent <= 1:
        bad("exponent", "interaction exponent must exceed 1")

    has_coupling = params.g_sqrt_n is not None
    has_optical = params.wavelength is not None or params.density is not None
    if has_coupling and has_optical:
        bad("g_sqrt_n", "give either g_sqrt_n or (lambda, density), not both")
    elif not has_coupling and not has_optical:
        bad("g_sqrt_n", "one of g_sqrt_n or (lambda, density) is required")
    elif has_optical and (params.wavelength is None or params.density is None):
        bad("lambda", "lambda and density must be given together")
    if has_coupling and params.g_sqrt_n <= 0:
        bad("g_sqrt_n", "g_sqrt_n must be positive")
    if params.wavelength is not None and params.wavelength <= 0:
        bad("lambda", "lambda must be positive")
    if params.density is not None and params.density <= 0:
        bad("density", "density must be positive")

    if params.delta != 0 and params.delta * params.c6 < 0 and not params.allow_raman_regime:
        bad("c6", "delta/c6 < 0 hits the Raman resonance V + omega^2/delta = 0 (set allow_raman_regime to override)")

    return ValidationResult(ok=not violations, violations=violations)


def require_valid(params: PhysicalParams) -> PhysicalParams:
    result = validate(params)
    if not result.ok:
        raise ParameterError(result.messages())
    return params


def collective_coupling_squared(params: PhysicalParams) -> float:
    """g^2 n, either given directly or from d = (3/2pi) lambda^2 n L"""
    if params.g_sqrt_n is not None:
        return params.g_sqrt_n ** 2
    d = 3.0 / (2.0 * math.pi) * params.wavelength ** 2 * params.density * params.medium_length
    return d * params.light_speed * params.gamma / (2.0 * params.medium_length)


def blockade_radius(c6: float, omega: float, width: float, exponent: float = 6.0) -> float:
    """Solve |V(z)| = omega^2 / width for z"""
    return (abs(c6) * width / omega ** 2) ** (1.0 / exponent)


def c6_for_blockade_radius(radius: float, omega: float, width: float, exponent: float = 6.0) -> float:
    """Inverse of blockade_radius; width is gamma (resonant) or delta (off-resonant)"""
    if width <= 0:
        raise UndefinedQuantityError("c6", f"no blockade radius for line width {width:g}")
    return radius ** exponent * omega ** 2 / width


def derive(params: PhysicalParams) -> DerivedParams:
    require_valid(params)
    g2n = collective_coupling_squared(params)
    L = params.medium_length
    c = params.light_speed
    p = params.exponent

    v_g = c * params.omega ** 2 / g2n
    d = z_b = z_B = d_b = d_B = None
    if params.gamma > 0:
        if params.g_sqrt_n is not None:
            d = 2.0 * g2n * L / (c * params.gamma)
        else:
            d = 3.0 / (2.0 * math.pi) * params.wavelength ** 2 * params.density * L
        v_g_alt = 2.0 * params.omega ** 2 * L / (d * params.gamma)
        if abs(v_g_alt - v_g) > 1e-10 * abs(v_g):
            logger.warning(f"Group velocity forms disagree: {v_g} vs {v_g_alt}")
        z_b = blockade_radius(params.c6, params.omega, params.gamma, p)
        d_b = 2.0 * d * z_b / L
    if params.delta != 0:
        z_B = blockade_radius(params.c6, params.omega, abs(params.delta), p)
        if d is not None:
            d_B = 2.0 * d * z_B / L

    derived = DerivedParams(
        gamma=params.gamma, delta=params.delta, omega=params.omega, c6=params.c6,
        exponent=p, medium_length=L, light_speed=c, g2n=g2n, v_g=v_g,
        d=d, z_b=z_b, z_B=z_B, d_b=d_b, d_B=d_B,
    )
    logger.debug(f"Derived parameters: {derived}")
    return derived


def potential_cap(derived: DerivedParams) -> float:
    """|V| is capped at factor * max(omega^2/gamma, omega^2/|delta|)"""
    scales = []
    if derived.gamma > 0:
        scales.append(derived.omega ** 2 / derived.gamma)
    if derived.delta != 0:
        scales.append(derived.omega ** 2 / abs(derived.delta))
    scale = max(scales) if scales else derived.omega ** 2
    return get_settings().potential_cap_factor * scale


def potential(z, derived: DerivedParams, center: float = 0.0, cap: Optional[float] = None):
    """Capped power-law interaction V(z) = c6 / |z - center|**p, finite everywhere"""
    if cap is None:
        cap = potential_cap(derived)
    distance = np.abs(np.asarray(z, dtype=float) - center)
    with np.errstate(divide="ignore", over="ignore"):
        magnitude = abs(derived.c6) / distance ** derived.exponent
    magnitude = np.minimum(np.nan_to_num(magnitude, nan=cap, posinf=cap), cap)
    return math.copysign(1.0, derived.c6) * magnitude if derived.c6 != 0 else np.zeros_like(distance)


def _scales(params: PhysicalParams):
    if params.gamma > 0:
        frequency = params.gamma
    else:
        frequency = abs(params.delta) if params.delta != 0 else params.omega
    return frequency, params.light_speed / frequency


def _rescale(params: PhysicalParams, frequency: float, length: float) -> PhysicalParams:
    p = params.exponent
    updates = dict(
        gamma=params.gamma / frequency,
        delta=params.delta / frequency,
        omega=params.omega / frequency,
        c6=params.c6 / (frequency * length ** p),
        medium_length=params.medium_length / length,
        light_speed=params.light_speed / (length * frequency),
        units=UnitSystem(
            frequency=params.units.frequency * frequency,
            length=params.units.length * length,
        ),
    )
    if params.g_sqrt_n is not None:
        updates["g_sqrt_n"] = params.g_sqrt_n / frequency
    if params.wavelength is not None:
        updates["wavelength"] = params.wavelength / length
        updates["density"] = params.density * length ** 3
    return params.model_copy(update=updates)


def nondimensionalize(params: PhysicalParams) -> PhysicalParams:
    """Equivalent parameter set with gamma = 1, c = 1 (|delta| = 1 in gamma = 0 test mode)"""
    require_valid(params)
    frequency, length = _scales(params)
    return _rescale(params, frequency, length)


def redimensionalize(params: PhysicalParams) -> PhysicalParams:
    """Back to the base units recorded in params.units"""
    return _rescale(params, 1.0 / params.units.frequency, 1.0 / params.units.length)
