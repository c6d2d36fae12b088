"""Spectral propagation of one photon past a stored Rydberg excitation

The medium occupies [-L/2, L/2]. The incident pulse is given as a function of time at
the entrance, so the 1D grid used here is a time axis and the output lives on the same axis.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel
from scipy.integrate import trapezoid

from core.errors import GridError, NumericalError
from core.field_grid import (
    ALIASING_TOLERANCE, ComplexField1D, Grid1D, PropagationReport, extract_report,
    forward_transform, gaussian_pulse, inverse_transform,
)
from core.settings import get_settings
from core.units_params import DerivedParams, potential, potential_cap

logger = logging.getLogger(__name__)

MIN_POINTS_PER_RADIUS = 8
CORE_RADII = 8.0
OMEGA_CHUNK = 256


@dataclass(frozen=True, eq=False)
class PotentialProfile:
    """Interaction seen by the |r> level; kind is vdw, vdw_shifted or custom"""
    kind: str = "vdw"
    c6: float = 0.0
    center: float = 0.0
    cap: Optional[float] = None
    exponent: float = 6.0
    samples_z: Optional[np.ndarray] = None
    samples_v: Optional[np.ndarray] = None

    @classmethod
    def from_derived(cls, derived: DerivedParams, center: float = 0.0) -> "PotentialProfile":
        kind = "vdw" if center == 0.0 else "vdw_shifted"
        return cls(kind=kind, c6=derived.c6, center=center, cap=potential_cap(derived), exponent=derived.exponent)

    @classmethod
    def none(cls) -> "PotentialProfile":
        return cls(kind="vdw", c6=0.0)

    @property
    def is_zero(self) -> bool:
        if self.kind == "custom":
            return self.samples_v is None or not np.any(self.samples_v)
        return self.c6 == 0.0

    def evaluate(self, z, derived: DerivedParams) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.is_zero:
            return np.zeros_like(z)
        if self.kind == "custom":
            v = np.interp(z, self.samples_z, self.samples_v, left=0.0, right=0.0)
            cap = self.cap if self.cap is not None else potential_cap(derived)
            return np.clip(v, -cap, cap)
        params = derived.model_copy(update={"c6": self.c6, "exponent": self.exponent})
        return potential(z, params, center=self.center, cap=self.cap)


class SinglePhotonAnalytics(BaseModel):
    phase: float
    two_eta: float
    L_prime: float
    delay_reduction: float
    resonant: bool = False
    asymptotic: bool = True


@dataclass
class SinglePhotonResult:
    output: ComplexField1D
    reference: ComplexField1D
    report: PropagationReport
    analytics: Optional[SinglePhotonAnalytics] = None


def susceptibility(z, omega, derived: DerivedParams, profile: PotentialProfile):
    """k*chi(z, omega) in 1/length; broadcasts z against omega"""
    v = profile.evaluate(z, derived)
    x = np.asarray(omega) - v
    numerator = (2.0 * derived.g2n / derived.light_speed) * x
    denominator = derived.omega ** 2 - complex(derived.delta, derived.gamma) * x
    if np.any(np.abs(denominator) < 1e-300):
        raise NumericalError("susceptibility pole hit (only possible for delta/c6 < 0)")
    return numerator / denominator


def quadrature_nodes(lower: float, upper: float, center: float, radius: float,
                     points_per_radius: int) -> np.ndarray:
    """Uniform nodes within CORE_RADII of the center, geometric spacing outside"""
    if points_per_radius < MIN_POINTS_PER_RADIUS:
        raise GridError(f"quadrature needs >= {MIN_POINTS_PER_RADIUS} points per blockade radius")
    step = radius / points_per_radius
    core_half = CORE_RADII * radius
    core = center + np.arange(-core_half, core_half + 0.5 * step, step)
    ratio = 1.0 + 1.0 / points_per_radius
    outer = []
    offset = core_half
    reach = max(center - lower, upper - center)
    while offset < reach:
        offset *= ratio
        outer.append(offset)
    outer = np.asarray(outer)
    nodes = np.concatenate([center - outer[::-1], core, center + outer, [lower, upper]])
    nodes = nodes[(nodes >= lower) & (nodes <= upper)]
    return np.unique(nodes)


def _transfer_exponent(omega: np.ndarray, derived: DerivedParams, profile: PotentialProfile,
                       points_per_radius: int) -> np.ndarray:
    L = derived.medium_length
    background = susceptibility(0.0, omega, derived, PotentialProfile.none())
    exponent = 0.5j * L * background
    if profile.is_zero:
        return exponent

    radius = derived.blockade_radius
    if profile.kind == "custom":
        nodes = np.unique(np.clip(np.concatenate([profile.samples_z, [-L / 2, L / 2]]), -L / 2, L / 2))
    else:
        nodes = quadrature_nodes(-L / 2, L / 2, profile.center, radius, points_per_radius)
    flat = omega.ravel()
    local = np.empty(flat.shape, dtype=complex)
    for start in range(0, flat.size, OMEGA_CHUNK):
        block = flat[start:start + OMEGA_CHUNK, None]
        excess = susceptibility(nodes[None, :], block, derived, profile) - susceptibility(
            0.0, block, derived, PotentialProfile.none())
        local[start:start + OMEGA_CHUNK] = trapezoid(excess, x=nodes, axis=-1)
    return exponent + 0.5j * local.reshape(omega.shape)


def transfer_function(omega, derived: DerivedParams, profile: PotentialProfile,
                      points_per_radius: int = 32):
    """exp(i/2 * integral over the medium of k*chi(z, omega))"""
    omega_arr = np.atleast_1d(np.asarray(omega, dtype=float))
    result = np.exp(_transfer_exponent(omega_arr, derived, profile, points_per_radius))
    if np.ndim(omega) == 0:
        return complex(result[0])
    return result


def position_averaged_transfer(omega, derived: DerivedParams, centers: Sequence[float],
                               weights: Optional[Sequence[float]] = None, points_per_radius: int = 32):
    """Transfer function averaged over the position of a delocalized control excitation"""
    centers = list(centers)
    if weights is None:
        weights = np.ones(len(centers))
    weights = np.asarray(weights, dtype=float)
    weights = weights / weights.sum()
    total = 0.0
    for center, weight in zip(centers, weights):
        profile = PotentialProfile.from_derived(derived, center=center)
        total = total + weight * transfer_function(omega, derived, profile, points_per_radius)
    return total


def narrowband_limit(derived: DerivedParams) -> Optional[float]:
    """Spectral half-width above which the pulse is flagged as too broadband for the EIT window"""
    if derived.d is None or derived.gamma <= 0:
        return None
    return get_settings().narrowband_factor * derived.omega ** 2 / (derived.gamma * math.sqrt(derived.d))


def propagate_single(pulse_in: ComplexField1D, derived: DerivedParams, profile: PotentialProfile,
                     points_per_radius: int = 32, workers: int = 1) -> SinglePhotonResult:
    spectrum = forward_transform(pulse_in, workers=workers)
    if spectrum.nyquist_fraction() > ALIASING_TOLERANCE:
        raise NumericalError(
            f"aliasing guard: spectral content at Nyquist is {spectrum.nyquist_fraction():.2e} of peak"
        )

    flags: List[str] = []
    limit = narrowband_limit(derived)
    half_width = 2.0 * spectrum.rms_width()
    if limit is not None and half_width > limit:
        logger.warning(f"Pulse half-width {half_width:.4g} exceeds narrowband limit {limit:.4g}")
        flags.append("broadband")

    transfer = transfer_function(spectrum.omega, derived, profile, points_per_radius)
    reference_transfer = transfer_function(spectrum.omega, derived, PotentialProfile.none(), points_per_radius)

    out = inverse_transform(spectrum.with_values(transfer * spectrum.values), pulse_in.grid, workers)
    ref = inverse_transform(spectrum.with_values(reference_transfer * spectrum.values), pulse_in.grid, workers)
    if out.edge_fraction() > 1e-6:
        logger.warning(f"Output pulse reaches the time window edge ({out.edge_fraction():.2e} of peak)")
        flags.append("window_edge")

    report = extract_report(out, ref, speed=1.0, input_field=pulse_in)
    report = report.model_copy(update={"flags": flags})
    logger.info(f"Single photon: phase={report.phase:.6g} eta={report.eta:.6g} delay shift={report.group_delay:.6g}")
    return SinglePhotonResult(output=out, reference=ref, report=report)


def analytic_single(derived: DerivedParams) -> SinglePhotonAnalytics:
    """Closed-form narrowband predictions for delta >> gamma (or the resonant two-level limit)"""
    L = derived.medium_length
    min_detuning = get_settings().asymptotic_min_detuning
    if derived.delta == 0:
        z_b = derived.require("z_b")
        d_b = derived.require("d_b")
        return SinglePhotonAnalytics(
            phase=0.0,
            two_eta=d_b,
            L_prime=L - 7.0 / 9.0 * math.pi * z_b,
            delay_reduction=7.0 / 9.0 * math.pi * z_b / derived.v_g,
            resonant=True,
            asymptotic=False,
        )
    d_B = derived.require("d_B")
    z_B = derived.require("z_B")
    ratio = derived.gamma / derived.delta
    asymptotic = abs(derived.delta) >= min_detuning * derived.gamma
    if not asymptotic:
        logger.warning(f"delta/gamma={derived.delta / derived.gamma:.3g} is outside the asymptotic regime")
    return SinglePhotonAnalytics(
        phase=-math.pi / 6.0 * d_B * ratio,
        two_eta=5.0 * math.pi / 18.0 * d_B * ratio ** 2,
        L_prime=L - 7.0 / 9.0 * math.pi * z_B,
        delay_reduction=7.0 / 9.0 * math.pi * z_B / derived.v_g,
        asymptotic=asymptotic,
    )


def default_pulse_width(derived: DerivedParams) -> float:
    """Temporal width twice the narrowband minimum 5 gamma sqrt(d) / Omega^2"""
    d = derived.d if derived.d is not None else 1.0
    gamma = derived.gamma if derived.gamma > 0 else abs(derived.delta)
    return 10.0 * gamma * math.sqrt(d) / derived.omega ** 2


def input_pulse(derived: DerivedParams, sigma: Optional[float] = None, extent: float = 12.0,
                n_points: int = 1024) -> ComplexField1D:
    """Gaussian at the medium entrance on a time window that also holds the delayed output"""
    if sigma is None:
        sigma = default_pulse_width(derived)
    delay = derived.medium_length / derived.v_g
    grid = Grid1D(-extent * sigma, extent * sigma + delay, n_points)
    return gaussian_pulse(grid, 0.0, sigma)
