"""2x2 relative-coordinate equations for two interacting polaritons

c d/dr v = M(r, omega) v with v = (ee, es+), es- dropped. Matrices are numpy arrays of
shape (..., 2, 2); leading axes broadcast over r and omega.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy.integrate import quad

from core.errors import GridError, NumericalError
from core.units_params import DerivedParams, potential

logger = logging.getLogger(__name__)

MIN_STEPS_PER_RADIUS = 16
MIN_COVERAGE_RADII = 6.0
DEFAULT_SPAN_RADII = 8.0
DEGENERATE_EIGENVALUE_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class EffectivePotentialValue:
    v_raw: np.ndarray
    v_eff: np.ndarray


class CounterPhaseLoss(BaseModel):
    phi: float
    eta: float
    factor_re: float
    factor_im: float
    bright_fraction: float
    tail_correction: float


class CounterAnalytics(BaseModel):
    phi: float
    eta: float
    resonant: bool = False


def _gamma(derived: DerivedParams) -> complex:
    return derived.Gamma


def effective_potential(r, derived: DerivedParams) -> EffectivePotentialValue:
    """V_eff = Gamma V / (Gamma V - 2i Omega^2), 0 for V = 0 and 1 deep in the blockade"""
    v = potential(r, derived)
    Gamma = _gamma(derived)
    v_eff = Gamma * v / (Gamma * v - 2j * derived.omega ** 2)
    return EffectivePotentialValue(v_raw=np.asarray(v), v_eff=np.asarray(v_eff))


def m_full(r, omega, derived: DerivedParams) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    omega = np.asarray(omega, dtype=float)
    v = potential(r, derived)
    v, omega = np.broadcast_arrays(v, omega)
    Gamma = _gamma(derived)
    g2n = derived.g2n
    coupling = derived.g_sqrt_n * derived.omega / Gamma

    denominator = 2.0 * derived.omega ** 2 + 1j * v * Gamma - 1j * omega * Gamma
    if np.any(np.abs(denominator) < 1e-300):
        raise NumericalError("M(r, omega) pole hit (only possible for delta/c6 < 0)")
    m = np.empty(v.shape + (2, 2), dtype=complex)
    m[..., 0, 0] = 0.5j * omega - g2n / Gamma
    m[..., 0, 1] = -coupling
    m[..., 1, 0] = -coupling
    m[..., 1, 1] = 1j * omega - derived.omega ** 2 / Gamma + 1j * g2n * (omega - v) / denominator
    return m


def m_expansion(r, derived: DerivedParams) -> Tuple[np.ndarray, np.ndarray]:
    """Narrowband expansion M = M0 + omega M1 written through V_eff"""
    value = effective_potential(r, derived)
    v_eff = value.v_eff
    Gamma = _gamma(derived)
    g2n = derived.g2n
    omega2 = derived.omega ** 2
    # V_eff / V without dividing by V
    v_eff_over_v = Gamma / (Gamma * value.v_raw - 2j * omega2)

    m0 = np.empty(v_eff.shape + (2, 2), dtype=complex)
    m0[..., 0, 0] = g2n
    m0[..., 0, 1] = derived.g_sqrt_n * derived.omega
    m0[..., 1, 0] = derived.g_sqrt_n * derived.omega
    m0[..., 1, 1] = omega2 + g2n * v_eff
    m0 = -m0 / Gamma

    m1 = np.zeros(v_eff.shape + (2, 2), dtype=complex)
    m1[..., 0, 0] = 0.5j
    m1[..., 1, 1] = 1j * (1.0 - 2.0 * g2n * omega2 * v_eff_over_v ** 2 / Gamma ** 2)
    return m0, m1


def expm2(a: np.ndarray) -> np.ndarray:
    """Closed-form exponential of a stack of 2x2 matrices"""
    a = np.asarray(a, dtype=complex)
    s = 0.5 * (a[..., 0, 0] + a[..., 1, 1])
    eye = np.broadcast_to(np.eye(2, dtype=complex), a.shape)
    b = a - s[..., None, None] * eye
    q = np.sqrt(-(b[..., 0, 0] * b[..., 1, 1] - b[..., 0, 1] * b[..., 1, 0]))

    degenerate = np.abs(2.0 * q) < DEGENERATE_EIGENVALUE_GAP
    safe_q = np.where(degenerate, 1.0, q)
    plus = np.exp(s + q)[..., None, None] * (eye + b / safe_q[..., None, None])
    minus = np.exp(s - q)[..., None, None] * (eye - b / safe_q[..., None, None])
    result = 0.5 * (plus + minus)
    if np.any(degenerate):
        q2 = (q * q)[..., None, None]
        series = np.exp(s)[..., None, None] * ((1.0 + q2 / 2.0 + q2 ** 2 / 24.0) * eye
                                             + (1.0 + q2 / 6.0 + q2 ** 2 / 120.0) * b)
        result = np.where(degenerate[..., None, None], series, result)
    return result


def dark_vector(derived: DerivedParams) -> np.ndarray:
    """Dark polariton direction es+/ee = -g sqrt(n)/Omega, unit length"""
    v = np.array([derived.omega, -derived.g_sqrt_n], dtype=complex)
    return v / math.hypot(derived.omega, derived.g_sqrt_n)


def bright_vector(derived: DerivedParams) -> np.ndarray:
    v = np.array([derived.g_sqrt_n, derived.omega], dtype=complex)
    return v / math.hypot(derived.omega, derived.g_sqrt_n)


def bright_admixture(v: np.ndarray, derived: DerivedParams) -> float:
    """Fraction of |v|^2 carried by the bright polariton"""
    dark = abs(dark_vector(derived) @ v) ** 2
    bright = abs(bright_vector(derived) @ v) ** 2
    total = dark + bright
    return float(bright / total) if total > 0 else 0.0


def counter_transfer(omega, r_span: Tuple[float, float], derived: DerivedParams,
                     steps_per_radius: int = MIN_STEPS_PER_RADIUS, require_coverage: bool = True) -> np.ndarray:
    """Ordered product of per-step exponentials of (dr/c) M(r, omega) from r_span[0] to r_span[1]"""
    r_start, r_end = float(r_span[0]), float(r_span[1])
    omega = np.asarray(omega, dtype=float)
    c = derived.light_speed
    if derived.c6 == 0:
        return expm2((r_end - r_start) / c * m_full(0.0, omega, derived))

    radius = derived.blockade_radius
    if steps_per_radius < MIN_STEPS_PER_RADIUS:
        raise GridError(f"step size guard: need >= {MIN_STEPS_PER_RADIUS} steps per blockade radius")
    if require_coverage and (min(-r_start, r_end) < MIN_COVERAGE_RADII * radius
                             and min(r_start, -r_end) < MIN_COVERAGE_RADII * radius):
        raise GridError(f"r span must cover >= {MIN_COVERAGE_RADII:g} blockade radii on each side")

    n_steps = max(1, int(math.ceil(abs(r_end - r_start) * steps_per_radius / radius)))
    dr = (r_end - r_start) / n_steps
    midpoints = r_start + dr * (np.arange(n_steps) + 0.5)
    generators = m_full(midpoints.reshape((n_steps,) + (1,) * omega.ndim), omega, derived)
    steps = expm2(dr / c * generators)

    total = np.broadcast_to(np.eye(2, dtype=complex), steps.shape[1:]).copy()
    for step in steps:
        total = step @ total
    return total


def _tail_exponent(derived: DerivedParams, distance: float) -> complex:
    """Contribution of |r| > distance from V_eff ~ i Gamma V / (2 Omega^2), one side"""
    p = derived.exponent
    integral = abs(derived.c6) / ((p - 1.0) * distance ** (p - 1.0)) * math.copysign(1.0, derived.c6)
    return -1j * derived.g2n * integral / (2.0 * derived.light_speed * derived.omega ** 2)


def counter_phase_loss(derived: DerivedParams, omega: float = 0.0, span_radii: float = DEFAULT_SPAN_RADII,
                       steps_per_radius: int = MIN_STEPS_PER_RADIUS) -> CounterPhaseLoss:
    """Dark-in to dark-out factor exp(i phi - eta) across the blockade, tails added analytically"""
    dark = dark_vector(derived)
    if derived.c6 == 0:
        half = 1.0
        tail = 0.0
    else:
        half = span_radii * derived.blockade_radius
        tail = 2.0 * _tail_exponent(derived, half)
    transfer = counter_transfer(omega, (-half, half), derived, steps_per_radius)
    v_out = transfer @ dark
    factor = complex(dark @ v_out) * np.exp(tail)
    if abs(factor) == 0:
        raise NumericalError("dark component fully extinguished")
    return CounterPhaseLoss(
        phi=math.atan2(factor.imag, factor.real),
        eta=-math.log(abs(factor)),
        factor_re=factor.real,
        factor_im=factor.imag,
        bright_fraction=bright_admixture(v_out, derived),
        tail_correction=abs(tail),
    )


class PulseAveragedCounter(BaseModel):
    phi: float
    eta: float
    spectral_width: float


def pair_spectral_width(derived: DerivedParams, sigma: float) -> float:
    """Standard deviation in omega of a counter-propagating Gaussian dark pair (intensity width sigma each)

    The pair amplitude along r goes as exp(-(r - r0)^2 / (8 sigma^2)) and moves at 2 v_g, so its
    power spectrum is exp(-sigma^2 omega^2 / v_g^2).
    """
    return derived.v_g / (math.sqrt(2.0) * sigma)


def pulse_averaged_counter(derived: DerivedParams, sigma: float, n_omega: int = 201, cutoff: float = 5.0,
                           span_radii: float = DEFAULT_SPAN_RADII,
                           steps_per_radius: int = MIN_STEPS_PER_RADIUS) -> PulseAveragedCounter:
    """Counter-propagating factor seen by a Gaussian dark pair rather than a single frequency

    Each frequency contributes the dark-to-dark factor of counter_transfer divided by the V = 0
    factor over the same span. phi is the phase of the spectrally weighted mean factor and eta
    comes from the weighted mean of |factor|^2, which is how evolve reads them off against its
    V = 0 twin (overlap phase, norm ratio).
    """
    width = pair_spectral_width(derived, sigma)
    omega = np.linspace(-cutoff, cutoff, n_omega) * width
    weights = np.exp(-0.5 * (omega / width) ** 2)
    weights /= weights.sum()

    dark = dark_vector(derived)
    if derived.c6 == 0:
        half, tail = 1.0, 0.0
    else:
        half = span_radii * derived.blockade_radius
        tail = 2.0 * _tail_exponent(derived, half)
    transfer = counter_transfer(omega, (-half, half), derived, steps_per_radius)
    free = counter_transfer(omega, (-half, half), derived.model_copy(update={"c6": 0.0}))
    factor = (transfer @ dark) @ dark / ((free @ dark) @ dark) * np.exp(tail)

    mean = complex(np.sum(weights * factor))
    power = float(np.sum(weights * np.abs(factor) ** 2))
    if power == 0:
        raise NumericalError("dark component fully extinguished across the pulse spectrum")
    return PulseAveragedCounter(phi=math.atan2(mean.imag, mean.real), eta=-0.5 * math.log(power),
                                spectral_width=width)


def picked_up_exponent(derived: DerivedParams) -> complex:
    """-integral dr g^2 n V_eff(r) / (c Gamma) over the whole line, by adaptive quadrature"""
    Gamma = _gamma(derived)
    radius = derived.blockade_radius

    def integrand(x, part):
        value = effective_potential(x * radius, derived).v_eff
        return float(np.real(value) if part == 0 else np.imag(value))

    real = 2.0 * quad(integrand, 0.0, np.inf, args=(0,), limit=400)[0]
    imag = 2.0 * quad(integrand, 0.0, np.inf, args=(1,), limit=400)[0]
    return -derived.g2n * radius * complex(real, imag) / (derived.light_speed * Gamma)


def analytic_counter(derived: DerivedParams) -> CounterAnalytics:
    if derived.delta == 0:
        return CounterAnalytics(phi=0.0, eta=0.5 * derived.require("d_b"), resonant=True)
    d_B = derived.require("d_B")
    ratio = derived.gamma / derived.delta
    root = 2.0 ** (1.0 / 6.0)
    return CounterAnalytics(
        phi=-math.pi / (root * 6.0) * ratio * d_B,
        eta=5.0 * math.pi / (root * 36.0) * ratio ** 2 * d_B,
    )


def co_propagation_solve(r: float, omega, R_span: Tuple[float, float], derived: DerivedParams) -> np.ndarray:
    """Transfer over the center-of-mass span at fixed r: c d/dR v = 2 M(r, omega) v"""
    length = float(R_span[1]) - float(R_span[0])
    return expm2(2.0 * length / derived.light_speed * m_full(r, omega, derived))


def predicted_decay_length(derived: DerivedParams) -> float:
    """(L/d)(gamma^2 + delta^2)/gamma^2"""
    d = derived.require("d")
    return derived.medium_length / d * (derived.gamma ** 2 + derived.delta ** 2) / derived.gamma ** 2


def dark_decay_length(r: float, derived: DerivedParams, span: Optional[float] = None) -> float:
    """Amplitude e-folding length of the dark component in R, read from co_propagation_solve"""
    if span is None:
        span = predicted_decay_length(derived)
    dark = dark_vector(derived)
    transfer = co_propagation_solve(r, 0.0, (0.0, span), derived)
    ratio = abs(dark @ transfer @ dark)
    if ratio >= 1.0:
        return math.inf
    return -span / math.log(ratio)


def relative_group_speed(r, derived: DerivedParams) -> np.ndarray:
    """Speed of the dark component along the propagation coordinate, from M1"""
    _, m1 = m_expansion(r, derived)
    dark = dark_vector(derived)
    slope = np.einsum("i,...ij,j->...", dark, m1, dark)
    return derived.light_speed / np.imag(slope)
