"""Time-domain evolution of the two-excitation amplitudes ee, es, se, ss on a (z1, z2) grid

Equations (counter-propagating; photon 1 moves right, photon 2 moves left):
    (d_t + c d_z1 - c d_z2) ee = -(2 g^2 n/Gamma) ee - (g sqrt(n) Omega/Gamma)(es + se)
    (d_t + c d_z1) es          = -((g^2 n + Omega^2)/Gamma) es - (g sqrt(n) Omega/Gamma)(ee + ss)
    (d_t - c d_z2) se          = -((g^2 n + Omega^2)/Gamma) se - (g sqrt(n) Omega/Gamma)(ee + ss)
    d_t ss = -i V(z1 - z2) ss - (2 Omega^2/Gamma) ss - (g sqrt(n) Omega/Gamma)(es + se)
Co-propagating: -c d_z2 becomes +c d_z2 and se(z1, z2) = es(z2, z1).

Integration is Strang splitting: half advection, exact local 4x4 exponential, half advection.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import fft as sfft
from scipy import ndimage
from scipy.linalg import expm

from core.errors import GridError, NumericalError
from core.field_grid import (
    COMPONENTS, ComplexField2D, Grid1D, Grid2D, PropagationReport, gaussian_pulse,
    integrate_2d, read_snapshot_2d, write_snapshot_2d,
)
from core.settings import get_settings
from core.twophoton_matrices import predicted_decay_length
from core.units_params import DerivedParams, potential

logger = logging.getLogger(__name__)

NORM_INCREASE_TOLERANCE = 1e-10
SUPPORT_BAND_RADII = 3.0
SUPPORT_BAND_TOLERANCE = 1e-3
COUPLING_DT_FRACTION = 0.1


class Geometry(str, Enum):
    COUNTER = "counter"
    CO = "co"


class Advection(str, Enum):
    SPECTRAL = "spectral"
    LAGRANGE = "lagrange"


class EvolutionConfig(BaseModel):
    dt: float
    t_end: float
    snapshot_stride: int = 0
    boundary: str = "outflow"
    initial: str = "dark_product_gaussian"
    advection: Advection = Advection.SPECTRAL
    pad_cells: int = 8
    check_monotone: bool = True
    threads: int = 1
    snapshot_dir: Optional[str] = None

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass
class PulseSpec:
    center: float
    sigma: float
    carrier_detuning: float = 0.0


@dataclass
class TwoPhotonState:
    geometry: Geometry
    grid: Grid2D
    psi: np.ndarray  # (4, N1, N2) in COMPONENTS order
    time: float = 0.0

    def copy(self) -> "TwoPhotonState":
        return TwoPhotonState(self.geometry, self.grid, self.psi.copy(), self.time)

    def component(self, name: str) -> np.ndarray:
        return self.psi[COMPONENTS.index(name)]

    def fields(self) -> Dict[str, ComplexField2D]:
        return {name: ComplexField2D(self.grid, self.psi[k]) for k, name in enumerate(COMPONENTS)}

    def norm(self) -> float:
        return integrate_2d(np.sum(np.abs(self.psi) ** 2, axis=0), self.grid)

    def symmetry_error(self) -> float:
        """Largest violation of ee(z1,z2)=ee(z2,z1), ss(z1,z2)=ss(z2,z1) and se(z1,z2)=es(z2,z1)"""
        ee, es, se, ss = self.psi
        peak = max(np.abs(self.psi).max(), 1e-300)
        errors = [np.abs(ee - ee.T).max(), np.abs(ss - ss.T).max(), np.abs(se - es.T).max()]
        return float(max(errors) / peak)


@dataclass
class CoefficientSet:
    """Local rates and transport velocities (in units of c) of the four-amplitude system"""
    geometry: Geometry
    ee_rate: complex
    es_rate: complex
    ss_rate: complex
    coupling: complex
    velocities: Dict[str, Tuple[float, float]]

    def generator(self, v) -> np.ndarray:
        """Local 4x4 generator A(V) with d_t psi = A psi + transport"""
        v = np.asarray(v, dtype=float)
        a = np.zeros(v.shape + (4, 4), dtype=complex)
        k = self.coupling
        a[..., 0, 0] = self.ee_rate
        a[..., 1, 1] = self.es_rate
        a[..., 2, 2] = self.es_rate
        a[..., 3, 3] = self.ss_rate - 1j * v
        for i, j in ((0, 1), (0, 2), (1, 3), (2, 3)):
            a[..., i, j] = k
            a[..., j, i] = k
        return a


def derive_equations(geometry: Geometry, derived: DerivedParams) -> CoefficientSet:
    geometry = Geometry(geometry)
    Gamma = derived.Gamma
    second = 1.0 if geometry == Geometry.CO else -1.0
    return CoefficientSet(
        geometry=geometry,
        ee_rate=-2.0 * derived.g2n / Gamma,
        es_rate=-(derived.g2n + derived.omega ** 2) / Gamma,
        ss_rate=-2.0 * derived.omega ** 2 / Gamma,
        coupling=-derived.g_sqrt_n * derived.omega / Gamma,
        velocities={"ee": (1.0, second), "es": (1.0, 0.0), "se": (0.0, second), "ss": (0.0, 0.0)},
    )


def reduce_to_relative_frame(coeffs: CoefficientSet, r: float, omega: float, derived: DerivedParams) -> np.ndarray:
    """Fourier transform in t, drop es-, eliminate ss: the 2x2 matrix acting on (ee, es+)

    Counter geometry returns M with c d_r v = M v; co geometry returns the matrix of c d_R v.
    """
    a = coeffs.generator(potential(r, derived)) + 1j * omega * np.eye(4)
    names = list(COMPONENTS)
    if coeffs.geometry == Geometry.COUNTER:
        speeds = np.array([coeffs.velocities[n][0] - coeffs.velocities[n][1] for n in names])
    else:
        speeds = np.array([0.5 * (coeffs.velocities[n][0] + coeffs.velocities[n][1]) for n in names])
    embed = np.array([[1, 0, 0], [0, 1, 0], [0, 1, 0], [0, 0, 1]], dtype=complex)
    project = np.array([[1, 0, 0, 0], [0, 0.5, 0.5, 0], [0, 0, 0, 1]], dtype=complex)
    reduced = project @ a @ embed
    reduced_speeds = np.real(np.diag(project @ np.diag(speeds) @ embed))
    schur = reduced[:2, :2] - np.outer(reduced[:2, 2], reduced[2, :2]) / reduced[2, 2]
    return schur / reduced_speeds[:2, None]


def _require_common_step(grid: Grid2D) -> float:
    dz1, dz2 = grid.axis1.dz, grid.axis2.dz
    if not math.isclose(dz1, dz2, rel_tol=1e-9):
        raise GridError(f"both axes need the same step for the diagonal potential ({dz1} vs {dz2})")
    return dz1


def relative_coordinates(grid: Grid2D) -> Tuple[np.ndarray, np.ndarray]:
    """Distinct r = z1 - z2 values and the (N1, N2) index into them"""
    dz = _require_common_step(grid)
    n1, n2 = grid.shape
    offset = grid.axis1.z_min - grid.axis2.z_min
    r_values = offset + dz * (np.arange(n1 + n2 - 1) - (n2 - 1))
    index = np.arange(n1)[:, None] - np.arange(n2)[None, :] + (n2 - 1)
    return r_values, index


def check_step(config: EvolutionConfig, grid: Grid2D, derived: DerivedParams):
    dz = min(grid.axis1.dz, grid.axis2.dz)
    if derived.light_speed * config.dt > dz * (1.0 + 1e-12):
        raise GridError(f"CFL violated: c*dt={derived.light_speed * config.dt:.4g} > dz={dz:.4g}")
    limit = COUPLING_DT_FRACTION * abs(derived.Gamma) / derived.g2n
    if config.dt > limit * (1.0 + 1e-12):
        raise GridError(f"dt={config.dt:.4g} exceeds 0.1 of the coupling timescale ({limit:.4g})")


def max_stable_dt(grid: Grid2D, derived: DerivedParams) -> float:
    dz = min(grid.axis1.dz, grid.axis2.dz)
    return min(dz / derived.light_speed, COUPLING_DT_FRACTION * abs(derived.Gamma) / derived.g2n)


def _sponge(axis: Grid1D, pad: int) -> np.ndarray:
    mask = np.ones(axis.n_points)
    if pad > 0:
        ramp = np.sin(0.5 * np.pi * np.arange(pad) / pad) ** 2
        mask[:pad] = ramp
        mask[-pad:] = ramp[::-1]
    return mask


class StrangStepper:
    """One Strang step: half advection, local exponential, half advection"""

    def __init__(self, grid: Grid2D, derived: DerivedParams, geometry: Geometry, config: EvolutionConfig,
                 coeffs: Optional[CoefficientSet] = None):
        check_step(config, grid, derived)
        self.grid = grid
        self.derived = derived
        self.geometry = Geometry(geometry)
        self.config = config
        self.coeffs = coeffs if coeffs is not None else derive_equations(self.geometry, derived)
        self.workers = max(1, config.threads)
        self.block_rows = get_settings().block_rows

        r_values, self.r_index = relative_coordinates(grid)
        self.r_values = r_values
        self.local = expm(self.coeffs.generator(potential(r_values, derived)) * config.dt)

        half = 0.5 * config.dt * derived.light_speed
        self.shifts = {name: (v[0] * half, v[1] * half) for name, v in self.coeffs.velocities.items()}
        k1 = 2.0 * np.pi * sfft.fftfreq(grid.axis1.n_points, d=grid.axis1.dz)
        k2 = 2.0 * np.pi * sfft.fftfreq(grid.axis2.n_points, d=grid.axis2.dz)
        self.phases = {}
        for name, (s1, s2) in self.shifts.items():
            if s1 == 0 and s2 == 0:
                continue
            self.phases[name] = np.exp(-1j * (k1[:, None] * s1 + k2[None, :] * s2))
        self.masks = {}
        for name, (s1, s2) in self.shifts.items():
            m1 = _sponge(grid.axis1, config.pad_cells) if s1 else np.ones(grid.axis1.n_points)
            m2 = _sponge(grid.axis2, config.pad_cells) if s2 else np.ones(grid.axis2.n_points)
            self.masks[name] = m1[:, None] * m2[None, :]
        self._pool = ThreadPoolExecutor(max_workers=self.workers) if self.workers > 1 else None

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def local_propagator(self, r: float) -> np.ndarray:
        """exp(A(r) dt) for a single relative distance"""
        return expm(self.coeffs.generator(potential(r, self.derived)) * self.config.dt)

    def _advect(self, psi: np.ndarray):
        for k, name in enumerate(COMPONENTS):
            s1, s2 = self.shifts[name]
            if s1 == 0 and s2 == 0:
                continue
            if self.config.advection == Advection.SPECTRAL:
                spectrum = sfft.fft2(psi[k])
                psi[k] = sfft.ifft2(spectrum * self.phases[name])
                if self.config.boundary == "outflow":
                    psi[k] *= self.masks[name]
            else:
                shift = (s1 / self.grid.axis1.dz, s2 / self.grid.axis2.dz)
                real = ndimage.shift(psi[k].real, shift, order=3, mode="constant", cval=0.0)
                imag = ndimage.shift(psi[k].imag, shift, order=3, mode="constant", cval=0.0)
                psi[k] = real + 1j * imag

    def _local_block(self, psi: np.ndarray, start: int):
        stop = min(start + self.block_rows, psi.shape[1])
        propagators = self.local[self.r_index[start:stop]]
        psi[:, start:stop, :] = np.einsum("ijab,bij->aij", propagators, psi[:, start:stop, :])

    def _apply_local(self, psi: np.ndarray):
        starts = range(0, psi.shape[1], self.block_rows)
        if self._pool is None:
            for start in starts:
                self._local_block(psi, start)
        else:
            list(self._pool.map(lambda s: self._local_block(psi, s), starts))

    def __call__(self, state: TwoPhotonState) -> TwoPhotonState:
        psi = state.psi.copy()
        self._advect(psi)
        self._apply_local(psi)
        self._advect(psi)
        return TwoPhotonState(state.geometry, state.grid, psi, state.time + self.config.dt)


def step(state: TwoPhotonState, config: EvolutionConfig, derived: DerivedParams) -> TwoPhotonState:
    """Single Strang step; builds a fresh stepper (use StrangStepper directly in loops)"""
    stepper = StrangStepper(state.grid, derived, state.geometry, config)
    try:
        new_state = stepper(state)
    finally:
        stepper.close()
    _check_finite(new_state, config)
    return new_state


def _check_finite(state: TwoPhotonState, config: EvolutionConfig):
    if np.all(np.isfinite(state.psi)):
        return
    path = None
    if config.snapshot_dir:
        cleaned = state.copy()
        cleaned.psi = np.nan_to_num(cleaned.psi)
        path = str(write_snapshot_2d(Path(config.snapshot_dir) / f"diagnostic_t{state.time:.6g}.csv",
                                     cleaned.fields()))
    logger.error(f"Non-finite amplitudes at t={state.time:.6g}")
    raise NumericalError(f"NaN/Inf detected at t={state.time:.6g}", snapshot_path=path)


def initialize_dark(grid: Grid2D, pulse1: PulseSpec, pulse2: PulseSpec, derived: DerivedParams,
                    geometry: Geometry) -> TwoPhotonState:
    """Dark-dressed product state: es = se = -(g sqrt(n)/Omega) ee, ss = (g^2 n/Omega^2) ee"""
    geometry = Geometry(geometry)
    f1 = gaussian_pulse(grid.axis1, pulse1.center, pulse1.sigma, pulse1.carrier_detuning).values
    f2 = gaussian_pulse(grid.axis2, pulse2.center, pulse2.sigma, pulse2.carrier_detuning).values
    ee = f1[:, None] * f2[None, :]
    if geometry == Geometry.CO:
        if not grid.symmetric:
            raise GridError("co-propagating runs need identical axes")
        ee = ee + ee.T

    r_values, index = relative_coordinates(grid)
    if geometry == Geometry.COUNTER and derived.c6 != 0:
        band = np.abs(r_values[index]) < SUPPORT_BAND_RADII * derived.blockade_radius
        overlap = np.abs(ee[band]).max() / np.abs(ee).max() if np.any(band) else 0.0
        if overlap > SUPPORT_BAND_TOLERANCE:
            raise GridError(f"initial pulses overlap the blockade region ({overlap:.2e} of peak)")
    elif geometry == Geometry.CO:
        logger.info("Co-propagating product initial state starts inside the blockade band")

    ratio = -derived.g_sqrt_n / derived.omega
    psi = np.stack([ee, ratio * ee, ratio * ee, ratio ** 2 * ee])
    state = TwoPhotonState(geometry, grid, psi)
    state.psi /= math.sqrt(state.norm())
    return state


@dataclass
class EvolutionResult:
    final: TwoPhotonState
    reference: Optional[TwoPhotonState] = None
    report: Optional[PropagationReport] = None
    trajectory: List[TwoPhotonState] = field(default_factory=list)
    norms: List[float] = field(default_factory=list)


def _run(state: TwoPhotonState, config: EvolutionConfig, derived: DerivedParams,
         keep_trajectory: bool) -> Tuple[TwoPhotonState, List[TwoPhotonState], List[float]]:
    stepper = StrangStepper(state.grid, derived, state.geometry, config)
    monotone = config.check_monotone and config.advection == Advection.SPECTRAL
    trajectory = [state.copy()] if keep_trajectory and config.snapshot_stride else []
    norms = [state.norm()]
    try:
        for n in range(1, config.n_steps + 1):
            state = stepper(state)
            _check_finite(state, config)
            norm = state.norm()
            if monotone and norm > norms[-1] * (1.0 + NORM_INCREASE_TOLERANCE):
                raise NumericalError(f"norm increased from {norms[-1]:.15g} to {norm:.15g} at step {n}")
            norms.append(norm)
            if keep_trajectory and config.snapshot_stride and n % config.snapshot_stride == 0:
                trajectory.append(state.copy())
    finally:
        stepper.close()
    return state, trajectory, norms


def extract_two_photon_report(out: TwoPhotonState, ref: TwoPhotonState, initial: TwoPhotonState,
                              speed: float) -> PropagationReport:
    """Overlap of the full four-amplitude state against the V = 0 twin"""
    grid = out.grid
    norm_ref = ref.norm()
    if norm_ref < 1e-300:
        raise NumericalError("reference state norm is (near) zero")
    product = np.sum(np.conj(ref.psi) * out.psi, axis=0)
    inner = complex(integrate_2d(product.real, grid), integrate_2d(product.imag, grid)) / norm_ref
    norm_out = out.norm()
    z1, _ = grid.mesh()

    def centroid(state):
        density = np.sum(np.abs(state.psi) ** 2, axis=0)
        return integrate_2d(z1 * density, grid) / integrate_2d(density, grid)

    return PropagationReport(
        phase=math.atan2(inner.imag, inner.real),
        eta=-math.log(math.sqrt(norm_out / norm_ref)),
        group_delay=(centroid(out) - centroid(ref)) / speed,
        overlap_re=inner.real,
        overlap_im=inner.imag,
        norm_in=initial.norm(),
        norm_out=norm_out,
        transit_delay=(centroid(out) - centroid(initial)) / speed,
    )


def evolve(state: TwoPhotonState, config: EvolutionConfig, derived: DerivedParams,
           with_reference: bool = True) -> EvolutionResult:
    logger.info(f"Evolving {state.geometry.value} geometry: {config.n_steps} steps of dt={config.dt:.4g} "
                f"on {state.grid.shape} grid")
    initial = state.copy()
    final, trajectory, norms = _run(state, config, derived, keep_trajectory=True)
    result = EvolutionResult(final=final, trajectory=trajectory, norms=norms)
    if with_reference:
        free = derived.model_copy(update={"c6": 0.0})
        reference, _, _ = _run(initial.copy(), config, free, keep_trajectory=False)
        result.reference = reference
        result.report = extract_two_photon_report(final, reference, initial, speed=derived.v_g)
        logger.info(f"Evolution report: phase={result.report.phase:.6g} eta={result.report.eta:.6g}")
    return result


@dataclass
class PairCorrelation:
    r: np.ndarray
    g: np.ndarray
    plateau: float

    def at(self, r: float) -> float:
        return float(np.interp(r, self.r, self.g))

    def dip_half_width(self) -> float:
        """Smallest r > 0 where g rises through 0.5"""
        positive = self.r >= 0
        r, g = self.r[positive], self.g[positive]
        above = np.nonzero(g >= 0.5)[0]
        if len(above) == 0:
            return math.inf
        k = above[0]
        if k == 0:
            return 0.0
        return float(r[k - 1] + (0.5 - g[k - 1]) * (r[k] - r[k - 1]) / (g[k] - g[k - 1]))


def to_relative_frame(state: TwoPhotonState, density: Optional[np.ndarray] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Integral of a density along each diagonal z1 - z2 = r (dR step equals dz)"""
    r_values, index = relative_coordinates(state.grid)
    if density is None:
        density = np.abs(state.component("ee")) ** 2
    sums = np.bincount(index.ravel(), weights=density.ravel(), minlength=len(r_values))
    return r_values, sums * state.grid.axis1.dz


def pair_correlation(state: TwoPhotonState, plateau_radius: float, noise_floor: float = 1e-6) -> PairCorrelation:
    """g(r) of the photon pair against the uncorrelated product of its own marginals

    Normalized by the mean of g over |r| >= plateau_radius (typically a few blockade radii).
    """
    ee = np.abs(state.component("ee")) ** 2
    grid = state.grid
    total = integrate_2d(ee, grid)
    if total <= 0:
        raise NumericalError("ee amplitude vanished")
    rho1 = np.sum(ee, axis=1) * grid.axis2.dz
    rho2 = np.sum(ee, axis=0) * grid.axis1.dz
    uncorrelated = rho1[:, None] * rho2[None, :] / total
    r, joint = to_relative_frame(state, ee)
    _, base = to_relative_frame(state, uncorrelated)

    significant = base > noise_floor * base.max()
    g = np.where(significant, joint / np.where(significant, base, 1.0), np.nan)
    far = significant & (np.abs(r) >= plateau_radius)
    if not np.any(far):
        raise NumericalError(f"plateau below noise floor beyond |r| = {plateau_radius:.4g}")
    plateau = float(np.mean(g[far]))
    if plateau <= noise_floor:
        raise NumericalError("pair-correlation plateau below noise floor")
    return PairCorrelation(r=r[significant], g=g[significant] / plateau, plateau=plateau)


def dark_ratio_map(state: TwoPhotonState, min_separation: float, amplitude_floor: float = 1e-3) -> np.ndarray:
    """es+/ee at points with |z1 - z2| > min_separation and non-negligible ee"""
    r_values, index = relative_coordinates(state.grid)
    ee = state.component("ee")
    es_plus = 0.5 * (state.component("es") + state.component("se"))
    mask = (np.abs(r_values[index]) > min_separation) & (np.abs(ee) > amplitude_floor * np.abs(ee).max())
    return es_plus[mask] / ee[mask]


SUPPORT_SIGMAS = 9.0
MIN_POINTS_PER_RADIUS = 8


@dataclass
class RunPlan:
    state: TwoPhotonState
    config: EvolutionConfig


def plan_run(derived: DerivedParams, geometry: Geometry, sigma: float, separation: Optional[float] = None,
             n_points: Optional[int] = None, t_end: Optional[float] = None, dt: Optional[float] = None,
             advection: Advection = Advection.SPECTRAL, pad_cells: int = 8, snapshot_stride: int = 0,
             threads: int = 1, snapshot_dir: Optional[str] = None) -> RunPlan:
    """Grid, dark-dressed initial state and step size for one time-domain run

    Counter: photon 1 starts at -separation/2, photon 2 at +separation/2, and the default
    t_end lets them pass each other completely. Co: both start at 0 and the default t_end
    is 1.5 dark decay lengths of travel (3 intensity e-foldings inside the blockade).
    """
    geometry = Geometry(geometry)
    radius = derived.blockade_radius if derived.c6 != 0 else sigma
    target_dz = radius / MIN_POINTS_PER_RADIUS
    margin = SUPPORT_SIGMAS * sigma

    if geometry == Geometry.COUNTER:
        separation = separation if separation is not None else 12.0 * sigma
        if t_end is None:
            t_end = separation / derived.v_g
        travel = derived.v_g * t_end
        start1 = -0.5 * separation
        lower, upper = start1 - margin, start1 + travel + margin
        centers = (start1, -start1)
    else:
        if t_end is None:
            if derived.d is not None:
                t_end = 1.5 * predicted_decay_length(derived) / derived.v_g
            else:
                t_end = 4.0 * sigma / derived.v_g
        travel = derived.v_g * t_end
        lower, upper = -margin, travel + margin
        centers = (0.0, 0.0)

    if n_points is None:
        n_points = int(math.ceil((upper - lower) / target_dz)) + 1 + 2 * pad_cells
    dz = (upper - lower) / max(n_points - 1 - 2 * pad_cells, 1)
    pad = pad_cells * dz
    if dz > target_dz * (1.0 + 1e-9):
        raise GridError(f"dz={dz:.4g} is coarser than blockade radius / {MIN_POINTS_PER_RADIUS}")
    axis1 = Grid1D(lower - pad, upper + pad, n_points)
    if geometry == Geometry.COUNTER:
        axis2 = Grid1D(-(upper + pad), -(lower - pad), n_points)
    else:
        axis2 = axis1
    grid = Grid2D(axis1, axis2)

    state = initialize_dark(grid, PulseSpec(centers[0], sigma), PulseSpec(centers[1], sigma), derived, geometry)

    if dt is None:
        limit = max_stable_dt(grid, derived)
        dt = t_end / math.ceil(t_end / limit)
    config = EvolutionConfig(dt=dt, t_end=t_end, snapshot_stride=snapshot_stride, advection=advection,
                             pad_cells=pad_cells, threads=threads, snapshot_dir=snapshot_dir)
    check_step(config, grid, derived)
    logger.info(f"Planned {geometry.value} run: grid {grid.shape}, dz={grid.axis1.dz:.4g}, "
                f"{config.n_steps} steps of {dt:.4g}")
    return RunPlan(state=state, config=config)


def state_from_snapshot(path, geometry: Geometry) -> TwoPhotonState:
    """Custom initial state from a 2D snapshot file, renormalized"""
    fields = read_snapshot_2d(path)
    grid = fields["ee"].grid
    psi = np.stack([fields[name].values for name in COMPONENTS])
    state = TwoPhotonState(Geometry(geometry), grid, psi)
    norm = state.norm()
    if norm <= 0:
        raise NumericalError(f"snapshot {path} holds a zero state")
    state.psi /= math.sqrt(norm)
    return state


def write_state(path, state: TwoPhotonState) -> Path:
    return write_snapshot_2d(path, state.fields())
