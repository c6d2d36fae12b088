"""Uniform grids, complex field containers, the Fourier contract and observable extraction

Conventions:
- fields are normalized so that the grid sum of |f|^2 dz is a probability; the spectral norm uses
  the same rectangle rule, so the discrete Parseval identity is exact
- a field evolves as exp(-i*omega*t); the forward transform is
  F(omega) = (2*pi)**-0.5 * integral dt exp(+i*omega*t) f(t), unitary in the L2 sense
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel
from scipy import fft as sfft

from core.errors import GridError, NumericalError

logger = logging.getLogger(__name__)

MIN_POINTS = 16
SUPPORT_TOLERANCE = 1e-8
ALIASING_TOLERANCE = 1e-6
COMPONENTS = ("ee", "es", "se", "ss")


@dataclass(frozen=True)
class Grid1D:
    z_min: float
    z_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < MIN_POINTS:
            raise GridError(f"grid needs at least {MIN_POINTS} points, got {self.n_points}")
        if not self.z_max > self.z_min:
            raise GridError(f"grid extent [{self.z_min}, {self.z_max}] is empty")

    @classmethod
    def centered(cls, center: float, half_width: float, n_points: int) -> "Grid1D":
        return cls(center - half_width, center + half_width, n_points)

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / (self.n_points - 1)

    @property
    def points(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_points)

    @property
    def extent(self) -> float:
        return self.z_max - self.z_min

    def refined(self) -> "Grid1D":
        """Same extent, half the step"""
        return Grid1D(self.z_min, self.z_max, 2 * self.n_points - 1)


@dataclass(frozen=True)
class Grid2D:
    axis1: Grid1D
    axis2: Grid1D

    @classmethod
    def square(cls, axis: Grid1D) -> "Grid2D":
        return cls(axis, axis)

    @property
    def symmetric(self) -> bool:
        return self.axis1 == self.axis2

    @property
    def shape(self):
        return (self.axis1.n_points, self.axis2.n_points)

    def mesh(self):
        return np.meshgrid(self.axis1.points, self.axis2.points, indexing="ij")


def grid_sum(values: np.ndarray, dz: float, axis: int = -1):
    """Rectangle rule on the uniform grid"""
    return np.sum(values, axis=axis) * dz


def _check_finite(values: np.ndarray, what: str):
    if not np.all(np.isfinite(values)):
        raise NumericalError(f"{what} contains NaN/Inf values (field corruption)")


@dataclass(frozen=True)
class ComplexField1D:
    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.n_points,):
            raise GridError(f"field shape {values.shape} does not match grid of {self.grid.n_points} points")
        _check_finite(values, "1D field")
        object.__setattr__(self, "values", values)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def norm(self) -> float:
        return float(grid_sum(self.intensity, self.grid.dz))

    def centroid(self) -> float:
        weight = self.norm()
        if weight <= 0:
            raise NumericalError("centroid of a zero field")
        return float(grid_sum(self.grid.points * self.intensity, self.grid.dz) / weight)

    def second_moment(self) -> float:
        """Variance of |f|^2 about its centroid"""
        mean = self.centroid()
        return float(grid_sum((self.grid.points - mean) ** 2 * self.intensity, self.grid.dz) / self.norm())

    def edge_fraction(self) -> float:
        """Largest boundary amplitude relative to the peak"""
        peak = np.max(np.abs(self.values))
        if peak == 0:
            return 0.0
        return float(max(abs(self.values[0]), abs(self.values[-1])) / peak)

    def scaled(self, factor: complex) -> "ComplexField1D":
        return ComplexField1D(self.grid, self.values * factor)


@dataclass(frozen=True)
class ComplexField2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != self.grid.shape:
            raise GridError(f"field shape {values.shape} does not match grid {self.grid.shape}")
        _check_finite(values, "2D field")
        object.__setattr__(self, "values", values)

    def norm(self) -> float:
        return integrate_2d(np.abs(self.values) ** 2, self.grid)


def integrate_2d(density: np.ndarray, grid: Grid2D) -> float:
    """Rectangle rule over z2 then z1; fixed reduction order"""
    inner = grid_sum(density, grid.axis2.dz)
    return float(grid_sum(inner, grid.axis1.dz))


def two_photon_norm(fields: Dict[str, ComplexField2D]) -> float:
    """Integral of |ee|^2 + |es|^2 + |se|^2 + |ss|^2"""
    grid = fields["ee"].grid
    density = sum(np.abs(fields[name].values) ** 2 for name in COMPONENTS)
    return integrate_2d(density, grid)


@dataclass(frozen=True)
class SpectralField:
    """Unitary spectrum of a 1D field; omega in FFT order"""
    omega: np.ndarray
    values: np.ndarray
    origin: float
    step: float

    @property
    def d_omega(self) -> float:
        return 2.0 * math.pi / (len(self.omega) * self.step)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.values) ** 2) * self.d_omega)

    def rms_width(self) -> float:
        """Standard deviation of |F|^2 about its mean frequency"""
        weight = np.abs(self.values) ** 2
        mean = np.sum(self.omega * weight) / np.sum(weight)
        return float(math.sqrt(np.sum((self.omega - mean) ** 2 * weight) / np.sum(weight)))

    def with_values(self, values: np.ndarray) -> "SpectralField":
        return SpectralField(omega=self.omega, values=values, origin=self.origin, step=self.step)

    def nyquist_fraction(self) -> float:
        magnitude = np.abs(self.values)
        peak = magnitude.max()
        if peak == 0:
            return 0.0
        return float(magnitude[len(magnitude) // 2] / peak)


def frequency_axis(grid: Grid1D) -> np.ndarray:
    return 2.0 * math.pi * sfft.fftfreq(grid.n_points, d=grid.dz)


def forward_transform(f: ComplexField1D, workers: int = 1) -> SpectralField:
    _check_finite(f.values, "field")
    grid = f.grid
    omega = frequency_axis(grid)
    n = grid.n_points
    spectrum = sfft.ifft(f.values, workers=workers) * n * grid.dz / math.sqrt(2.0 * math.pi)
    spectrum = spectrum * np.exp(1j * omega * grid.z_min)
    return SpectralField(omega=omega, values=spectrum, origin=grid.z_min, step=grid.dz)


def inverse_transform(spectrum: SpectralField, grid: Grid1D, workers: int = 1) -> ComplexField1D:
    if grid.n_points != len(spectrum.omega) or not math.isclose(grid.dz, spectrum.step, rel_tol=1e-12):
        raise GridError("spectrum does not belong to this grid")
    shifted = spectrum.values * np.exp(-1j * spectrum.omega * spectrum.origin)
    values = sfft.fft(shifted, workers=workers) * math.sqrt(2.0 * math.pi) / (grid.n_points * grid.dz)
    return ComplexField1D(grid, values)


def gaussian_pulse(grid: Grid1D, center: float, sigma: float, carrier_detuning: float = 0.0) -> ComplexField1D:
    """Normalized Gaussian whose intensity has standard deviation sigma"""
    if sigma < 4 * grid.dz:
        raise GridError(f"sigma={sigma:.4g} is under-resolved (needs >= 4*dz = {4 * grid.dz:.4g})")
    z = grid.points
    envelope = np.exp(-((z - center) ** 2) / (4.0 * sigma ** 2))
    values = envelope * np.exp(-1j * carrier_detuning * (z - center))
    pulse = ComplexField1D(grid, values)
    if pulse.edge_fraction() > SUPPORT_TOLERANCE:
        raise GridError(
            f"pulse support clipped by grid: boundary amplitude {pulse.edge_fraction():.2e} of peak"
        )
    return pulse.scaled(1.0 / math.sqrt(pulse.norm()))


class PropagationReport(BaseModel):
    phase: float
    eta: float
    group_delay: float
    overlap_re: float
    overlap_im: float
    norm_in: float
    norm_out: float
    transit_delay: Optional[float] = None
    flags: List[str] = []

    @property
    def overlap(self) -> complex:
        return complex(self.overlap_re, self.overlap_im)

    @property
    def intensity_ratio(self) -> float:
        return math.exp(-2.0 * self.eta)


def overlap(out: np.ndarray, ref: np.ndarray, weights_dz) -> complex:
    return complex(grid_sum(np.conj(ref) * out, weights_dz))


def extract_report(out_field: ComplexField1D, ref_field: ComplexField1D, speed: float = 1.0,
                   input_field: Optional[ComplexField1D] = None) -> PropagationReport:
    """Phase, attenuation and delay of out relative to the interaction-free reference run"""
    if out_field.grid != ref_field.grid:
        raise GridError("output and reference fields live on different grids")
    norm_ref = ref_field.norm()
    if norm_ref < 1e-300:
        raise NumericalError("reference field norm is (near) zero")
    norm_out = out_field.norm()
    inner = overlap(out_field.values, ref_field.values, ref_field.grid.dz) / norm_ref
    eta = -math.log(math.sqrt(norm_out / norm_ref)) if norm_out > 0 else math.inf
    delay = (out_field.centroid() - ref_field.centroid()) / speed if norm_out > 0 else math.nan
    transit = None
    if input_field is not None:
        transit = (out_field.centroid() - input_field.centroid()) / speed
    return PropagationReport(
        phase=math.atan2(inner.imag, inner.real),
        eta=eta,
        group_delay=delay,
        overlap_re=inner.real,
        overlap_im=inner.imag,
        norm_in=input_field.norm() if input_field is not None else norm_ref,
        norm_out=norm_out,
        transit_delay=transit,
    )


def _save(path: Path, header: str, columns: List[np.ndarray]):
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.column_stack(columns), delimiter=",", header=header, comments="", fmt="%.17g")


def write_snapshot_1d(path: Union[str, Path], f: ComplexField1D) -> Path:
    path = Path(path)
    _save(path, "z,re,im", [f.grid.points, f.values.real, f.values.imag])
    return path


def read_snapshot_1d(path: Union[str, Path]) -> ComplexField1D:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    z = data[:, 0]
    grid = Grid1D(float(z[0]), float(z[-1]), len(z))
    return ComplexField1D(grid, data[:, 1] + 1j * data[:, 2])


def write_snapshot_2d(path: Union[str, Path], fields: Dict[str, ComplexField2D]) -> Path:
    """Row-major over z1 then z2"""
    path = Path(path)
    grid = fields["ee"].grid
    z1, z2 = grid.mesh()
    columns = [z1.ravel(), z2.ravel()]
    header = ["z1", "z2"]
    for name in COMPONENTS:
        values = fields[name].values.ravel()
        columns += [values.real, values.imag]
        header += [f"re_{name}", f"im_{name}"]
    _save(path, ",".join(header), columns)
    return path


def read_snapshot_2d(path: Union[str, Path]) -> Dict[str, ComplexField2D]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    z1 = np.unique(data[:, 0])
    z2 = np.unique(data[:, 1])
    grid = Grid2D(Grid1D(float(z1[0]), float(z1[-1]), len(z1)), Grid1D(float(z2[0]), float(z2[-1]), len(z2)))
    fields = {}
    for k, name in enumerate(COMPONENTS):
        values = data[:, 2 + 2 * k] + 1j * data[:, 3 + 2 * k]
        fields[name] = ComplexField2D(grid, values.reshape(grid.shape))
    return fields
