"""Admissible forcings (time-periodic, odd, localized) and initial
perturbations.

The canonical forcing family is a Gaussian dipole times a sinusoid,

    g(x, t) = eps * a(t) * G(x) / max|G|,   G(x) = x_axis * exp(-|x|^2/(2 sigma^2)),

which is odd in x, decays below any seam tolerance for sigma <= L/16, and is
exactly T-periodic on the sampled time grid. Profiles are normalized to unit
peak modulus so the amplitude knob is the peak field value and the forcing
size functional scales linearly in eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OddnessViolation, SeamDecayViolation
from .spectral import FieldSeries, Grid, PHYSICAL, SpectralField

SEAM_DECAY_TOL = 1e-8
ODDNESS_TOL = 1e-12

TEMPORAL_PROFILES = ("sin_fundamental", "cos_fundamental", "harmonic")
SPATIAL_PROFILES = ("gauss_dipole", "custom")
PERTURBATION_PROFILES = ("gauss_dipole", "gauss")


@dataclass
class ForcingSpec:
    """Separable forcing eps * a(t) * G(x) with a(t+T) = a(t) and G odd."""

    amplitude: float
    period: float
    temporal_profile: str = "sin_fundamental"
    harmonic: int = 1
    spatial_profile: str = "gauss_dipole"
    sigma: float | None = None  # defaults to L/16 at realization time
    axis: int = 0
    custom_profile: SpectralField | None = None

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if self.temporal_profile not in TEMPORAL_PROFILES:
            raise ValueError(f"unknown temporal profile {self.temporal_profile!r}")
        if self.spatial_profile not in SPATIAL_PROFILES:
            raise ValueError(f"unknown spatial profile {self.spatial_profile!r}")
        if self.harmonic < 1:
            raise ValueError("harmonic index must be >= 1")


@dataclass
class PerturbationSpec:
    """Initial perturbation w0 = amplitude * P(x) / max|P| (oddness optional)."""

    amplitude: float
    profile: str = "gauss_dipole"
    sigma: float | None = None
    axis: int = 0

    def __post_init__(self):
        if self.profile not in PERTURBATION_PROFILES:
            raise ValueError(f"unknown perturbation profile {self.profile!r}")


def gauss_dipole(grid: Grid, sigma: float, axis: int = 0) -> np.ndarray:
    """x_axis * exp(-|x|^2 / (2 sigma^2)) on the lattice (not normalized)."""
    if not 0 <= axis < grid.dim:
        raise ValueError(f"axis {axis} out of range for dim {grid.dim}")
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return grid.x[axis] * np.exp(-grid.x_abs ** 2 / (2.0 * sigma ** 2))


def gauss_bump(grid: Grid, sigma: float) -> np.ndarray:
    """exp(-|x|^2 / (2 sigma^2)) on the lattice (even profile)."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return np.exp(-grid.x_abs ** 2 / (2.0 * sigma ** 2))


def _boundary_mask(grid: Grid) -> np.ndarray:
    """Nodes on the seam faces (any axis index 0, i.e. x = -L/2)."""
    mask = np.zeros(grid.shape, dtype=bool)
    for axis in range(grid.dim):
        sl = [slice(None)] * grid.dim
        sl[axis] = 0
        mask[tuple(sl)] = True
    return mask


def check_seam_decay(profile: np.ndarray, grid: Grid,
                     tol: float = SEAM_DECAY_TOL) -> float:
    """Max profile modulus on the box boundary relative to the global max."""
    peak = np.abs(profile).max()
    if peak == 0.0:
        return 0.0
    ratio = float(np.abs(profile[_boundary_mask(grid)]).max() / peak)
    if ratio > tol:
        raise SeamDecayViolation(
            f"profile modulus at the box boundary is {ratio:.3e} of its max "
            f"(tolerance {tol:.0e}); the profile does not decay at the seam")
    return ratio


def check_oddness(f: SpectralField) -> float:
    """Oddness residual max |f(x) + f(-x)| / (1 + max|f|) on the lattice.

    The reflection is j -> n - j per axis; rows with index 0 (the seam
    x = -L/2, whose mirror exists only via periodic identification) are
    excluded from the max.
    """
    if f.representation != PHYSICAL:
        raise ValueError("check_oddness expects a physical-representation field")
    grid = f.grid
    resid = np.abs(f.data + grid.reflect(f.data))
    interior = ~_boundary_mask(grid)
    return float(resid[interior].max() / (1.0 + np.abs(f.data).max()))


def temporal_values(spec: ForcingSpec, m_t: int) -> np.ndarray:
    """a(t_m) at the m_t + 1 uniform nodes; exactly periodic by evaluating
    the phase at m mod m_t."""
    m = np.arange(m_t + 1) % m_t
    if spec.temporal_profile == "sin_fundamental":
        return np.sin(2.0 * np.pi * m / m_t)
    if spec.temporal_profile == "cos_fundamental":
        return np.cos(2.0 * np.pi * m / m_t)
    return np.sin(2.0 * np.pi * spec.harmonic * m / m_t)


def spatial_profile(spec: ForcingSpec, grid: Grid) -> np.ndarray:
    """The normalized (unit peak modulus) spatial factor, verified odd and
    seam-decaying."""
    if spec.spatial_profile == "custom":
        if spec.custom_profile is None:
            raise ValueError("custom spatial profile requires custom_profile")
        f = spec.custom_profile.to_physical()
        if f.grid is not grid and f.grid.shape != grid.shape:
            raise ValueError("custom profile grid does not match")
        profile = f.data.copy()
        if check_oddness(SpectralField(grid, PHYSICAL, profile)) > ODDNESS_TOL:
            raise OddnessViolation("custom forcing profile is not odd on the lattice")
    else:
        sigma = spec.sigma if spec.sigma is not None else grid.box_length / 16.0
        profile = gauss_dipole(grid, sigma, spec.axis).astype(complex)
    check_seam_decay(profile, grid)
    peak = np.abs(profile).max()
    if peak > 0:
        profile = profile / peak
    return profile


def realize_forcing(spec: ForcingSpec, grid: Grid, m_t: int) -> FieldSeries:
    """Sample the forcing on the (m_t + 1)-node period grid.

    The result is physical-representation, exactly periodic in time, and odd
    to ODDNESS_TOL at every node (verified; OddnessViolation otherwise).
    """
    if m_t < 2:
        raise ValueError("m_t must be at least 2")
    a = temporal_values(spec, m_t)
    if spec.amplitude == 0.0:
        data = np.zeros((m_t + 1,) + grid.shape, dtype=complex)
        return FieldSeries(grid, PHYSICAL, data, spec.period)
    profile = spatial_profile(spec, grid)
    data = spec.amplitude * a[(slice(None),) + (None,) * grid.dim] * profile
    series = FieldSeries(grid, PHYSICAL, data, spec.period)
    worst = max(check_oddness(series.field(m)) for m in range(m_t + 1))
    if worst > ODDNESS_TOL:
        raise OddnessViolation(
            f"realized forcing oddness residual {worst:.3e} exceeds {ODDNESS_TOL:.0e}")
    return series


def realize_perturbation(spec: PerturbationSpec, grid: Grid) -> SpectralField:
    """Initial perturbation field; unit peak modulus scaled by the amplitude.

    The default width L/19 puts the measured decay slopes of a dipole
    perturbation mid-band inside the box-truncation validity window at the
    reference resolution (L=64, n=32).
    """
    sigma = spec.sigma if spec.sigma is not None else grid.box_length / 19.0
    if spec.profile == "gauss_dipole":
        profile = gauss_dipole(grid, sigma, spec.axis).astype(complex)
    else:
        profile = gauss_bump(grid, sigma).astype(complex)
    check_seam_decay(profile, grid)
    peak = np.abs(profile).max()
    if peak > 0:
        profile = profile / peak
    return SpectralField(grid, PHYSICAL, spec.amplitude * profile)
