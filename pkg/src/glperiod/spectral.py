"""Centered periodic-box discretization and complex spectral fields.

Conventions (fixed, for bit-exact file interchange):

* Physical nodes per axis: x_j = (j - n/2) * (L/n), j = 0..n-1, so the box is
  [-L/2, L/2)^dim with the periodic seam at x = -L/2.
* Frequency lattice per axis: xi_k = 2*pi*k/L with the integer index k stored
  in standard FFT order (0, 1, ..., n/2-1, -n/2, ..., -1). Natural-order
  frequencies are available through an accessor.
* Data arrays are C-ordered, last axis fastest.
* The frequency representation holds raw forward-FFT coefficients (numpy
  convention, no normalization); Parseval then reads
  ||f||_L2^2 = (L^dim / n^(2*dim)) * sum |f_hat|^2. Coefficient phases are
  referenced to the array corner x = -L/2, so the centered-coordinate basis
  function exp(i xi_k . x) transforms to n^dim * prod_axis (-1)^(k_axis) at
  entry k.
* The Nyquist mode k = -n/2 has no conjugate partner; every frequency
  multiplier in this package zeroes it after application.
"""

from __future__ import annotations

import os
import struct
from dataclasses import dataclass, field

import numpy as np

PHYSICAL = "physical"
FREQUENCY = "frequency"

SNAPSHOT_MAGIC = b"GLPF"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class GridConfig:
    dim: int = 3
    n_per_axis: int = 32
    box_length: float = 64.0
    dealias_fraction: float = 2.0 / 3.0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be one of 1, 2, 3; got {self.dim}")
        if self.n_per_axis < 8 or self.n_per_axis % 2 != 0:
            raise ValueError(
                f"n_per_axis must be an even integer >= 8; got {self.n_per_axis}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive; got {self.box_length}")
        if not 0.0 < self.dealias_fraction <= 1.0:
            raise ValueError(
                f"dealias_fraction must lie in (0, 1]; got {self.dealias_fraction}")


class Grid:
    """Frequency lattice, physical nodes and quadrature weights of the box.

    Built through :func:`make_grid`. All mesh arrays have shape
    (n_per_axis,) * dim and are read-only by convention.
    """

    def __init__(self, config: GridConfig):
        self.config = config
        n, L, dim = config.n_per_axis, config.box_length, config.dim
        self.shape = (n,) * dim
        self.dx = L / n
        j = np.arange(n)
        self.k1d = np.where(j < n // 2, j, j - n)  # FFT order integer indices
        self.x1d = (j - n // 2) * self.dx
        self.xi1d = (2.0 * np.pi / L) * self.k1d

        xi_mesh = np.meshgrid(*([self.xi1d] * dim), indexing="ij")
        self.xi = tuple(xi_mesh)
        self.xi_sq = sum(m * m for m in xi_mesh)
        self.xi_abs = np.sqrt(self.xi_sq)

        x_mesh = np.meshgrid(*([self.x1d] * dim), indexing="ij")
        self.x = tuple(x_mesh)
        self.x_abs = np.sqrt(sum(m * m for m in x_mesh))

        self.quad_weight = self.dx ** dim
        # ||f||_L2^2 = parseval_factor * sum |f_hat|^2
        self.parseval_factor = self.quad_weight / n ** dim

        k_mesh = np.meshgrid(*([self.k1d] * dim), indexing="ij")
        nyq = np.zeros(self.shape, dtype=bool)
        for km in k_mesh:
            nyq |= km == -(n // 2)
        self.nyquist_mask = nyq
        self.keep_nyquist_free = ~nyq

        self._reflect_1d = (-j) % n
        self._dealias_masks: dict[float, np.ndarray] = {}
        self._abs_k_mesh = [np.abs(km) for km in k_mesh]

    @property
    def dim(self) -> int:
        return self.config.dim

    @property
    def n(self) -> int:
        return self.config.n_per_axis

    @property
    def box_length(self) -> float:
        return self.config.box_length

    def freqs_natural_order(self) -> np.ndarray:
        """Per-axis frequencies sorted ascending (-n/2 ... n/2-1) * 2*pi/L."""
        return np.fft.fftshift(self.xi1d)

    def reflect(self, data: np.ndarray) -> np.ndarray:
        """Apply the lattice reflection x -> -x (index j -> -j mod n) on
        every axis. Works identically on frequency-index data (k -> -k)."""
        idx = [self._reflect_1d] * self.dim
        return data[np.ix_(*idx)]

    def dealias_mask(self, fraction: float) -> np.ndarray:
        """Boolean keep-mask of the 2/3-style truncation: modes with any axis
        index |k| > fraction * (n/2) are dropped. Idempotent by construction."""
        if not 0.0 < fraction <= 1.0:
            raise ValueError(f"dealias fraction must lie in (0, 1]; got {fraction}")
        mask = self._dealias_masks.get(fraction)
        if mask is None:
            threshold = fraction * (self.n / 2.0)
            keep = np.ones(self.shape, dtype=bool)
            for abs_k in self._abs_k_mesh:
                keep &= abs_k <= threshold
            mask = keep
            self._dealias_masks[fraction] = mask
        return mask


def make_grid(config: GridConfig) -> Grid:
    """Build the frequency lattice and physical nodes for a grid config."""
    return Grid(config)


@dataclass
class SpectralField:
    """A complex scalar field in one fixed representation.

    data has shape grid.shape and dtype complex128.
    """

    grid: Grid
    representation: str
    data: np.ndarray

    def __post_init__(self):
        if self.representation not in (PHYSICAL, FREQUENCY):
            raise ValueError(f"unknown representation {self.representation!r}")
        if self.data.shape != self.grid.shape:
            raise ValueError(
                f"data shape {self.data.shape} does not match grid shape {self.grid.shape}")
        if self.data.dtype != np.complex128:
            self.data = self.data.astype(np.complex128)

    def copy(self) -> "SpectralField":
        return SpectralField(self.grid, self.representation, self.data.copy())

    def to_frequency(self) -> "SpectralField":
        if self.representation == FREQUENCY:
            return self
        return transform(self, "forward")

    def to_physical(self) -> "SpectralField":
        if self.representation == PHYSICAL:
            return self
        return transform(self, "inverse")


def transform(field: SpectralField, direction: str) -> SpectralField:
    """Toggle between physical and frequency representations.

    forward: physical -> frequency (fftn); inverse: frequency -> physical
    (ifftn). Linear, and forward o inverse is the identity to roundoff.
    """
    if direction == "forward":
        if field.representation != PHYSICAL:
            raise ValueError("forward transform expects a physical-representation field")
        return SpectralField(field.grid, FREQUENCY, np.fft.fftn(field.data))
    if direction == "inverse":
        if field.representation != FREQUENCY:
            raise ValueError("inverse transform expects a frequency-representation field")
        return SpectralField(field.grid, PHYSICAL, np.fft.ifftn(field.data))
    raise ValueError(f"unknown transform direction {direction!r}")


def cubic_nonlinearity(u: SpectralField) -> SpectralField:
    """Pointwise |u|^2 u. Physical representation in, physical out."""
    if u.representation != PHYSICAL:
        raise ValueError("cubic_nonlinearity expects a physical-representation field")
    d = u.data
    return SpectralField(u.grid, PHYSICAL, d * (d.real * d.real + d.imag * d.imag))


def dealias(field: SpectralField, fraction: float) -> SpectralField:
    """Zero all modes with any axis index |k| > fraction * (n/2)."""
    if field.representation != FREQUENCY:
        raise ValueError("dealias expects a frequency-representation field")
    mask = field.grid.dealias_mask(fraction)
    return SpectralField(field.grid, FREQUENCY, field.data * mask)


@dataclass
class FieldSeries:
    """m_t + 1 fields at uniform times t_m = m*T/m_t, m = 0..m_t.

    All members share one grid and one representation; data is stacked along
    axis 0 with shape (m_t + 1,) + grid.shape. For a periodic series the last
    field duplicates the first up to solver tolerance.
    """

    grid: Grid
    representation: str
    data: np.ndarray
    period: float

    def __post_init__(self):
        if self.data.ndim != self.grid.dim + 1:
            raise ValueError("series data must be stacked along a leading time axis")
        if self.data.shape[1:] != self.grid.shape:
            raise ValueError(
                f"series spatial shape {self.data.shape[1:]} does not match grid {self.grid.shape}")
        if self.data.shape[0] < 2:
            raise ValueError("a series needs at least two time nodes")
        if not self.period > 0:
            raise ValueError("period must be positive")
        if self.data.dtype != np.complex128:
            self.data = self.data.astype(np.complex128)

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def n_steps(self) -> int:
        return self.data.shape[0] - 1

    @property
    def dt(self) -> float:
        return self.period / self.n_steps

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.dt

    def field(self, m: int) -> SpectralField:
        return SpectralField(self.grid, self.representation, self.data[m])

    @property
    def fields(self) -> list[SpectralField]:
        return [self.field(m) for m in range(len(self))]

    def copy(self) -> "FieldSeries":
        return FieldSeries(self.grid, self.representation, self.data.copy(), self.period)

    def to_frequency(self) -> "FieldSeries":
        if self.representation == FREQUENCY:
            return self
        spatial_axes = tuple(range(1, self.grid.dim + 1))
        return FieldSeries(self.grid, FREQUENCY,
                           np.fft.fftn(self.data, axes=spatial_axes), self.period)

    def to_physical(self) -> "FieldSeries":
        if self.representation == PHYSICAL:
            return self
        spatial_axes = tuple(range(1, self.grid.dim + 1))
        return FieldSeries(self.grid, PHYSICAL,
                           np.fft.ifftn(self.data, axes=spatial_axes), self.period)


def time_derivative(series: FieldSeries, periodic: bool = True) -> FieldSeries:
    """Centered-difference time derivative of a series.

    For a periodic series the stencil wraps (node m_t duplicates node 0);
    otherwise one-sided differences are used at the ends.
    """
    if len(series) < 3:
        raise ValueError("time derivative needs at least 3 time nodes")
    data = series.data
    h = series.dt
    out = np.empty_like(data)
    if periodic:
        m_t = series.n_steps
        body = data[:m_t]  # nodes 0..m_t-1 carry one full period
        out[:m_t] = (np.roll(body, -1, axis=0) - np.roll(body, 1, axis=0)) / (2.0 * h)
        out[m_t] = out[0]
    else:
        out[1:-1] = (data[2:] - data[:-2]) / (2.0 * h)
        out[0] = (data[1] - data[0]) / h
        out[-1] = (data[-1] - data[-2]) / h
    return FieldSeries(series.grid, series.representation, out, series.period)


# ---------------------------------------------------------------------------
# Field snapshot files
#
# Layout (all little-endian): magic "GLPF", version u32, dim u32,
# n_per_axis u32, box_length f64, representation flag u32 (0 physical,
# 1 frequency), then n^dim complex values as (re, im) f64 pairs in C order.
# ---------------------------------------------------------------------------

_HEADER = struct.Struct("<4sIIIdI")


def write_snapshot(field: SpectralField, path) -> None:
    cfg = field.grid.config
    flag = 0 if field.representation == PHYSICAL else 1
    header = _HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, cfg.dim,
                          cfg.n_per_axis, cfg.box_length, flag)
    payload = np.ascontiguousarray(field.data, dtype="<c16").tobytes()
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    os.replace(tmp, path)


def read_snapshot(path, grid: Grid | None = None) -> SpectralField:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        magic, version, dim, n, L, flag = _HEADER.unpack(raw)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: not a field snapshot (bad magic {magic!r})")
        if version != SNAPSHOT_VERSION:
            raise ValueError(f"{path}: unsupported snapshot version {version}")
        payload = fh.read()
    if grid is None:
        grid = make_grid(GridConfig(dim=dim, n_per_axis=n, box_length=L))
    else:
        cfg = grid.config
        if (cfg.dim, cfg.n_per_axis) != (dim, n) or cfg.box_length != L:
            raise ValueError(f"{path}: snapshot grid does not match the provided grid")
    data = np.frombuffer(payload, dtype="<c16").astype(np.complex128)
    if data.size != n ** dim:
        raise ValueError(f"{path}: truncated snapshot payload")
    rep = PHYSICAL if flag == 0 else FREQUENCY
    return SpectralField(grid, rep, data.reshape((n,) * dim))
