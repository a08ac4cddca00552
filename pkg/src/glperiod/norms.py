"""Discrete Lebesgue, weighted Sobolev and space-time norms.

The spatial weight is w(x) = 1 + |x| with x in centered box coordinates
(w is even on the lattice and >= 1 everywhere). Weighted Sobolev norms apply
the weight after differentiation:

    ||f||_{H^k_w} = ( sum_{|alpha| <= k} ||(1+|x|) d^alpha f||_{L2}^2 )^{1/2}.

Space-time norms realize C([a,b]; .) as the max over time nodes, time
integrals by the trapezoidal rule and time derivatives by centered
differences with periodic wrap.

The two space-time norms are

    X(u) = ||u||_{H1(t;L2)} + || |x| grad u ||_{H1(t;L2)} + ||du/dt||_{L2(t;L2_w)}
    Y(u) = ||u||_{C(t;H2_w)} + ||u||_{L2(t;H3_w)} + ||u||_{H1(t;H1_w)}

for the low and high frequency parts respectively, and the forcing size
functional is [g] = ||g||_{L2(t;L1_w)} + ||g||_{L2(t;H1_w)}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import CutoffSpec
from .spectral import FieldSeries, Grid, SpectralField, time_derivative

_trapz = getattr(np, "trapezoid", None) or np.trapz


def _multi_indices(dim: int, k: int) -> list[tuple[int, ...]]:
    out = []
    for total in range(k + 1):
        for alpha in itertools.product(range(total + 1), repeat=dim):
            if sum(alpha) == total:
                out.append(alpha)
    return out


class NormSuite:
    """Per-grid cache of the weight, derivative symbols and Sobolev symbols."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.weight = 1.0 + grid.x_abs
        self.weight_sq = self.weight * self.weight
        self.x_abs_sq = grid.x_abs * grid.x_abs
        self._alpha_symbols: dict[tuple[int, ...], np.ndarray] = {}
        self._sobolev_symbols: dict[int, np.ndarray] = {}

    @classmethod
    def for_grid(cls, grid: Grid) -> "NormSuite":
        suite = getattr(grid, "_norm_suite", None)
        if suite is None:
            suite = cls(grid)
            grid._norm_suite = suite
        return suite

    def alpha_symbol(self, alpha: tuple[int, ...]) -> np.ndarray:
        """Frequency multiplier of d^alpha, Nyquist-zeroed for |alpha| >= 1."""
        sym = self._alpha_symbols.get(alpha)
        if sym is None:
            grid = self.grid
            sym = np.ones(grid.shape, dtype=complex)
            for axis, power in enumerate(alpha):
                if power:
                    sym = sym * (1j * grid.xi[axis]) ** power
            if sum(alpha) >= 1:
                sym = sym * grid.keep_nyquist_free
            self._alpha_symbols[alpha] = sym
        return sym

    def sobolev_symbol(self, k: int) -> np.ndarray:
        """sum_{|alpha| <= k} |symbol_alpha|^2, for the unweighted fast path."""
        sym = self._sobolev_symbols.get(k)
        if sym is None:
            sym = np.zeros(self.grid.shape)
            for alpha in _multi_indices(self.grid.dim, k):
                a = self.alpha_symbol(alpha)
                sym = sym + (a.real ** 2 + a.imag ** 2)
            self._sobolev_symbols[k] = sym
        return sym


_LP_EXPONENTS = (1, 2, 3, 6)


def lp_norm(f: SpectralField, p, weighted: bool = False) -> float:
    """Quadrature L^p norm, optionally with the (1+|x|) weight; p = inf is the
    exact max modulus over nodes."""
    suite = NormSuite.for_grid(f.grid)
    mag = np.abs(f.to_physical().data)
    if weighted:
        mag = suite.weight * mag
    if p == math.inf or p == float("inf"):
        return float(mag.max())
    if p not in _LP_EXPONENTS:
        raise ValueError(f"unsupported exponent p={p!r}; use 1, 2, 3, 6 or inf")
    return float((mag ** p).sum() * f.grid.quad_weight) ** (1.0 / p)


def sobolev_norm(f: SpectralField, k: int, weighted: bool = False) -> float:
    """H^k norm over all multi-indices |alpha| <= k; weighted applies (1+|x|)
    in physical space after differentiation."""
    if k not in (0, 1, 2, 3):
        raise ValueError(f"Sobolev order k must be 0..3; got {k}")
    suite = NormSuite.for_grid(f.grid)
    grid = f.grid
    freq = f.to_frequency().data
    if not weighted:
        abs_sq = freq.real ** 2 + freq.imag ** 2
        return float(np.sqrt((suite.sobolev_symbol(k) * abs_sq).sum()
                             * grid.parseval_factor))
    total = 0.0
    for alpha in _multi_indices(grid.dim, k):
        phys = np.fft.ifftn(freq * suite.alpha_symbol(alpha))
        wmag = suite.weight_sq * (phys.real ** 2 + phys.imag ** 2)
        total += wmag.sum() * grid.quad_weight
    return float(np.sqrt(total))


def x_weighted_gradient_norm(f: SpectralField) -> float:
    """|| |x| |grad f| ||_{L2} with x in centered coordinates."""
    suite = NormSuite.for_grid(f.grid)
    grid = f.grid
    freq = f.to_frequency().data
    grad_sq = np.zeros(grid.shape)
    for axis in range(grid.dim):
        alpha = tuple(1 if a == axis else 0 for a in range(grid.dim))
        phys = np.fft.ifftn(freq * suite.alpha_symbol(alpha))
        grad_sq += phys.real ** 2 + phys.imag ** 2
    return float(np.sqrt((suite.x_abs_sq * grad_sq).sum() * grid.quad_weight))


# ---------------------------------------------------------------------------
# Space-time norms on series (frequency-stacked internally)
# ---------------------------------------------------------------------------


def _series_freq(series: FieldSeries) -> np.ndarray:
    return series.to_frequency().data


def _spatial_axes(grid: Grid) -> tuple[int, ...]:
    return tuple(range(1, grid.dim + 1))


def _node_l2(data: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-node L2 norms of frequency-stacked data (Parseval)."""
    abs_sq = data.real ** 2 + data.imag ** 2
    return np.sqrt(abs_sq.sum(axis=_spatial_axes(grid)) * grid.parseval_factor)


def _node_weighted_l2(phys: np.ndarray, grid: Grid, weight_sq: np.ndarray) -> np.ndarray:
    mag = (phys.real ** 2 + phys.imag ** 2) * weight_sq
    return np.sqrt(mag.sum(axis=_spatial_axes(grid)) * grid.quad_weight)


def _project_series(series: FieldSeries, chi: np.ndarray) -> FieldSeries:
    data = _series_freq(series) * (chi * series.grid.keep_nyquist_free)
    return FieldSeries(series.grid, "frequency", data, series.period)


def _centered_dt(series: FieldSeries) -> np.ndarray:
    return _series_freq(time_derivative(series.to_frequency(), periodic=True))


def _weighted_hk_node_norms(data: np.ndarray, grid: Grid, k_max: int) -> dict[int, np.ndarray]:
    """Per-node weighted H^k norms for every k <= k_max, sharing the
    per-multi-index inverse transforms."""
    suite = NormSuite.for_grid(grid)
    axes = _spatial_axes(grid)
    cums = {k: np.zeros(data.shape[0]) for k in range(k_max + 1)}
    for alpha in _multi_indices(grid.dim, k_max):
        phys = np.fft.ifftn(data * suite.alpha_symbol(alpha), axes=axes)
        contrib = ((phys.real ** 2 + phys.imag ** 2) * suite.weight_sq).sum(axis=axes) \
            * grid.quad_weight
        for k in range(sum(alpha), k_max + 1):
            cums[k] += contrib
    return {k: np.sqrt(v) for k, v in cums.items()}


def _node_x_grad(data: np.ndarray, grid: Grid) -> np.ndarray:
    """Per-node || |x| grad u ||_{L2} of frequency-stacked data."""
    suite = NormSuite.for_grid(grid)
    axes = _spatial_axes(grid)
    grad_sq = np.zeros(data.shape[0:1] + grid.shape)
    for axis in range(grid.dim):
        alpha = tuple(1 if a == axis else 0 for a in range(grid.dim))
        phys = np.fft.ifftn(data * suite.alpha_symbol(alpha), axes=axes)
        grad_sq += phys.real ** 2 + phys.imag ** 2
    return np.sqrt((grad_sq * suite.x_abs_sq).sum(axis=axes) * grid.quad_weight)


def _x_norm(series: FieldSeries) -> float:
    grid = series.grid
    suite = NormSuite.for_grid(grid)
    axes = _spatial_axes(grid)
    data = _series_freq(series)
    dt_data = _centered_dt(series)
    h = series.dt

    l2 = _node_l2(data, grid)
    l2_dt = _node_l2(dt_data, grid)
    xg = _node_x_grad(data, grid)
    xg_dt = _node_x_grad(dt_data, grid)
    dt_phys = np.fft.ifftn(dt_data, axes=axes)
    l2w_dt = _node_weighted_l2(dt_phys, grid, suite.weight_sq)

    return float(np.sqrt(_trapz(l2 ** 2 + l2_dt ** 2, dx=h))
                 + np.sqrt(_trapz(xg ** 2 + xg_dt ** 2, dx=h))
                 + np.sqrt(_trapz(l2w_dt ** 2, dx=h)))


def _y_norm(series: FieldSeries) -> float:
    grid = series.grid
    data = _series_freq(series)
    dt_data = _centered_dt(series)
    h = series.dt

    hk = _weighted_hk_node_norms(data, grid, 3)
    h1_dt = _weighted_hk_node_norms(dt_data, grid, 1)[1]

    return float(hk[2].max()
                 + np.sqrt(_trapz(hk[3] ** 2, dx=h))
                 + np.sqrt(_trapz(hk[1] ** 2 + h1_dt ** 2, dx=h)))


def spacetime_norm(series: FieldSeries, kind: str,
                   cutoffs: CutoffSpec | None = None) -> float:
    """The X (low-frequency) or Y (high-frequency) space-time norm.

    When cutoffs are given the matching projection is applied first; pass
    None for a series that is already supported in the right band.
    """
    if len(series) < 3:
        raise ValueError("space-time norms need at least 3 time nodes")
    if kind not in ("X", "Y"):
        raise ValueError(f"kind must be 'X' or 'Y'; got {kind!r}")
    if cutoffs is not None:
        chi = cutoffs.chi1 if kind == "X" else cutoffs.chi_inf
        series = _project_series(series, chi)
    else:
        series = series.to_frequency()
    return _x_norm(series) if kind == "X" else _y_norm(series)


def z_norm(series: FieldSeries, cutoffs: CutoffSpec) -> float:
    """X(P_low u) + Y(P_high u): the norm in which the iteration contracts."""
    return (spacetime_norm(series, "X", cutoffs)
            + spacetime_norm(series, "Y", cutoffs))


def forcing_bracket(g: FieldSeries) -> float:
    """[g] = ||g||_{L2(0,T;L1_w)} + ||g||_{L2(0,T;H1_w)}."""
    if len(g) < 3:
        raise ValueError("the forcing functional needs at least 3 time nodes")
    grid = g.grid
    suite = NormSuite.for_grid(grid)
    axes = _spatial_axes(grid)
    data = _series_freq(g)
    h = g.dt

    phys = np.fft.ifftn(data, axes=axes)
    l1w = (np.abs(phys) * suite.weight).sum(axis=axes) * grid.quad_weight
    h1w = _weighted_hk_node_norms(data, grid, 1)[1]
    return float(np.sqrt(_trapz(l1w ** 2, dx=h)) + np.sqrt(_trapz(h1w ** 2, dx=h)))


@dataclass
class SpaceTimeNorms:
    """Bundle of the space-time norms of a low/high split solution."""

    x_norm: float
    y_norm: float
    g_bracket: float = 0.0
    components: dict = field(default_factory=dict)

    @property
    def z_norm(self) -> float:
        return self.x_norm + self.y_norm

    def as_dict(self) -> dict:
        return {"x_norm": self.x_norm, "y_norm": self.y_norm,
                "z_norm": self.z_norm, "g_bracket": self.g_bracket,
                **{f"component_{k}": v for k, v in self.components.items()}}


def split_norms(series: FieldSeries, cutoffs: CutoffSpec,
                g: FieldSeries | None = None) -> SpaceTimeNorms:
    x = spacetime_norm(series, "X", cutoffs)
    y = spacetime_norm(series, "Y", cutoffs)
    bracket = forcing_bracket(g) if g is not None else 0.0
    return SpaceTimeNorms(x_norm=x, y_norm=y, g_bracket=bracket)
