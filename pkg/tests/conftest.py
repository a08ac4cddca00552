import numpy as np
import pytest

from glperiod import (GridConfig, auto_cutoffs, make_grid, make_operator,
                      SpectralField)

PERIOD = 1.0


@pytest.fixture(scope="session")
def grid1d():
    return make_grid(GridConfig(dim=1, n_per_axis=32, box_length=2 * np.pi))


@pytest.fixture(scope="session")
def grid3d():
    return make_grid(GridConfig(dim=3, n_per_axis=16, box_length=32.0))


@pytest.fixture(scope="session")
def op3d(grid3d):
    return make_operator(grid3d, PERIOD)


@pytest.fixture(scope="session")
def cutoffs3d(grid3d):
    return auto_cutoffs(grid3d, PERIOD)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_physical_field(grid, rng, dealiased=True):
    """Random complex field; by default band-limited so every multiplier
    identity (which zeroes Nyquist rows) holds exactly."""
    data = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if dealiased:
        fhat = np.fft.fftn(data) * grid.dealias_mask(grid.config.dealias_fraction)
        data = np.fft.ifftn(fhat)
    return SpectralField(grid, "physical", data)


def random_odd_field(grid, rng):
    """Random field exactly odd on the lattice (frequency antisymmetrized)."""
    fhat = np.fft.fftn(rng.standard_normal(grid.shape)
                       + 1j * rng.standard_normal(grid.shape))
    fhat *= grid.dealias_mask(grid.config.dealias_fraction)
    fhat = 0.5 * (fhat - grid.reflect(fhat))
    fhat.flat[0] = 0.0
    return SpectralField(grid, "frequency", fhat)
