import numpy as np
import pytest

from vortexmix import GridSpec, LgParams, gaussian, lg_mode

LAMBDA_780 = 780e-9
LAMBDA_776 = 776e-9
WAIST = 100e-6


@pytest.fixture(scope="session")
def grid():
    return GridSpec(512, 512, 4e-6, 4e-6)


@pytest.fixture(scope="session")
def gauss(grid):
    return gaussian(grid, LAMBDA_780, WAIST)


@pytest.fixture(scope="session")
def lg(grid):
    cache = {}

    def make(p=0, l=0, w0=WAIST, z=0.0, wavelength=LAMBDA_780):
        key = (p, l, w0, z, wavelength)
        if key not in cache:
            cache[key] = lg_mode(grid, wavelength, LgParams(p, l, w0, z))
        return cache[key]

    return make


def measured_radius_1e2(field):
    """1/e^2 intensity radius from second moments (exact for a Gaussian)."""
    inten = np.abs(field.samples) ** 2
    x = field.grid.x_coords()
    var = float((inten.sum(axis=0) * x * x).sum() / inten.sum())
    return 2.0 * np.sqrt(var)
