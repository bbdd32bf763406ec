"""Pointwise optical elements.

Each element is a pure transmission function t(x, y) applied sample-wise;
:func:`apply` returns a new field and never mutates its input. Azimuthal
angles use phi = atan2(y, x) folded to [0, 2*pi), so the first staircase
sector boundary lies on the +x axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .field import ScalarField

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class StaircaseMask:
    """Spiral staircase phase mask: ``sectors`` discrete steps per turn.

    Sector k covers phi in [2 pi k / sectors, 2 pi (k+1) / sectors) and adds
    phase charge * 2 pi k / sectors; amplitude is sqrt(power_transmittance).
    """

    charge: int
    sectors: int = 8
    power_transmittance: float = 0.95

    def __post_init__(self):
        if self.sectors < 2:
            raise ValueError("staircase mask needs at least 2 sectors")
        if not 0.0 < self.power_transmittance <= 1.0:
            raise ValueError("power transmittance must be in (0, 1]")

    def transmission(self, field: ScalarField) -> np.ndarray:
        X, Y = field.grid.meshgrid()
        phi = np.mod(np.arctan2(Y, X), TWO_PI)
        sector = np.minimum(np.floor(self.sectors * phi / TWO_PI), self.sectors - 1)
        step_phase = self.charge * TWO_PI * sector / self.sectors
        return math.sqrt(self.power_transmittance) * np.exp(1j * step_phase)


@dataclass(frozen=True)
class SpiralPlate:
    """Ideal spiral phase plate: exp(i * charge * phi), lossless."""

    charge: int

    def transmission(self, field: ScalarField) -> np.ndarray:
        X, Y = field.grid.meshgrid()
        return np.exp(1j * self.charge * np.arctan2(Y, X))


@dataclass(frozen=True)
class ForkedGrating:
    """Forked diffraction grating, first-order model.

    Only the selected first order is kept: a vortex phase of the dislocation
    charge times sqrt(efficiency). The order's direction change is part of the
    surrounding scenario geometry, not of the element.
    """

    charge: int
    efficiency: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.efficiency <= 1.0:
            raise ValueError("efficiency must be in (0, 1]")

    def transmission(self, field: ScalarField) -> np.ndarray:
        X, Y = field.grid.meshgrid()
        return math.sqrt(self.efficiency) * np.exp(
            1j * self.charge * np.arctan2(Y, X)
        )


@dataclass(frozen=True)
class ThinLens:
    """Ideal thin lens of focal length f: exp(-i k r^2 / 2f)."""

    f: float

    def __post_init__(self):
        if self.f == 0.0:
            raise ValueError("focal length must be nonzero")

    def transmission(self, field: ScalarField) -> np.ndarray:
        X, Y = field.grid.meshgrid()
        return np.exp(-1j * field.k * (X * X + Y * Y) / (2.0 * self.f))


@dataclass(frozen=True)
class TiltedLens:
    """Thin lens tilted about the vertical (y) axis by ``tilt`` radians.

    Quadratic astigmatic model with effective focal lengths
    fx = f cos(tilt) and fy = f / cos(tilt).
    """

    f: float
    tilt: float

    def __post_init__(self):
        if self.f == 0.0:
            raise ValueError("focal length must be nonzero")
        if not 0.0 <= self.tilt < math.pi / 2:
            raise ValueError("tilt must be in [0, pi/2)")

    @property
    def fx(self) -> float:
        return self.f * math.cos(self.tilt)

    @property
    def fy(self) -> float:
        return self.f / math.cos(self.tilt)

    def transmission(self, field: ScalarField) -> np.ndarray:
        X, Y = field.grid.meshgrid()
        c = math.cos(self.tilt)
        return np.exp(
            -1j * field.k * (X * X / (2.0 * self.f * c) + Y * Y * c / (2.0 * self.f))
        )


@dataclass(frozen=True)
class CircularAperture:
    """Hard circular aperture centered on the axis; zero outside ``radius``."""

    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("aperture radius must be positive")

    def transmission(self, field: ScalarField) -> np.ndarray:
        X, Y = field.grid.meshgrid()
        return (X * X + Y * Y <= self.radius * self.radius).astype(np.complex128)


OpticalElement = Union[
    StaircaseMask, SpiralPlate, ForkedGrating, ThinLens, TiltedLens, CircularAperture
]


def apply(element: OpticalElement, field: ScalarField) -> ScalarField:
    """Apply an element's pointwise transmission to a field."""
    return field.with_samples(element.transmission(field) * field.samples)
