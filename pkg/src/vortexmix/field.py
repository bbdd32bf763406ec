"""Grid-based complex scalar fields: construction, inner products, persistence.

All fields live on a uniform rectangular sampling lattice (:class:`GridSpec`)
and carry a single wavelength. Fields are immutable after construction and
every operation here is a pure function, so concurrent use is safe.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

VTXF_MAGIC = b"VTXF"
VTXF_VERSION = 1
_HEADER = struct.Struct("<4sIIIddd")


class VtxfFormatError(ValueError):
    """Raised when a field file does not conform to the VTXF layout."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform 2D sampling lattice with physical pixel pitch.

    The optical axis sits at index (ny//2, nx//2); physical coordinates are
    x_j = (j - nx//2) * dx and y_i = (i - ny//2) * dy, in meters.
    """

    nx: int
    ny: int
    dx: float
    dy: float

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise ValueError(
                f"grid too small: need nx, ny >= 16, got {self.nx}x{self.ny}"
            )
        if not (self.dx > 0.0 and self.dy > 0.0):
            raise ValueError("grid pitch must be positive")
        if not (math.isfinite(self.dx) and math.isfinite(self.dy)):
            raise ValueError("grid pitch must be finite")

    @property
    def extent_x(self) -> float:
        return self.nx * self.dx

    @property
    def extent_y(self) -> float:
        return self.ny * self.dy

    @property
    def pixel_area(self) -> float:
        return self.dx * self.dy

    def x_coords(self) -> np.ndarray:
        return (np.arange(self.nx) - self.nx // 2) * self.dx

    def y_coords(self) -> np.ndarray:
        return (np.arange(self.ny) - self.ny // 2) * self.dy

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Return (X, Y) arrays of shape (ny, nx)."""
        return np.meshgrid(self.x_coords(), self.y_coords())


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class ScalarField:
    """Complex amplitude samples on a grid at one wavelength.

    ``samples[i, j]`` is the amplitude at (y_i, x_j); units are arbitrary.
    """

    grid: GridSpec
    wavelength: float
    samples: np.ndarray

    def __post_init__(self):
        if not (self.wavelength > 0.0 and math.isfinite(self.wavelength)):
            raise ValueError("wavelength must be positive and finite")
        s = np.ascontiguousarray(self.samples, dtype=np.complex128)
        if s.shape != (self.grid.ny, self.grid.nx):
            raise ValueError(
                f"samples shape {s.shape} does not match grid "
                f"({self.grid.ny}, {self.grid.nx})"
            )
        if not np.all(np.isfinite(s.view(np.float64))):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, "samples", _freeze(s))

    @property
    def k(self) -> float:
        """Vacuum wavenumber 2*pi/wavelength."""
        return 2.0 * math.pi / self.wavelength

    def with_samples(self, samples: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, self.wavelength, samples)


@dataclass(frozen=True)
class IntensityImage:
    """Nonnegative intensity samples on a grid (what a camera records)."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.grid.ny, self.grid.nx):
            raise ValueError("values shape does not match grid")
        if not np.all(np.isfinite(v)):
            raise ValueError("values contain non-finite entries")
        if np.any(v < 0.0):
            raise ValueError("values must be nonnegative")
        object.__setattr__(self, "values", _freeze(v))


def zero_field(grid: GridSpec, wavelength: float) -> ScalarField:
    """Field of all-zero amplitude on the given grid."""
    return ScalarField(grid, wavelength, np.zeros((grid.ny, grid.nx), np.complex128))


def power(field: ScalarField) -> float:
    """Total power: sum |E|^2 * dx * dy (midpoint rule)."""
    s = field.samples
    return float(np.vdot(s, s).real) * field.grid.pixel_area


def overlap(a: ScalarField, b: ScalarField) -> complex:
    """Inner product sum conj(a) * b * dx * dy.

    Both fields must share the grid and the wavelength; the result is
    conjugate-symmetric and overlap(f, f) equals power(f).
    """
    if a.grid != b.grid:
        raise ValueError("overlap requires identical grids")
    if a.wavelength != b.wavelength:
        raise ValueError("overlap requires identical wavelengths")
    return complex(np.vdot(a.samples, b.samples)) * a.grid.pixel_area


def normalize(field: ScalarField) -> ScalarField:
    """Rescale to unit power. Raises on a zero-power field."""
    p = power(field)
    if p <= 0.0:
        raise ValueError("cannot normalize zero power")
    return field.with_samples(field.samples / math.sqrt(p))


def intensity(field: ScalarField) -> IntensityImage:
    """|E|^2 as an IntensityImage on the field's grid."""
    return IntensityImage(field.grid, np.abs(field.samples) ** 2)


def intensity_moments(values: np.ndarray, grid: GridSpec) -> dict:
    """First and second moments of a nonnegative 2D distribution.

    Returns total, centroid (cx, cy), central second moments (mxx, myy, mxy)
    and the radial fourth moment about the centroid, all in physical units.
    """
    v = np.asarray(values, dtype=np.float64)
    total = float(v.sum())
    if total <= 0.0:
        return {"total": 0.0, "cx": 0.0, "cy": 0.0,
                "mxx": 0.0, "myy": 0.0, "mxy": 0.0, "mr4": 0.0}
    x = grid.x_coords()
    y = grid.y_coords()
    px = v.sum(axis=0)
    py = v.sum(axis=1)
    cx = float((px * x).sum() / total)
    cy = float((py * y).sum() / total)
    dx2 = (x - cx) ** 2
    dy2 = (y - cy) ** 2
    mxx = float((px * dx2).sum() / total)
    myy = float((py * dy2).sum() / total)
    mxy = float((v * np.outer(y - cy, x - cx)).sum() / total)
    r2 = dx2[None, :] + dy2[:, None]
    mr4 = float((v * r2 * r2).sum() / total)
    return {"total": total, "cx": cx, "cy": cy,
            "mxx": mxx, "myy": myy, "mxy": mxy, "mr4": mr4}


def save_field(field: ScalarField, path) -> None:
    """Write a field as a VTXF file.

    Layout (little-endian, no padding): magic ``VTXF`` | version u32 |
    nx u32 | ny u32 | dx f64 | dy f64 | wavelength f64 | ny*nx complex
    samples as (re, im) f64 pairs, row-major.
    """
    g = field.grid
    header = _HEADER.pack(VTXF_MAGIC, VTXF_VERSION, g.nx, g.ny, g.dx, g.dy,
                          field.wavelength)
    payload = np.ascontiguousarray(field.samples, dtype="<c16").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_field(path) -> ScalarField:
    """Read a VTXF file written by :func:`save_field`; round-trip is bit-exact."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != VTXF_MAGIC:
        raise VtxfFormatError("not a VTXF file")
    if len(blob) < _HEADER.size:
        raise VtxfFormatError("unexpected end of payload: truncated header")
    magic, version, nx, ny, dx, dy, wavelength = _HEADER.unpack_from(blob, 0)
    if version != VTXF_VERSION:
        raise VtxfFormatError(f"unsupported VTXF version {version}")
    expected = _HEADER.size + 16 * nx * ny
    if len(blob) < expected:
        raise VtxfFormatError("unexpected end of payload")
    if len(blob) > expected:
        raise VtxfFormatError("trailing bytes after payload")
    raw = np.frombuffer(blob, dtype="<c16", offset=_HEADER.size)
    samples = raw.reshape(ny, nx).astype(np.complex128)
    if not np.all(np.isfinite(samples.view(np.float64))):
        raise VtxfFormatError("payload contains non-finite samples")
    return ScalarField(GridSpec(nx, ny, dx, dy), wavelength, samples)
