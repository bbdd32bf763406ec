"""Hermite-Gaussian basis tools for the astigmatic (tilted-lens) imager.

A paraxial field decomposed on a separable HG basis evolves through any
orthogonal astigmatic ABCD system axis by axis: each axis keeps its mode
shape, rescales its waist and accrues a Gouy phase (n + 1/2) per order. That
per-axis evolution is exact, so re-synthesizing the field on an adapted grid
reproduces the astigmatic transform without the double-sampling burden of a
fixed-grid transform when the beam focuses by orders of magnitude.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .field import GridSpec, ScalarField, intensity_moments


def hermite_functions(nmax: int, x: np.ndarray, waist: float) -> np.ndarray:
    """Orthonormal 1D HG profiles h_0..h_nmax on ``x``; shape (nmax+1, x.size).

    h_n(x) = (2/w^2)^(1/4) H_n(sqrt(2) x / w) exp(-x^2/w^2) / sqrt(2^n n!
    sqrt(pi)); evaluated by the normalized recurrence, stable to high order.
    """
    t = math.sqrt(2.0) * np.asarray(x, dtype=np.float64) / waist
    out = np.empty((nmax + 1, t.size))
    scale = math.sqrt(math.sqrt(2.0 / math.pi) / waist)
    out[0] = scale * np.exp(-0.5 * t * t)
    if nmax >= 1:
        out[1] = math.sqrt(2.0) * t * out[0]
    for n in range(2, nmax + 1):
        out[n] = math.sqrt(2.0 / n) * t * out[n - 1] - math.sqrt((n - 1) / n) * out[n - 2]
    return out


@dataclass(frozen=True)
class HgDecomposition:
    """Separable HG expansion of a field about (cx, cy) with one basis waist.

    coeffs[n, m] multiplies h_n(y) h_m(x). ``captured`` is the fraction of the
    field power represented by the truncated expansion.
    """

    coeffs: np.ndarray
    waist: float
    cx: float
    cy: float
    wavelength: float
    captured: float


def estimate_waist(field: ScalarField) -> tuple[float, float, float]:
    """Embedded Gaussian waist and centroid from intensity moments.

    For a ring mode of azimuthal order n the moment ratio <r^4>/<r^2>^2 is
    (n+2)/(n+1), which inverts to the underlying Gaussian scale without
    knowing n. Falls back gracefully for general beams.
    """
    m = intensity_moments(np.abs(field.samples) ** 2, field.grid)
    if m["total"] <= 0.0:
        raise ValueError("cannot estimate waist of an empty field")
    r2 = m["mxx"] + m["myy"]
    ratio = m["mr4"] / (r2 * r2) if r2 > 0.0 else 2.0
    n_eq = (2.0 - ratio) / (ratio - 1.0) if ratio > 1.0 else 0.0
    n_eq = min(max(n_eq, 0.0), 30.0)
    w0 = math.sqrt(2.0 * r2 / (n_eq + 1.0))
    return w0, m["cx"], m["cy"]


def decompose(field: ScalarField, waist: float, cx: float, cy: float,
              nmax: int) -> HgDecomposition:
    """Project a field onto the HG basis (orders 0..nmax per axis)."""
    grid = field.grid
    hx = hermite_functions(nmax, grid.x_coords() - cx, waist)
    hy = hermite_functions(nmax, grid.y_coords() - cy, waist)
    coeffs = (hy @ field.samples @ hx.T) * grid.pixel_area
    total = float(np.vdot(field.samples, field.samples).real) * grid.pixel_area
    got = float(np.vdot(coeffs, coeffs).real)
    captured = got / total if total > 0.0 else 0.0
    return HgDecomposition(coeffs, waist, cx, cy, field.wavelength, captured)


def axis_evolution(waist: float, wavelength: float, focal: float,
                   z: float) -> tuple[float, float]:
    """Per-axis scale and Gouy shift through lens ``focal`` plus distance z.

    The input is a waist (flat phase) at the lens. Returns (w_out, gouy) with
    w_out the 1/e^2 half width at z and gouy the phase advance applied to an
    order-n mode as exp(-i (n + 1/2) gouy).
    """
    zr = math.pi * waist * waist / wavelength
    q0 = 1j * zr
    denom = (1.0 - z / focal) + z / q0
    return waist * abs(denom), -cmath.phase(denom)


def synthesize_intensity(dec: HgDecomposition, wx: float, wy: float,
                         gouy_x: float, gouy_y: float,
                         npix: int = 256, pad: float = 3.0) -> "IntensityImage":
    """Image of the evolved expansion on a grid adapted to (wx, wy)."""
    from .field import IntensityImage  # local import avoids cycle at import time

    coeffs = dec.coeffs
    nmax = coeffs.shape[0] - 1
    orders = np.arange(nmax + 1)
    row_power = np.abs(coeffs) ** 2
    sig = row_power.sum()
    if sig <= 0.0:
        raise ValueError("empty decomposition")
    keep = 1e-8 * sig
    n_eff_y = int(orders[row_power.sum(axis=1) > keep].max(initial=0))
    n_eff_x = int(orders[row_power.sum(axis=0) > keep].max(initial=0))

    half_x = wx * (math.sqrt(2.0 * n_eff_x + 1.0) + pad)
    half_y = wy * (math.sqrt(2.0 * n_eff_y + 1.0) + pad)
    dx = 2.0 * half_x / npix
    dy = 2.0 * half_y / npix
    grid = GridSpec(npix, npix, dx, dy)

    phased = (
        coeffs
        * np.exp(-1j * (orders + 0.5) * gouy_y)[:, None]
        * np.exp(-1j * (orders + 0.5) * gouy_x)[None, :]
    )
    hx = hermite_functions(nmax, grid.x_coords(), wx)
    hy = hermite_functions(nmax, grid.y_coords(), wy)
    out = hy.T @ phased @ hx
    return IntensityImage(grid, np.abs(out) ** 2)
