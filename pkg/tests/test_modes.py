import math

import numpy as np
import pytest

from vortexmix import (
    GridSpec,
    LgParams,
    dominant_charge,
    gaussian,
    lg_mode,
    oam_spectrum,
    overlap,
    power,
)

from conftest import LAMBDA_780, WAIST


def ring_radius(field):
    """Peak-intensity radius along +x, refined by a parabolic fit."""
    g = field.grid
    row = np.abs(field.samples[g.ny // 2]) ** 2
    i = int(np.argmax(row))
    denom = row[i - 1] - 2.0 * row[i] + row[i + 1]
    shift = 0.5 * (row[i - 1] - row[i + 1]) / denom if denom != 0.0 else 0.0
    return abs(g.x_coords()[i] + shift * g.dx)


class TestLgMode:
    def test_fundamental_peaks_on_axis(self, gauss, grid):
        inten = np.abs(gauss.samples) ** 2
        iy, ix = np.unravel_index(np.argmax(inten), inten.shape)
        assert (iy, ix) == (grid.ny // 2, grid.nx // 2)

    def test_vortex_has_dark_core(self, lg):
        f = lg(0, 1)
        inten = np.abs(f.samples) ** 2
        core = inten[f.grid.ny // 2, f.grid.nx // 2]
        assert core <= 1e-12 * inten.max()

    def test_ring_radius_scaling(self, lg):
        # Oracle: maximizing r^|l| exp(-r^2/w0^2) gives r = w0 sqrt(|l|/2),
        # so the l=2 ring is sqrt(2) times the l=1 ring.
        r1 = ring_radius(lg(0, 1))
        r2 = ring_radius(lg(0, 2))
        assert r2 / r1 == pytest.approx(math.sqrt(2.0), rel=0.01)
        assert r1 == pytest.approx(WAIST * math.sqrt(0.5), rel=0.02)

    def test_unit_power(self, lg):
        for p, l in [(0, 0), (0, 3), (1, -2), (2, 1)]:
            assert power(lg(p, l)) == pytest.approx(1.0, abs=1e-6)

    def test_azimuthal_phase_factor(self, lg):
        f = lg(0, 2)
        g = f.grid
        idx = g.nx // 2 + 24
        right = f.samples[g.ny // 2, idx]
        top = f.samples[g.ny // 2 + 24, g.nx // 2]
        # phi = pi/2 between those points: phase advances by l * pi / 2.
        delta = np.angle(top / right)
        assert delta == pytest.approx(math.pi, abs=1e-6)

    def test_grid_too_small_names_requirement(self, grid):
        with pytest.raises(ValueError, match="required"):
            lg_mode(grid, LAMBDA_780, LgParams(0, 0, 400e-6))

    def test_invalid_params(self):
        with pytest.raises(ValueError):
            LgParams(p=-1, l=0, w0=WAIST)
        with pytest.raises(ValueError):
            LgParams(p=0, l=0, w0=0.0)

    def test_conjugation_flips_charge(self, lg):
        f = lg(0, 2)
        conj = f.with_samples(np.conj(f.samples))
        assert abs(overlap(conj, lg(0, -2))) == pytest.approx(1.0, abs=1e-9)

    def test_spectrum_concentrates_on_charge(self, lg):
        for l in (-2, 1, 3):
            spec = oam_spectrum(lg(0, l))
            assert spec.weight(l) >= 0.999
            assert dominant_charge(spec) == l


class TestGaussian:
    def test_equals_lg00(self, grid, gauss):
        f = lg_mode(grid, LAMBDA_780, LgParams(0, 0, WAIST))
        assert abs(overlap(gauss, f)) == pytest.approx(1.0, abs=1e-9)

    def test_dominant_charge_zero(self, gauss):
        assert dominant_charge(oam_spectrum(gauss)) == 0

    def test_paper_scale_waist_fits_default_grid(self, grid):
        beam = gaussian(grid, LAMBDA_780, 100e-6)
        assert power(beam) == pytest.approx(1.0, abs=1e-9)


class TestGouyAndCurvature:
    def test_mode_at_z_matches_propagated_mode(self, grid, lg):
        # Ties the curvature and axial-phase conventions to the propagation
        # kernel: synthesizing at z must equal propagating from the waist.
        from vortexmix import propagate

        zr = math.pi * WAIST**2 / LAMBDA_780
        for p, l in [(0, 1), (1, -2)]:
            start = lg(p, l)
            end = propagate(start, 0.5 * zr)
            direct = lg(p, l, z=0.5 * zr)
            assert abs(overlap(end, direct)) >= 1.0 - 1e-9
