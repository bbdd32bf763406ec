import math

import numpy as np
import pytest

from vortexmix import (
    GridSpec,
    LgParams,
    ScalarField,
    VtxfFormatError,
    gaussian,
    lg_mode,
    load_field,
    normalize,
    overlap,
    power,
    save_field,
    zero_field,
)

from conftest import LAMBDA_780, WAIST


class TestGridSpec:
    def test_rejects_small_grid(self):
        with pytest.raises(ValueError, match="grid too small"):
            GridSpec(8, 64, 1e-6, 1e-6)

    def test_rejects_nonpositive_pitch(self):
        with pytest.raises(ValueError):
            GridSpec(64, 64, 0.0, 1e-6)

    def test_center_coordinate_is_zero(self):
        g = GridSpec(64, 64, 1e-6, 2e-6)
        assert g.x_coords()[32] == 0.0
        assert g.y_coords()[32] == 0.0
        assert g.extent_x == pytest.approx(64e-6)


class TestZeroField:
    def test_zero_power(self):
        f = zero_field(GridSpec(64, 64, 10e-6, 10e-6), 780e-9)
        assert power(f) == 0.0

    def test_all_samples_zero(self):
        f = zero_field(GridSpec(16, 16, 1e-6, 1e-6), 420e-9)
        assert np.all(f.samples == 0)

    def test_too_small_grid_errors(self):
        with pytest.raises(ValueError, match="grid too small"):
            zero_field(GridSpec(8, 16, 1e-6, 1e-6), 780e-9)


class TestPower:
    def test_normalized_mode_has_unit_power(self, lg):
        assert power(lg(0, 1)) == pytest.approx(1.0, abs=1e-9)

    def test_quadratic_scaling(self, gauss):
        doubled = gauss.with_samples(2.0 * gauss.samples)
        assert power(doubled) == pytest.approx(4.0 * power(gauss), rel=1e-12)

    def test_gaussian_analytic_integral(self):
        # Oracle: integral of A^2 exp(-2 r^2 / w0^2) over the plane equals
        # A^2 * pi * w0^2 / 2.
        g = GridSpec(512, 512, 4e-6, 4e-6)
        amp = 3.7
        X, Y = g.meshgrid()
        w0 = 100e-6
        field = ScalarField(g, LAMBDA_780, amp * np.exp(-(X**2 + Y**2) / w0**2))
        expected = amp**2 * math.pi * w0**2 / 2.0
        assert power(field) == pytest.approx(expected, rel=1e-3)


class TestOverlap:
    def test_self_overlap_is_power(self, lg):
        f = lg(0, 1)
        assert overlap(f, f) == pytest.approx(power(f), abs=1e-9)

    def test_different_charges_orthogonal_fine_grid(self):
        w0 = 256e-6
        g = GridSpec(1024, 1024, 8 * w0 / 1024, 8 * w0 / 1024)
        a = lg_mode(g, LAMBDA_780, LgParams(0, 1, w0))
        b = lg_mode(g, LAMBDA_780, LgParams(0, 2, w0))
        assert abs(overlap(a, b)) <= 1e-6

    def test_linearity(self, gauss):
        assert overlap(gauss, gauss.with_samples(2 * gauss.samples)) == pytest.approx(
            2.0 * power(gauss), rel=1e-12
        )

    def test_grid_mismatch_rejected(self, gauss):
        other = gaussian(GridSpec(256, 256, 4e-6, 4e-6), LAMBDA_780, WAIST)
        with pytest.raises(ValueError, match="grid"):
            overlap(gauss, other)

    def test_wavelength_mismatch_rejected(self, grid, gauss):
        other = gaussian(grid, 776e-9, WAIST)
        with pytest.raises(ValueError, match="wavelength"):
            overlap(gauss, other)

    def test_conjugate_symmetry(self, lg):
        a, b = lg(0, 1), lg(1, -2)
        lhs = overlap(a, b)
        rhs = np.conj(overlap(b, a))
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), 1.0)

    def test_parallelogram_law(self, lg):
        a, b = lg(0, 1), lg(1, 0)
        plus = a.with_samples(a.samples + b.samples)
        minus = a.with_samples(a.samples - b.samples)
        lhs = power(plus) + power(minus)
        rhs = 2.0 * power(a) + 2.0 * power(b)
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestNormalize:
    def test_unit_power(self, gauss):
        scaled = gauss.with_samples(0.123 * gauss.samples)
        assert power(normalize(scaled)) == pytest.approx(1.0, rel=1e-12)

    def test_idempotent(self, gauss):
        once = normalize(gauss)
        twice = normalize(once)
        assert np.allclose(once.samples, twice.samples, rtol=1e-12, atol=0)

    def test_zero_field_rejected(self, grid):
        with pytest.raises(ValueError, match="cannot normalize zero power"):
            normalize(zero_field(grid, LAMBDA_780))


class TestFieldValidation:
    def test_nonfinite_samples_rejected(self, grid):
        bad = np.zeros((grid.ny, grid.nx), complex)
        bad[0, 0] = np.nan
        with pytest.raises(ValueError, match="non-finite"):
            ScalarField(grid, LAMBDA_780, bad)

    def test_samples_are_immutable(self, gauss):
        with pytest.raises(ValueError):
            gauss.samples[0, 0] = 1.0


class TestVtxf:
    def test_round_trip_bit_exact(self, tmp_path, lg):
        f = lg(1, -2, z=0.01)
        path = tmp_path / "f.vtxf"
        save_field(f, path)
        g = load_field(path)
        assert g.samples.tobytes() == f.samples.tobytes()
        assert g.grid == f.grid
        assert g.wavelength == f.wavelength

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "bad.vtxf"
        path.write_bytes(b"NOPE" + b"\x00" * 64)
        with pytest.raises(VtxfFormatError, match="not a VTXF file"):
            load_field(path)

    def test_truncated_payload(self, tmp_path, gauss):
        path = tmp_path / "trunc.vtxf"
        save_field(gauss, path)
        blob = path.read_bytes()
        path.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(VtxfFormatError, match="unexpected end of payload"):
            load_field(path)

    def test_trailing_bytes(self, tmp_path, gauss):
        path = tmp_path / "extra.vtxf"
        save_field(gauss, path)
        with open(path, "ab") as fh:
            fh.write(b"\x00")
        with pytest.raises(VtxfFormatError, match="trailing"):
            load_field(path)

    def test_nonfinite_payload(self, tmp_path, grid):
        f = zero_field(grid, LAMBDA_780)
        path = tmp_path / "nan.vtxf"
        save_field(f, path)
        blob = bytearray(path.read_bytes())
        blob[40:48] = np.array([np.inf]).tobytes()
        path.write_bytes(bytes(blob))
        with pytest.raises(VtxfFormatError, match="non-finite"):
            load_field(path)
