import math

import numpy as np
import pytest

from vortexmix import (
    BeamGeometry,
    FwmConfig,
    PhaseMatchError,
    dominant_charge,
    expected_charge,
    fwm_blue_field,
    fwm_scene,
    oam_spectrum,
    phase_match,
    propagate,
    tilted_lens_reading,
)

from conftest import LAMBDA_776, LAMBDA_780, WAIST


def triangle_oracle(alpha: float, cfg: FwmConfig) -> float:
    """Blue-beam angle from the wave-vector closure, law of cosines.

    Independent of the root-finding solver: with K the pump wave-vector sum,
    the angle between the blue beam and K follows from the triangle with
    sides |K|, k_bl, k_ir.
    """
    k1 = 2 * math.pi / cfg.lambda1
    k2 = 2 * math.pi / cfg.lambda2
    k_ir = 2 * math.pi / cfg.lambda_ir
    k_bl = 2 * math.pi / cfg.lambda_bl
    kv = k1 * np.array([math.sin(-alpha / 2), math.cos(alpha / 2)]) + k2 * np.array(
        [math.sin(alpha / 2), math.cos(alpha / 2)]
    )
    kmag = float(np.linalg.norm(kv))
    cos_u = (kmag**2 + k_bl**2 - k_ir**2) / (2.0 * kmag * k_bl)
    theta_k = math.atan2(kv[0], kv[1])
    return theta_k + math.acos(max(-1.0, min(1.0, cos_u)))


class TestConfig:
    def test_nominal_values_satisfy_sum_rule_loosely(self):
        cfg = FwmConfig()
        lhs = 1 / cfg.lambda1 + 1 / cfg.lambda2
        rhs = 1 / cfg.lambda_ir + 1 / cfg.lambda_bl
        assert abs(lhs - rhs) / lhs < 1e-3
        assert abs(lhs - rhs) / lhs > 1e-4  # the nominal quartet is not exact

    def test_balanced_closes_exactly(self):
        cfg = FwmConfig().balanced()
        lhs = 1 / cfg.lambda1 + 1 / cfg.lambda2
        rhs = 1 / cfg.lambda_ir + 1 / cfg.lambda_bl
        assert abs(lhs - rhs) / lhs < 1e-14
        assert cfg.lambda_bl == pytest.approx(420e-9, rel=1e-3)

    def test_bad_quartet_rejected(self):
        with pytest.raises(ValueError, match="sum rule"):
            FwmConfig(lambda_bl=500e-9)


class TestExpectedCharge:
    @pytest.mark.parametrize(
        "l780,l776,lir,out",
        [(1, 0, 0, 1), (2, 1, 0, 3), (0, -1, 0, -1), (1, -1, 0, 0), (1, 1, 2, 0)],
    )
    def test_arithmetic(self, l780, l776, lir, out):
        assert expected_charge(l780, l776, lir) == out


class TestBlueField:
    def make(self, lg, l1, l2, cfg=None):
        p1 = lg(0, l1, wavelength=LAMBDA_780)
        p2 = lg(0, l2, wavelength=LAMBDA_776)
        return fwm_blue_field(p1, p2, cfg or FwmConfig())

    @pytest.mark.parametrize("l1,l2", [(0, 1), (2, 1), (1, -1), (1, 1)])
    def test_charge_addition(self, lg, l1, l2):
        blue = self.make(lg, l1, l2)
        spec = oam_spectrum(blue)
        assert dominant_charge(spec) == l1 + l2
        assert spec.weight(l1 + l2) >= 0.999

    def test_pseudo_vortex_is_doughnut(self, lg):
        blue = self.make(lg, 1, -1)
        inten = np.abs(blue.samples) ** 2
        g = blue.grid
        assert inten[g.ny // 2, g.nx // 2] <= 1e-9 * inten.max()

    def test_blue_wavelength(self, lg):
        assert self.make(lg, 0, 0).wavelength == FwmConfig().lambda_bl

    def test_linearity_in_pump(self, lg):
        p1 = lg(0, 1, wavelength=LAMBDA_780)
        p2 = lg(0, 0, wavelength=LAMBDA_776)
        cfg = FwmConfig()
        base = fwm_blue_field(p1, p2, cfg)
        scaled = fwm_blue_field(p1.with_samples(2j * p1.samples), p2, cfg)
        assert np.allclose(scaled.samples, 2j * base.samples, rtol=1e-12, atol=0)

    def test_charge_conjugation(self, lg):
        p1 = lg(0, 2, wavelength=LAMBDA_780)
        p2 = lg(0, 1, wavelength=LAMBDA_776)
        cfg = FwmConfig()
        blue = fwm_blue_field(p1, p2, cfg)
        flipped = fwm_blue_field(
            p1.with_samples(np.conj(p1.samples)),
            p2.with_samples(np.conj(p2.samples)),
            cfg,
        )
        assert dominant_charge(oam_spectrum(blue)) == 3
        assert dominant_charge(oam_spectrum(flipped)) == -3

    def test_configurable_ir_mode_changes_partition(self, lg):
        cfg = FwmConfig(ir_l=1)
        blue = self.make(lg, 1, 0, cfg)
        assert dominant_charge(oam_spectrum(blue)) == 0

    def test_grid_and_wavelength_guards(self, lg, grid):
        p1 = lg(0, 0, wavelength=LAMBDA_780)
        with pytest.raises(ValueError, match="wavelength"):
            fwm_blue_field(p1, p1, FwmConfig())


class TestPhaseMatch:
    def test_collinear_closure(self):
        cfg = FwmConfig().balanced()
        sol = phase_match(BeamGeometry.collinear(), cfg)
        k_bl = 2 * math.pi / cfg.lambda_bl
        assert sol.residual <= 1e-12 * k_bl
        assert sol.d_bl[2] == pytest.approx(1.0, abs=1e-12)
        assert sol.d_ir[2] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("alpha_mrad", [6.0, 14.0])
    def test_angle_matches_triangle_oracle(self, alpha_mrad):
        cfg = FwmConfig().balanced()
        alpha = alpha_mrad * 1e-3
        sol = phase_match(BeamGeometry.symmetric(alpha), cfg)
        theta_bl = math.atan2(sol.d_bl[0], sol.d_bl[2])
        assert theta_bl == pytest.approx(triangle_oracle(alpha, cfg), abs=1e-12)
        assert 0.0 < theta_bl < alpha / 2  # strictly inside the pump angle
        k_bl = 2 * math.pi / cfg.lambda_bl
        assert sol.residual <= 1e-9 * k_bl

    def test_swap_symmetry(self):
        cfg = FwmConfig().balanced()
        swapped = FwmConfig(
            lambda1=cfg.lambda2, lambda2=cfg.lambda1,
            lambda_ir=cfg.lambda_ir, lambda_bl=cfg.lambda_bl,
        )
        geom = BeamGeometry.symmetric(6e-3)
        mirror = BeamGeometry(d1=geom.d2, d2=geom.d1)
        a = phase_match(geom, cfg)
        b = phase_match(mirror, swapped)
        assert a.residual == pytest.approx(b.residual, abs=1e-9)

    def test_nominal_quartet_closes_with_wide_ir_cone(self):
        # The nominal wavelengths miss scalar closure by ~6e-4, which the
        # vector geometry absorbs by sending the infrared far off axis.
        sol = phase_match(BeamGeometry.collinear(), FwmConfig())
        theta_ir = math.atan2(sol.d_ir[0], sol.d_ir[2])
        assert abs(theta_ir) > 0.05  # tens of milliradians, not collinear

    def test_impossible_geometry_reports_best_residual(self):
        # A quartet whose wave-vector sum exceeds k_ir + k_bl (inverse
        # wavelengths still within the 1e-3 sum rule) cannot close.
        cfg = FwmConfig(lambda_bl=420.3e-9)
        with pytest.raises(PhaseMatchError, match="residual"):
            phase_match(BeamGeometry.collinear(), cfg)

    def test_geometry_guard(self):
        with pytest.raises(ValueError, match="20 mrad"):
            BeamGeometry.symmetric(0.025)


class TestScene:
    def test_collinear_scene_reduces_to_product(self, lg):
        cfg = FwmConfig().balanced()
        p1 = lg(0, 0, wavelength=LAMBDA_780)
        p2 = lg(0, 1, wavelength=LAMBDA_776)
        scene = fwm_scene(p1, p2, BeamGeometry.collinear(), cfg, z_out=0.0)
        direct = fwm_blue_field(p1, p2, cfg)
        assert np.allclose(scene.samples, direct.samples, rtol=1e-9, atol=1e-12)

    def test_six_mrad_passes_charge(self, lg):
        cfg = FwmConfig().balanced()
        p1 = lg(0, 0, wavelength=LAMBDA_780)
        p2 = lg(0, 1, wavelength=LAMBDA_776)
        blue = fwm_scene(p1, p2, BeamGeometry.symmetric(6e-3), cfg, z_out=0.0)
        reading, _ = tilted_lens_reading(blue, 0.2, math.radians(6.0))
        assert (reading.count, reading.sign) == (1, 1)
        assert dominant_charge(oam_spectrum(blue)) == 1

    def test_plane_pumps_make_plane_blue(self, lg):
        cfg = FwmConfig().balanced()
        p1 = lg(0, 0, wavelength=LAMBDA_780)
        p2 = lg(0, 0, wavelength=LAMBDA_776)
        blue = fwm_scene(p1, p2, BeamGeometry.symmetric(6e-3), cfg, z_out=0.0)
        inten = np.abs(blue.samples) ** 2
        g = blue.grid
        # carrier removed: beam peaks on its own axis
        iy, ix = np.unravel_index(np.argmax(inten), inten.shape)
        assert abs(ix - g.nx // 2) <= 1 and abs(iy - g.ny // 2) <= 1
        assert dominant_charge(oam_spectrum(blue)) == 0

    def test_multi_slice_is_deterministic_and_consistent(self, lg):
        cfg = FwmConfig().balanced()
        p1 = lg(0, 0, wavelength=LAMBDA_780)
        p2 = lg(0, 1, wavelength=LAMBDA_776)
        geom = BeamGeometry.symmetric(3e-3)
        a = fwm_scene(p1, p2, geom, cfg, z_out=0.0, slices=3,
                      interaction_length=0.01)
        b = fwm_scene(p1, p2, geom, cfg, z_out=0.0, slices=3,
                      interaction_length=0.01)
        assert np.array_equal(a.samples, b.samples)
        assert dominant_charge(oam_spectrum(a)) == 1
