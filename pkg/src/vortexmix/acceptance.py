"""Self-verification suite: one function per acceptance criterion.

Each criterion returns a :class:`CriterionResult` with a pass flag, runtime
and per-check details. ``run_selftest`` executes them in order; the CLI
``selftest`` command prints one line per criterion and exits nonzero when
any fails. The ``perturb`` hook tightens one tolerance to an impossible
value so the failure-reporting path itself can be exercised.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from .diagnostics import (
    SphericalReference,
    TiltedPlaneReference,
    count_spiral_arms,
    dominant_charge,
    fork_fringe_surplus,
    interferogram,
    oam_spectrum,
    tilted_lens_reading,
)
from .elements import StaircaseMask, apply
from .field import GridSpec, ScalarField, load_field, overlap, power, save_field
from .fwm import BeamGeometry, FwmConfig, fwm_blue_field, fwm_scene, phase_match
from .imageio import to_gray
from .modes import LgParams, gaussian, lg_mode
from .propagation import propagate
from .scenarios import report_without_meta, run_scenario

DEFAULT_GRID = GridSpec(512, 512, 4e-6, 4e-6)
LAMBDA_780 = 780e-9
LAMBDA_776 = 776e-9
WAIST = 100e-6
LENS_F = 0.2
LENS_TILT = math.radians(6.0)


@dataclass
class CriterionResult:
    cid: str
    title: str
    passed: bool
    runtime_s: float
    details: list[str] = dc_field(default_factory=list)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict} {self.cid} {self.title} ({self.runtime_s:.2f}s)"


class _Checker:
    def __init__(self):
        self.details: list[str] = []
        self.ok = True

    def check(self, condition: bool, message: str) -> None:
        self.ok &= bool(condition)
        self.details.append(("ok: " if condition else "FAIL: ") + message)


def criterion_1(perturb: bool = False) -> CriterionResult:
    """Stripe-count law: tilted-lens reading of LG(0, l) for l in -3..3."""
    t0 = time.time()
    c = _Checker()
    budget = 1e-12 if perturb else 10.0
    for l in range(-3, 4):
        t_one = time.time()
        beam = lg_mode(DEFAULT_GRID, LAMBDA_780, LgParams(0, l, WAIST))
        reading, _ = tilted_lens_reading(beam, LENS_F, LENS_TILT)
        dt = time.time() - t_one
        c.check(
            reading.count == abs(l) and reading.sign == int(np.sign(l)),
            f"l={l:+d}: count={reading.count} sign={reading.sign} "
            f"contrast={reading.contrast:.3f}",
        )
        c.check(dt <= budget, f"l={l:+d}: runtime {dt:.2f}s within {budget}s")
    return CriterionResult(
        "c1", "stripe-count law for l in -3..+3", c.ok, time.time() - t0, c.details
    )


def criterion_2(perturb: bool = False) -> CriterionResult:
    """Charge addition: dominant blue charge equals l780 + l776 for all pairs."""
    t0 = time.time()
    c = _Checker()
    need = 0.999999 if perturb else 0.99
    cfg = FwmConfig()
    for l1 in range(-2, 3):
        p1 = lg_mode(DEFAULT_GRID, LAMBDA_780, LgParams(0, l1, WAIST))
        for l2 in range(-2, 3):
            p2 = lg_mode(DEFAULT_GRID, LAMBDA_776, LgParams(0, l2, WAIST))
            blue = fwm_blue_field(p1, p2, cfg)
            spec = oam_spectrum(blue)
            dom = dominant_charge(spec)
            w = spec.weight(l1 + l2)
            c.check(
                dom == l1 + l2 and w >= need,
                f"({l1:+d},{l2:+d}) -> dominant {dom:+d}, weight {w:.5f}",
            )
    return CriterionResult(
        "c2", "charge addition over (-2..2)^2 pump pairs", c.ok, time.time() - t0,
        c.details,
    )


def criterion_3(perturb: bool = False) -> CriterionResult:
    """Opposite charges cancel into a doughnut with no stripes."""
    t0 = time.time()
    c = _Checker()
    on_axis_max = 0.0 if perturb else 1e-9
    p1 = lg_mode(DEFAULT_GRID, LAMBDA_780, LgParams(0, +1, WAIST))
    p2 = lg_mode(DEFAULT_GRID, LAMBDA_776, LgParams(0, -1, WAIST))
    blue = fwm_blue_field(p1, p2, FwmConfig())
    inten = np.abs(blue.samples) ** 2
    frac = float(inten[DEFAULT_GRID.ny // 2, DEFAULT_GRID.nx // 2] / inten.max())
    c.check(frac <= on_axis_max, f"on-axis intensity fraction {frac:.2e}")
    spec = oam_spectrum(blue)
    c.check(spec.weight(0) >= 0.999, f"weight at l=0 is {spec.weight(0):.5f}")
    reading, _ = tilted_lens_reading(blue, LENS_F, LENS_TILT)
    c.check(reading.count == 0, f"stripe count {reading.count}")
    return CriterionResult(
        "c3", "pseudo-vortex: doughnut without topological charge", c.ok,
        time.time() - t0, c.details,
    )


def criterion_4(perturb: bool = False) -> CriterionResult:
    """Staircase-mask first-order purity and power transmittance."""
    t0 = time.time()
    c = _Checker()
    tol = 1e-12 if perturb else 0.005
    target = (math.sin(math.pi / 8) / (math.pi / 8)) ** 2
    beam = gaussian(DEFAULT_GRID, LAMBDA_780, WAIST)
    masked = apply(StaircaseMask(charge=1), beam)
    w = oam_spectrum(masked).weight(1)
    c.check(abs(w - target) <= tol, f"weight(+1) {w:.5f} vs {target:.5f} +/- {tol}")
    ratio = power(masked) / power(beam)
    c.check(abs(ratio - 0.95) <= 1e-6, f"transmitted power ratio {ratio:.9f}")
    return CriterionResult(
        "c4", "staircase-mask spectral purity and transmittance", c.ok,
        time.time() - t0, c.details,
    )


def criterion_5(perturb: bool = False) -> CriterionResult:
    """Free-space propagation: width law, power conservation, semigroup."""
    t0 = time.time()
    c = _Checker()
    width_tol = 1e-15 if perturb else 0.005
    beam = gaussian(DEFAULT_GRID, LAMBDA_780, WAIST)
    zr = math.pi * WAIST**2 / LAMBDA_780
    for frac in (0.5, 1.0, 2.0):
        out = propagate(beam, frac * zr)
        inten = np.abs(out.samples) ** 2
        x = DEFAULT_GRID.x_coords()
        var = float((inten.sum(axis=0) * x * x).sum() / inten.sum())
        w_meas = 2.0 * math.sqrt(var)
        w_true = WAIST * math.sqrt(1.0 + frac * frac)
        c.check(
            abs(w_meas - w_true) / w_true <= width_tol,
            f"z={frac}zR width {w_meas * 1e6:.2f}um vs {w_true * 1e6:.2f}um",
        )
        c.check(
            abs(power(out) - power(beam)) <= 1e-12 * power(beam),
            f"z={frac}zR power conserved to {abs(power(out) - power(beam)):.2e}",
        )
    two_hop = propagate(propagate(beam, 0.4 * zr), 0.6 * zr)
    one_hop = propagate(beam, zr)
    err = math.sqrt(
        power(two_hop.with_samples(two_hop.samples - one_hop.samples))
    ) / math.sqrt(power(one_hop))
    c.check(err <= 1e-10, f"semigroup relative field error {err:.2e}")
    return CriterionResult(
        "c5", "free-space width law, power conservation, semigroup", c.ok,
        time.time() - t0, c.details,
    )


def criterion_6(perturb: bool = False) -> CriterionResult:
    """Wave-vector closure at 0, 6, 14 mrad and charge survival at 6 mrad."""
    t0 = time.time()
    c = _Checker()
    bound = 0.0 if perturb else 1e-9
    cfg = FwmConfig().balanced()
    k_bl = 2.0 * math.pi / cfg.lambda_bl

    sol0 = phase_match(BeamGeometry.collinear(), cfg)
    c.check(
        sol0.residual <= 1e-12 * k_bl,
        f"collinear residual {sol0.residual:.2e} rad/m",
    )
    c.check(
        float(np.dot(sol0.d_bl, np.array([0.0, 0.0, 1.0]))) >= 1.0 - 1e-12
        and float(np.dot(sol0.d_ir, np.array([0.0, 0.0, 1.0]))) >= 1.0 - 1e-12,
        "collinear directions coincide with the pumps",
    )
    for alpha in (6e-3, 14e-3):
        geom = BeamGeometry.symmetric(alpha)
        sol = phase_match(geom, cfg)
        c.check(sol.residual <= bound * k_bl, f"alpha={alpha * 1e3:.0f}mrad residual "
                f"{sol.residual:.2e} <= {bound:.1e}*k_bl")
        th1 = math.atan2(geom.d1[0], geom.d1[2])
        th2 = math.atan2(geom.d2[0], geom.d2[2])
        thb = math.atan2(sol.d_bl[0], sol.d_bl[2])
        c.check(
            min(th1, th2) < thb < max(th1, th2),
            f"alpha={alpha * 1e3:.0f}mrad blue angle {thb * 1e3:.3f}mrad strictly "
            f"inside ({th1 * 1e3:.1f}, {th2 * 1e3:.1f})",
        )
    p1 = lg_mode(DEFAULT_GRID, LAMBDA_780, LgParams(0, 0, WAIST))
    p2 = lg_mode(DEFAULT_GRID, LAMBDA_776, LgParams(0, +1, WAIST))
    blue = fwm_scene(p1, p2, BeamGeometry.symmetric(6e-3), cfg, z_out=0.0)
    reading, _ = tilted_lens_reading(blue, LENS_F, LENS_TILT)
    c.check(
        reading.count == 1 and reading.sign == 1,
        f"6 mrad scene stripe reading ({reading.count}, {reading.sign:+d})",
    )
    return CriterionResult(
        "c6", "non-collinear wave-vector closure and charge survival", c.ok,
        time.time() - t0, c.details,
    )


def criterion_7(perturb: bool = False) -> CriterionResult:
    """Mode orthonormality: Gram matrix on a 1024^2 grid, extent 8 waists."""
    t0 = time.time()
    c = _Checker()
    off_tol = 0.0 if perturb else 1e-6
    w0 = 256e-6
    grid = GridSpec(1024, 1024, 8.0 * w0 / 1024, 8.0 * w0 / 1024)
    modes = [
        lg_mode(grid, LAMBDA_780, LgParams(p, l, w0))
        for p in (0, 1)
        for l in range(-2, 3)
    ]
    stack = np.stack([m.samples.ravel() for m in modes])
    gram = (np.conj(stack) @ stack.T) * grid.pixel_area
    worst_off = float(np.abs(gram - np.diag(np.diag(gram))).max())
    worst_diag = float(np.abs(np.diag(gram) - 1.0).max())
    c.check(worst_off <= off_tol, f"max off-diagonal overlap {worst_off:.2e}")
    c.check(worst_diag <= 1e-6, f"max diagonal deviation {worst_diag:.2e}")
    dt = time.time() - t0
    c.check(dt <= 60.0, f"runtime {dt:.1f}s within 60s")
    return CriterionResult(
        "c7", "Laguerre-Gaussian orthonormality (10-mode Gram matrix)", c.ok,
        time.time() - t0, c.details,
    )


def criterion_8(perturb: bool = False) -> CriterionResult:
    """Interferogram arm and fork-fringe counts for l in 1..3."""
    t0 = time.time()
    c = _Checker()
    for l in (1, 2, 3):
        beam = lg_mode(DEFAULT_GRID, LAMBDA_780, LgParams(0, l, WAIST))
        arms = count_spiral_arms(interferogram(beam, SphericalReference(0.05)))
        want = l + 1 if perturb else l
        c.check(arms == want, f"l={l}: spiral arms {arms}")
        surplus = fork_fringe_surplus(
            interferogram(beam, TiltedPlaneReference(math.radians(1.0)))
        )
        c.check(abs(surplus) == l, f"l={l}: fork fringe surplus {surplus:+d}")
    return CriterionResult(
        "c8", "interferogram spiral arms and fork fringes", c.ok,
        time.time() - t0, c.details,
    )


def criterion_9(perturb: bool = False, out_dir: str | None = None) -> CriterionResult:
    """Determinism and I/O: VTXF round trip, repeatable runs, exit codes."""
    t0 = time.time()
    c = _Checker()
    base = Path(out_dir) if out_dir else Path(tempfile.mkdtemp(prefix="vortexmix-c9-"))
    base.mkdir(parents=True, exist_ok=True)

    beam = lg_mode(DEFAULT_GRID, LAMBDA_780, LgParams(1, -2, WAIST, z=0.01))
    path = base / "roundtrip.vtxf"
    save_field(beam, path)
    again = load_field(path)
    c.check(
        again.samples.tobytes() == beam.samples.tobytes()
        and again.grid == beam.grid
        and again.wavelength == beam.wavelength,
        "VTXF round trip is bit-exact",
    )

    run_a = run_scenario("fig2", base / "runA")
    run_b = run_scenario("fig2", base / "runB")
    same = True
    for art in run_a.artifacts:
        name = Path(art).name
        other = base / "runB" / name
        if name.endswith("_report.json"):
            ra = report_without_meta(json.loads(Path(art).read_text()))
            rb = report_without_meta(json.loads(other.read_text()))
            same &= ra == rb
        else:
            same &= Path(art).read_bytes() == other.read_bytes()
    c.check(same, "repeated fig2 runs byte-identical (reports modulo meta)")
    c.check(run_a.passed, "fig2 expectations pass")

    from .cli import main as cli_main

    code_ok = cli_main(["simulate", "fig2", "--out-dir", str(base / "cli_ok")])
    c.check(code_ok == 0, f"exit code {code_ok} for a passing scenario")
    # Failing expectation: same scenario with a wrong declared charge.
    import importlib.resources as res

    doc = json.loads(res.files("vortexmix").joinpath("scenarios/fig2.json").read_text())
    doc["expect"]["dominant_charge"] = 5 if not perturb else 1
    fail_path = base / "fig2_bad.json"
    fail_path.write_text(json.dumps(doc))
    code_fail = cli_main(["simulate", str(fail_path), "--out-dir", str(base / "cli_fail")])
    c.check(code_fail == 1, f"exit code {code_fail} for a failing expectation")
    code_parse = cli_main(["simulate", str(base / "missing.json"), "--out-dir", str(base)])
    c.check(code_parse == 2, f"exit code {code_parse} for an unreadable scenario")
    return CriterionResult(
        "c9", "determinism, VTXF round trip, exit-code contract", c.ok,
        time.time() - t0, c.details,
    )


CRITERIA = {
    "c1": criterion_1,
    "c2": criterion_2,
    "c3": criterion_3,
    "c4": criterion_4,
    "c5": criterion_5,
    "c6": criterion_6,
    "c7": criterion_7,
    "c8": criterion_8,
    "c9": criterion_9,
}


def run_selftest(
    only: list[str] | None = None,
    perturb: str | None = None,
    out_dir: str | None = None,
) -> list[CriterionResult]:
    """Run the acceptance criteria (all by default) and return their results."""
    chosen = list(CRITERIA) if not only else [c for c in CRITERIA if c in set(only)]
    if only:
        unknown = set(only) - set(CRITERIA)
        if unknown:
            raise ValueError(f"unknown criteria: {sorted(unknown)}")
    results = []
    for cid in chosen:
        fn = CRITERIA[cid]
        kwargs = {"perturb": cid == perturb}
        if cid == "c9":
            kwargs["out_dir"] = out_dir
        t0 = time.time()
        try:
            results.append(fn(**kwargs))
        except Exception as exc:  # a criterion must never abort the others
            results.append(
                CriterionResult(
                    cid, fn.__doc__.splitlines()[0] if fn.__doc__ else cid,
                    False, time.time() - t0, [f"FAIL: raised {exc!r}"],
                )
            )
    return results
