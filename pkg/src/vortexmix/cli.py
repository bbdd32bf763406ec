"""Command-line front end.

Subcommands: ``simulate`` runs a scenario file or canned name, ``figure``
runs the canned configuration(s) behind a demonstration panel, ``measure``
analyzes a stored VTXF field, and ``selftest`` executes the acceptance
criteria. Exit codes: 0 success, 1 expectation or criterion failure,
2 usage/parse/validation error, 3 numerical (sampling) error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from .diagnostics import dominant_charge, oam_spectrum, tilted_lens_reading
from .field import VtxfFormatError, load_field, power
from .propagation import SamplingError
from .scenarios import CANNED, FIGURE_PANELS, ScenarioError, run_scenario, write_report

EXIT_OK = 0
EXIT_EXPECTATION = 1
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def _parse_grid_override(text: str | None) -> tuple[int, float] | None:
    if text is None:
        return None
    parts = text.split(",")
    try:
        n = int(parts[0])
        pitch = float(parts[1]) * 1e-6 if len(parts) > 1 else 0.0
    except (ValueError, IndexError):
        raise ScenarioError(
            f"bad --grid-override {text!r}; expected NX or NX,DX_UM"
        )
    return n, pitch


def _print_verdicts(report: dict) -> None:
    for e in report["expectations"]:
        mark = "PASS" if e["pass"] else "FAIL"
        print(f"  {mark} {e['name']}: expected {e['expected']}, measured {e['measured']}")


def _cmd_simulate(args) -> int:
    override = _parse_grid_override(args.grid_override)
    names = list(args.scenario)
    results = []

    def one(name: str):
        return run_scenario(name, args.out_dir, grid_override=override, png=args.png)

    if args.parallel and len(names) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=min(4, len(names))) as pool:
            results = list(pool.map(one, names))
    else:
        results = [one(n) for n in names]
    all_pass = True
    for res in results:
        print(f"scenario {res.report['scenario']}:")
        _print_verdicts(res.report)
        all_pass &= res.passed
    if args.report and results:
        combined = {"runs": [r.report for r in results]}
        write_report(combined, args.report)
    return EXIT_OK if all_pass else EXIT_EXPECTATION


def _cmd_figure(args) -> int:
    if args.list or args.name is None:
        print("available panels: " + ", ".join(sorted(FIGURE_PANELS)))
        return EXIT_OK if args.list else EXIT_USAGE
    if args.name not in FIGURE_PANELS:
        print(
            f"unknown figure {args.name!r}; available: "
            + ", ".join(sorted(FIGURE_PANELS)),
            file=sys.stderr,
        )
        return EXIT_USAGE
    args.scenario = list(FIGURE_PANELS[args.name])
    return _cmd_simulate(args)


def _cmd_measure(args) -> int:
    try:
        beam = load_field(args.field)
    except (OSError, VtxfFormatError) as exc:
        print(f"cannot load field: {exc}", file=sys.stderr)
        return EXIT_USAGE
    spec = oam_spectrum(beam)
    reading, _ = tilted_lens_reading(
        beam, f=args.f_m, tilt=math.radians(args.tilt_deg)
    )
    report = {
        "field": str(args.field),
        "wavelength_m": beam.wavelength,
        "power": power(beam),
        "oam_spectrum": {
            "l_min": spec.l_min,
            "l_max": spec.l_max,
            "weights": [float(w) for w in spec.weights],
            "dominant": dominant_charge(spec),
        },
        "stripe_reading": {
            "count": reading.count,
            "sign": reading.sign,
            "contrast": reading.contrast,
            "plane_z_m": reading.plane_z,
            "inconclusive": reading.inconclusive,
        },
    }
    text = json.dumps(report, indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    from .acceptance import run_selftest

    only = args.only.split(",") if args.only else None
    try:
        results = run_selftest(only=only, perturb=args.perturb, out_dir=args.out_dir)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    for res in results:
        print(res.line())
        if args.verbose or not res.passed:
            for d in res.details:
                print("    " + d)
    return EXIT_OK if all(r.passed for r in results) else EXIT_EXPECTATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vortexmix",
        description="Vortex-beam wave-optics simulator and charge diagnostics",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run scenario files or canned names")
    p_sim.add_argument("scenario", nargs="+",
                       help=f"scenario path or canned name ({', '.join(CANNED)})")
    p_sim.add_argument("--out-dir", default="out", help="artifact directory")
    p_sim.add_argument("--report", default=None, help="combined report path")
    p_sim.add_argument("--grid-override", default=None, metavar="NX[,DX_UM]",
                       help="override the scenario grid")
    p_sim.add_argument("--png", action="store_true", help="also write PNG images")
    p_sim.add_argument("--parallel", action="store_true",
                       help="run independent scenarios concurrently")
    p_sim.set_defaults(func=_cmd_simulate)

    p_fig = sub.add_parser("figure", help="run the canned panel configurations")
    p_fig.add_argument("name", nargs="?", default=None,
                       help="panel name, e.g. fig2 or fig5")
    p_fig.add_argument("--list", action="store_true", help="list panels")
    p_fig.add_argument("--out-dir", default="out")
    p_fig.add_argument("--report", default=None)
    p_fig.add_argument("--grid-override", default=None, metavar="NX[,DX_UM]")
    p_fig.add_argument("--png", action="store_true")
    p_fig.add_argument("--parallel", action="store_true")
    p_fig.set_defaults(func=_cmd_figure)

    p_meas = sub.add_parser("measure", help="diagnose a stored VTXF field")
    p_meas.add_argument("field", help="path to a .vtxf file")
    p_meas.add_argument("--f-m", type=float, default=0.2,
                        help="tilted-lens focal length in meters")
    p_meas.add_argument("--tilt-deg", type=float, default=6.0,
                        help="lens tilt in degrees")
    p_meas.add_argument("--report", default=None, help="write JSON here instead of stdout")
    p_meas.set_defaults(func=_cmd_measure)

    p_self = sub.add_parser("selftest", help="run the acceptance criteria")
    p_self.add_argument("--only", default=None,
                        help="comma-separated criterion ids, e.g. c1,c4")
    p_self.add_argument("--perturb", default=None, metavar="CID",
                        help="tighten one criterion to force a failure (test hook)")
    p_self.add_argument("--out-dir", default=None,
                        help="working directory for the I/O criterion")
    p_self.add_argument("--verbose", action="store_true",
                        help="print per-check details for passing criteria too")
    p_self.set_defaults(func=_cmd_selftest)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SamplingError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
