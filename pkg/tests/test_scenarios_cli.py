import json
from pathlib import Path

import pytest

from vortexmix.cli import main
from vortexmix.scenarios import (
    ScenarioError,
    load_scenario,
    report_without_meta,
    run_scenario,
)


@pytest.fixture()
def fig2_doc():
    return load_scenario("fig2")


class TestRunScenario:
    def test_fig2_passes(self, tmp_path):
        res = run_scenario("fig2", tmp_path)
        assert res.passed
        names = {e["name"]: e for e in res.report["expectations"]}
        assert names["dominant_charge"]["measured"] == 1
        assert names["stripe_count"]["measured"] == 1
        assert names["stripe_sign"]["measured"] == 1

    def test_fig5_cancel_passes(self, tmp_path):
        res = run_scenario("fig5-cancel", tmp_path)
        assert res.passed
        names = {e["name"]: e for e in res.report["expectations"]}
        assert names["dominant_charge"]["measured"] == 0
        assert names["stripe_count"]["measured"] == 0
        assert names["doughnut"]["measured"] is True

    def test_unresolvable_reference_fails_validation(self, tmp_path, fig2_doc):
        fig2_doc["fwm"]["pump1"] = "nonexistent"
        with pytest.raises(ScenarioError, match="unknown source"):
            run_scenario(fig2_doc, tmp_path)

    def test_unknown_element_named(self, tmp_path, fig2_doc):
        fig2_doc["sources"][0]["elements"] = [{"type": "prism"}]
        with pytest.raises(ScenarioError, match="prism"):
            run_scenario(fig2_doc, tmp_path)

    def test_images_are_summarized(self, tmp_path):
        res = run_scenario("fig2", tmp_path)
        images = res.report["results"]["images"]
        for art in res.artifacts:
            name = Path(art).name
            if name.endswith(".pgm"):
                assert name in images
                assert {"min", "max", "centroid_x_m", "centroid_y_m"} <= set(
                    images[name]
                )

    def test_determinism_modulo_meta(self, tmp_path):
        a = run_scenario("fig1e", tmp_path / "a")
        b = run_scenario("fig1e", tmp_path / "b")
        assert report_without_meta(a.report) == report_without_meta(b.report)
        for art in a.artifacts:
            name = Path(art).name
            if name.endswith("_report.json"):
                continue
            assert Path(art).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestFigures:
    @pytest.mark.parametrize(
        "name,key,value",
        [
            ("fig4a", "stripe_count", 3),
            ("fig4b", "stripe_count", 1),
            ("fig4b", "stripe_sign", -1),
            ("fig3", "stripe_count", 1),
        ],
    )
    def test_panel_expectations(self, tmp_path, name, key, value):
        res = run_scenario(name, tmp_path)
        assert res.passed
        names = {e["name"]: e for e in res.report["expectations"]}
        assert names[key]["measured"] == value

    def test_fig3_reports_phase_match(self, tmp_path):
        res = run_scenario("fig3", tmp_path)
        pm = res.report["results"]["phase_match"]
        assert pm["residual_over_k_bl"] <= 1e-9
        assert 0.0 < pm["blue_angle_mrad"] < 3.0


class TestCli:
    def test_simulate_exit_zero(self, tmp_path):
        assert main(["simulate", "fig2", "--out-dir", str(tmp_path)]) == 0

    def test_expectation_failure_exit_one(self, tmp_path, fig2_doc):
        fig2_doc["expect"]["dominant_charge"] = 4
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(fig2_doc))
        assert main(["simulate", str(bad), "--out-dir", str(tmp_path)]) == 1

    def test_parse_error_exit_two(self, tmp_path):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        assert main(["simulate", str(broken), "--out-dir", str(tmp_path)]) == 2

    def test_missing_file_exit_two(self, tmp_path):
        assert main(["simulate", str(tmp_path / "nope.json"),
                     "--out-dir", str(tmp_path)]) == 2

    def test_unknown_figure_lists_panels(self, tmp_path, capsys):
        code = main(["figure", "fig9", "--out-dir", str(tmp_path)])
        assert code == 2
        err = capsys.readouterr().err
        assert "fig4a" in err

    def test_figure_fig5_runs_both_panels(self, tmp_path):
        assert main(["figure", "fig5", "--out-dir", str(tmp_path)]) == 0
        assert (tmp_path / "fig5-cancel_report.json").exists()
        assert (tmp_path / "fig5-add_report.json").exists()

    def test_measure_round_trip(self, tmp_path, capsys):
        assert main(["simulate", "fig2", "--out-dir", str(tmp_path)]) == 0
        capsys.readouterr()  # drain the simulate verdict lines
        field_path = tmp_path / "fig2_blue.vtxf"
        assert main(["measure", str(field_path)]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["oam_spectrum"]["dominant"] == 1
        assert out["stripe_reading"]["count"] == 1

    def test_measure_rejects_garbage(self, tmp_path):
        junk = tmp_path / "junk.vtxf"
        junk.write_bytes(b"garbage")
        assert main(["measure", str(junk)]) == 2

    def test_selftest_subset_and_perturb(self, tmp_path, capsys):
        assert main(["selftest", "--only", "c4",
                     "--out-dir", str(tmp_path)]) == 0
        assert "PASS c4" in capsys.readouterr().out
        assert main(["selftest", "--only", "c4", "--perturb", "c4",
                     "--out-dir", str(tmp_path)]) == 1
        out = capsys.readouterr().out
        assert "FAIL c4" in out

    def test_selftest_unknown_criterion(self):
        assert main(["selftest", "--only", "c42"]) == 2

    def test_grid_override(self, tmp_path):
        code = main(["simulate", "fig1e", "--out-dir", str(tmp_path),
                     "--grid-override", "256,8.0"])
        assert code == 0
        report = json.loads((tmp_path / "fig1e_report.json").read_text())
        assert report["results"]["analyzed"] == "pump780"
