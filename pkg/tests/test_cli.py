"""CLI subcommands exercised end to end on a micro bundle."""

import json

import pytest

from harvestplan.cli import main


@pytest.fixture(scope="module")
def micro_bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("clibundle")
    code = main(
        [
            "pipeline",
            "--out-dir",
            str(out),
            "--seed",
            "3",
            "--stands",
            "8",
            "--periods",
            "2",
            "--cohort-size",
            "15",
            "--scenario-seed",
            "6",
            "--ideals-over",
            "named",
            "--gap",
            "0",
        ]
    )
    assert code == 0
    return out


class TestSynth:
    def test_writes_instance(self, tmp_path):
        out = tmp_path / "inst.json"
        assert main(["synth", "--seed", "4", "--stands", "12", "--periods", "3", "--out", str(out)]) == 0
        assert out.exists()
        assert (tmp_path / "inst.stands.csv").exists()

    def test_scenarios_roundtrip(self, tmp_path):
        inst = tmp_path / "inst.json"
        main(["synth", "--seed", "4", "--stands", "6", "--periods", "2", "--out", str(inst)])
        code = main(
            ["scenarios", "--instance", str(inst), "--out-dir", str(tmp_path), "--size", "9", "--seed", "2"]
        )
        assert code == 0
        manifest = json.loads((tmp_path / "cohort.manifest.json").read_text())
        assert manifest["count"] == 9

    def test_missing_instance_is_validation_error(self, tmp_path):
        code = main(
            ["scenarios", "--instance", str(tmp_path / "none.json"), "--out-dir", str(tmp_path)]
        )
        assert code == 1


class TestPipelineCommand:
    def test_bundle_created(self, micro_bundle):
        for name in ("instance.json", "cohort.csv", "archive.json", "matrix.npy", "bundle.json"):
            assert (micro_bundle / name).exists()

    def test_report_human(self, micro_bundle, capsys):
        assert main(["report", "--bundle", str(micro_bundle)]) == 0
        out = capsys.readouterr().out
        assert "archive" in out and "cohort" in out

    def test_report_json(self, micro_bundle, capsys):
        assert main(["report", "--bundle", str(micro_bundle), "--json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["archive_size"] == 3 * 2 * 3 + 1
        assert payload["cohort_size"] == 15
        assert "ideal_summary" in payload

    def test_ideals_command(self, micro_bundle, tmp_path, capsys):
        code = main(
            [
                "ideals",
                "--instance",
                str(micro_bundle / "instance.json"),
                "--out-dir",
                str(tmp_path),
                "--over",
                "named",
                "--nadir",
                "--gap",
                "0",
            ]
        )
        assert code == 0
        assert (tmp_path / "ideals.csv").exists()
        assert "ideal range" in capsys.readouterr().out

    def test_stress_command(self, micro_bundle, tmp_path):
        code = main(
            [
                "stress",
                "--instance",
                str(micro_bundle / "instance.json"),
                "--archive",
                str(micro_bundle / "archive.json"),
                "--cohort-dir",
                str(micro_bundle),
                "--out-dir",
                str(tmp_path),
            ]
        )
        assert code == 0
        assert (tmp_path / "matrix.npy").exists()


class TestExportLp:
    def test_scalarized_export(self, micro_bundle, tmp_path):
        out = tmp_path / "model.lp"
        code = main(
            ["export-lp", "--instance", str(micro_bundle / "instance.json"), "--out", str(out)]
        )
        assert code == 0
        text = out.read_text()
        assert "Minimize" in text and "Binaries" in text

    def test_single_objective_export(self, micro_bundle, tmp_path):
        out = tmp_path / "single.lp"
        code = main(
            [
                "export-lp",
                "--instance",
                str(micro_bundle / "instance.json"),
                "--out",
                str(out),
                "--single",
                "1,1,2",
            ]
        )
        assert code == 0
        assert "dev_a1_t1_p2" in out.read_text()


class TestHelp:
    @pytest.mark.parametrize(
        "cmd",
        ["synth", "scenarios", "ideals", "generate", "stress", "pipeline", "report", "export-lp", "serve"],
    )
    def test_help_available(self, cmd, capsys):
        with pytest.raises(SystemExit) as exc:
            main([cmd, "--help"])
        assert exc.value.code == 0
        assert "usage" in capsys.readouterr().out
