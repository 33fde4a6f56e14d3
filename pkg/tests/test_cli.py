import json

import numpy as np
import pytest

import fmanova as fm
from fmanova.cli import main


def _strip_metadata(report: dict) -> dict:
    return {k: v for k, v in report.items() if k != "metadata"}


@pytest.fixture
def flat_csv(tmp_path):
    """Two groups whose curves are identical within each group."""
    lines = ["group,subject,variable,time_index,value"]
    for g, level in (("a", 1.0), ("b", 2.0)):
        for s in ("s1", "s2", "s3"):
            for t in range(5):
                lines.append(f"{g},{s},0,{t},{level}")
    path = tmp_path / "flat.csv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def random_csv(tmp_path, rng):
    ds = fm.validation.as_dataset(
        [rng.standard_normal((6, 2, 7)), rng.standard_normal((8, 2, 7))]
    )
    path = tmp_path / "random.csv"
    fm.write_csv(ds, path)
    return path


class TestTestCommand:
    def test_degenerate_data_fails_to_reject(self, flat_csv, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(
            [
                "test",
                "--data",
                str(flat_csv),
                "--design",
                "one-way",
                "--B",
                "50",
                "--seed",
                "7",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        report = json.loads(out.read_text())
        assert report["results"]["statistic"] == 0.0
        assert report["results"]["reject"] is False
        assert report["manifest"]["command"] == "test"
        assert report["schema_version"] == "1"

    def test_reports_are_byte_identical_modulo_metadata(self, random_csv, tmp_path):
        paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
        for path in paths:
            args = [
                "test",
                "--data",
                str(random_csv),
                "--design",
                "tukey",
                "--B",
                "40",
                "--seed",
                "11",
                "--out",
                str(path),
            ]
            assert main(args) == 0
        a, b = (json.loads(p.read_text()) for p in paths)
        assert _strip_metadata(a) == _strip_metadata(b)
        assert "created_utc" in a["metadata"]

    def test_p_flag_mismatch_is_input_error(self, random_csv, capsys):
        code = main(
            [
                "test",
                "--data",
                str(random_csv),
                "--design",
                "one-way",
                "--p",
                "6",
                "--B",
                "20",
                "--seed",
                "1",
            ]
        )
        assert code == 2
        err = json.loads(capsys.readouterr().err)
        assert "does not match" in err["message"]

    def test_missing_file_is_input_error(self, tmp_path, capsys):
        code = main(
            [
                "test",
                "--data",
                str(tmp_path / "nope.csv"),
                "--design",
                "one-way",
                "--B",
                "20",
                "--seed",
                "1",
            ]
        )
        assert code == 2

    def test_malformed_csv_is_input_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("group,subject,variable,time_index,value\na,s1,0,0,oops\n")
        code = main(
            ["test", "--data", str(bad), "--design", "one-way", "--B", "20", "--seed", "1"]
        )
        assert code == 2

    def test_identity_design_with_pattern(self, random_csv, tmp_path, capsys):
        pattern = tmp_path / "c.csv"
        pattern.write_text("\n".join(",".join("0.0" for _ in range(7)) for _ in range(4)))
        code = main(
            [
                "test",
                "--data",
                str(random_csv),
                "--design",
                "identity",
                "--c",
                str(pattern),
                "--B",
                "30",
                "--seed",
                "3",
            ]
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["manifest"]["design"]["kind"] == "identity"


class TestMtestCommand:
    def test_single_block_design_reproduces_test_decision(self, random_csv, tmp_path):
        out_t = tmp_path / "t.json"
        out_m = tmp_path / "m.json"
        common = ["--data", str(random_csv), "--design", "one-way", "--B", "60", "--seed", "5"]
        assert main(["test", *common, "--out", str(out_t)]) == 0
        assert main(["mtest", *common, "--out", str(out_m)]) == 0
        t_report = json.loads(out_t.read_text())["results"]
        m_report = json.loads(out_m.read_text())["results"]
        assert len(m_report["blocks"]) == 1
        assert m_report["blocks"][0]["reject"] == t_report["reject"]
        assert m_report["blocks"][0]["statistic"] == t_report["statistic"]

    def test_tukey_blocks_reported(self, random_csv, capsys):
        code = main(
            [
                "mtest",
                "--data",
                str(random_csv),
                "--design",
                "tukey",
                "--B",
                "40",
                "--seed",
                "2",
            ]
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert [b["label"] for b in report["results"]["blocks"]] == ["1-2"]
        assert "beta" in report["results"]


class TestSimulateCommand:
    def _config(self, tmp_path):
        config = {
            "scenarios": [
                {
                    "model": "model1",
                    "rho": 0.1,
                    "h_vector": [1.5, 1.5, 1.5, 1.5],
                    "sample_sizes": [5, 5, 5, 5],
                    "n_points": 8,
                    "label": "smoke",
                }
            ],
            "study": {"design": "tukey"},
        }
        path = tmp_path / "study.json"
        path.write_text(json.dumps(config))
        return path

    def test_smoke_study_emits_csv_and_json(self, tmp_path):
        config = self._config(tmp_path)
        out = tmp_path / "report.csv"
        code = main(
            [
                "simulate",
                "--config",
                str(config),
                "--reps",
                "2",
                "--B",
                "20",
                "--seed",
                "9",
                "--threads",
                "1",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        text = out.read_text()
        assert "global_reject_rate" in text and "smoke" in text
        side = json.loads((tmp_path / "report.json").read_text())
        assert side["manifest"]["command"] == "simulate"
        assert side["results"]["scenarios"][0]["label"] == "smoke"

    def test_simulate_requires_out(self, tmp_path, capsys):
        config = self._config(tmp_path)
        code = main(
            ["simulate", "--config", str(config), "--reps", "1", "--B", "20", "--seed", "9"]
        )
        assert code == 2

    def test_bad_config_key_is_input_error(self, tmp_path, capsys):
        path = tmp_path / "study.json"
        path.write_text(json.dumps({"scenarios": [{"model": "model9"}]}))
        code = main(
            [
                "simulate",
                "--config",
                str(path),
                "--reps",
                "1",
                "--B",
                "20",
                "--seed",
                "1",
                "--out",
                str(tmp_path / "r.csv"),
            ]
        )
        assert code == 2


class TestSeedHandling:
    def test_seed_required_by_parser(self, flat_csv, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(["test", "--data", str(flat_csv), "--design", "one-way", "--B", "20"])
        assert excinfo.value.code == 2

    def test_negative_seed_rejected(self, flat_csv, capsys):
        code = main(
            [
                "test",
                "--data",
                str(flat_csv),
                "--design",
                "one-way",
                "--B",
                "20",
                "--seed",
                "-1",
            ]
        )
        assert code == 2
