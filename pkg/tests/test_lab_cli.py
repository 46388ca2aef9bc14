"""CLI verbs and the exit-code contract."""

from __future__ import annotations

import json

import pytest

from regmod.lab.cli import main


def invoke(capsys, args):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_scenario(tmp_path, doc, name="scenario.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


@pytest.fixture
def doubling_instance(tmp_path, capsys):
    code = main(
        [
            "generate",
            "--family",
            "grid-linear",
            "--seed",
            "7",
            "--out-dir",
            str(tmp_path),
            "--param",
            "points=5",
            "--param",
            "a=2",
        ]
    )
    assert code == 0
    return capsys.readouterr().out.strip()


class TestGenerateAndValidate:
    def test_round_trip(self, tmp_path, capsys, doubling_instance):
        code, out, err = invoke(capsys, ["validate", doubling_instance])
        assert code == 0
        assert out.startswith("ok ")
        assert "(setmap)" in out

    def test_corrupted_file_exits_two(self, tmp_path, capsys, doubling_instance):
        doc = json.loads(open(doubling_instance).read())
        doc["spaces"]["X"]["dist"][0][1] = 99
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        code, out, err = invoke(capsys, ["validate", str(bad)])
        assert code == 2
        assert "invalid" in out

    def test_unknown_family_exits_two(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["generate", "--family", "mystery", "--out-dir", str(tmp_path)])
        assert exc.value.code == 2

    def test_bad_param_shape_exits_two(self, tmp_path, capsys):
        code, out, err = invoke(
            capsys,
            ["generate", "--family", "random-metric", "--out-dir", str(tmp_path),
             "--param", "nothing"],
        )
        assert code == 2
        assert "KEY=VALUE" in err


class TestRun:
    def scenario(self, tmp_path, doubling_instance, audits):
        return write_scenario(
            tmp_path,
            {
                "name": "cli-run",
                "instance": {"file": doubling_instance.rsplit("/", 1)[-1]},
                "audits": audits,
            },
        )

    def test_json_summary_on_stdout(self, tmp_path, capsys, doubling_instance):
        path = self.scenario(tmp_path, doubling_instance, [{"audit": "link"}])
        code, out, err = invoke(capsys, ["run", str(path)])
        assert code == 0
        summary = json.loads(out)
        assert summary["audits"][0]["verdict"] == "pass"
        assert summary["audits"][0]["matched"] is True

    def test_csv_format(self, tmp_path, capsys, doubling_instance):
        path = self.scenario(tmp_path, doubling_instance, [{"audit": "lop"}])
        code, out, err = invoke(capsys, ["run", str(path), "--format", "csv"])
        assert code == 0
        header = out.splitlines()[0]
        assert header.startswith("index,id,audit")

    def test_reports_land_in_out_dir(self, tmp_path, capsys, doubling_instance):
        path = self.scenario(tmp_path, doubling_instance, [{"audit": "reg"}])
        out_dir = tmp_path / "reports"
        code, _, _ = invoke(capsys, ["run", str(path), "--out-dir", str(out_dir)])
        assert code == 0
        assert (out_dir / "report-00-00-reg.json").exists()
        assert (out_dir / "summary.csv").exists()
        assert (out_dir / "summary.json").exists()

    def test_unknown_audit_exits_two(self, tmp_path, capsys, doubling_instance):
        path = self.scenario(tmp_path, doubling_instance, [{"audit": "frobnicate"}])
        code, out, err = invoke(capsys, ["run", str(path)])
        assert code == 2
        assert "unknown audit" in err

    def test_unexpected_failure_exits_one(self, tmp_path, capsys):
        doc = {
            "name": "tangency",
            "instance": {"generator": {"family": "tangency-adversarial", "seed": 0}},
            "audits": [{"audit": "metric-inequality", "params": {"tau": "10"}}],
        }
        path = write_scenario(tmp_path, doc)
        code, out, err = invoke(capsys, ["run", str(path)])
        assert code == 1

    def test_expected_failure_exits_zero(self, tmp_path, capsys):
        doc = {
            "name": "tangency",
            "instance": {"generator": {"family": "tangency-adversarial", "seed": 0}},
            "audits": [
                {"audit": "metric-inequality", "params": {"tau": "10"}, "expect": "fail"}
            ],
        }
        path = write_scenario(tmp_path, doc)
        code, out, err = invoke(capsys, ["run", str(path)])
        assert code == 0

    def test_missing_scenario_file_exits_two(self, tmp_path, capsys):
        code, out, err = invoke(capsys, ["run", str(tmp_path / "absent.json")])
        assert code == 2


class TestSweep:
    def test_csv_on_stdout(self, tmp_path, capsys, doubling_instance):
        doc = {
            "name": "cli-sweep",
            "instance": {"file": doubling_instance.rsplit("/", 1)[-1]},
            "audits": [{"audit": "reg", "id": "reg"}],
        }
        path = write_scenario(tmp_path, doc)
        code, out, err = invoke(
            capsys,
            ["sweep", str(path), "--parameter", "r_dom", "--values", "9,3,1"],
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("parameter,value,reg.verdict")
        assert len(lines) == 4

    def test_json_format_lists_rows(self, tmp_path, capsys, doubling_instance):
        doc = {
            "name": "cli-sweep",
            "instance": {"file": doubling_instance.rsplit("/", 1)[-1]},
            "audits": [{"audit": "reg", "id": "reg"}],
        }
        path = write_scenario(tmp_path, doc)
        code, out, err = invoke(
            capsys,
            ["sweep", str(path), "--parameter", "r_dom", "--values", "9,1",
             "--format", "json"],
        )
        assert code == 0
        rows = json.loads(out)
        assert [r["value"] for r in rows] == ["9/1", "1/1"]

    def test_invalid_parameter_choice_exits_two(self, tmp_path, capsys, doubling_instance):
        doc = {
            "name": "cli-sweep",
            "instance": {"file": doubling_instance.rsplit("/", 1)[-1]},
            "audits": [{"audit": "reg"}],
        }
        path = write_scenario(tmp_path, doc)
        with pytest.raises(SystemExit) as exc:
            main(["sweep", str(path), "--parameter", "radius", "--values", "1"])
        assert exc.value.code == 2


class TestBudgetEnvironment:
    def test_env_cap_trips(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("REGMOD_BUDGET", "4")
        code, out, err = invoke(
            capsys,
            ["generate", "--family", "random-metric", "--seed", "1",
             "--out-dir", str(tmp_path), "--param", "n=9"],
        )
        assert code == 2
        assert "budget" in err

    def test_flag_beats_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("REGMOD_BUDGET", "4")
        code, out, err = invoke(
            capsys,
            ["generate", "--family", "random-metric", "--seed", "1",
             "--out-dir", str(tmp_path), "--param", "n=9",
             "--budget", "100000"],
        )
        assert code == 0

    def test_junk_env_exits_two(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("REGMOD_BUDGET", "lots")
        code, out, err = invoke(
            capsys,
            ["generate", "--family", "random-metric", "--out-dir", str(tmp_path)],
        )
        assert code == 2
        assert "REGMOD_BUDGET" in err
