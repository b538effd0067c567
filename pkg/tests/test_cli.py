"""Command-line interface: exit codes, artifacts and determinism."""

import json

import pytest

from flowlab import cli

SHORT = ["--override", "time_window=0,0.002", "--override", "resolution.grid=64"]


def test_list_scenarios(capsys):
    assert cli.main(["list-scenarios"]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "shrinking-sphere" in out and "bowl-harnack" in out


def test_run_writes_artifacts(tmp_path, capsys):
    out = tmp_path / "run"
    assert cli.main(["run", "shrinking-sphere", "--out", str(out)] + SHORT) == cli.EXIT_OK
    header = (out / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,r_num,r_exact,rel_err")
    assert (out / "final.snap").exists()
    assert "name: shrinking-sphere" in (out / "scenario.yaml").read_text()


def test_run_is_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert cli.main(["run", "shrinking-sphere", "--out", str(tmp_path / d)] + SHORT) == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == \
        (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_run_from_yaml_file(tmp_path):
    cfg = tmp_path / "sphere.yaml"
    cfg.write_text("name: my-sphere\nsurface: {kind: round-sphere, r0: 2.0}\n"
                   "time_window: [0.0, 0.001]\nresolution: {grid: 64, dt: 1.0e-4}\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_OK
    assert (tmp_path / "o" / "trajectory.csv").exists()


def test_bad_config_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("name: bad\nsurface: {kind: round-sphere, radius: 1.0}\n")
    assert cli.main(["run", str(cfg), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "surface.radius" in capsys.readouterr().err


def test_unknown_scenario_exits_2(tmp_path):
    assert cli.main(["run", "no-such", "--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_numerical_abort_exits_3(tmp_path, capsys):
    argv = ["run", "self-shrinker", "--out", str(tmp_path),
            "--override", "time_window=-1,-0.0001", "--override", "resolution.grid=32",
            "--override", "resolution.dt=1e-3"]
    assert cli.main(argv) == cli.EXIT_NUMERICAL
    assert "numerical abort" in capsys.readouterr().err


def test_verify_pass_exits_0(tmp_path, capsys):
    assert cli.main(["verify", "--only", "harnack-control", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert out.startswith("PASS  harnack-control")
    doc = json.loads((tmp_path / "results.json").read_text())
    assert doc["checks"][0]["verdict"] == "pass"
    assert (tmp_path / "report.md").exists()


def test_verify_failure_exits_1(tmp_path, capsys):
    argv = ["verify", "--only", "huisken-shrinker", "--out", str(tmp_path),
            "--override", "huisken.drift=1e-30"]
    assert cli.main(argv) == cli.EXIT_FAIL
    assert "failed: huisken-shrinker" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [["verify", "--only", "nope"],
                                  ["verify", "--only", "harnack-control",
                                   "--override", "no.such=1"]])
def test_verify_bad_arguments_exit_2(tmp_path, argv):
    assert cli.main(argv + ["--out", str(tmp_path)]) == cli.EXIT_CONFIG


def test_report_markdown_and_csv(tmp_path, capsys):
    assert cli.main(["verify", "--only", "harnack-control", "--out", str(tmp_path)]) == 0
    capsys.readouterr()
    res = str(tmp_path / "results.json")
    assert cli.main(["report", res]) == 0
    assert "| harnack-control |" in capsys.readouterr().out
    assert cli.main(["report", res, "--csv"]) == 0
    first = capsys.readouterr().out
    assert first.splitlines()[1].startswith("6,harnack-control,shrinking-sphere,")
    assert cli.main(["report", res, "--csv"]) == 0
    assert capsys.readouterr().out == first


def test_report_on_empty_file_exits_2(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("")
    assert cli.main(["report", str(p)]) == cli.EXIT_CONFIG
