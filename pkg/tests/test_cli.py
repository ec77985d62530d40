import csv
import json
import subprocess
import sys

import pytest

from fixedbell.cli import run


def read(path):
    return path.read_bytes()


def test_verify_fresh_thm1(tmp_path, capsys):
    out = tmp_path / "t1.json"
    assert run(["build-thm1", "--n", "3", "--out", str(out)]) == 0
    assert run(["verify", "--instance", str(out)]) == 0
    report = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert report["passed"] and report["diagonal_max"] == 0.0


def test_verify_detects_tampering(tmp_path):
    out = tmp_path / "t1.json"
    run(["build-thm1", "--n", "2", "--out", str(out)])
    data = json.loads(out.read_text())
    data["u1"]["imag"] = [-v for v in data["u1"]["imag"]]
    out.write_text(json.dumps(data))
    assert run(["verify", "--instance", str(out)]) == 1


def test_distance_between_thm2_artifacts(tmp_path, capsys):
    pu, pr = tmp_path / "pu.json", tmp_path / "pr.json"
    bundle = tmp_path / "t2.json"
    assert run(["build-thm2", "--n", "4", "--epsilon", "0.5", "--out", str(bundle),
                "--pu-out", str(pu), "--pr-out", str(pr)]) == 0
    capsys.readouterr()
    assert run(["distance", "--a", str(pu), "--b", str(pr)]) == 0
    assert float(capsys.readouterr().out) <= 0.5
    assert run(["distance", "--a", f"{bundle}#P_u", "--b", str(bundle)]) == 0
    assert run(["verify", "--instance", str(bundle)]) == 0
    assert json.loads(pu.read_text())["config"]["params"]["epsilon"] == 0.5


def test_usage_errors_exit_2(tmp_path):
    assert run(["build-thm1", "--n", "3", "--bogus"]) == 2
    assert run(["nonsense"]) == 2
    assert run([]) == 2
    assert run(["sample", "--dist", "x.json", "--count", "5"]) == 2  # --seed is mandatory


def test_module_errors_exit_1(tmp_path):
    assert run(["build-thm2", "--n", "5", "--epsilon", "0.5", "--out", str(tmp_path / "x.json")]) == 1
    assert run(["build-thm2", "--n", "4", "--epsilon", "3", "--out", str(tmp_path / "x.json")]) == 1
    assert run(["distance", "--a", str(tmp_path / "missing.json"), "--b", "x"]) == 1


def test_outputs_are_byte_identical(tmp_path):
    d = tmp_path

    def build():
        run(["build-thm1", "--n", "2", "--out", str(d / "t1.json")])
        run(["build-thm2", "--n", "9", "--epsilon", "1.0", "--out", str(d / "t2.json")])
        run(["sample", "--dist", str(d / "t1.json"), "--count", "500", "--seed", "4",
             "--out", str(d / "s.json"), "--samples-out", str(d / "s.csv")])
        run(["fit-classical", "--target", str(d / "t1.json"), "--k", "3", "--restarts", "3",
             "--seed", "2", "--out", str(d / "f.json")])
        run(["certify", "--target", str(d / "t1.json"), "--out", str(d / "c.json")])
        run(["curve", "--n", "4", "--epsilon", "0.5", "--budgets", "1", "3", "6", "--seed", "1",
             "--restarts", "2", "--out", str(d / "curve.csv"), "--figure", "none"])
        names = ("t1.json", "t2.json", "s.json", "s.csv", "f.json", "c.json", "curve.csv",
                 "curve.meta.json")
        return {name: read(d / name) for name in names}

    first = build()
    second = build()
    for name, data in first.items():
        assert data == second[name], name


def test_outputs_embed_config(tmp_path):
    run(["build-thm1", "--n", "1", "--out", str(tmp_path / "t1.json")])
    run(["sample", "--dist", str(tmp_path / "t1.json"), "--count", "10", "--seed", "7",
         "--out", str(tmp_path / "s.json")])
    cfg = json.loads((tmp_path / "s.json").read_text())["config"]
    assert cfg["command"] == "sample" and cfg["params"]["seed"] == 7
    assert "format_version" in cfg


def test_curve_csv_and_figure(tmp_path):
    out = tmp_path / "curve.csv"
    assert run(["curve", "--n", "4", "--epsilon", "0.5", "--budgets", "6", "1", "--seed", "0",
                "--restarts", "2", "--out", str(out)]) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["n", "k", "distance", "pass"]
    assert [r[1] for r in rows[1:]] == ["1", "6"] and rows[-1][3] == "1"
    assert (tmp_path / "curve.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    meta = json.loads((tmp_path / "curve.meta.json").read_text())
    assert meta["config"]["params"]["seed"] == 0


def test_figures_for_builders(tmp_path):
    assert run(["build-thm1", "--n", "2", "--out", str(tmp_path / "a.json"),
                "--figure", str(tmp_path / "a.png")]) == 0
    assert run(["build-thm2", "--n", "9", "--epsilon", "0.5", "--out", str(tmp_path / "b.json"),
                "--figure", str(tmp_path / "b.png")]) == 0
    assert (tmp_path / "a.png").stat().st_size > 0 and (tmp_path / "b.png").stat().st_size > 0


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("FIXEDBELL_OUTPUT_DIR", str(tmp_path))
    assert run(["build-thm1", "--n", "1"]) == 0
    assert (tmp_path / "thm1_n1.json").exists()


def test_certify_modes(tmp_path, capsys):
    run(["build-thm1", "--n", "1", "--out", str(tmp_path / "t.json")])
    capsys.readouterr()
    assert run(["certify", "--target", str(tmp_path / "t.json"), "--mode", "additive",
                "--tolerance", "0.01"]) == 0
    assert json.loads(capsys.readouterr().out)["components"] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fixedbell", "--bogus"], capture_output=True)
    assert proc.returncode == 2
