"""CLI tests: every subcommand produces its artifacts, config files merge
with flag overrides, outputs are deterministic, and failures exit nonzero."""

import json
import os

import pytest

from revext.cli import main, read_config_file


def run(args):
    return main(args)


def test_extend_logistic_json_and_svg(tmp_path):
    out = str(tmp_path / "ext")
    code = run(["extend", "--system", "logistic", "--lambda", "0.6",
                "--N", "4", "--depth", "10", "--density", "15",
                "--format", "svg", "-o", out])
    assert code == 0
    doc = json.loads((tmp_path / "ext.json").read_text())
    assert set(doc) == {"0", "1", "2", "3", "4", "inf"}
    assert doc["0"]["chains"]
    svg = (tmp_path / "ext.svg").read_text()
    assert svg.startswith("<svg") and "circle" in svg


def test_extend_constant_has_singleton_infinity(tmp_path):
    out = str(tmp_path / "const")
    assert run(["extend", "--system", "constant", "--N", "3",
                "--density", "10", "-o", out]) == 0
    doc = json.loads((tmp_path / "const.json").read_text())
    assert len(doc["inf"]["chains"]) == 1


def test_extend_rotation_ladder(tmp_path):
    out = str(tmp_path / "rot")
    assert run(["extend", "--system", "rotation", "--tau", "0.25",
                "--gamma0", "0.25", "--N", "6", "--format", "svg",
                "-o", out]) == 0
    doc = json.loads((tmp_path / "rot.json").read_text())
    assert doc["kind"] == "ArcLadder" and doc["space"] == "circle"
    assert (tmp_path / "rot.svg").exists()


def test_bifurcate_csv(tmp_path):
    out = str(tmp_path / "bif")
    assert run(["bifurcate", "--n-max", "2", "-o", out]) == 0
    rows = (tmp_path / "bif.csv").read_text().splitlines()
    assert rows[0] == "name,n,value,residual"
    assert any(r.startswith("lambda_n,2,0.862372435") for r in rows)


def test_bifurcate_svg_sweep(tmp_path, monkeypatch):
    monkeypatch.setenv("REVEXT_THREADS", "2")
    out = str(tmp_path / "bif")
    assert run(["bifurcate", "--n-max", "2", "--steps", "60",
                "--format", "svg", "-o", out]) == 0
    assert (tmp_path / "bif.svg").stat().st_size > 1000


def test_classify(tmp_path):
    out = str(tmp_path / "cls")
    assert run(["classify", "--lambda", "0.8", "-o", out]) == 0
    doc = json.loads((tmp_path / "cls.json").read_text())
    assert doc["tag"] == "CascadeStage" and doc["n"] == 1


def test_continuum_graph_dot_and_json(tmp_path):
    out = str(tmp_path / "mu")
    assert run(["continuum-graph", "--regime", "mu", "--n", "1",
                "--format", "dot", "-o", out]) == 0
    dot = (tmp_path / "mu.dot").read_text()
    assert dot.count("BJK") == 2 and '"R"' in dot
    assert run(["continuum-graph", "--regime", "cascade", "--n", "2",
                "-o", out]) == 0
    doc = json.loads((tmp_path / "mu.json").read_text())
    assert len(doc["nodes"]) == 5


def test_rotation_command(tmp_path):
    out = str(tmp_path / "rot")
    assert run(["rotation", "--tau", "0.4", "-o", out]) == 0
    doc = json.loads((tmp_path / "rot.json").read_text())
    assert doc["kind"] == "RationalPeriodic"
    assert abs(doc["rotation_number"] - 0.4) < 1e-4


def test_operator_check_all_models(tmp_path):
    for system in ("constant", "rotation", "period3"):
        out = str(tmp_path / system)
        assert run(["operator-check", "--system", system, "-o", out]) == 0
        doc = json.loads((tmp_path / f"{system}.json").read_text())
        assert all(entry["pass"] for entry in doc.values())


def test_config_file_with_cli_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("lam = 0.8\nN = 2\ndensity = 8  # sparse\n\n")
    parsed = read_config_file(str(cfg))
    assert parsed == {"lam": "0.8", "N": "2", "density": "8"}
    out = str(tmp_path / "over")
    assert run(["extend", "--config", str(cfg), "--N", "1", "-o", out]) == 0
    doc = json.loads((tmp_path / "over.json").read_text())
    assert set(doc) == {"0", "1", "inf"}  # CLI --N beat the config N=2


def test_bad_config_line_fails(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("not a key value pair\n")
    assert run(["extend", "--config", str(cfg),
                "-o", str(tmp_path / "x")]) == 1


def test_invalid_lambda_fails():
    assert run(["classify", "--lambda", "1.5", "-o", "/tmp/nope"]) == 1


def test_deterministic_output(tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for out in (a, b):
        assert run(["extend", "--system", "logistic", "--lambda", "0.6",
                    "--N", "3", "--density", "12", "-o", out]) == 0
    assert (tmp_path / "a.json").read_bytes() == \
        (tmp_path / "b.json").read_bytes()
