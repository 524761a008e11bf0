import json
import subprocess
import sys

import pytest

from qcostnas.circuit_io import save
from qcostnas.circuits import build_ansatz
from qcostnas.cli import main


@pytest.fixture
def circuit_file(tmp_path):
    path = tmp_path / "c.txt"
    save(build_ansatz(4, 3, ["ry"], "cnot", "linear"), path)
    return path


def test_estimate(circuit_file, tmp_path, capsys):
    assert main(["estimate", "--circuit", str(circuit_file), "--params", "12", "--steps", "100"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["breakdown"]["N_eval"] == 24
    assert doc["breakdown"]["T_routing"] == 0.0
    out = tmp_path / "e.json"
    assert main(["--backend", "fake_grid16", "estimate", "--circuit", str(circuit_file), "--steps", "1", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["backend"] == "fake_grid16"


def test_transpile(circuit_file, capsys):
    assert main(["transpile", "--circuit", str(circuit_file), "--qasm"]) == 0
    assert capsys.readouterr().out.startswith("OPENQASM 2.0;")


def test_exit_codes(circuit_file, tmp_path, capsys):
    assert main(["estimate", "--circuit", str(circuit_file), "--steps", "1", "--backend", "nope"]) == 3
    bad = tmp_path / "bad.txt"
    bad.write_text("qubits 2\nfoo 0\n")
    assert main(["estimate", "--circuit", str(bad), "--steps", "1"]) == 4
    deep = tmp_path / "deep.txt"
    save(build_ansatz(7, 15, ["rx"], "cnot", "full"), deep)
    assert main(["estimate", "--circuit", str(deep), "--steps", "1"]) == 5
    assert main(["estimate", "--circuit", str(deep), "--steps", "1", "--on-saturation", "clamp"]) == 0
    with pytest.raises(SystemExit) as exc:
        main(["estimate"])
    assert exc.value.code == 2


def test_validate_and_calibrate(tmp_path, capsys):
    out = tmp_path / "v"
    assert main(["--seed", "1", "validate-scheduler", "--n-circuits", "5", "--max-depth", "80", "--out", str(out)]) == 0
    assert (out / "validation.csv").exists()
    assert json.loads((out / "summary.json").read_text())["all_bounded"]
    tp = tmp_path / "tp.json"
    assert main(["calibrate-classical", "--steps", "2", "--out", str(tp)]) == 0
    assert json.loads(tp.read_text())["Phi"] > 0
    assert main(["calibrate-classical", "--reference", "resnet"]) == 2


def test_search_ablate_export(tmp_path, monkeypatch, capsys):
    monkeypatch.delenv("QCOSTNAS_CACHE_DIR", raising=False)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"generations": 1, "population": 2, "samples_per_class": 20, "epochs": 1, "n_classes": 2}))
    out = tmp_path / "s"
    assert main(["search", "--config", str(cfg), "--out", str(out), "--seed", "2"]) == 0
    assert (out / "archive.json").exists() and (out / "generations.csv").exists()
    assert main(["ablate", "--archive", str(out / "archive.json"), "--out", str(tmp_path / "ab")]) == 0
    assert (tmp_path / "ab" / "ablation.csv").exists()
    assert main(["export", "--archive", str(out / "archive.json"), "--format", "svg", "--out", str(tmp_path / "ex")]) == 0
    assert main(["export", "--archive", str(out / "archive.json"), "--format", "png"]) == 2


def test_train_one(tmp_path, capsys):
    genome = {"mode": "fixed", "n_qubits": 2, "depth": 1, "rotations": ["ry"], "entangler": "cnot", "topology": "linear"}
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"samples_per_class": 20, "epochs": 1, "n_classes": 2}))
    assert main(["train-one", "--genome", json.dumps(genome), "--config", str(cfg)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert 0 <= doc["accuracy"] <= 1 and doc["n_steps"] == 1
    assert main(["train-one", "--genome", "{not json"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "qcostnas", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "validate-scheduler" in r.stdout
