import json

import pytest

from middev.cli import main

MODEL = {"case": "CaseI", "gamma1": -1.0, "gamma2": -1.0, "delta": 0.3, "n": 500}


@pytest.fixture
def config(tmp_path):
    p = tmp_path / "model.json"
    p.write_text(json.dumps(MODEL))
    return p


def _run(tmp_path, *argv):
    out = tmp_path / "out"
    return main([*argv, "--out", str(out)]), out


@pytest.mark.parametrize(
    "cmd, files",
    [
        ("simulate", ["trajectory.json"]),
        ("estimate", ["estimates.json"]),
        ("identities", ["identities.json"]),
        ("rates", ["rates.json"]),
    ],
)
def test_single_commands(tmp_path, config, cmd, files):
    code, out = _run(tmp_path, cmd, "--config", str(config), "--seed", "5")
    assert code == 0
    for f in files:
        assert (out / f).exists()
    manifest = json.loads((out / f"manifest-{cmd}.json").read_text())
    assert manifest["exit_code"] == 0 and manifest["seed"] == 5
    assert len(manifest["input_hash"]) == 64


def test_csv_outputs(tmp_path, config):
    code, out = _run(tmp_path, "simulate", "--config", str(config), "--format", "csv")
    assert code == 0 and (out / "trajectory.csv").read_text().startswith("k,V,eps,X\n")
    code, out = _run(tmp_path, "estimate", "--config", str(config), "--format", "csv")
    assert (out / "estimates.csv").read_text().startswith("seed,n,case,")
    code, out = _run(tmp_path, "identities", "--config", str(config), "--format", "csv")
    assert code == 0 and len((out / "identities.csv").read_text().splitlines()) == 11


def test_experiment_and_report(tmp_path, config):
    code, out = _run(tmp_path, "concentration", "--config", str(config), "--replicas", "20", "--threads", "2")
    assert code == 0
    assert {"concentration.json", "concentration.csv", "concentration.svg"} <= {p.name for p in out.iterdir()}
    code, out = _run(tmp_path, "report")
    assert code == 0 and "## concentration" in (out / "report.md").read_text()


def test_seed_and_n_override(tmp_path, config):
    code, out = _run(tmp_path, "simulate", "--config", str(config), "--n", "7", "--seed", "0x10")
    body = json.loads((out / "trajectory.json").read_text())
    assert code == 0 and body["n"] == 7 and len(body["X"]) == 8


def test_validate_params_exit_codes(tmp_path):
    good = tmp_path / "good.json"
    good.write_text(json.dumps({**MODEL, "delta": 0.1}))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**MODEL, "delta": 0.3, "scale": {"kind": "PowerLaw", "beta": 0.05}}))
    assert _run(tmp_path, "validate-params", "--config", str(good))[0] == 0
    assert _run(tmp_path, "validate-params", "--config", str(bad))[0] == 1


def test_error_exit_codes(tmp_path, config, monkeypatch):
    assert main(["bogus"]) == 64
    assert main(["simulate", "--seed", "-1"]) == 64
    assert _run(tmp_path, "simulate")[0] == 1
    assert _run(tmp_path, "simulate", "--config", str(tmp_path / "missing.json"))[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**MODEL, "gamma1": 1.0}))
    assert _run(tmp_path, "simulate", "--config", str(bad))[0] == 1
    assert main(["--version"]) == 0


def test_env_overrides_out(tmp_path, config, monkeypatch):
    target = tmp_path / "env"
    monkeypatch.setenv("MIDDEV_OUT", str(target))
    assert main(["simulate", "--config", str(config), "--out", str(tmp_path / "ignored")]) == 0
    assert (target / "trajectory.json").exists()
