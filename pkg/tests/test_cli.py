import json

import numpy as np
import pytest

from pseudodyn.cli import ConfigError, RunConfig, main


def read_csv_body(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# generated ")
    return "\n".join(lines[1:])


def test_calibrate_writes_record(tmp_path):
    out = tmp_path / "r"
    assert main(["calibrate", "--out", str(out)]) == 0
    payload = json.loads((out / "calibration.json").read_text())
    assert payload["calibration"]["lambda_im"] == pytest.approx(np.sqrt(2.0))
    assert payload["calibration"]["c2"] == 1.0


def test_verify_commands_pass(tmp_path):
    out = tmp_path / "r"
    assert main(["verify-first-order", "--out", str(out), "--modes", "8"]) == 0
    assert main(["verify-schrodinger", "--out", str(out), "--modes", "8"]) == 0
    report = json.loads((out / "first_order.json").read_text())
    assert report["verdict"] == "pass"
    assert report["max_q2"] < 1e-12


def test_semigroup_command(tmp_path):
    out = tmp_path / "r"
    assert main(["semigroup", "--out", str(out), "--modes", "8"]) == 0
    report = json.loads((out / "semigroup.json").read_text())
    assert report["verdict"] == "pass"
    assert report["params"]["t"] == 3.0


def test_invalid_config_rejected_without_report(tmp_path):
    out = tmp_path / "r"
    assert main(["verify-first-order", "--mass", "-2", "--out", str(out)]) == 2
    assert not out.exists()


def test_config_file_and_flag_override(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"modes": 8, "mass": 2.0, "seed": 7}))
    cfg = RunConfig.from_file(str(cfg_path))
    assert cfg.modes == 8 and cfg.mass == 2.0 and cfg.seed == 7

    out = tmp_path / "r"
    assert main(["verify-first-order", "--config", str(cfg_path),
                 "--mass", "0.5", "--out", str(out)]) == 0
    report = json.loads((out / "first_order.json").read_text())
    assert report["params"]["mass"] == 0.5          # flag wins
    assert report["params"]["num_modes"] == 8       # file value kept


def test_unknown_config_key_rejected(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"modez": 8}))
    with pytest.raises(ConfigError):
        RunConfig.from_file(str(cfg_path))


def test_malformed_json_diagnostics(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text("{ not json }")
    with pytest.raises(ConfigError, match=r":1:"):
        RunConfig.from_file(str(cfg_path))


def test_sweep_csv_deterministic(tmp_path):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "sweep_modes": [2, 4], "sweep_masses": [1.0], "sweep_times": [0.5, 1.0],
    }))
    out1 = tmp_path / "r1"
    out2 = tmp_path / "r2"
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out1),
                 "--seed", "42"]) == 0
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out2),
                 "--seed", "42"]) == 0
    assert read_csv_body(out1 / "sweep.csv") == read_csv_body(out2 / "sweep.csv")
    body = read_csv_body(out1 / "sweep.csv")
    assert body.splitlines()[0].startswith("identity,num_modes,")
    # 2 lattices x 2 times x 2 identities
    assert len(body.splitlines()) == 1 + 8


def test_sweep_exit_code_on_failure(tmp_path):
    out = tmp_path / "r"
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "sweep_modes": [4], "sweep_masses": [1.0], "sweep_times": [1.0],
        "tol_coeff": 1e-18,   # unreachable, forces a failing verdict
    }))
    assert main(["sweep", "--config", str(cfg_path), "--out", str(out)]) == 1
    payload = json.loads((out / "sweep.json").read_text())
    assert payload["verdict"] == "fail"


def test_v_spec_presets(tmp_path):
    out = tmp_path / "r"
    assert main(["verify-first-order", "--out", str(out), "--modes", "8",
                 "--v-spec", "zero"]) == 0
    assert main(["verify-first-order", "--out", str(out), "--modes", "8",
                 "--v-spec", "single:1"]) == 0
    assert main(["verify-first-order", "--out", str(out), "--modes", "8",
                 "--v-spec", "bogus"]) == 2
