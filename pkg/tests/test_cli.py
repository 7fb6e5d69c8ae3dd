import json
import math

import pytest

from fluidchain import cli
from fluidchain.errors import ConfigError

MINIMAL = {
    "model": {"kind": "saint_venant", "g": 9.81, "nu": 1.0},
    "m": 1.0,
    "L": 1.0,
    "initial": {"rho0": {"kind": "constant", "value": 1.0},
                "v0": {"kind": "sine", "amplitude": 0.1, "mode": 1}},
}


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return path


def test_parse_fills_defaults(tmp_path):
    cfg = cli.parse_config(write_config(tmp_path, MINIMAL))
    assert cfg.integrator.rel_tol == 1e-8
    assert cfg.integrator.abs_tol == 1e-10
    assert cfg.integrator.snapshot_dt == 0.01
    assert cfg.horizon == 1.0
    assert cfg.grid_size == 512
    assert cfg.n is None


def test_parse_rejects_small_n(tmp_path):
    payload = dict(MINIMAL, n=1)
    with pytest.raises(ConfigError) as err:
        cli.parse_config(write_config(tmp_path, payload))
    assert err.value.field == "n"


def test_parse_rejects_unknown_key(tmp_path):
    payload = json.loads(json.dumps(MINIMAL))
    payload["model"]["viscocity"] = 2.0
    with pytest.raises(ConfigError) as err:
        cli.parse_config(write_config(tmp_path, payload))
    assert err.value.field == "model.viscocity"


def test_parse_rejects_malformed_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        cli.parse_config(path)
    with pytest.raises(ConfigError):
        cli.parse_config(tmp_path / "missing.json")


def test_parse_rejects_bad_n_list(tmp_path):
    with pytest.raises(ConfigError):
        cli.parse_config(write_config(tmp_path, dict(MINIMAL, n_list=[8, 4])))
    with pytest.raises(ConfigError):
        cli.parse_config(write_config(tmp_path, dict(MINIMAL, n_list=[1, 2])))


def test_env_overrides_tolerances(tmp_path, monkeypatch):
    monkeypatch.setenv("FLUIDCHAIN_REL_TOL", "1e-6")
    monkeypatch.setenv("FLUIDCHAIN_ABS_TOL", "1e-9")
    cfg = cli.parse_config(write_config(tmp_path, MINIMAL))
    assert cfg.integrator.rel_tol == 1e-6
    assert cfg.integrator.abs_tol == 1e-9


def test_check_exit_codes(tmp_path, capsys):
    path = write_config(tmp_path, MINIMAL)
    assert cli.main(["check", "--config", str(path)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["admissible"] is True
    assert report["f_limit_high"] == "infinite"

    hot = json.loads(json.dumps(MINIMAL))
    hot["initial"]["v0"]["amplitude"] = 10.0
    path = write_config(tmp_path, hot, "hot.json")
    assert cli.main(["check", "--config", str(path)]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["admissible"] is False


def test_error_record_is_single_line_json(tmp_path, capsys):
    payload = dict(MINIMAL, n=1)
    path = write_config(tmp_path, payload)
    assert cli.main(["check", "--config", str(path)]) == 1
    err_lines = capsys.readouterr().err.strip().splitlines()
    assert len(err_lines) == 1
    record = json.loads(err_lines[0])
    assert record["error"] == "ConfigError"
    assert record["field"] == "n"


def _simulate_config(T=0.1, n=8):
    payload = json.loads(json.dumps(MINIMAL))
    payload["n"] = n
    payload["integrator"] = {"snapshot_dt": 0.05, "T": T}
    return payload


def test_simulate_writes_artifacts(tmp_path, capsys):
    path = write_config(tmp_path, _simulate_config())
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    for name in ("particles.csv", "fields.csv", "diagnostics.csv"):
        assert (out / name).is_file()
    header = (out / "diagnostics.csv").read_text().splitlines()[0]
    assert header == "t,E_n,W_n,Z_n,H_n,mass,min_spacing,max_spacing"
    rows = (out / "particles.csv").read_text().splitlines()
    assert rows[0] == "t,i,x_i,v_i,rho_i"
    # 3 snapshots (t = 0, 0.05, 0.1) x (n + 1) particle rows
    assert len(rows) == 1 + 3 * 9


def test_simulate_equilibrium_zero_energy_column(tmp_path, capsys):
    payload = _simulate_config(n=8)
    payload["initial"]["v0"] = {"kind": "zero"}
    path = write_config(tmp_path, payload)
    out = tmp_path / "out"
    assert cli.main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    lines = (out / "diagnostics.csv").read_text().splitlines()[1:]
    assert all(line.split(",")[1] == "0" for line in lines)


def test_artifacts_are_byte_reproducible(tmp_path, capsys):
    path = write_config(tmp_path, _simulate_config())
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["simulate", "--config", str(path), "--out", str(out1)]) == 0
    assert cli.main(["simulate", "--config", str(path), "--out", str(out2)]) == 0
    for name in ("particles.csv", "fields.csv", "diagnostics.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_csv_uses_17_significant_digits(tmp_path, capsys):
    path = write_config(tmp_path, _simulate_config())
    out = tmp_path / "out"
    cli.main(["simulate", "--config", str(path), "--out", str(out)])
    line = (out / "particles.csv").read_text().splitlines()[3]
    x_value = line.split(",")[2]
    assert float(x_value) == 0.75
    velocity = line.split(",")[3]
    assert len(velocity.replace("-", "").replace(".", "").lstrip("0")) >= 15


def test_validate_writes_reports(tmp_path, capsys):
    payload = _simulate_config(T=0.2, n=8)
    payload["integrator"] = {"snapshot_dt": 0.01, "T": 0.2}
    path = write_config(tmp_path, payload)
    out = tmp_path / "val"
    assert cli.main(["validate", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "residuals.csv").is_file()
    assert (out / "validate.txt").is_file()
    header = (out / "residuals.csv").read_text().splitlines()[0]
    assert header == "n,metric,value,error_estimate"


def test_validate_inadmissible_exits_2(tmp_path, capsys):
    payload = _simulate_config()
    payload["initial"]["v0"]["amplitude"] = 10.0
    path = write_config(tmp_path, payload)
    assert cli.main(["validate", "--config", str(path),
                     "--out", str(tmp_path / "v")]) == 2


def test_converge_with_n_override(tmp_path, capsys):
    payload = _simulate_config(T=0.1)
    del payload["n"]
    path = write_config(tmp_path, payload)
    out = tmp_path / "conv"
    assert cli.main(["converge", "--config", str(path), "--out", str(out),
                     "--n", "4,8"]) == 0
    table = (out / "convergence.csv").read_text().splitlines()
    assert table[0] == "n,metric,value,error_estimate"
    assert any(line.startswith("4,mass_error,") for line in table)
    assert (out / "convergence.txt").is_file()


def test_converge_requires_n_list(tmp_path, capsys):
    payload = _simulate_config()
    del payload["n"]
    path = write_config(tmp_path, payload)
    assert cli.main(["converge", "--config", str(path),
                     "--out", str(tmp_path / "c")]) == 1


def test_custom_model_config_roundtrip(tmp_path):
    payload = json.loads(json.dumps(MINIMAL))
    payload["model"] = {"kind": "custom",
                        "pressure": {"coeff": 4.905, "exponent": 2.0},
                        "viscosity": {"coeff": 1.0, "exponent": 1.0}}
    cfg = cli.parse_config(write_config(tmp_path, payload))
    assert cfg.model.pressure(2.0) == pytest.approx(19.62)
    assert math.isinf(cfg.model.energy_envelope_limits()[0])
