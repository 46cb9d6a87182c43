import json
import subprocess
import sys

import numpy as np
import pytest

from opdyn import ConfigError, ParameterError, Trajectory
from opdyn import config as cfg
from opdyn.cli import main, parse_values, sweep_csv, trajectory_csv


def minimal_doc_dict():
    return {
        "network": {"n": 2, "omega_f": [1.0, 1.0], "omega_g": [1.0, 1.0],
                    "lambda": [0.1, 0.0],
                    "p_f": [[0.0, 0.4], [0.4, 0.0]], "p_g": [[0.0, 0.2], [0.2, 0.0]]},
        "init": {"F0": [1.0, 0.0], "G0": [0.0, 0.0]},
        "output": {"dt_out": 0.1},
    }


def test_exp1_preset_contents(exp1_doc):
    channels = exp1_doc.data["gksl"]["channels"]
    assert len(channels) == 18
    assert all(c["strength"] == 0.5 for c in channels[:16])
    assert channels[16] == {"kind": "switch_fake_to_good", "strength": 2.0, "agent": 3}
    assert channels[17] == {"kind": "switch_good_to_fake", "strength": 0.05, "agent": 4}
    net = exp1_doc.data["network"]
    assert net["omega_f"] == [1.0] * 6 and net["omega_g"] == [1.0] * 6


def test_asymmetric_p_reports_path():
    raw = minimal_doc_dict()
    raw["network"]["p_f"][0][1] = 0.9
    with pytest.raises(ConfigError) as err:
        cfg.parse_config(json.dumps(raw))
    assert "network" in str(err.value) and "p_not_symmetric" in str(err.value)


def test_missing_init_reports_path():
    raw = minimal_doc_dict()
    del raw["init"]
    with pytest.raises(ConfigError) as err:
        cfg.parse_config(json.dumps(raw))
    assert "init" in str(err.value)


def test_unknown_fields_rejected():
    raw = minimal_doc_dict()
    raw["extra"] = 1
    with pytest.raises(ConfigError):
        cfg.parse_config(json.dumps(raw))
    raw = minimal_doc_dict()
    raw["network"]["coupling"] = 2.0
    with pytest.raises(ConfigError) as err:
        cfg.parse_config(json.dumps(raw))
    assert "coupling" in str(err.value)


def test_type_errors_report_path():
    raw = minimal_doc_dict()
    raw["output"]["dt_out"] = "fast"
    with pytest.raises(ConfigError) as err:
        cfg.parse_config(json.dumps(raw))
    assert "output.dt_out" in str(err.value)


@pytest.mark.parametrize("name", cfg.PRESET_NAMES)
def test_preset_round_trip(name):
    doc = cfg.load_preset(name)
    assert cfg.parse_config(cfg.serialize_config(doc)) == doc


def test_set_param(exp1_doc):
    varied = cfg.set_param(exp1_doc, "gksl.channels.16.strength", 7.5)
    assert varied.data["gksl"]["channels"][16]["strength"] == 7.5
    assert exp1_doc.data["gksl"]["channels"][16]["strength"] == 2.0
    varied = cfg.set_param(exp1_doc, "network.omega_f.2", 1.4)
    assert varied.data["network"]["omega_f"][2] == 1.4
    with pytest.raises(ConfigError):
        cfg.set_param(exp1_doc, "gksl.channels.16.kind", 1.0)
    with pytest.raises(ConfigError):
        cfg.set_param(exp1_doc, "gksl.nothing.here", 1.0)


def test_parse_values():
    vals = parse_values("0:50:2.5")
    assert len(vals) == 21 and vals[0] == 0.0 and vals[-1] == 50.0
    assert parse_values("3:3:1") == [3.0]
    with pytest.raises(ParameterError):
        parse_values("1:2")
    with pytest.raises(ParameterError):
        parse_values("5:1:1")


def test_trajectory_csv_header_and_single_row():
    traj = Trajectory(times=np.array([0.0]), F=np.array([[0.5, 0, 0, 0, 0, 0]]),
                      G=np.array([[0.5, 0, 0, 0, 0, 0]]),
                      f_mean=np.array([0.5 / 6]), g_mean=np.array([0.5 / 6]))
    text = trajectory_csv(traj)
    lines = text.splitlines()
    assert lines[0] == "t,F_1,F_2,F_3,F_4,F_5,F_6,G_1,G_2,G_3,G_4,G_5,G_6,F_mean,G_mean"
    assert len(lines) == 2
    assert text.endswith("\n")
    # at least 12 significant digits per value
    assert lines[1].split(",")[1] == "5.000000000000e-01"


def test_sweep_csv_header():
    from opdyn import SweepPoint
    text = sweep_csv([SweepPoint(value=2.0, asymptote=0.6164, converged=True)], "G6")
    assert text.splitlines()[0] == "p,G6_asymptotic"


def test_cli_validate_ok(capsys):
    assert main(["validate", "--modes", "4"]) == 0
    out = capsys.readouterr().out
    assert "0.000e+00" in out


def test_cli_validate_config(tmp_path, capsys):
    path = tmp_path / "doc.json"
    path.write_text(json.dumps(minimal_doc_dict()))
    assert main(["validate", "--config", str(path)]) == 0
    assert "config OK" in capsys.readouterr().out


def test_cli_heisenberg_runs(tmp_path):
    doc = tmp_path / "doc.json"
    doc.write_text(json.dumps(minimal_doc_dict()))
    out = tmp_path / "traj.csv"
    assert main(["heisenberg", "--config", str(doc), "--out", str(out),
                 "--t-max", "5", "--dt-out", "0.5"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t,F_1,F_2,G_1,G_2,F_mean,G_mean"
    assert len(lines) == 12


def test_cli_bad_config_exits_one(tmp_path, capsys):
    doc = tmp_path / "doc.json"
    raw = minimal_doc_dict()
    raw["network"]["omega_f"] = [1.0, -1.0]
    doc.write_text(json.dumps(raw))
    assert main(["heisenberg", "--config", str(doc), "--out", str(tmp_path / "x.csv")]) == 1
    assert "error:" in capsys.readouterr().err


def test_cli_missing_file_exits_one(tmp_path, capsys):
    assert main(["heisenberg", "--config", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "x.csv")]) == 1


def test_cli_usage_error_exits_two():
    with pytest.raises(SystemExit) as err:
        main(["heisenberg"])  # missing required flags
    assert err.value.code == 2


def test_cli_preset_writes_config_and_csv(tmp_path):
    assert main(["preset", "--name", "rule1", "--out-dir", str(tmp_path)]) == 0
    assert (tmp_path / "rule1.json").exists()
    csv_text = (tmp_path / "rule1.csv").read_text()
    assert csv_text.startswith("t,F_1")
    assert len(csv_text.splitlines()) == 2002  # 0..100 at dt_out=0.05


def test_cli_gksl_runs(tmp_path):
    doc = cfg.load_preset("exp1")
    path = tmp_path / "exp1.json"
    path.write_text(cfg.serialize_config(doc))
    out = tmp_path / "traj.csv"
    assert main(["gksl", "--config", str(path), "--out", str(out),
                 "--t-max", "5", "--dt-out", "1", "--dt", "0.01"]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 7 and lines[0].startswith("t,F_1")


def test_cli_sweep_runs(tmp_path):
    doc = cfg.load_preset("exp1")
    path = tmp_path / "exp1.json"
    path.write_text(cfg.serialize_config(doc))
    out = tmp_path / "curve.csv"
    assert main(["sweep", "--config", str(path), "--out", str(out),
                 "--param", "gksl.channels.16.strength", "--values", "0:4:2",
                 "--observable", "G6", "--jobs", "2"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "p,G6_asymptotic"
    assert len(lines) == 4
    curve = [float(line.split(",")[1]) for line in lines[1:]]
    assert curve == sorted(curve)


def test_cli_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "opdyn", "validate", "--modes", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0


def test_preset_reruns_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["preset", "--name", "exp1", "--out-dir", str(d)]) == 0
    assert (a / "exp1.csv").read_bytes() == (b / "exp1.csv").read_bytes()
    assert (a / "exp1.json").read_bytes() == (b / "exp1.json").read_bytes()
