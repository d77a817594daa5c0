import json
import shutil
import subprocess

import numpy as np
import pytest

from blochflow import cli
from blochflow.report import TRAJECTORY_COLUMNS
from blochflow.scenarios import ConfigError


def _run(args):
    return cli.main(args)


def test_single_run_writes_everything(tmp_path, capsys):
    rc = _run(["--scenario", "pauli", "--param", "gamma1=0.4",
               "--param", "gamma2=0.9", "--param", "gamma3=0.3",
               "--t-max", "2.0", "--steps", "200", "--chi", "0.6",
               "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "quantum: P-divisible=True" in out
    assert "classical (chi=0.6" in out
    assert "wrote" in out
    csv = tmp_path / "trajectory.csv"
    summary = tmp_path / "summary.json"
    assert csv.is_file() and summary.is_file()
    assert (tmp_path / "trajectory.png").is_file()
    lines = csv.read_text().splitlines()
    assert lines[0] == ",".join(TRAJECTORY_COLUMNS)
    assert lines[0] == ("t,T00,f_t,det_T,Iq,Icl,Ccoh,Cl1_p,Cl1_q,"
                        "eigmin_K,p_div_margin,cp_div_margin")
    assert len(lines) == 1 + 201
    doc = json.loads(summary.read_text())
    assert doc["scenario"] == "pauli"
    assert doc["params"] == {"gamma1": 0.4, "gamma2": 0.9, "gamma3": 0.3}
    assert doc["quantum"]["cp_divisible"] is True
    assert doc["classical"][0]["chi"] == 0.6
    # summary file is canonical: sorted keys, two-space indent, newline end
    text = summary.read_text()
    assert text == json.dumps(doc, indent=2, sort_keys=True) + "\n"


def test_reruns_are_byte_identical(tmp_path):
    args = ["--scenario", "covariant_example4", "--param", "C=1.2",
            "--t-max", "3.0", "--steps", "150", "--chi", "1.1",
            "--xi", "0.4", "--no-figures"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run(args + ["--out-dir", str(a)]) == 0
    assert _run(args + ["--out-dir", str(b)]) == 0
    assert (a / "trajectory.csv").read_bytes() \
        == (b / "trajectory.csv").read_bytes()
    assert (a / "summary.json").read_bytes() \
        == (b / "summary.json").read_bytes()
    assert not (a / "trajectory.png").exists()


def test_nonfinite_cells_are_empty_not_nan(tmp_path):
    # pumping dynamics: the aligned reduction is not bistochastic, so the
    # scalar criterion has no value and its cells must stay empty
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenario": "custom",
        "params": {"linear": [[-0.5, 0, 0], [0, -0.5, 0], [0, 0, -1.0]],
                   "affine": [0.0, 0.0, 1.0]},
        "grid": {"t_max": 2.0, "steps": 100},
        "out_dir": str(tmp_path),
    }))
    rc = _run(["--config", str(cfg), "--no-figures"])
    assert rc == 0
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    f_col = lines[0].split(",").index("f_t")
    body = [ln.split(",") for ln in lines[1:]]
    assert all(row[f_col] == "" for row in body)
    assert "nan" not in (tmp_path / "trajectory.csv").read_text().lower()
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["classical"][0]["max_f_t"] is None
    assert doc["classical"][0]["p_divisible"] is None


def test_exit_code_1_paths(tmp_path, capsys):
    cases = [
        ["--scenario", "not_a_scenario"],
        [],                                          # no scenario anywhere
        ["--scenario", "pauli", "--sweep", "bad-format"],
        ["--scenario", "pauli", "--param", "nonsense"],
        ["--scenario", "pauli", "--param", "gamma9=1.0"],
        ["--scenario", "unitary", "--steps", "three"],
        ["--config", str(tmp_path / "missing.json")],
    ]
    for args in cases:
        assert _run(args) == 1, args
        err = capsys.readouterr().err
        assert err.startswith("error:"), args
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"scenario": "pauli", "spelling_mistake": 1}))
    assert _run(["--config", str(bad)]) == 1
    assert "spelling_mistake" in capsys.readouterr().err
    notjson = tmp_path / "notjson.json"
    notjson.write_text("{broken")
    assert _run(["--config", str(notjson)]) == 1
    assert "valid JSON" in capsys.readouterr().err


def test_exit_code_2_on_divergent_generator(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenario": "custom",
        "params": {"linear": [[5.0, 0, 0], [0, 5.0, 0], [0, 0, 5.0]]},
        "grid": {"t_max": 200.0, "steps": 400},
        "out_dir": str(tmp_path),
    }))
    rc = _run(["--config", str(cfg), "--no-figures"])
    assert rc == 2
    assert capsys.readouterr().err.startswith("numerical failure:")
    assert not (tmp_path / "trajectory.csv").exists()


def test_config_plus_flag_merge(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "scenario": "pauli",
        "params": {"gamma1": 0.4},
        "chi": 0.3,
        "grid": {"t_max": 5.0, "steps": 500},
    }))
    rc = _run(["--config", str(cfg), "--chi", "0.7",
               "--param", "gamma2=0.8", "--steps", "120",
               "--out-dir", str(tmp_path), "--no-figures"])
    assert rc == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["chi"] == 0.7                       # flag beats file
    assert doc["params"]["gamma1"] == 0.4          # file survives
    assert doc["params"]["gamma2"] == 0.8          # flag adds
    assert doc["grid"] == {"t_max": 5.0, "steps": 120}


def test_piecewise_scenario_grid_defaults(tmp_path):
    rc = _run(["--scenario", "remark4", "--out-dir", str(tmp_path),
               "--no-figures"])
    assert rc == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    assert doc["grid"]["t_max"] == pytest.approx(2 * np.pi)
    assert doc["grid"]["steps"] == 16384
    assert doc["quantum"]["p_divisible"] is True
    assert doc["quantum"]["cp_divisible"] is True


def test_sweep_run_and_verdict_flip(tmp_path, capsys):
    rc = _run(["--scenario", "covariant_example4",
               "--sweep", "C:1.0:2.0:6", "--t-max", "4.0",
               "--steps", "200", "--out-dir", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "swept C over 6 values; quantum P verdict changes: 1" in out
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == ("C,quantum_p_div,quantum_cp_div,p_div_margin,"
                        "cp_div_margin,max_f_t,classical_p_div,invertible")
    assert len(lines) == 1 + 6
    first, last = lines[1].split(","), lines[-1].split(",")
    assert float(first[0]) == 1.0 and first[1] == "1"   # divisible at C=1
    assert float(last[0]) == 2.0 and last[1] == "0"     # broken at C=2
    assert (tmp_path / "sweep.png").is_file()


def test_sweep_theta_alias(tmp_path, capsys):
    rc = _run(["--scenario", "unitary", "--param", "omega=1.0",
               "--sweep", "theta:0:1.5:4", "--t-max", "6.0",
               "--steps", "300", "--out-dir", str(tmp_path),
               "--no-figures"])
    assert rc == 0
    assert "swept theta over 4 values" in capsys.readouterr().out
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("theta,")
    rows = [ln.split(",") for ln in lines[1:]]
    # aligned basis stays divisible, tilted ones break classically
    assert rows[0][-2] == "1"
    assert rows[-1][-2] == "0"


def test_parse_param_coercions():
    assert cli._parse_param("steps=3") == ("steps", 3)
    assert cli._parse_param("omega=3.5") == ("omega", 3.5)
    assert cli._parse_param("axis=1,0,0") == ("axis", [1.0, 0.0, 0.0])
    assert cli._parse_param("gamma1=exp:1:2") == ("gamma1", "exp:1:2")
    assert cli._parse_param(" C = 2 ") == ("C", 2)
    for bad in ("a=", "=5", "noequals"):
        with pytest.raises(ConfigError):
            cli._parse_param(bad)


def test_parse_sweep():
    assert cli._parse_sweep("C:0:1.5:5") == {"key": "C", "start": 0.0,
                                             "stop": 1.5, "count": 5}
    for bad in ("C:0:1", "C:0:1:x", ":0:1:5", "C:a:1:5"):
        with pytest.raises(ConfigError):
            cli._parse_sweep(bad)


def test_rate_preset_flows_through_cli(tmp_path):
    rc = _run(["--scenario", "pauli", "--param", "gamma1=cos:2:1",
               "--param", "gamma2=0", "--param", "gamma3=0",
               "--t-max", "3.0", "--steps", "300",
               "--out-dir", str(tmp_path), "--no-figures"])
    assert rc == 0
    doc = json.loads((tmp_path / "summary.json").read_text())
    # gamma1 = 2 cos t goes negative after pi/2, killing CP but not P here
    assert doc["quantum"]["cp_divisible"] is False
    assert doc["params"]["gamma1"] == "cos:2:1"


def test_console_script_runs(tmp_path):
    exe = shutil.which("blochflow")
    assert exe, "console script should be on PATH after an editable install"
    proc = subprocess.run(
        [exe, "--scenario", "unitary", "--param", "omega=2.0",
         "--t-max", "3.0", "--steps", "150", "--chi", "0.8",
         "--out-dir", str(tmp_path), "--no-figures"],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "quantum: P-divisible=True" in proc.stdout
    assert (tmp_path / "summary.json").is_file()
    helpout = subprocess.run([exe, "--help"], capture_output=True, text=True)
    assert helpout.returncode == 0
    assert "--sweep" in helpout.stdout
