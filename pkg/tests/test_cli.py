"""End-to-end command-line checks, run in process through main()."""

import json

import numpy as np
import pytest

from kslyap.cli import load_config, main
from kslyap.potential import read_profile
from kslyap.study import SweepRecord, read_sweep_csv, write_sweep_csv


def run_json(capsys, argv):
    rc = main(argv)
    out = capsys.readouterr().out
    return rc, json.loads(out)


def test_exponents_json(capsys):
    rc, payload = run_json(capsys, ["exponents", "--json"])
    assert rc == 0
    assert payload["order"] == "fourth"
    assert payload["c1"] == "1/3"
    assert payload["c2"] == "4/3"
    assert payload["objective"] == "3/2"
    assert payload["classification"] == "critical"
    assert np.isclose(payload["c1_decimal"], 1.0 / 3.0, rtol=1e-15)
    assert np.isclose(payload["objective_decimal"], 1.5, rtol=1e-15)


def test_exponents_second_order(capsys):
    rc, payload = run_json(capsys, ["exponents", "--order", "second", "--json"])
    assert rc == 0
    assert (payload["c1"], payload["c2"], payload["objective"]) == ("1", "2", "5/2")
    assert payload["classification"] == "weak"


def test_exponents_plain_text(capsys):
    assert main(["exponents"]) == 0
    out = capsys.readouterr().out
    assert "c1: 1/3" in out
    assert "classification: critical" in out


def test_unknown_order_choice_rejected():
    with pytest.raises(SystemExit):
        main(["exponents", "--order", "sixth"])


def test_build_verify_bound_pipeline(tmp_path, capsys):
    rc, built = run_json(capsys, ["build-potential", "--L", "2", "--out", str(tmp_path), "--json"])
    assert rc == 0
    assert built["csv"].endswith("profile_L2.csv")
    prof = read_profile(built["csv"])
    assert prof.L == 2.0
    assert prof.n == built["n"]

    rc, verified = run_json(
        capsys, ["verify", "--profile", built["csv"], "--out", str(tmp_path), "--json"]
    )
    assert rc == 0
    assert verified["converged"] and verified["certified"]
    assert verified["delta_margin"] > 0
    assert verified["order"] == "fourth"
    assert verified["N_sequence"] == sorted(verified["N_sequence"])

    rc, bound = run_json(capsys, ["bound", "--profile", built["csv"], "--out", str(tmp_path), "--json"])
    assert rc == 0
    assert set(bound) == {
        "L", "lambda", "M2", "phi_norm", "h2_norm", "r_star", "r_star_star", "r_star_star_scaled",
    }
    assert bound["lambda"] == verified["delta_margin"]
    assert bound["r_star_star"] > bound["r_star"] > 0


def test_verify_missing_profile_errors(tmp_path, capsys):
    rc = main(["verify", "--profile", str(tmp_path / "nope.csv"), "--out", str(tmp_path)])
    assert rc == 2
    assert capsys.readouterr().err.startswith("error:")


def test_simulate_writes_csv_and_summary(tmp_path, capsys):
    rc, payload = run_json(
        capsys,
        [
            "simulate", "--L", "2", "--N", "64", "--t-end", "5", "--dt", "0.05",
            "--transient", "1", "--record-every", "10", "--out", str(tmp_path), "--json",
        ],
    )
    assert rc == 0
    assert np.isfinite(payload["sup_norm"])
    assert payload["violations"] is None  # monitor not requested
    csv_path = tmp_path / "simulate_L2.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "t,l2,l2_grad,l2_hess,lyapunov_residual"
    assert len(lines) == 1 + 11  # 100 steps sampled every 10, initial state included
    assert all(line.endswith(",") for line in lines[1:])  # residual column empty
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, usecols=(0, 1, 2, 3))
    assert data.shape == (11, 4)  # plain parseable floats
    assert np.allclose(data[:, 0], 0.5 * np.arange(11), rtol=1e-12)
    assert np.isclose(data[0, 1], 1.0, rtol=1e-12)  # initial amplitude
    sidecar = json.loads((tmp_path / "simulate_L2.json").read_text())
    assert sidecar == payload


def test_simulate_with_lyapunov_monitor(tmp_path, capsys):
    rc, payload = run_json(
        capsys,
        [
            "simulate", "--L", "8", "--N", "64", "--t-end", "3", "--dt", "0.05",
            "--transient", "0.5", "--record-every", "1", "--check-lyapunov",
            "--out", str(tmp_path), "--json",
        ],
    )
    assert rc == 0
    assert payload["violations"] == 0
    assert payload["max_residual"] < payload["tolerance"]
    lines = (tmp_path / "simulate_L8.csv").read_text().splitlines()
    assert len(lines) == 1 + 61
    assert lines[1].endswith(",") and lines[-1].endswith(",")  # endpoints have no residual
    assert not lines[2].endswith(",")
    residual = float(lines[2].rsplit(",", 1)[1])
    assert residual <= payload["max_residual"]


def test_sweep_cli(tmp_path, capsys):
    rc = main(["sweep", "--L-list", "8,4", "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "wrote 2 records" in out
    assert "L = 4: error:" in out
    records = read_sweep_csv(tmp_path / "sweep.csv")
    assert [r.L for r in records] == [8.0, 4.0]
    assert records[0].certified and not records[1].certified


def test_fit_cli(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    records = [
        SweepRecord(L=L, h2_norm=L**1.5, phi_norm=(None if L == 8.0 else 2.0 * L))
        for L in (8.0, 16.0, 32.0, 64.0)
    ]
    write_sweep_csv(records, path)
    rc, payload = run_json(capsys, ["fit", "--input", str(path), "--json"])
    assert rc == 0
    assert payload["column"] == "h2_norm"
    assert np.isclose(payload["slope"], 1.5, rtol=1e-12)
    assert payload["n_points"] == 4
    rc, payload = run_json(capsys, ["fit", "--input", str(path), "--column", "phi_norm", "--json"])
    assert rc == 0
    assert payload["n_points"] == 3  # None cells are skipped
    assert np.isclose(payload["slope"], 1.0, rtol=1e-12)
    assert main(["fit"]) == 2  # --input is mandatory
    assert "error:" in capsys.readouterr().err


def test_molinet_cli(capsys):
    rc, payload = run_json(capsys, ["molinet", "--Lx", "100", "--json"])
    assert rc == 0
    assert np.isclose(payload["ly_max"], 100.0 ** (-13.0 / 7.0), rtol=1e-12)
    assert np.isclose(payload["norm_bound"], 100.0 ** (4.0 / 7.0), rtol=1e-12)

    rc = main(["molinet", "--Lx", "100", "--Ly", "1"])
    assert rc == 2
    assert "exceeds" in capsys.readouterr().err

    rc = main(["molinet"])
    assert rc == 2
    assert "--Lx is required" in capsys.readouterr().err


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# study configuration\norder = second\njson = true\n")
    rc = main(["exponents", "--config", str(cfg)])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["order"] == "second"


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("order = second\n")
    rc, payload = run_json(capsys, ["exponents", "--config", str(cfg), "--order", "fourth", "--json"])
    assert rc == 0
    assert payload["order"] == "fourth"


def test_bad_config_line(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("order second\n")
    assert main(["exponents", "--config", str(cfg)]) == 2
    assert "key = value" in capsys.readouterr().err


def test_load_config_parsing(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("\n# comment only\n  a = 1.5  # trailing\nL_list = 8 16\nname=x\n")
    assert load_config(cfg) == {"a": "1.5", "L_list": "8 16", "name": "x"}


def test_out_directory_created(tmp_path, capsys):
    target = tmp_path / "nested" / "out"
    rc = main(["molinet", "--Lx", "2", "--out", str(target)])
    assert rc == 0
    capsys.readouterr()
    assert target.is_dir()
