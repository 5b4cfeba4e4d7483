"""End-to-end CLI runs: exit codes, determinism, sidecar contents."""

import argparse
import json
from pathlib import Path

import pytest

import sbo_clock as sc
from sbo_clock.cli import main, _threads

REDUCE = ["--set", "lattice.n_sites=32", "--set", "lattice.s_max=8"]


def run_ok(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    assert code == 0, captured.err
    return captured


def run_err(capsys, argv):
    code = main(argv)
    err = capsys.readouterr().err
    payload = json.loads(err)
    assert payload["exit_code"] == code
    return code, payload


def read_sidecar(base):
    with open(f"{base}.json", encoding="utf-8") as fh:
        return json.load(fh)


def test_spectrum_deterministic(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    argv = ["spectrum", "--preset", "fig2", *REDUCE,
            "--set", "spectrum.points=7"]
    out = run_ok(capsys, argv + ["--output", "a"])
    assert out.out.strip() == "a.csv"
    run_ok(capsys, argv + ["--output", "b"])
    a = Path("a.csv").read_bytes()
    assert a == Path("b.csv").read_bytes()
    lines = a.decode().splitlines()
    assert lines[0] == "detuning_hz,p_excited"
    assert len(lines) == 8
    doc = read_sidecar("a")
    assert doc["subcommand"] == "spectrum"
    assert doc["version"] == sc.__version__
    assert doc["config"]["spectrum"]["points"] == 7
    assert doc["config"]["lattice"]["n_sites"] == 32
    assert doc["wall_time_s"] >= 0.0


def test_prepare_rows(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["prepare", "--preset", "fig2", *REDUCE,
                    "--output", "prep"])
    lines = Path("prep.csv").read_text().splitlines()
    assert lines[0] == "s,q,thermal_weight,prepared_weight"
    assert len(lines) == 1 + 9 * 32
    doc = read_sidecar("prep")
    assert 0.0 < doc["summary"]["prep_probability"] < 1.0


def test_sbo_wait_flag_matches_config(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    argv = ["sbo", "--preset", "fig3", *REDUCE,
            "--set", "trace.points=4", "--set", "trace.t_max_s=0.3"]
    run_ok(capsys, argv + ["--output", "flag", "--wait", "0"])
    run_ok(capsys, argv + ["--output", "conf"])
    assert Path("flag.csv").read_bytes() == Path("conf.csv").read_bytes()
    assert Path("flag.csv").read_text().splitlines()[0] == "t_s,p_ground"


def test_sbo_spectrum_mode(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["sbo", "--preset", "fig3", "--mode", "spectrum", *REDUCE,
                    "--set", "spectrum.points=5", "--output", "spec"])
    lines = Path("spec.csv").read_text().splitlines()
    assert lines[0] == "delta2_hz,p_ground"
    assert len(lines) == 6


def test_fisher_scan_run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["fisher", "--preset", "fig4", *REDUCE,
                    "--set", "scan.delta1_points=3",
                    "--set", "scan.delta2_points=3", "--output", "f"])
    lines = Path("f.csv").read_text().splitlines()
    assert lines[0] == "delta1_hz,delta2_hz,fisher"
    assert len(lines) == 10
    doc = read_sidecar("f")
    assert doc["summary"]["grid_points"] == 9
    assert doc["summary"]["f_max"] > 0
    assert doc["summary"]["delta_g_over_g"] > 0
    assert set(doc["summary"]["argmax"]) == {"delta1", "delta2"}


def test_optimize_run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["optimize", "--preset", "fig7", *REDUCE,
                    "--set", "optimize.coarse_points=16",
                    "--set", "optimize.refine_rounds=1",
                    "--set", "optimize.refine_points=5", "--output", "opt"])
    doc = read_sidecar("opt")
    assert 5.0 <= doc["summary"]["t_m_s"] <= 10.0
    assert set(doc["summary"]["offsets"]) == {"10", "110"}
    for entry in doc["summary"]["offsets"].values():
        assert entry["fisher"] > 0
        assert entry["delta_g_over_g"] > 0
    lines = Path("opt.csv").read_text().splitlines()
    assert lines[0] == "t_s,fisher"
    assert len(lines) == 17


def test_gravity_flag(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["gravity", "--preset", "fig3", "--g", "9.8",
                    "--output", "grav"])
    doc = read_sidecar("grav")
    assert doc["summary"]["direction"] == "gravity_to_force_freq"
    assert doc["summary"]["force_freq_hz"] == pytest.approx(875.3086619691317)
    row = Path("grav.csv").read_text().splitlines()[1].split(",")
    assert float(row[1]) == pytest.approx(875.3086619691317)


def test_gravity_from_drive(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["gravity", "--preset", "fig3", "--output", "g2"])
    doc = read_sidecar("g2")
    assert doc["summary"]["direction"] == "force_freq_to_gravity"
    assert doc["summary"]["force_freq_hz"] == pytest.approx(2005.0)
    assert doc["summary"]["g_m_per_s2"] > 0


def test_precedence_preset_file_set(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    overlay = tmp_path / "overlay.toml"
    overlay.write_text("[drive]\nnu_s_hz = 1111.0\n")
    run_ok(capsys, ["gravity", "--preset", "fig3", "--config", str(overlay),
                    "--output", "pf"])
    assert read_sidecar("pf")["config"]["drive"]["nu_s_hz"] == 1111.0
    run_ok(capsys, ["gravity", "--preset", "fig3", "--config", str(overlay),
                    "--set", "drive.nu_s_hz=874.3", "--output", "pfs"])
    assert read_sidecar("pfs")["config"]["drive"]["nu_s_hz"] == 874.3


def test_oracle_hopping_run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["oracle", "--preset", "fig2",
                    "--set", 'oracle.kind="hopping"', "--output", "orh"])
    doc = read_sidecar("orh")
    assert doc["summary"]["abs_difference"] < 1e-9
    lines = Path("orh.csv").read_text().splitlines()
    assert lines[0] == "t_s,re_phasor,im_phasor"
    assert len(lines) == 1 + 512


def test_oracle_pulse_run(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    run_ok(capsys, ["oracle", "--preset", "fig2",
                    "--set", 'oracle.kind="pulse"', "--output", "orp"])
    doc = read_sidecar("orp")
    assert doc["summary"]["norm"] == pytest.approx(1.0, abs=1e-8)
    assert doc["summary"]["abs_difference"] < 0.05
    assert Path("orp.csv").read_text().splitlines()[0] == "t_s,p_excited"


def test_no_parameters_is_config_error(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, payload = run_err(capsys, ["spectrum"])
    assert code == 2
    assert payload["error"] == "ConfigError"
    assert "preset" in payload["message"]


def test_unknown_preset(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, payload = run_err(capsys, ["spectrum", "--preset", "fig9"])
    assert code == 2
    assert "fig2" in payload["message"]


def test_grid_cap_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, payload = run_err(capsys, ["fisher", "--preset", "fig4",
                                     "--set", "scan.grid_cap=10"])
    assert code == 3
    assert payload["error"] == "GridSizeError"


def test_bad_override_exit_code(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    code, _ = run_err(capsys, ["gravity", "--preset", "fig3",
                               "--set", "drive.nu_s_hz"])
    assert code == 2
    code, _ = run_err(capsys, ["sbo", "--preset", "fig3", "--wait", "-1"])
    assert code == 2


def test_threads_resolution(monkeypatch):
    cfg = {"scan": {"threads": 3}}
    ns = argparse.Namespace(threads=2)
    monkeypatch.setenv("SBO_THREADS", "7")
    assert _threads(ns, cfg) == 2
    assert _threads(argparse.Namespace(threads=None), cfg) == 7
    monkeypatch.setenv("SBO_THREADS", "x")
    with pytest.raises(sc.ConfigError):
        _threads(argparse.Namespace(threads=None), cfg)
    monkeypatch.delenv("SBO_THREADS")
    assert _threads(argparse.Namespace(threads=None), cfg) == 3
    assert _threads(argparse.Namespace(threads=None), {}) == 1
