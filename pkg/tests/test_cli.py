from __future__ import annotations

import json

import numpy as np
import pytest

from wavegraph.cli import main

CHAIN_DOC = {
    "chain": {
        "polygon_sizes": [3, 4, 3],
        "polygon_edge_lengths_m": [0.25, 0.25, 0.25],
        "connector_length_m": 0.25,
    }
}

SINGLE_C3_DOC = {
    "chain": {"polygon_sizes": [3], "polygon_edge_lengths_m": [0.25]}
}


@pytest.fixture
def chain_file(tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(CHAIN_DOC))
    return path


@pytest.fixture
def c3_file(tmp_path):
    path = tmp_path / "c3.json"
    path.write_text(json.dumps(SINGLE_C3_DOC))
    return path


def test_spectrum_command_writes_csv_and_svg(tmp_path, chain_file):
    out = tmp_path / "scan.csv"
    svg = tmp_path / "scan.svg"
    status = main([
        "spectrum", "--graph", str(chain_file),
        "--kl-min", "0.05", "--kl-max", "6.23", "--points", "400",
        "--beta", "0", "--out", str(out), "--plot", str(svg),
    ])
    assert status == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("k_rad_per_m,kl_over_pi,nu_hz")
    assert len(lines) == 401
    assert svg.read_text().lstrip().startswith("<?xml")


def test_spectrum_json_format(tmp_path, chain_file):
    out = tmp_path / "scan.json"
    status = main([
        "spectrum", "--graph", str(chain_file),
        "--kl-min", "0.1", "--kl-max", "1.0", "--points", "16",
        "--out", str(out), "--format", "json",
    ])
    assert status == 0
    payload = json.loads(out.read_text())
    assert len(payload["T"]) == 16
    assert payload["beta"] == 0.0


def test_eigs_command(tmp_path, c3_file):
    out = tmp_path / "eigs.csv"
    status = main(["eigs", "--graph", str(c3_file), "--count", "5", "--out", str(out)])
    assert status == 0
    lines = out.read_text().splitlines()
    assert len(lines) >= 4  # header + distinct values (loop states may be degenerate)
    total_mult = sum(int(l.split(",")[3]) for l in lines[1:])
    assert total_mult == 5


def test_stats_command(tmp_path, c3_file, capsys):
    out = tmp_path / "stats.json"
    status = main([
        "stats", "--graph", str(c3_file), "--levels", "150",
        "--bootstrap", "0", "--out", str(out),
    ])
    assert status == 0
    report = json.loads(out.read_text())
    assert 0.0 <= report["rho1"] <= 1.0
    assert report["n_levels"] == 150
    assert "rho1 =" in capsys.readouterr().out


def test_delta3_command(tmp_path, c3_file):
    out = tmp_path / "d3.csv"
    status = main([
        "delta3", "--graph", str(c3_file), "--levels", "200",
        "--l-min", "2", "--l-max", "10", "--l-points", "3",
        "--rho1", "0.5", "--out", str(out),
    ])
    assert status == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "L,delta3,uncertainty,n_windows,poisson,goe,berry_robnik"
    assert len(lines) == 4


def test_pulse_command(tmp_path, c3_file):
    out = tmp_path / "trace.csv"
    status = main([
        "pulse", "--graph", str(c3_file), "--fwhm", "125e-12",
        "--amplitude", "0.41", "--beta", "0.009", "--out", str(out),
    ])
    assert status == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "t_seconds,volts"
    values = np.array([float(l.split(",")[1]) for l in lines[1:]])
    assert np.abs(values).max() > 0.01


def test_paths_command_reproduces_attributions(tmp_path, chain_file, capsys):
    status = main(["paths", "--graph", str(chain_file), "--max-length", "7l"])
    assert status == 0
    captured = capsys.readouterr()
    assert "acdghj" in captured.out
    assert "abcdghij" in captured.out
    assert "5l: 1 path(s)" in captured.err
    assert "7l: 7 path(s)" in captured.err


def test_paths_command_json_out(tmp_path, chain_file):
    out = tmp_path / "paths.json"
    status = main([
        "paths", "--graph", str(chain_file), "--max-length", "5l",
        "--out", str(out), "--format", "json",
    ])
    assert status == 0
    payload = json.loads(out.read_text())
    assert payload["complete"] is True
    assert payload["groups"][0]["paths"][0]["vertices"] == "acdghj"


def test_compare_command(tmp_path, chain_file):
    from wavegraph import MeasuredTwoPort, transmission_scan, write_touchstone
    from wavegraph.fileio import parse_graph_file

    graph = parse_graph_file(chain_file.read_bytes())
    scan = transmission_scan(graph, 1.0, 20.0, 60, beta=0.009)
    s2p = tmp_path / "meas.s2p"
    write_touchstone(s2p, MeasuredTwoPort(frequencies_hz=scan.nu, s=scan.s))
    out = tmp_path / "report.json"
    status = main([
        "compare", "--graph", str(chain_file), "--measured", str(s2p),
        "--beta", "0.009", "--out", str(out),
    ])
    assert status == 0
    report = json.loads(out.read_text())
    assert report["rms"] < 1e-10


def test_oracle_command(tmp_path):
    out = tmp_path / "oracle.csv"
    status = main(["oracle", "--polygon", "c3", "--points", "50", "--out", str(out)])
    assert status == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "kl,t_re,t_im,abs_t"
    assert len(lines) == 51


def test_unknown_flag_exits_2(chain_file, capsys):
    assert main(["spectrum", "--graph", str(chain_file), "--nope"]) == 2
    capsys.readouterr()


def test_missing_graph_file_exits_2(tmp_path, capsys):
    status = main([
        "spectrum", "--graph", str(tmp_path / "absent.json"),
        "--kl-min", "0.1", "--kl-max", "1.0", "--out", str(tmp_path / "x.csv"),
    ])
    assert status == 2
    assert "not found" in capsys.readouterr().err


def test_malformed_graph_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    status = main([
        "spectrum", "--graph", str(bad),
        "--kl-min", "0.1", "--kl-max", "1.0", "--out", str(tmp_path / "x.csv"),
    ])
    assert status == 2
    capsys.readouterr()


def test_computation_defect_exits_1(tmp_path, c3_file, capsys):
    # Record far too short for the response to decay: a computation defect.
    status = main([
        "pulse", "--graph", str(c3_file), "--duration", "2e-9",
        "--out", str(tmp_path / "t.csv"),
    ])
    assert status == 1
    assert "computation failed" in capsys.readouterr().err


def test_seed_env_default(tmp_path, c3_file, monkeypatch):
    monkeypatch.setenv("WAVEGRAPH_SEED", "77")
    out1 = tmp_path / "s1.json"
    out2 = tmp_path / "s2.json"
    for out in (out1, out2):
        status = main([
            "stats", "--graph", str(c3_file), "--levels", "120",
            "--bootstrap", "25", "--out", str(out),
        ])
        assert status == 0
    r1 = json.loads(out1.read_text())
    r2 = json.loads(out2.read_text())
    assert r1["seed"] == 77
    assert r1["rho1_stderr"] == r2["rho1_stderr"]
