from __future__ import annotations

import json

import numpy as np
import pytest

from wavegraph import (
    FileFormatError,
    MeasuredTwoPort,
    MetricGraph,
    compare,
    graph_to_document,
    parse_graph_document,
    parse_graph_file,
    read_touchstone,
    total_length,
    transmission_scan,
    write_touchstone,
)
from wavegraph.fileio import (
    atomic_write_text,
    write_eigenvalues_csv,
    write_spectrum_csv,
    write_trace_csv,
)
from wavegraph.scattering import closed_eigenvalues
from wavegraph.timedomain import TimeTrace

L = 0.25


# --- graph documents ---------------------------------------------------------

def test_parse_chain_shorthand():
    doc = {
        "chain": {
            "polygon_sizes": [3, 4, 3],
            "polygon_edge_lengths_m": [0.25, 0.25, 0.25],
            "connector_length_m": 0.25,
        }
    }
    graph = parse_graph_file(json.dumps(doc).encode())
    assert len(graph.vertices) == 10
    assert len(graph.edges) == 12
    assert len(graph.leads) == 2
    assert total_length(graph) == pytest.approx(3.0)


def test_parse_explicit_single_edge():
    doc = {
        "vertices": ["a", "b"],
        "edges": [{"id": "e", "u": "a", "v": "b", "length_m": 1.0}],
        "leads": [],
    }
    graph = parse_graph_file(json.dumps(doc))
    assert len(graph.vertices) == 2
    assert graph.edges[0].length == 1.0


def test_parse_rejects_negative_length_with_field_path():
    doc = {
        "vertices": ["a", "b"],
        "edges": [{"id": "e", "u": "a", "v": "b", "length_m": -2.0}],
    }
    with pytest.raises(FileFormatError) as err:
        parse_graph_file(json.dumps(doc))
    assert "$.edges[0].length_m" in str(err.value)


def test_parse_rejects_chain_and_explicit_together():
    doc = {
        "chain": {"polygon_sizes": [3], "polygon_edge_lengths_m": [0.25]},
        "vertices": ["a"],
    }
    with pytest.raises(FileFormatError) as err:
        parse_graph_file(json.dumps(doc))
    assert "mutually exclusive" in str(err.value)


def test_parse_rejects_malformed_json_with_position():
    with pytest.raises(FileFormatError) as err:
        parse_graph_file(b'{"vertices": [}')
    assert "line 1" in str(err.value)


def test_parse_chain_validation_paths():
    with pytest.raises(FileFormatError) as err:
        parse_graph_file(json.dumps({"chain": {"polygon_sizes": [2],
                                               "polygon_edge_lengths_m": [0.1]}}))
    assert "polygon_sizes[0]" in str(err.value)


def test_graph_document_roundtrip(c3c4c3):
    text = graph_to_document(c3c4c3)
    again = parse_graph_file(text)
    assert again.vertices == c3c4c3.vertices
    assert again.edges == c3c4c3.edges
    assert again.leads == c3c4c3.leads


def test_parse_document_keeps_chain_spec():
    doc = parse_graph_document(
        json.dumps(
            {"chain": {"polygon_sizes": [3], "polygon_edge_lengths_m": [0.25]}}
        )
    )
    assert doc.chain is not None
    assert doc.chain.polygon_sizes == (3,)


# --- touchstone --------------------------------------------------------------

def test_touchstone_ri_row():
    text = "# GHZ S RI R 50\n1.0 0 0 0.5 0 0.5 0 0 0\n"
    measured = read_touchstone(text.encode())
    assert measured.frequencies_hz[0] == pytest.approx(1e9)
    assert measured.s[0, 1, 0] == pytest.approx(0.5 + 0.0j)
    assert measured.s[0, 0, 1] == pytest.approx(0.5 + 0.0j)
    assert measured.impedance_ohm == 50.0


def test_touchstone_ma_angle_90():
    text = "# MHZ S MA R 75\n10 0 0 1.0 90 1.0 90 0 0\n"
    measured = read_touchstone(text)
    assert measured.frequencies_hz[0] == pytest.approx(1e7)
    assert measured.s[0, 1, 0] == pytest.approx(1j, abs=1e-12)
    assert measured.impedance_ohm == 75.0


def test_touchstone_db_conversion():
    text = "# HZ S DB R 50\n100 0 0 -6.0205999 0 -6.0205999 0 0 0\n"
    measured = read_touchstone(text)
    assert abs(measured.s[0, 1, 0]) == pytest.approx(0.5, rel=1e-6)


def test_touchstone_comments_and_default_option():
    text = "! comment line\n1.0 0 0 0.5 0 0.5 0 0 0 ! trailing\n2.0 0 0 0.25 0 0.25 0 0 0\n"
    measured = read_touchstone(text)  # defaults: GHZ S MA R 50
    assert measured.frequencies_hz.tolist() == [1e9, 2e9]
    assert measured.s[0, 1, 0] == pytest.approx(0.5)


def test_touchstone_errors():
    with pytest.raises(FileFormatError):
        read_touchstone("# PARSEC S RI R 50\n1 0 0 0 0 0 0 0 0\n")
    with pytest.raises(FileFormatError):
        read_touchstone("# GHZ S RI R 50\n1 0 0\n")
    with pytest.raises(FileFormatError):  # non-monotone frequencies
        read_touchstone("# GHZ S RI R 50\n2 0 0 0 0 0 0 0 0\n1 0 0 0 0 0 0 0 0\n")
    with pytest.raises(FileFormatError):
        read_touchstone("")


def test_touchstone_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    freqs = np.linspace(1e8, 1e9, 7)
    s = rng.normal(size=(7, 2, 2)) + 1j * rng.normal(size=(7, 2, 2))
    measured = MeasuredTwoPort(frequencies_hz=freqs, s=s, impedance_ohm=50.0)
    path = tmp_path / "two_port.s2p"
    write_touchstone(path, measured)
    again = read_touchstone(path.read_bytes())
    np.testing.assert_allclose(again.frequencies_hz, freqs, rtol=1e-15)
    np.testing.assert_allclose(again.s, s, rtol=1e-12)


# --- comparison --------------------------------------------------------------

def _scan_to_measured(scan) -> MeasuredTwoPort:
    return MeasuredTwoPort(frequencies_hz=scan.nu, s=scan.s)


def test_compare_roundtrip_rms_zero(c3c4c3):
    scan = transmission_scan(c3c4c3, 0.3 / L, 6.0 / L, 400, beta=0.009)
    report = compare(_scan_to_measured(scan), c3c4c3, 0.009)
    assert report.rms == pytest.approx(0.0, abs=1e-13)
    assert report.max_abs_residual < 1e-12


def test_compare_beta_sweep_reduces_peaks(c3c4c3):
    lossless = transmission_scan(c3c4c3, 0.02 / L, (2 * np.pi - 0.02) / L, 8000)
    report = compare(_scan_to_measured(lossless), c3c4c3, 0.009)
    # absorption lowers the narrow peaks, so the lossless "measurement" sits above
    assert report.residuals.max() > 0.3
    assert report.rms > 0.01


def test_compare_detects_frequency_shift(c3c4c3):
    scan = transmission_scan(c3c4c3, 0.02 / L, (2 * np.pi - 0.02) / L, 8000)
    shift = 2e6  # Hz
    shifted = MeasuredTwoPort(frequencies_hz=scan.nu + shift, s=scan.s)
    report = compare(shifted, c3c4c3, 0.0)
    offsets = [m - s for m, s in report.peak_offsets_hz]
    assert np.median(offsets) == pytest.approx(shift, rel=0.2)


def test_compare_empty_overlap(c3c4c3):
    measured = MeasuredTwoPort(
        frequencies_hz=np.array([-2.0, -1.0]), s=np.zeros((2, 2, 2), dtype=complex)
    )
    with pytest.raises(ValueError):
        compare(measured, c3c4c3, 0.0)


# --- csv surfaces ------------------------------------------------------------

def test_spectrum_csv_columns(tmp_path, c3c4c3):
    scan = transmission_scan(c3c4c3, 1.0, 5.0, 5)
    out = tmp_path / "scan.csv"
    write_spectrum_csv(out, scan, L)
    lines = out.read_text().splitlines()
    assert lines[0] == (
        "k_rad_per_m,kl_over_pi,nu_hz,s11_re,s11_im,s12_re,s12_im,"
        "s21_re,s21_im,s22_re,s22_im,T"
    )
    assert len(lines) == 6
    first = lines[1].split(",")
    assert float(first[0]) == pytest.approx(1.0)
    assert "," not in first[1] and "." in first[1]  # locale-independent decimals


def test_trace_csv(tmp_path):
    trace = TimeTrace(times=np.array([0.0, 1e-12, 2e-12]), values=np.array([0.0, 1.0, 0.5]))
    out = tmp_path / "trace.csv"
    write_trace_csv(out, trace)
    lines = out.read_text().splitlines()
    assert lines[0] == "t_seconds,volts"
    assert lines[2].startswith("1e-12,1")


def test_eigenvalues_csv(tmp_path):
    from wavegraph.graphs import Edge

    g = MetricGraph(("p", "q"), (Edge("e0", "p", "q", 1.0),))
    ev = closed_eigenvalues(g, count=3)
    out = tmp_path / "eigs.csv"
    write_eigenvalues_csv(out, ev)
    lines = out.read_text().splitlines()
    assert lines[0] == "index,k_rad_per_m,nu_hz,multiplicity,near_degenerate"
    assert len(lines) == 4
    assert lines[1].split(",")[0] == "1"


def test_atomic_write_leaves_no_temp(tmp_path):
    target = tmp_path / "out.txt"
    atomic_write_text(target, "payload")
    assert target.read_text() == "payload"
    leftovers = [p for p in tmp_path.iterdir() if p.name != "out.txt"]
    assert leftovers == []
