from __future__ import annotations

import numpy as np
import pytest

from wavegraph import (
    GraphError,
    MetricGraph,
    PolygonChainSpec,
    SingularSystemError,
    SPEED_OF_LIGHT,
    build_polygon_chain,
    closed_eigenvalues,
    complexify_wavenumber,
    eigenphases,
    neumann_sigma,
    peak_analysis,
    split_edge,
    transmission_scan,
    two_port_smatrix,
    weyl_count,
)
from wavegraph.graphs import Edge
from wavegraph.scattering import SpectrumScan

L = 0.25


# --- vertex scattering -------------------------------------------------------

def test_neumann_sigma_small_degrees():
    assert neumann_sigma(1).matrix == pytest.approx(np.array([[1.0]]))
    np.testing.assert_allclose(neumann_sigma(2).matrix, np.array([[0.0, 1.0], [1.0, 0.0]]))
    sigma3 = neumann_sigma(3).matrix
    np.testing.assert_allclose(np.diag(sigma3), [-1.0 / 3.0] * 3)
    off = sigma3[~np.eye(3, dtype=bool)]
    np.testing.assert_allclose(off, 2.0 / 3.0)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5, 7])
def test_neumann_sigma_orthogonal(d):
    m = neumann_sigma(d).matrix
    np.testing.assert_allclose(m @ m, np.eye(d), atol=1e-14)
    np.testing.assert_allclose(m, m.T)


def test_neumann_sigma_rejects_zero():
    with pytest.raises(ValueError):
        neumann_sigma(0)
    with pytest.raises(ValueError):
        neumann_sigma(-2)


# --- absorption --------------------------------------------------------------

def test_complexify_wavenumber_values():
    assert complexify_wavenumber(4.0, 0.0) == 4.0 + 0.0j
    assert complexify_wavenumber(4.0, 0.009) == pytest.approx(4.0 + 0.018j)
    with pytest.raises(ValueError):
        complexify_wavenumber(4.0, -0.1)
    with pytest.raises(ValueError):
        complexify_wavenumber(-1.0, 0.0)


def test_propagation_factor_decays():
    k = complexify_wavenumber(7.3, 0.009)
    assert abs(np.exp(1j * k * 2.5)) < 1.0
    assert abs(np.exp(1j * k * 2.5)) == pytest.approx(np.exp(-0.009 * np.sqrt(7.3) * 2.5))


# --- two-port S matrix -------------------------------------------------------

def test_c3_transmission_magnitude_at_quarter(single_c3):
    s = two_port_smatrix(single_c3, (np.pi / 2) / L)
    assert abs(s.s21) == pytest.approx(1.0 / np.sqrt(2.0), abs=1e-12)
    # engine lead convention: S21 = -t_c3 = -1/(1+i) at z = i
    assert s.s21 == pytest.approx((-1.0 + 1.0j) / 2.0, abs=1e-12)


def test_c4_transmission_zero_at_quarter(single_c4):
    s = two_port_smatrix(single_c4, (np.pi / 2) / L)
    assert abs(s.s21) < 1e-12


def test_c3_transmission_zero_at_pi(single_c3):
    s = two_port_smatrix(single_c3, np.pi / L)
    assert abs(s.s21) < 1e-12


def test_delay_line_positive_convention(delay_line):
    s = two_port_smatrix(delay_line, 3.7)
    assert s.s21 == pytest.approx(np.exp(1j * 3.7), abs=1e-13)
    assert abs(s.s11) < 1e-13


def test_two_port_requires_two_leads(single_c3):
    closed = MetricGraph(single_c3.vertices, single_c3.edges)
    with pytest.raises(GraphError):
        two_port_smatrix(closed, 1.0)


def test_bound_state_in_continuum_is_singular(single_c4):
    # The square ring supports a loop state invisible to the leads at kl = pi.
    with pytest.raises(SingularSystemError):
        two_port_smatrix(single_c4, np.pi / L)


def test_unitarity_and_reciprocity(c3c4c3):
    scan = transmission_scan(c3c4c3, 0.0173 / L, (2 * np.pi - 0.0191) / L, 2001)
    s = scan.s
    gram = np.einsum("pij,pik->pjk", s.conj(), s)
    assert np.abs(gram - np.eye(2)).max() < 1e-10
    assert np.abs(scan.s12 - scan.s21).max() < 1e-12


def test_subunitarity_with_absorption(c4c3c4):
    scan = transmission_scan(c4c3c4, 0.05 / L, (2 * np.pi - 0.05) / L, 1501, beta=0.009)
    power = np.abs(scan.s11) ** 2 + np.abs(scan.s21) ** 2
    assert np.all(power <= 1.0 + 1e-10)
    assert power.min() < 0.9  # absorption genuinely removes flux


def test_degree2_split_transparency(c3c4c3):
    rng = np.random.default_rng(11)
    ks = rng.uniform(1.0, 2 * np.pi / L, size=12)
    for edge_id, position in (("p0e1", 0.07), ("conn0", 0.11), ("p1e2", 0.19)):
        split = split_edge(c3c4c3, edge_id, position)
        for k in ks:
            s0 = two_port_smatrix(c3c4c3, k).matrix
            s1 = two_port_smatrix(split, k).matrix
            assert np.abs(s0 - s1).max() < 1e-10


def test_transmission_symmetry_equal_lengths(c3c4c3):
    x = np.linspace(0.01, np.pi - 0.01, 400)
    t_plus = np.array([two_port_smatrix(c3c4c3, (np.pi + v) / L).transmission for v in x])
    t_minus = np.array([two_port_smatrix(c3c4c3, (np.pi - v) / L).transmission for v in x])
    assert np.abs(t_plus - t_minus).max() < 1e-9


def test_transmission_symmetry_l_over_3():
    g = build_polygon_chain(PolygonChainSpec((3, 4, 3), (L,) * 3, L / 3))
    x = np.linspace(0.02, 3 * np.pi - 0.02, 300)
    t_plus = np.array([two_port_smatrix(g, (3 * np.pi + v) / L).transmission for v in x])
    t_minus = np.array([two_port_smatrix(g, (3 * np.pi - v) / L).transmission for v in x])
    assert np.abs(t_plus - t_minus).max() < 1e-9


def test_scan_validation(c3c4c3):
    with pytest.raises(ValueError):
        transmission_scan(c3c4c3, -1.0, 2.0, 100)
    with pytest.raises(ValueError):
        transmission_scan(c3c4c3, 2.0, 1.0, 100)
    with pytest.raises(ValueError):
        transmission_scan(c3c4c3, 1.0, 2.0, 1)


def test_scan_records_singular_point_as_defect(single_c4):
    # Grid passes exactly through the kl = pi bound state in the continuum.
    k_bic = np.pi / L
    scan = transmission_scan(single_c4, k_bic - 0.5, k_bic + 0.5, 5)
    assert len(scan.defects) == 1
    assert scan.defects[0].k == pytest.approx(k_bic)
    assert np.isnan(scan.s[2]).all()
    finite = np.isfinite(scan.transmission)
    assert finite.sum() == 4  # gaps, not aborts


# --- closed spectra ----------------------------------------------------------

def test_eigenphases_interval():
    g = MetricGraph(("p", "q"), (Edge("e0", "p", "q", 1.0),))
    phases = eigenphases(g, 1.3)
    assert len(phases) == 2
    assert np.all(phases > -np.pi) and np.all(phases <= np.pi)
    assert phases.tolist() == sorted(phases.tolist())
    # at an eigenvalue, one phase hits zero
    at_root = eigenphases(g, np.pi)
    assert np.abs(at_root).min() < 1e-12


def test_interval_spectrum():
    g = MetricGraph(("p", "q"), (Edge("e0", "p", "q", 1.0),))
    ev = closed_eigenvalues(g, count=3)
    np.testing.assert_allclose(ev.values, [np.pi, 2 * np.pi, 3 * np.pi], rtol=1e-10)
    assert ev.multiplicities.tolist() == [1, 1, 1]


def test_loop_spectrum_is_doubly_degenerate():
    g = MetricGraph(("p",), (Edge("e0", "p", "p", 1.0),))
    ev = closed_eigenvalues(g, count=4)
    np.testing.assert_allclose(ev.values, [2 * np.pi, 4 * np.pi], rtol=1e-10)
    assert ev.multiplicities.tolist() == [2, 2]
    assert ev.near_degenerate.all()
    assert len(ev.expanded()) == 4


def test_metric_scaling_exact():
    g1 = MetricGraph(("p", "q"), (Edge("e0", "p", "q", 1.0),))
    g2 = MetricGraph(("p", "q"), (Edge("e0", "p", "q", 2.0),))
    e1 = closed_eigenvalues(g1, count=5).values
    e2 = closed_eigenvalues(g2, count=5).values
    np.testing.assert_allclose(2.0 * e2, e1, rtol=1e-9)


def test_weyl_count_on_mixed_chain(mixed_chain):
    ev = closed_eigenvalues(mixed_chain, count=200)
    ranks = np.arange(1, 201)
    estimate = weyl_count(mixed_chain, ev.expanded())
    assert np.abs(ranks - estimate).max() < 6.0


def test_closed_eigenvalues_requires_target(c3c4c3):
    with pytest.raises(ValueError):
        closed_eigenvalues(c3c4c3)
    with pytest.raises(ValueError):
        closed_eigenvalues(c3c4c3, count=5, tol=-1.0)


# --- resonance analysis ------------------------------------------------------

def _lorentzian_scan(center_k: float, half_width: float, n: int, span: float) -> SpectrumScan:
    k = np.linspace(center_k - span, center_k + span, n)
    t = 1.0 / np.sqrt(1.0 + ((k - center_k) / half_width) ** 2)
    s = np.zeros((n, 2, 2), dtype=complex)
    s[:, 1, 0] = t
    s[:, 0, 1] = t
    return SpectrumScan(k=k, s=s, beta=0.0)


def test_peak_analysis_synthetic_lorentzian():
    half_width = 0.05
    # |S21| of a Lorentzian pole: half height of T at sqrt(3)*half_width
    scan = _lorentzian_scan(10.0, half_width, 4001, 1.0)
    peaks = peak_analysis(scan, prominence=0.5)
    assert len(peaks) == 1
    expected_fwhm_k = 2.0 * np.sqrt(3.0) * half_width
    assert peaks[0].fwhm_k == pytest.approx(expected_fwhm_k, rel=0.01)
    assert peaks[0].fwhm_hz == pytest.approx(
        SPEED_OF_LIGHT * expected_fwhm_k / (2 * np.pi), rel=0.01
    )
    assert not peaks[0].under_resolved


def test_peak_analysis_flags_under_resolved():
    scan = _lorentzian_scan(10.0, 0.001, 201, 1.0)
    peaks = peak_analysis(scan, prominence=0.5)
    assert len(peaks) == 1
    assert peaks[0].under_resolved


def test_halving_lengths_doubles_fwhm(c3c4c3):
    halved = build_polygon_chain(PolygonChainSpec((3, 4, 3), (L / 2,) * 3, L / 2))
    scan1 = transmission_scan(c3c4c3, 0.02 / L, (2 * np.pi - 0.02) / L, 30000)
    scan2 = transmission_scan(halved, 0.04 / L, (4 * np.pi - 0.04) / L, 30000)
    peaks1 = [p for p in peak_analysis(scan1, prominence=0.5) if p.height > 0.99]
    peaks2 = [p for p in peak_analysis(scan2, prominence=0.5) if p.height > 0.99]
    assert len(peaks1) == len(peaks2) > 0
    for p1, p2 in zip(peaks1, peaks2):
        assert p2.center_k == pytest.approx(2.0 * p1.center_k, rel=1e-3)
        assert p2.fwhm_hz == pytest.approx(2.0 * p1.fwhm_hz, rel=0.02)
