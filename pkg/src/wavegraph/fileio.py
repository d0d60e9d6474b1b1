"""Graph documents, Touchstone two-port data, CSV export, and comparison.

Graph-description files are UTF-8 JSON with either explicit ``vertices`` /
``edges`` / ``leads`` arrays or the mutually exclusive ``chain`` shorthand
that expands through the polygon-chain builder.  Measured S parameters are
read from Touchstone v1 ``.s2p`` files (HZ/KHZ/MHZ/GHZ units, RI/MA/DB
formats, ``!`` comments).  All CSV output uses ``.`` decimals and a fixed
column order regardless of locale, and every file write is atomic
(temp file plus rename).
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FileFormatError
from .graphs import Edge, Lead, MetricGraph, PolygonChainSpec, build_polygon_chain
from .scattering import SPEED_OF_LIGHT, SpectrumScan, _Engine, _solve_batch

__all__ = [
    "GraphDocument",
    "MeasuredTwoPort",
    "ComparisonReport",
    "parse_graph_file",
    "graph_to_document",
    "read_touchstone",
    "write_touchstone",
    "compare",
    "write_spectrum_csv",
    "write_trace_csv",
    "write_eigenvalues_csv",
    "atomic_write_text",
]


@dataclass(frozen=True)
class GraphDocument:
    """Parsed graph-description file."""

    graph: MetricGraph
    chain: PolygonChainSpec | None = None


@dataclass(frozen=True)
class MeasuredTwoPort:
    """Measured or exported two-port S parameters on an ascending frequency grid."""

    frequencies_hz: np.ndarray
    s: np.ndarray  # (n, 2, 2) complex, [[S11, S12], [S21, S22]]
    impedance_ohm: float = 50.0

    def __post_init__(self):
        f = np.asarray(self.frequencies_hz, dtype=float)
        s = np.asarray(self.s, dtype=complex)
        if len(f) != len(s):
            raise ValueError("frequency and S arrays differ in length")
        if np.any(np.diff(f) <= 0):
            raise ValueError("frequencies must be strictly ascending")
        if not np.all(np.isfinite(s)):
            raise ValueError("S parameters must be finite")
        object.__setattr__(self, "frequencies_hz", f)
        object.__setattr__(self, "s", s)

    @property
    def s21(self) -> np.ndarray:
        return self.s[:, 1, 0]


def _require(condition: bool, path: str, message: str) -> None:
    if not condition:
        raise FileFormatError(f"{path}: {message}")


def _positive_length(value, path: str) -> float:
    _require(isinstance(value, (int, float)) and not isinstance(value, bool), path, "must be a number")
    _require(math.isfinite(value) and value > 0, path, f"must be positive and finite, got {value!r}")
    return float(value)


def parse_graph_file(data) -> MetricGraph:
    """Parse a graph document from bytes, str, or a JSON-compatible dict."""
    return parse_graph_document(data).graph


def parse_graph_document(data) -> GraphDocument:
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FileFormatError(f"graph document is not UTF-8: {exc}") from exc
    if isinstance(data, str):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise FileFormatError(
                f"graph document is not valid JSON (line {exc.lineno}, column {exc.colno}): {exc.msg}"
            ) from exc
    else:
        doc = data
    _require(isinstance(doc, dict), "$", "top level must be a JSON object")

    has_chain = "chain" in doc
    has_explicit = any(key in doc for key in ("vertices", "edges", "leads"))
    _require(has_chain or has_explicit, "$", "need either 'chain' or explicit 'vertices'/'edges'")
    _require(
        not (has_chain and has_explicit),
        "$",
        "'chain' and explicit 'vertices'/'edges'/'leads' are mutually exclusive",
    )

    if has_chain:
        chain = doc["chain"]
        _require(isinstance(chain, dict), "$.chain", "must be an object")
        sizes = chain.get("polygon_sizes")
        lengths = chain.get("polygon_edge_lengths_m")
        _require(isinstance(sizes, list) and sizes, "$.chain.polygon_sizes", "must be a non-empty array")
        _require(
            isinstance(lengths, list) and len(lengths) == len(sizes),
            "$.chain.polygon_edge_lengths_m",
            "must be an array with one length per polygon",
        )
        for i, n in enumerate(sizes):
            _require(isinstance(n, int) and n >= 3, f"$.chain.polygon_sizes[{i}]", "must be an integer >= 3")
        lengths = [
            _positive_length(v, f"$.chain.polygon_edge_lengths_m[{i}]") for i, v in enumerate(lengths)
        ]
        connector = 0.0
        if len(sizes) > 1:
            connector = _positive_length(chain.get("connector_length_m"), "$.chain.connector_length_m")
        spec = PolygonChainSpec(tuple(sizes), tuple(lengths), connector)
        return GraphDocument(graph=build_polygon_chain(spec), chain=spec)

    vertices = doc.get("vertices")
    _require(isinstance(vertices, list) and vertices, "$.vertices", "must be a non-empty array")
    for i, v in enumerate(vertices):
        _require(isinstance(v, str), f"$.vertices[{i}]", "must be a string")
    edges_doc = doc.get("edges", [])
    _require(isinstance(edges_doc, list), "$.edges", "must be an array")
    edges = []
    for i, e in enumerate(edges_doc):
        path = f"$.edges[{i}]"
        _require(isinstance(e, dict), path, "must be an object")
        for key in ("id", "u", "v", "length_m"):
            _require(key in e, f"{path}.{key}", "missing")
        _require(isinstance(e["id"], str), f"{path}.id", "must be a string")
        _require(isinstance(e["u"], str) and isinstance(e["v"], str), f"{path}.u/v", "must be strings")
        edges.append(Edge(e["id"], e["u"], e["v"], _positive_length(e["length_m"], f"{path}.length_m")))
    leads_doc = doc.get("leads", [])
    _require(isinstance(leads_doc, list), "$.leads", "must be an array")
    leads = []
    for i, l in enumerate(leads_doc):
        path = f"$.leads[{i}]"
        _require(isinstance(l, dict), path, "must be an object")
        for key in ("id", "vertex"):
            _require(key in l, f"{path}.{key}", "missing")
        leads.append(Lead(l["id"], l["vertex"]))
    try:
        graph = MetricGraph(tuple(vertices), tuple(edges), tuple(leads))
    except Exception as exc:
        raise FileFormatError(f"$: invalid graph: {exc}") from exc
    return GraphDocument(graph=graph)


def graph_to_document(graph: MetricGraph) -> str:
    """Serialize a graph to the explicit JSON document form."""
    doc = {
        "vertices": list(graph.vertices),
        "edges": [{"id": e.id, "u": e.u, "v": e.v, "length_m": e.length} for e in graph.edges],
        "leads": [{"id": l.id, "vertex": l.vertex} for l in graph.leads],
    }
    return json.dumps(doc, indent=2)


_UNIT_SCALE = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def read_touchstone(data) -> MeasuredTwoPort:
    """Read a Touchstone v1 two-port (.s2p) file.

    Data rows are ``f S11 S21 S12 S22`` as value pairs in the option-line
    format: RI (real, imaginary), MA (magnitude, angle in degrees), or DB
    (20*log10 magnitude, angle in degrees).
    """
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    unit = "GHZ"
    fmt = "MA"
    impedance = 50.0
    rows = []
    saw_option = False
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            if saw_option:
                continue  # later option lines are ignored per v1 practice
            tokens = line[1:].upper().split()
            try:
                unit = tokens[0] if tokens else "GHZ"
                if unit not in _UNIT_SCALE:
                    raise FileFormatError(
                        f"line {lineno}: unknown frequency unit {unit!r} in option line"
                    )
                if len(tokens) > 1 and tokens[1] != "S":
                    raise FileFormatError(f"line {lineno}: only S parameters are supported")
                if len(tokens) > 2:
                    fmt = tokens[2]
                    if fmt not in ("RI", "MA", "DB"):
                        raise FileFormatError(f"line {lineno}: unknown format {fmt!r}")
                if len(tokens) > 3:
                    if tokens[3] != "R" or len(tokens) < 5:
                        raise FileFormatError(f"line {lineno}: malformed impedance clause")
                    impedance = float(tokens[4])
            except FileFormatError:
                raise
            except Exception as exc:
                raise FileFormatError(f"line {lineno}: malformed option line: {exc}") from exc
            saw_option = True
            continue
        parts = line.split()
        if len(parts) != 9:
            raise FileFormatError(
                f"line {lineno}: expected 9 columns (f + 4 S-parameter pairs), got {len(parts)}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise FileFormatError(f"line {lineno}: non-numeric value: {exc}") from exc
    if not rows:
        raise FileFormatError("no data rows found")
    table = np.array(rows)
    freqs = table[:, 0] * _UNIT_SCALE[unit]
    if np.any(np.diff(freqs) <= 0):
        raise FileFormatError("frequencies are not strictly ascending")

    pairs = table[:, 1:].reshape(-1, 4, 2)
    if fmt == "RI":
        values = pairs[:, :, 0] + 1j * pairs[:, :, 1]
    elif fmt == "MA":
        values = pairs[:, :, 0] * np.exp(1j * np.deg2rad(pairs[:, :, 1]))
    else:  # DB
        values = 10.0 ** (pairs[:, :, 0] / 20.0) * np.exp(1j * np.deg2rad(pairs[:, :, 1]))
    # Touchstone two-port column order: S11, S21, S12, S22.
    s = np.empty((len(freqs), 2, 2), dtype=complex)
    s[:, 0, 0] = values[:, 0]
    s[:, 1, 0] = values[:, 1]
    s[:, 0, 1] = values[:, 2]
    s[:, 1, 1] = values[:, 3]
    return MeasuredTwoPort(frequencies_hz=freqs, s=s, impedance_ohm=impedance)


def write_touchstone(path, measured: MeasuredTwoPort) -> None:
    """Write Touchstone v1 (.s2p), Hz units, RI format."""
    lines = [f"# HZ S RI R {measured.impedance_ohm:g}"]
    for f, s in zip(measured.frequencies_hz, measured.s):
        ordered = (s[0, 0], s[1, 0], s[0, 1], s[1, 1])
        entries = " ".join(f"{_fmt(v.real)} {_fmt(v.imag)}" for v in ordered)
        lines.append(f"{_fmt(f)} {entries}")
    atomic_write_text(path, "\n".join(lines) + "\n")


@dataclass(frozen=True)
class ComparisonReport:
    """Measured-vs-simulated transmission comparison at matched absorption."""

    frequencies_hz: np.ndarray
    measured_t: np.ndarray
    simulated_t: np.ndarray
    residuals: np.ndarray
    rms: float
    max_abs_residual: float
    peak_offsets_hz: tuple[tuple[float, float], ...]  # (measured peak, nearest simulated peak)
    beta: float


def compare(
    measured: MeasuredTwoPort,
    graph: MetricGraph,
    beta: float,
    *,
    peak_prominence: float = 0.1,
) -> ComparisonReport:
    """Per-frequency |S21| residuals and peak-position offsets.

    The simulation is evaluated at exactly the measured frequencies (points
    at or below zero frequency are outside the overlap and rejected if none
    remain).
    """
    from scipy.signal import find_peaks

    freqs = measured.frequencies_hz
    usable = freqs > 0
    if not usable.any():
        raise ValueError("no overlapping frequency range (all frequencies <= 0)")
    freqs = freqs[usable]
    ks = 2.0 * np.pi * freqs / SPEED_OF_LIGHT
    engine = _Engine(graph)
    s, _ = _solve_batch(engine, ks, beta)
    simulated_t = np.abs(s[:, 1, 0])
    measured_t = np.abs(measured.s21[usable])
    residuals = measured_t - simulated_t
    finite = np.isfinite(residuals)

    peaks_meas, _ = find_peaks(measured_t, prominence=peak_prominence)
    peaks_sim, _ = find_peaks(np.where(finite, simulated_t, 0.0), prominence=peak_prominence)
    offsets = []
    for pm in peaks_meas:
        if len(peaks_sim) == 0:
            break
        nearest = peaks_sim[np.argmin(np.abs(freqs[peaks_sim] - freqs[pm]))]
        offsets.append((float(freqs[pm]), float(freqs[nearest])))

    return ComparisonReport(
        frequencies_hz=freqs,
        measured_t=measured_t,
        simulated_t=simulated_t,
        residuals=residuals,
        rms=float(np.sqrt(np.mean(residuals[finite] ** 2))),
        max_abs_residual=float(np.abs(residuals[finite]).max()),
        peak_offsets_hz=tuple(offsets),
        beta=beta,
    )


def atomic_write_text(path, text: str) -> None:
    """Write text to path via a temp file in the same directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    """Shortest round-trip decimal form, always with a . decimal point."""
    return repr(float(value))


SPECTRUM_CSV_COLUMNS = (
    "k_rad_per_m,kl_over_pi,nu_hz,"
    "s11_re,s11_im,s12_re,s12_im,s21_re,s21_im,s22_re,s22_im,T"
)


def write_spectrum_csv(path, scan: SpectrumScan, ref_length: float) -> None:
    """Fixed-order CSV of a scan; defect points appear as nan rows."""
    lines = [SPECTRUM_CSV_COLUMNS]
    nu = scan.nu
    for i, k in enumerate(scan.k):
        s = scan.s[i]
        cells = [k, k * ref_length / np.pi, nu[i],
                 s[0, 0].real, s[0, 0].imag, s[0, 1].real, s[0, 1].imag,
                 s[1, 0].real, s[1, 0].imag, s[1, 1].real, s[1, 1].imag,
                 abs(s[1, 0])]
        lines.append(",".join(_fmt(c) for c in cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_trace_csv(path, trace) -> None:
    lines = ["t_seconds,volts"]
    for t, v in zip(trace.times, trace.values):
        lines.append(f"{_fmt(t)},{_fmt(v)}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_eigenvalues_csv(path, eigenvalues) -> None:
    lines = ["index,k_rad_per_m,nu_hz,multiplicity,near_degenerate"]
    rank = 1
    for k, mult, flag in zip(
        eigenvalues.values, eigenvalues.multiplicities, eigenvalues.near_degenerate
    ):
        nu = SPEED_OF_LIGHT * k / (2.0 * np.pi)
        lines.append(f"{rank},{_fmt(k)},{_fmt(nu)},{int(mult)},{int(flag)}")
        rank += int(mult)
    atomic_write_text(path, "\n".join(lines) + "\n")
