"""Command-line interface.

Subcommands: spectrum, eigs, stats, delta3, pulse, paths, compare, oracle.
Exit status 0 on success, 2 on usage errors (bad flags, missing files,
malformed inputs), 1 on computation defects.  ``WAVEGRAPH_SEED`` provides
the default seed for bootstrap resampling.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import WavegraphError
from .fileio import (
    _fmt,
    atomic_write_text,
    compare,
    parse_graph_document,
    read_touchstone,
    write_eigenvalues_csv,
    write_spectrum_csv,
    write_trace_csv,
)
from .graphs import total_length
from .oracles import t_c3, t_c4
from .plotting import write_line_svg
from .scattering import closed_eigenvalues, transmission_scan, weyl_count
from .spectral import delta3_br, delta3_curve, delta3_goe, delta3_poisson, fit_rho1, nnsd_histogram, unfold_wavenumbers
from .timedomain import PulseSpec, enumerate_paths, group_paths, predict_peak_ratios, synthesize_output

ENV_SEED = "WAVEGRAPH_SEED"


class UsageError(Exception):
    pass


def _default_seed() -> int | None:
    value = os.environ.get(ENV_SEED)
    return int(value) if value else None


def _load_graph(path: str):
    p = Path(path)
    if not p.exists():
        raise UsageError(f"graph file not found: {path}")
    from .errors import FileFormatError

    try:
        return parse_graph_document(p.read_bytes())
    except FileFormatError as exc:
        raise UsageError(f"cannot parse {path}: {exc}") from exc


def _ref_length(doc, override: float | None) -> float:
    if override is not None:
        if override <= 0:
            raise UsageError("--ref-length must be positive")
        return override
    if doc.chain is not None:
        return doc.chain.polygon_edge_lengths[0]
    return max(e.length for e in doc.graph.edges)


def _parse_length(text: str, ref: float) -> float:
    """Length in meters, or a multiple of the reference length like '7l'."""
    text = text.strip()
    if text.endswith("l"):
        return float(text[:-1] or "1") * ref
    return float(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavegraph",
        description="Wave transport on open metric graphs: spectra, statistics, pulses.",
    )
    parser.add_argument("--version", action="version", version=f"wavegraph {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="two-port transmission scan")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--kl-min", type=float, required=True)
    sp.add_argument("--kl-max", type=float, required=True)
    sp.add_argument("--points", type=int, default=20000)
    sp.add_argument("--beta", type=float, default=0.0)
    sp.add_argument("--ref-length", type=float, default=None)
    sp.add_argument("--out", required=True)
    sp.add_argument("--plot", default=None)
    sp.add_argument("--format", choices=("csv", "json"), default="csv")

    eg = sub.add_parser("eigs", help="closed-graph eigenvalues")
    eg.add_argument("--graph", required=True)
    eg.add_argument("--count", type=int, default=None)
    eg.add_argument("--kmax", type=float, default=None)
    eg.add_argument("--out", required=True)
    eg.add_argument("--format", choices=("csv", "json"), default="csv")

    st = sub.add_parser("stats", help="Berry-Robnik fit of the level statistics")
    st.add_argument("--graph", required=True)
    st.add_argument("--levels", type=int, default=1811)
    st.add_argument("--bootstrap", type=int, default=1000)
    st.add_argument("--seed", type=int, default=_default_seed())
    st.add_argument("--out", required=True)
    st.add_argument("--plot", default=None)
    st.add_argument("--format", choices=("csv", "json"), default="json")

    d3 = sub.add_parser("delta3", help="spectral rigidity curve")
    d3.add_argument("--graph", required=True)
    d3.add_argument("--levels", type=int, default=1811)
    d3.add_argument("--l-min", type=float, default=2.0)
    d3.add_argument("--l-max", type=float, default=20.0)
    d3.add_argument("--l-points", type=int, default=10)
    d3.add_argument("--rho1", type=float, default=None,
                    help="Berry-Robnik reference column (default: fitted)")
    d3.add_argument("--seed", type=int, default=_default_seed())
    d3.add_argument("--out", required=True)
    d3.add_argument("--plot", default=None)
    d3.add_argument("--format", choices=("csv", "json"), default="csv")

    pu = sub.add_parser("pulse", help="time-domain pulse transmission")
    pu.add_argument("--graph", required=True)
    pu.add_argument("--fwhm", type=float, default=125e-12, help="pulse FWHM in seconds")
    pu.add_argument("--amplitude", type=float, default=0.41, help="pulse amplitude in volts")
    pu.add_argument("--t0", type=float, default=None, help="pulse center time in seconds")
    pu.add_argument("--beta", type=float, default=0.0)
    pu.add_argument("--duration", type=float, default=None)
    pu.add_argument("--out", required=True)
    pu.add_argument("--plot", default=None)
    pu.add_argument("--format", choices=("csv", "json"), default="csv")

    pa = sub.add_parser("paths", help="lead-to-lead path enumeration")
    pa.add_argument("--graph", required=True)
    pa.add_argument("--max-length", required=True,
                    help="bound in meters, or a multiple of the reference length like 7l")
    pa.add_argument("--ref-length", type=float, default=None)
    pa.add_argument("--out", default=None, help="write table here instead of stdout")
    pa.add_argument("--format", choices=("csv", "json"), default="csv")

    cp = sub.add_parser("compare", help="measured .s2p versus simulation")
    cp.add_argument("--graph", required=True)
    cp.add_argument("--measured", required=True)
    cp.add_argument("--beta", type=float, default=0.009)
    cp.add_argument("--out", required=True)
    cp.add_argument("--format", choices=("csv", "json"), default="json")

    orc = sub.add_parser("oracle", help="closed-form polygon transmission curves")
    orc.add_argument("--polygon", choices=("c3", "c4"), required=True)
    orc.add_argument("--kl-min", type=float, default=0.01)
    orc.add_argument("--kl-max", type=float, default=2.0 * math.pi - 0.01)
    orc.add_argument("--points", type=int, default=5000)
    orc.add_argument("--out", required=True)
    orc.add_argument("--format", choices=("csv", "json"), default="csv")

    return parser


def _cmd_spectrum(args) -> int:
    doc = _load_graph(args.graph)
    ref = _ref_length(doc, args.ref_length)
    scan = transmission_scan(
        doc.graph, args.kl_min / ref, args.kl_max / ref, args.points, beta=args.beta
    )
    if args.format == "csv":
        write_spectrum_csv(args.out, scan, ref)
    else:
        payload = {
            "k_rad_per_m": scan.k.tolist(),
            "nu_hz": scan.nu.tolist(),
            "beta": scan.beta,
            "s11": _complex_list(scan.s11),
            "s12": _complex_list(scan.s12),
            "s21": _complex_list(scan.s21),
            "s22": _complex_list(scan.s22),
            "T": scan.transmission.tolist(),
            "defects": [
                {"index": d.index, "k": d.k, "condition": d.condition} for d in scan.defects
            ],
        }
        atomic_write_text(args.out, json.dumps(payload))
    if scan.defects:
        print(f"{len(scan.defects)} defect point(s) recorded as gaps", file=sys.stderr)
    if args.plot:
        write_line_svg(
            args.plot,
            scan.k * ref / math.pi,
            [(f"beta={scan.beta}", np.where(np.isfinite(scan.transmission), scan.transmission, 0))],
            xlabel="kl / pi",
            ylabel="|S21|",
            title=f"transmission, {Path(args.graph).name}",
        )
    return 0


def _complex_list(values) -> list:
    return [[float(v.real), float(v.imag)] for v in values]


def _cmd_eigs(args) -> int:
    doc = _load_graph(args.graph)
    if args.count is None and args.kmax is None:
        raise UsageError("eigs needs --count or --kmax")
    ev = closed_eigenvalues(doc.graph, count=args.count, kmax=args.kmax)
    if args.format == "csv":
        write_eigenvalues_csv(args.out, ev)
    else:
        payload = {
            "k_rad_per_m": ev.values.tolist(),
            "multiplicities": ev.multiplicities.tolist(),
            "near_degenerate": ev.near_degenerate.astype(int).tolist(),
            "total_length_m": total_length(doc.graph),
        }
        atomic_write_text(args.out, json.dumps(payload))
    return 0


def _cmd_stats(args) -> int:
    doc = _load_graph(args.graph)
    ev = closed_eigenvalues(doc.graph, count=args.levels)
    length = total_length(doc.graph)
    unfolded = unfold_wavenumbers(ev.expanded(), length, source=args.graph)
    fit = fit_rho1(unfolded.spacings, n_bootstrap=args.bootstrap, seed=args.seed)
    report = {
        "n_levels": args.levels,
        "total_length_m": length,
        "mean_spacing": unfolded.mean_spacing,
        "rho1": fit.rho1,
        "rho1_stderr": fit.stderr,
        "rho2": fit.rho2,
        "log_likelihood": fit.log_likelihood,
        "bootstrap_resamples": args.bootstrap,
        "seed": args.seed,
        "weyl_count_at_top": float(weyl_count(doc.graph, ev.expanded()[-1])),
    }
    _write_report(args.out, report, args.format)
    if args.plot:
        edges, density = nnsd_histogram(unfolded.spacings)
        centers = 0.5 * (edges[1:] + edges[:-1])
        from .spectral import pdf_berry_robnik, pdf_goe, pdf_poisson

        write_line_svg(
            args.plot,
            centers,
            [
                ("NNSD", density),
                (f"Berry-Robnik rho1={fit.rho1:.3f}", pdf_berry_robnik(centers, fit.rho1)),
                ("Poisson", pdf_poisson(centers)),
                ("GOE", pdf_goe(centers)),
            ],
            xlabel="s",
            ylabel="P(s)",
            title=f"NNSD, {args.levels} levels",
        )
    print(f"rho1 = {fit.rho1:.4f}" + (f" +/- {fit.stderr:.4f}" if fit.stderr else ""))
    return 0


def _cmd_delta3(args) -> int:
    doc = _load_graph(args.graph)
    ev = closed_eigenvalues(doc.graph, count=args.levels)
    unfolded = unfold_wavenumbers(ev.expanded(), total_length(doc.graph), source=args.graph)
    L_values = np.linspace(args.l_min, args.l_max, args.l_points)
    curve = delta3_curve(unfolded, L_values)
    rho1 = args.rho1
    if rho1 is None:
        rho1 = fit_rho1(unfolded.spacings, n_bootstrap=0, seed=args.seed).rho1
    rows = [
        (p.window, p.value, p.uncertainty, p.n_windows,
         delta3_poisson(p.window), delta3_goe(p.window), delta3_br(p.window, rho1))
        for p in curve.points
    ]
    if args.format == "csv":
        lines = ["L,delta3,uncertainty,n_windows,poisson,goe,berry_robnik"]
        lines += [",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) for row in rows]
        atomic_write_text(args.out, "\n".join(lines) + "\n")
    else:
        atomic_write_text(
            args.out,
            json.dumps(
                {
                    "rho1": rho1,
                    "points": [
                        {
                            "L": r[0], "delta3": r[1], "uncertainty": r[2],
                            "n_windows": r[3], "poisson": r[4], "goe": r[5],
                            "berry_robnik": r[6],
                        }
                        for r in rows
                    ],
                }
            ),
        )
    if args.plot:
        write_line_svg(
            args.plot,
            curve.windows,
            [
                ("empirical", curve.values),
                (f"Berry-Robnik rho1={rho1:.3f}", [r[6] for r in rows]),
                ("Poisson", [r[4] for r in rows]),
                ("GOE", [r[5] for r in rows]),
            ],
            xlabel="L",
            ylabel="Delta3(L)",
            title="spectral rigidity",
        )
    return 0


def _cmd_pulse(args) -> int:
    doc = _load_graph(args.graph)
    fwhm = args.fwhm
    sigma = fwhm / (2.0 * math.sqrt(2.0 * math.log(2.0)))
    t0 = args.t0 if args.t0 is not None else 8.0 * sigma
    pulse = PulseSpec(amplitude=args.amplitude, fwhm=fwhm, t0=t0)
    trace = synthesize_output(doc.graph, pulse, beta=args.beta, duration=args.duration)
    if args.format == "csv":
        write_trace_csv(args.out, trace)
    else:
        atomic_write_text(
            args.out,
            json.dumps({"t_seconds": trace.times.tolist(), "volts": trace.values.tolist()}),
        )
    if args.plot:
        write_line_svg(
            args.plot,
            trace.times * 1e9,
            [("output", trace.values)],
            xlabel="t [ns]",
            ylabel="U [V]",
            title=f"delay-time trace, beta={args.beta}",
        )
    return 0


def _cmd_paths(args) -> int:
    doc = _load_graph(args.graph)
    ref = _ref_length(doc, args.ref_length)
    bound = _parse_length(args.max_length, ref)
    enumeration = enumerate_paths(doc.graph, bound)
    groups = group_paths(enumeration.paths)
    predictions = predict_peak_ratios(groups) if groups else []
    if args.format == "json":
        payload = {
            "complete": enumeration.complete,
            "ref_length_m": ref,
            "groups": [
                {
                    "length_m": g.length,
                    "length_over_ref": g.length / ref,
                    "n_paths": len(g.paths),
                    "amplitude_sum": g.amplitude_sum,
                    "paths": [
                        {"vertices": p.vertex_string, "length_m": p.length, "amplitude": p.amplitude}
                        for p in g.paths
                    ],
                }
                for g in groups
            ],
        }
        text = json.dumps(payload, indent=2)
    else:
        lines = ["group_length_m,length_over_ref,n_paths,amplitude_sum,vertices,amplitude"]
        for g in groups:
            for p in g.paths:
                lines.append(
                    f"{_fmt(g.length)},{_fmt(g.length / ref)},{len(g.paths)},"
                    f"{_fmt(g.amplitude_sum)},{p.vertex_string},{_fmt(p.amplitude)}"
                )
        text = "\n".join(lines) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")
    if not enumeration.complete:
        print("warning: enumeration truncated by node budget", file=sys.stderr)
        return 1
    for pred in predictions:
        print(
            f"# {pred.length / ref:.4g}l: {pred.n_paths} path(s), summed amplitude {pred.amplitude_sum:+.6f}",
            file=sys.stderr,
        )
    return 0


def _cmd_compare(args) -> int:
    doc = _load_graph(args.graph)
    measured_path = Path(args.measured)
    if not measured_path.exists():
        raise UsageError(f"measured file not found: {args.measured}")
    from .errors import FileFormatError

    try:
        measured = read_touchstone(measured_path.read_bytes())
    except FileFormatError as exc:
        raise UsageError(f"cannot parse {args.measured}: {exc}") from exc
    report = compare(measured, doc.graph, args.beta)
    payload = {
        "beta": report.beta,
        "n_points": len(report.frequencies_hz),
        "rms": report.rms,
        "max_abs_residual": report.max_abs_residual,
        "peak_offsets_hz": [
            {"measured": m, "simulated": s, "offset": s - m} for m, s in report.peak_offsets_hz
        ],
    }
    if args.format == "json":
        atomic_write_text(args.out, json.dumps(payload, indent=2))
    else:
        lines = ["nu_hz,measured_T,simulated_T,residual"]
        for f, mt, st_, r in zip(
            report.frequencies_hz, report.measured_t, report.simulated_t, report.residuals
        ):
            lines.append(f"{_fmt(f)},{_fmt(mt)},{_fmt(st_)},{_fmt(r)}")
        atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"rms residual = {report.rms:.6g} over {len(report.frequencies_hz)} points")
    return 0


def _cmd_oracle(args) -> int:
    fun = t_c3 if args.polygon == "c3" else t_c4
    kl = np.linspace(args.kl_min, args.kl_max, args.points)
    from .errors import DomainError

    values = np.empty(len(kl), dtype=complex)
    for i, x in enumerate(kl):
        try:
            values[i] = fun(x)
        except DomainError:
            values[i] = np.nan
    if args.format == "csv":
        lines = ["kl,t_re,t_im,abs_t"]
        for x, v in zip(kl, values):
            lines.append(f"{_fmt(x)},{_fmt(v.real)},{_fmt(v.imag)},{_fmt(abs(v))}")
        atomic_write_text(args.out, "\n".join(lines) + "\n")
    else:
        atomic_write_text(
            args.out,
            json.dumps({"kl": kl.tolist(), "t": _complex_list(values),
                        "abs_t": np.abs(values).tolist()}),
        )
    return 0


def _write_report(path, report: dict, fmt: str) -> None:
    if fmt == "json":
        atomic_write_text(path, json.dumps(report, indent=2))
    else:
        lines = ["key,value"] + [f"{k},{v}" for k, v in report.items()]
        atomic_write_text(path, "\n".join(lines) + "\n")


_HANDLERS = {
    "spectrum": _cmd_spectrum,
    "eigs": _cmd_eigs,
    "stats": _cmd_stats,
    "delta3": _cmd_delta3,
    "pulse": _cmd_pulse,
    "paths": _cmd_paths,
    "compare": _cmd_compare,
    "oracle": _cmd_oracle,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (WavegraphError, ValueError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
