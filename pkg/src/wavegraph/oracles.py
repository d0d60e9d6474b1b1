"""Independent ground-truth solvers used to cross-validate the engine.

Two unrelated formulations are kept here on purpose:

* closed-form transmission amplitudes for a single triangle or square ring
  with two leads on adjacent corners, as rational functions of z = exp(i*k*l);
* a vertex-value solver that represents the wave by its values at the
  vertices with sine interpolation along each edge and enforces Neumann
  current conservation directly.

Both are deliberately different discretizations of the same boundary
conditions, so shared bugs with the directed-bond engine are unlikely.

Sign convention: the closed forms carry the opposite sign on the output-lead
basis relative to the engine and to the vertex-value solver, for which a bare
delay line transmits as +exp(i*k*L).  On single polygons t_c3/t_c4 equal
minus the engine's S21.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GraphError
from .graphs import MetricGraph
from .scattering import TwoPortScattering, complexify_wavenumber

__all__ = [
    "PolygonTransmission",
    "t_c3",
    "t_c4",
    "polygon_transmission",
    "independent_solver",
]

GUARD_BAND = 1e-6

# Angles (mod 2*pi) where the rational forms degenerate to 0/0.
_SINGULAR_KL = {"c3": (0.0,), "c4": (0.0, np.pi)}


@dataclass(frozen=True)
class PolygonTransmission:
    """Closed-form transmission amplitude of a two-lead regular polygon."""

    kind: str  # "c3" or "c4"
    kl: float
    amplitude: complex


def _check_guard(kl, kind: str) -> None:
    kl = np.asarray(kl, dtype=float)
    for singular in _SINGULAR_KL[kind]:
        offset = np.mod(kl - singular + np.pi, 2.0 * np.pi) - np.pi
        if np.any(np.abs(offset) <= GUARD_BAND):
            raise DomainError(
                f"kl within {GUARD_BAND:g} of a removable singularity of t_{kind}"
            )


def t_c3(kl):
    """Transmission amplitude of a triangle ring, z = exp(i*kl).

    Removable singularity at kl = 0 (mod 2*pi) is guarded, not evaluated.
    """
    _check_guard(kl, "c3")
    z = np.exp(1j * np.asarray(kl, dtype=float))
    num = 4.0 * z * (z**3 - 1.0) * (z + 1.0)
    den = 9.0 - z**2 - 8.0 * z**3 - z**4 + z**6
    result = num / den
    return complex(result) if result.ndim == 0 else result


def t_c4(kl):
    """Transmission amplitude of a square ring, z = exp(i*kl).

    Removable singularities at kl = 0 and kl = pi (mod 2*pi) are guarded; the
    kl -> pi limit of the rational form is 1.
    """
    _check_guard(kl, "c4")
    z = np.exp(1j * np.asarray(kl, dtype=float))
    num = 4.0 * z * (z**4 - 1.0) * (z**2 + 1.0)
    den = 9.0 - z**2 - 8.0 * z**4 - z**6 + z**8
    result = num / den
    return complex(result) if result.ndim == 0 else result


def polygon_transmission(kind: str, kl: float) -> PolygonTransmission:
    if kind == "c3":
        amp = t_c3(kl)
    elif kind == "c4":
        amp = t_c4(kl)
    else:
        raise ValueError(f"unknown polygon kind {kind!r}, expected 'c3' or 'c4'")
    return PolygonTransmission(kind=kind, kl=float(kl), amplitude=amp)


def _excluded(graph: MetricGraph, k: float) -> bool:
    for e in graph.edges:
        if abs(np.mod(k * e.length + np.pi / 2.0, np.pi) - np.pi / 2.0) <= GUARD_BAND:
            return True
    return False


def independent_solver(graph: MetricGraph, k: float, beta: float = 0.0) -> TwoPortScattering:
    """Two-port S matrix from wavefunction values at the vertices.

    On each edge the wave is interpolated as a combination of sin(k(l-x)) and
    sin(kx), which requires sin(k*l) != 0 on every edge; points within the
    guard band of that excluded set are rejected.  Leads contribute
    i*k*(a_out - a_in) to the current balance with a_in + a_out equal to the
    vertex value.
    """
    if len(graph.leads) != 2:
        raise GraphError(f"two-port scattering needs exactly 2 leads, graph has {len(graph.leads)}")
    if not k > 0:
        raise ValueError(f"wave number must be > 0, got {k}")
    if _excluded(graph, k):
        raise DomainError(f"k={k} is within {GUARD_BAND:g} of sin(k*l)=0 for some edge")

    k_c = complexify_wavenumber(k, beta)
    index = {v: i for i, v in enumerate(graph.vertices)}
    n = len(graph.vertices)
    m = np.zeros((n, n), dtype=complex)
    for e in graph.edges:
        sin_l = np.sin(k_c * e.length)
        cos_l = np.cos(k_c * e.length)
        iu, iv = index[e.u], index[e.v]
        if iu == iv:
            m[iu, iu] += 2.0 * (1.0 - cos_l) / sin_l
        else:
            m[iu, iu] += -cos_l / sin_l
            m[iv, iv] += -cos_l / sin_l
            m[iu, iv] += 1.0 / sin_l
            m[iv, iu] += 1.0 / sin_l
    for lead in graph.leads:
        m[index[lead.vertex], index[lead.vertex]] += 1j

    entries = np.empty((2, 2), dtype=complex)
    for inject in range(2):
        rhs = np.zeros(n, dtype=complex)
        rhs[index[graph.leads[inject].vertex]] += 2j
        phi = np.linalg.solve(m, rhs)
        for collect in range(2):
            amplitude = phi[index[graph.leads[collect].vertex]]
            if collect == inject:
                amplitude -= 1.0
            entries[collect, inject] = amplitude

    return TwoPortScattering(
        k=float(k),
        beta=beta,
        s11=entries[0, 0],
        s12=entries[0, 1],
        s21=entries[1, 0],
        s22=entries[1, 1],
    )
