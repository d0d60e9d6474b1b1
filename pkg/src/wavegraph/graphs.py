"""Metric multigraphs with semi-infinite leads and polygon-chain builders.

A metric graph is a set of vertices joined by edges that carry positive
optical lengths (physical length times sqrt(epsilon), so vacuum-speed
propagation applies everywhere).  Leads are semi-infinite edges attached to
vertices; they carry the scattering channels of the open system.

Polygon chains are the filter geometries used throughout: a row of regular
polygons (triangles, squares, ...) joined corner-to-corner by connector
edges, with one lead on the outer corner of each end polygon.  Connector
ports and lead vertices always sit on adjacent polygon corners, which
reproduces the standard drawing where the shortest lead-to-lead walk through
a triangle-square-triangle chain with unit edges has length 5.
"""

from __future__ import annotations

import math
import string
from dataclasses import dataclass, field

from .errors import GraphError

__all__ = [
    "Edge",
    "Lead",
    "MetricGraph",
    "PolygonChainSpec",
    "Bond",
    "BondSystem",
    "build_polygon_chain",
    "total_length",
    "split_edge",
    "directed_bonds",
]


@dataclass(frozen=True)
class Edge:
    """Undirected edge with an optical length in meters."""

    id: str
    u: str
    v: str
    length: float


@dataclass(frozen=True)
class Lead:
    """Semi-infinite lead attached to a vertex."""

    id: str
    vertex: str


@dataclass(frozen=True)
class MetricGraph:
    """Immutable metric multigraph (parallel edges and self-loops allowed).

    Validated on construction: endpoints must exist, lengths must be positive
    and finite, identifiers must be unique, and the graph must be connected.
    """

    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    leads: tuple[Lead, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "leads", tuple(self.leads))
        self._validate()

    def _validate(self) -> None:
        if not self.vertices:
            raise GraphError("graph has no vertices")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex identifiers")
        vset = set(self.vertices)
        edge_ids = [e.id for e in self.edges]
        if len(set(edge_ids)) != len(edge_ids):
            raise GraphError("duplicate edge identifiers")
        lead_ids = [l.id for l in self.leads]
        if len(set(lead_ids)) != len(lead_ids):
            raise GraphError("duplicate lead identifiers")
        for e in self.edges:
            if e.u not in vset or e.v not in vset:
                raise GraphError(f"edge {e.id!r} references unknown vertex")
            if not (isinstance(e.length, (int, float)) and math.isfinite(e.length) and e.length > 0):
                raise GraphError(f"edge {e.id!r} has non-positive or non-finite length {e.length!r}")
        for l in self.leads:
            if l.vertex not in vset:
                raise GraphError(f"lead {l.id!r} references unknown vertex")
        if not self._connected():
            raise GraphError("graph is not connected")

    def _connected(self) -> bool:
        if len(self.vertices) == 1:
            return True
        adjacency: dict[str, set[str]] = {v: set() for v in self.vertices}
        for e in self.edges:
            adjacency[e.u].add(e.v)
            adjacency[e.v].add(e.u)
        start = self.vertices[0]
        seen = {start}
        stack = [start]
        while stack:
            for w in adjacency[stack.pop()] - seen:
                seen.add(w)
                stack.append(w)
        return len(seen) == len(self.vertices)

    def degree(self, vertex: str) -> int:
        """Vertex degree counting edge ends (a self-loop counts twice) and leads."""
        d = 0
        for e in self.edges:
            d += (e.u == vertex) + (e.v == vertex)
        d += sum(l.vertex == vertex for l in self.leads)
        return d

    def edge_by_id(self, edge_id: str) -> Edge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        raise GraphError(f"no edge with id {edge_id!r}")


@dataclass(frozen=True)
class PolygonChainSpec:
    """Chain of regular polygons joined by connector edges.

    ``polygon_sizes`` lists the number of corners per polygon (>= 3 each),
    ``polygon_edge_lengths`` the per-polygon edge length in meters, and
    ``connector_length`` the length of the edges joining consecutive
    polygons (ignored for a single polygon).  Leads attach at the free outer
    corner of the first and last polygon.
    """

    polygon_sizes: tuple[int, ...]
    polygon_edge_lengths: tuple[float, ...]
    connector_length: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "polygon_sizes", tuple(self.polygon_sizes))
        object.__setattr__(self, "polygon_edge_lengths", tuple(self.polygon_edge_lengths))
        if not self.polygon_sizes:
            raise GraphError("polygon chain needs at least one polygon")
        if any(int(n) != n or n < 3 for n in self.polygon_sizes):
            raise GraphError("polygon sizes must be integers >= 3")
        if len(self.polygon_edge_lengths) != len(self.polygon_sizes):
            raise GraphError("need one edge length per polygon")
        if any(not (length > 0 and math.isfinite(length)) for length in self.polygon_edge_lengths):
            raise GraphError("polygon edge lengths must be positive and finite")
        if len(self.polygon_sizes) > 1 and not (
            self.connector_length > 0 and math.isfinite(self.connector_length)
        ):
            raise GraphError("connector length must be positive and finite")


def _vertex_names(total: int) -> list[str]:
    if total <= 26:
        return list(string.ascii_lowercase[:total])
    return [f"v{i:03d}" for i in range(total)]


def build_polygon_chain(spec: PolygonChainSpec) -> MetricGraph:
    """Build the metric graph of a polygon chain.

    Each polygon of size n contributes n vertices in cycle order.  Within a
    polygon the designated corners (lead vertex or connector port) are the
    first and last vertex of the cycle, which are adjacent through the
    closing edge.  Consecutive polygons are joined by one connector edge
    between the previous polygon's last vertex and the next polygon's first
    vertex; the two leads attach at the first vertex of the first polygon
    and the last vertex of the last polygon.
    """
    sizes = spec.polygon_sizes
    total_vertices = sum(sizes)
    names = _vertex_names(total_vertices)

    vertices: list[str] = []
    edges: list[Edge] = []
    offset = 0
    polygon_vertex_lists: list[list[str]] = []
    for p, (n, length) in enumerate(zip(sizes, spec.polygon_edge_lengths)):
        poly = names[offset : offset + n]
        polygon_vertex_lists.append(poly)
        vertices.extend(poly)
        for j in range(n):
            edges.append(Edge(f"p{p}e{j}", poly[j], poly[(j + 1) % n], length))
        offset += n

    for p in range(len(sizes) - 1):
        out_port = polygon_vertex_lists[p][-1]
        in_port = polygon_vertex_lists[p + 1][0]
        edges.append(Edge(f"conn{p}", out_port, in_port, spec.connector_length))

    leads = (
        Lead("lead1", polygon_vertex_lists[0][0]),
        Lead("lead2", polygon_vertex_lists[-1][-1]),
    )
    return MetricGraph(tuple(vertices), tuple(edges), leads)


def total_length(graph: MetricGraph) -> float:
    """Sum of all edge optical lengths, leads excluded (correctly rounded)."""
    return math.fsum(e.length for e in graph.edges)


def split_edge(graph: MetricGraph, edge_id: str, position: float) -> MetricGraph:
    """Replace an edge by two edges meeting at a new degree-2 vertex.

    The split position is measured from the edge's ``u`` endpoint and may be
    adjusted by at most one ulp so that the two child lengths sum exactly to
    the parent length.
    """
    edge = graph.edge_by_id(edge_id)
    if not (0.0 < position < edge.length):
        raise GraphError(
            f"split position {position} outside (0, {edge.length}) for edge {edge_id!r}"
        )
    # Sterbenz pairing: far and near sum to the parent length without rounding.
    far = edge.length - position
    near = edge.length - far
    new_vertex = f"{edge_id}_mid"
    if new_vertex in graph.vertices:
        raise GraphError(f"vertex name {new_vertex!r} already taken")
    new_edges = []
    for e in graph.edges:
        if e.id == edge_id:
            new_edges.append(Edge(f"{edge_id}_a", e.u, new_vertex, near))
            new_edges.append(Edge(f"{edge_id}_b", new_vertex, e.v, far))
        else:
            new_edges.append(e)
    return MetricGraph(graph.vertices + (new_vertex,), tuple(new_edges), graph.leads)


@dataclass(frozen=True)
class Bond:
    """Directed copy of an edge: index 2e runs u -> v, index 2e+1 runs v -> u."""

    index: int
    edge_id: str
    edge_index: int
    origin: str
    terminal: str
    length: float

    @property
    def reversal(self) -> int:
        return self.index ^ 1


@dataclass(frozen=True)
class BondSystem:
    """Directed-bond view of a metric graph.

    Bonds are ordered by edge id and then orientation, so the layout is a
    deterministic function of the graph.  Channel bookkeeping: each edge end
    is one scattering channel at its vertex; bond ``b`` departs through
    channel ``b`` and arrives through channel ``b ^ 1``, so backscattering
    (same-channel reflection) pairs a bond with its reversal, including on
    self-loops.
    """

    graph: MetricGraph
    bonds: tuple[Bond, ...]
    incoming: dict[str, tuple[int, ...]] = field(repr=False)
    outgoing: dict[str, tuple[int, ...]] = field(repr=False)
    leads_at: dict[str, tuple[int, ...]] = field(repr=False)

    def __len__(self) -> int:
        return len(self.bonds)

    def reverse(self, bond_index: int) -> int:
        return bond_index ^ 1

    def degree(self, vertex: str, include_leads: bool = True) -> int:
        d = len(self.outgoing.get(vertex, ()))
        if include_leads:
            d += len(self.leads_at.get(vertex, ()))
        return d


def directed_bonds(graph: MetricGraph) -> BondSystem:
    """Build the directed-bond system (two opposite bonds per edge)."""
    ordered = sorted(graph.edges, key=lambda e: e.id)
    bonds: list[Bond] = []
    incoming: dict[str, list[int]] = {v: [] for v in graph.vertices}
    outgoing: dict[str, list[int]] = {v: [] for v in graph.vertices}
    for ei, e in enumerate(ordered):
        fwd = Bond(2 * ei, e.id, ei, e.u, e.v, e.length)
        rev = Bond(2 * ei + 1, e.id, ei, e.v, e.u, e.length)
        bonds.extend((fwd, rev))
        outgoing[e.u].append(fwd.index)
        incoming[e.v].append(fwd.index)
        outgoing[e.v].append(rev.index)
        incoming[e.u].append(rev.index)
    leads_at: dict[str, list[int]] = {v: [] for v in graph.vertices}
    for li, lead in enumerate(graph.leads):
        leads_at[lead.vertex].append(li)
    return BondSystem(
        graph=graph,
        bonds=tuple(bonds),
        incoming={v: tuple(ixs) for v, ixs in incoming.items()},
        outgoing={v: tuple(ixs) for v, ixs in outgoing.items()},
        leads_at={v: tuple(ixs) for v, ixs in leads_at.items()},
    )
