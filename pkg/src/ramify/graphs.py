"""Small deterministic graph toolkit: connectivity, the diameter-endpoint
deletion lemma, partition quotients, DOT export.

Graphs are simple (no loops or multi-edges), undirected, immutable, and keep
their vertex labels sorted so every operation is reproducible.  Labels within
one graph must be mutually comparable (ints or strings, typically).
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, NamedTuple, Sequence


class ConnectivityVerdict(NamedTuple):
    connected: bool
    #: True when the verdict is the empty-graph convention, not a real walk.
    vacuous: bool


class Graph:
    """Immutable simple graph on sortable labels."""

    __slots__ = ("labels", "edges", "_adj")

    def __init__(self, labels: Iterable, edges: Iterable = ()):
        labels = tuple(sorted(labels))
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate vertex labels")
        known = set(labels)
        norm = set()
        for a, b in edges:
            if a not in known or b not in known:
                raise ValueError(f"edge ({a!r}, {b!r}) uses unknown vertex")
            if a == b:
                raise ValueError(f"loop at {a!r} not allowed")
            norm.add((a, b) if a < b else (b, a))
        self.labels = labels
        self.edges = tuple(sorted(norm))
        adj = {v: [] for v in labels}
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        self._adj = adj

    @classmethod
    def _trusted(cls, labels: tuple, edges: tuple) -> "Graph":
        """Construction without validation; labels and normalized edges must
        already be sorted."""
        g = object.__new__(cls)
        g.labels = labels
        g.edges = edges
        adj = {v: [] for v in labels}
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        g._adj = adj
        return g

    @property
    def n(self) -> int:
        return len(self.labels)

    def neighbors(self, v) -> tuple:
        return tuple(self._adj[v])

    def __eq__(self, other) -> bool:
        return (isinstance(other, Graph)
                and self.labels == other.labels
                and self.edges == other.edges)

    def __hash__(self) -> int:
        return hash((self.labels, self.edges))

    def __repr__(self) -> str:
        return f"Graph({self.n} vertices, {len(self.edges)} edges)"


def is_connected(g: Graph) -> ConnectivityVerdict:
    """Single-component test.  The empty graph is reported connected with the
    vacuous flag set; a one-vertex graph is plainly connected."""
    if g.n == 0:
        return ConnectivityVerdict(True, True)
    start = g.labels[0]
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in g._adj[v]:
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return ConnectivityVerdict(len(seen) == g.n, False)


def delete_vertex(g: Graph, v) -> Graph:
    """Remove v and every incident edge."""
    if v not in g._adj:
        raise ValueError(f"unknown vertex {v!r}")
    labels = tuple(x for x in g.labels if x != v)
    edges = tuple(e for e in g.edges if v not in e)
    return Graph._trusted(labels, edges)


def _bfs_dist(g: Graph, source) -> dict:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for w in g._adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def diameter_endpoint(g: Graph):
    """A vertex realizing the graph diameter (an endpoint of some pair at
    maximum shortest-path distance); ties broken by least label.  Requires a
    connected graph with at least two vertices."""
    if g.n < 2:
        raise ValueError("need at least two vertices")
    best_v = None
    best_d = -1
    for v in g.labels:
        dist = _bfs_dist(g, v)
        if len(dist) != g.n:
            raise ValueError("graph is disconnected")
        ecc = max(dist.values())
        if ecc > best_d:
            best_d = ecc
            best_v = v
    return best_v


def quotient_by_partition(g: Graph, parts: Sequence[Iterable],
                          names: Sequence | None = None) -> Graph:
    """Quotient graph: one vertex per part, an edge between distinct parts
    whenever some cross-edge exists.  Parts must partition the vertex set.
    Part names default to each part's least label."""
    part_sets = [frozenset(p) for p in parts]
    covered: set = set()
    for p in part_sets:
        if not p:
            raise ValueError("empty part")
        if p & covered:
            raise ValueError("parts are not disjoint")
        covered |= p
    if covered != set(g.labels):
        raise ValueError("parts do not cover the vertex set")
    if names is None:
        names = [min(p) for p in part_sets]
    elif len(names) != len(part_sets):
        raise ValueError("one name per part required")
    part_of = {}
    for name, p in zip(names, part_sets):
        for v in p:
            part_of[v] = name
    edges = set()
    for a, b in g.edges:
        pa, pb = part_of[a], part_of[b]
        if pa != pb:
            edges.add((pa, pb) if pa < pb else (pb, pa))
    return Graph(names, edges)


def to_dot(g: Graph) -> str:
    """Deterministic DOT text: vertices sorted by label, edges sorted
    lexicographically, one statement per line."""
    def q(label) -> str:
        return '"' + str(label).replace('\\', '\\\\').replace('"', '\\"') + '"'

    lines = ["graph G {"]
    for v in g.labels:
        lines.append(f"  {q(v)};")
    for a, b in g.edges:
        lines.append(f"  {q(a)} -- {q(b)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
