"""Port-labeled graphs, BFS metrics and the benchmark/adversarial graph families.

Vertices are the integers ``1..n``. At a vertex ``v`` the incident edges carry
the local port labels ``1..deg(v)``; the labels on the two endpoints of an edge
are unrelated.
"""

from __future__ import annotations

import json
import random
from collections import deque
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any

from .errors import (
    BadParameters,
    BadPortPermutation,
    BadVertex,
    DisconnectedGraph,
    DuplicateEdge,
    NotBipartite,
    SelfLoop,
)

__all__ = [
    "PortLabeledGraph",
    "GraphFamilySpec",
    "ChainOfCliques",
    "FAMILIES",
    "build_graph",
    "gen_family",
    "chain_of_cliques",
    "double_star",
    "diameter",
    "distance",
    "ball",
    "diameter_pair",
    "is_bipartite",
    "bipartition",
    "load_graph",
    "dump_graph",
]


@dataclass(frozen=True, eq=True)
class PortLabeledGraph:
    """Immutable simple connected undirected graph with port labels.

    ``ports[v - 1][p - 1]`` is the neighbor of ``v`` reached through port ``p``.
    Construct through :func:`build_graph` or :func:`load_graph`, which validate.
    """

    n: int
    ports: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        _validate(self.n, self.ports)

    # -- local (port) interface ------------------------------------------------

    def degree(self, v: int) -> int:
        return len(self.ports[self._idx(v)])

    def neighbor(self, v: int, port: int) -> int:
        row = self.ports[self._idx(v)]
        if not 1 <= port <= len(row):
            raise BadVertex(f"vertex {v} has no port {port} (degree {len(row)})")
        return row[port - 1]

    def port_to(self, v: int, u: int) -> int:
        """Port at ``v`` whose edge leads to ``u``."""
        try:
            return self._port_index[self._idx(v)][u]
        except KeyError:
            raise BadVertex(f"{u} is not a neighbor of {v}") from None

    # -- global structure ------------------------------------------------------

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @cached_property
    def m(self) -> int:
        return sum(len(row) for row in self.ports) // 2

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self.ports[self._idx(v)]

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, w) for u in self.vertices for w in self.neighbors(u) if u < w)

    def degrees(self) -> list[int]:
        return [len(row) for row in self.ports]

    def bfs(self, source: int) -> list[int]:
        """Distances from ``source``; index 0 is unused (set to -1)."""
        self._idx(source)
        dist = [-1] * (self.n + 1)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            for w in self.ports[u - 1]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    @cached_property
    def distance_matrix(self) -> tuple[tuple[int, ...], ...]:
        """All-pairs BFS distances, 1-based in both coordinates (row/col 0 unused)."""
        return tuple([()] + [tuple(self.bfs(v)) for v in self.vertices])

    @cached_property
    def _port_index(self) -> tuple[dict[int, int], ...]:
        return tuple({u: p for p, u in enumerate(row, start=1)} for row in self.ports)

    def _idx(self, v: int) -> int:
        if not isinstance(v, int) or not 1 <= v <= self.n:
            raise BadVertex(f"vertex {v!r} not in 1..{self.n}")
        return v - 1

    def __repr__(self) -> str:
        return f"PortLabeledGraph(n={self.n}, m={self.m})"

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "adj": {
                str(v): [{"port": p, "to": u} for p, u in enumerate(self.ports[v - 1], start=1)]
                for v in self.vertices
            },
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> PortLabeledGraph:
        if set(data) != {"n", "adj"}:
            raise BadParameters(f"graph JSON must have exactly the keys 'n' and 'adj', got {sorted(data)}")
        n = data["n"]
        adj = data["adj"]
        if not isinstance(n, int) or n < 1:
            raise BadParameters(f"'n' must be a positive integer, got {n!r}")
        if set(adj) != {str(v) for v in range(1, n + 1)}:
            raise BadParameters("'adj' must list every vertex 1..n exactly once")
        rows = []
        for v in range(1, n + 1):
            entries = adj[str(v)]
            by_port: dict[int, int] = {}
            for e in entries:
                if set(e) != {"port", "to"}:
                    raise BadParameters(f"vertex {v}: port entries need exactly 'port' and 'to'")
                if e["port"] in by_port:
                    raise BadPortPermutation(f"vertex {v}: port {e['port']} listed twice")
                by_port[e["port"]] = e["to"]
            if sorted(by_port) != list(range(1, len(by_port) + 1)):
                raise BadPortPermutation(
                    f"vertex {v}: ports {sorted(by_port)} are not 1..{len(by_port)}")
            rows.append(tuple(by_port[p] for p in range(1, len(by_port) + 1)))
        return cls(n, tuple(rows))


def _validate(n: int, ports: Sequence[Sequence[int]]) -> None:
    if n < 1 or len(ports) != n:
        raise BadParameters(f"need one port list per vertex (n={n}, got {len(ports)})")
    for v, row in enumerate(ports, start=1):
        seen = set()
        for u in row:
            if not isinstance(u, int) or not 1 <= u <= n:
                raise BadVertex(f"vertex {v} has a port leading to unknown vertex {u!r}")
            if u == v:
                raise SelfLoop(f"self-loop at vertex {v}")
            if u in seen:
                raise DuplicateEdge(f"parallel edge ({v}, {u})")
            seen.add(u)
    for v, row in enumerate(ports, start=1):
        for u in row:
            if v not in ports[u - 1]:
                raise BadPortPermutation(f"edge ({v}, {u}) is missing at endpoint {u}")
    # connectivity from vertex 1
    reached = {1}
    stack = [1]
    while stack:
        u = stack.pop()
        for w in ports[u - 1]:
            if w not in reached:
                reached.add(w)
                stack.append(w)
    if len(reached) != n:
        missing = min(set(range(1, n + 1)) - reached)
        raise DisconnectedGraph(f"vertex {missing} is not reachable from vertex 1")


def build_graph(
    edges: Iterable[tuple[int, int]],
    ports: Mapping[int, Sequence[int]] | None = None,
    n: int | None = None,
) -> PortLabeledGraph:
    """Build a validated graph from an edge list.

    ``ports`` optionally maps a vertex to its neighbors listed in port order
    (port 1 first). Vertices not mentioned get neighbor-id ascending ports.
    ``n`` defaults to the largest vertex id in ``edges``.
    """
    edges = [tuple(e) for e in edges]
    nbrs: dict[int, set[int]] = {}
    for e in edges:
        if len(e) != 2:
            raise BadParameters(f"edge {e!r} is not a vertex pair")
        u, v = e
        for w in (u, v):
            if not isinstance(w, int) or w < 1:
                raise BadVertex(f"edge {e!r}: vertex ids must be positive integers")
        if u == v:
            raise SelfLoop(f"self-loop at vertex {u}")
        if v in nbrs.get(u, ()):
            raise DuplicateEdge(f"edge ({u}, {v}) appears twice")
        nbrs.setdefault(u, set()).add(v)
        nbrs.setdefault(v, set()).add(u)
    if n is None:
        n = max(nbrs, default=1)
    if nbrs and max(nbrs) > n:
        raise BadVertex(f"vertex {max(nbrs)} exceeds n = {n}")
    ports = dict(ports or {})
    rows = []
    for v in range(1, n + 1):
        own = nbrs.get(v, set())
        if v in ports:
            order = tuple(ports.pop(v))
            if sorted(order) != sorted(own) or len(order) != len(own):
                raise BadPortPermutation(
                    f"vertex {v}: port order {list(order)} is not a permutation of its neighbors {sorted(own)}")
            rows.append(order)
        else:
            rows.append(tuple(sorted(own)))
    if ports:
        raise BadVertex(f"port assignment given for unknown vertex {min(ports)}")
    return PortLabeledGraph(n, tuple(rows))


# -- metrics -------------------------------------------------------------------

def distance(g: PortLabeledGraph, u: int, v: int) -> int:
    g._idx(u), g._idx(v)
    return g.distance_matrix[u][v]


def diameter(g: PortLabeledGraph) -> int:
    return max(max(row[1:]) for row in g.distance_matrix[1:])


def ball(g: PortLabeledGraph, center: int, radius: int) -> frozenset[int]:
    """Vertices at distance strictly less than ``radius`` from ``center``."""
    g._idx(center)
    row = g.distance_matrix[center]
    return frozenset(y for y in g.vertices if row[y] < radius)


def diameter_pair(g: PortLabeledGraph) -> tuple[int, int]:
    """First pair ``(u, v)``, ``u < v`` in id order, with ``d(u, v) = D``."""
    D = diameter(g)
    if D == 0:
        raise BadParameters("a single-vertex graph has no diameter pair")
    for u in g.vertices:
        for v in range(u + 1, g.n + 1):
            if g.distance_matrix[u][v] == D:
                return u, v
    raise AssertionError("unreachable")


def bipartition(g: PortLabeledGraph) -> tuple[frozenset[int], frozenset[int]]:
    """Color classes (the one containing vertex 1 first); raises NotBipartite."""
    dist = g.bfs(1)
    for u, v in g.edges():
        if dist[u] % 2 == dist[v] % 2:
            raise NotBipartite(f"edge ({u}, {v}) closes an odd cycle")
    even = frozenset(v for v in g.vertices if dist[v] % 2 == 0)
    return even, frozenset(g.vertices) - even


def is_bipartite(g: PortLabeledGraph) -> bool:
    try:
        bipartition(g)
    except NotBipartite:
        return False
    return True


# -- families ------------------------------------------------------------------

FAMILIES: dict[str, tuple[str, ...]] = {
    "path": ("n",),
    "cycle": ("n",),
    "clique": ("n",),
    "double_star": ("d", "p"),
    "chain_of_cliques": ("x", "y"),
    "complete_bipartite": ("a", "b"),
}


@dataclass(frozen=True)
class GraphFamilySpec:
    family: str
    params: Mapping[str, int] = field(default_factory=dict)
    seed: int | None = None

    def __post_init__(self) -> None:
        family = self.family.replace("-", "_")
        object.__setattr__(self, "family", family)
        if family not in FAMILIES:
            raise BadParameters(f"unknown family {self.family!r}; expected one of {sorted(FAMILIES)}")
        expected = set(FAMILIES[family])
        if set(self.params) != expected:
            raise BadParameters(f"family {family} takes parameters {sorted(expected)}, got {sorted(self.params)}")
        for k, val in self.params.items():
            if not isinstance(val, int) or isinstance(val, bool):
                raise BadParameters(f"parameter {k} must be an integer, got {val!r}")
        object.__setattr__(self, "params", dict(self.params))

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"family": self.family, **self.params}
        if self.seed is not None:
            out["seed"] = self.seed
        return out


def gen_family(spec: GraphFamilySpec) -> PortLabeledGraph:
    p = spec.params
    if spec.family == "path":
        _need(p["n"] >= 2, "path needs n >= 2")
        return build_graph([(i, i + 1) for i in range(1, p["n"])])
    if spec.family == "cycle":
        _need(p["n"] >= 3, "cycle needs n >= 3")
        n = p["n"]
        return build_graph([(i, i + 1) for i in range(1, n)] + [(n, 1)])
    if spec.family == "clique":
        _need(p["n"] >= 2, "clique needs n >= 2")
        return build_graph(combinations(range(1, p["n"] + 1), 2))
    if spec.family == "complete_bipartite":
        a, b = p["a"], p["b"]
        _need(a >= 1 and b >= 1, "complete_bipartite needs a, b >= 1")
        return build_graph([(i, a + j) for i in range(1, a + 1) for j in range(1, b + 1)])
    if spec.family == "double_star":
        return double_star(p["d"], p["p"])
    if spec.family == "chain_of_cliques":
        return chain_of_cliques(p["x"], p["y"], seed=spec.seed).graph
    raise AssertionError(spec.family)


def _need(cond: bool, msg: str) -> None:
    if not cond:
        raise BadParameters(msg)


def double_star(d: int, p: int) -> PortLabeledGraph:
    """Two stars with ``d`` leaves each whose centers share a bridge.

    Centers are vertices ``1`` and ``d + 2``; leaves of center 1 are ``2..d+1``,
    leaves of the other center ``d+3..2d+2``. Each center has degree ``d + 1``
    and the bridge sits on port ``p`` at both ends; leaves fill the remaining
    ports in id order.
    """
    _need(d >= 1, f"double_star needs d >= 1, got {d}")
    _need(1 <= p <= d + 1, f"bridge port p={p} must lie in 1..{d + 1} (center degree is d+1)")
    a, b = 1, d + 2
    leaves_a = list(range(2, d + 2))
    leaves_b = list(range(d + 3, 2 * d + 3))
    edges = [(a, w) for w in leaves_a] + [(b, w) for w in leaves_b] + [(a, b)]

    def order(leaves: list[int], other: int) -> list[int]:
        out = list(leaves)
        out.insert(p - 1, other)
        return out

    return build_graph(edges, ports={a: order(leaves_a, b), b: order(leaves_b, a)})


@dataclass(frozen=True)
class ChainOfCliques:
    """A member of the chain-of-cliques family plus its bookkeeping.

    ``cliques[i]`` holds the original clique vertices of clique ``i``
    (0-based); ``bridges[j]`` is the bridge ``(left, right)`` joining clique
    ``j`` to clique ``j + 1``; ``bridgeheads[i]`` lists the bridgeheads that
    subdivide edges of clique ``i``.
    """

    graph: PortLabeledGraph
    x: int
    y: int
    cliques: tuple[tuple[int, ...], ...]
    bridges: tuple[tuple[int, int], ...]
    bridgeheads: tuple[tuple[int, ...], ...]

    def middle(self) -> frozenset[int]:
        """Bridge endpoints of the middle bridge (even y) or the middle clique (odd y)."""
        if self.y % 2 == 0:
            return frozenset(self.bridges[self.y // 2 - 1])
        i = self.y // 2
        return frozenset(self.cliques[i]) | frozenset(self.bridgeheads[i])


def chain_of_cliques(x: int, y: int, seed: int | None = None) -> ChainOfCliques:
    """Random member of the chain of ``y`` cliques of size ``x``.

    For each pair of adjacent cliques one clique edge on each side is drawn
    uniformly among edges not already carrying a bridgehead, subdivided by a
    fresh vertex, and the two fresh vertices are joined by the bridge.
    """
    _need(x >= 3, f"chain_of_cliques needs x >= 3, got {x}")
    _need(y >= 1, f"chain_of_cliques needs y >= 1, got {y}")
    rng = random.Random(seed)
    cliques = [tuple(range(i * x + 1, (i + 1) * x + 1)) for i in range(y)]
    clique_edges = [list(combinations(c, 2)) for c in cliques]
    removed: set[tuple[int, int]] = set()
    edges: list[tuple[int, int]] = []
    bridges = []
    heads: list[list[int]] = [[] for _ in range(y)]
    next_id = x * y + 1
    for j in range(y - 1):
        pair = []
        for i in (j, j + 1):
            free = [e for e in clique_edges[i] if e not in removed]
            a, b = rng.choice(free)
            removed.add((a, b))
            h = next_id
            next_id += 1
            edges += [(a, h), (h, b)]
            heads[i].append(h)
            pair.append(h)
        edges.append((pair[0], pair[1]))
        bridges.append((pair[0], pair[1]))
    for ce in clique_edges:
        edges += [e for e in ce if e not in removed]
    g = build_graph(edges)
    return ChainOfCliques(g, x, y, tuple(cliques), tuple(bridges), tuple(tuple(h) for h in heads))


# -- JSON interchange ----------------------------------------------------------

def dump_graph(g: PortLabeledGraph, path=None) -> str:
    text = json.dumps(g.to_dict(), sort_keys=False, separators=(",", ":"))
    if path is not None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


def load_graph(path_or_text: str) -> PortLabeledGraph:
    text = path_or_text
    if not path_or_text.lstrip().startswith("{"):
        try:
            with open(path_or_text, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise BadParameters(f"cannot read graph file {path_or_text!r}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise BadParameters(f"graph file is not valid JSON: {exc}") from None
    return PortLabeledGraph.from_dict(data)
