"""Radio topologies: bounded-degree undirected graphs with planar positions.

A topology is the ground truth the simulator runs against. Nodes are opaque
integer ids with (x, y) positions; edges are symmetric, irreflexive, and every
node has at most ``delta`` neighbors. Geometric topologies keep the connection
radius so they can be mutated (nodes added or moved) deterministically.
"""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, Iterator, Mapping, Optional, Tuple

NodeId = int


class TopologyError(ValueError):
    """Malformed topology or invalid query."""


@dataclass(frozen=True)
class GeometricSpec:
    """Recipe for a random geometric topology on the unit square.

    ``n`` seeded uniform points are connected when their distance is at most
    ``radius``; any node whose degree exceeds ``delta`` then has its longest
    edges pruned (symmetrically) until the bound holds.
    """

    n: int
    radius: float
    delta: int
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise TopologyError("geometric spec needs n >= 1")
        if self.radius <= 0:
            raise TopologyError("geometric spec needs radius > 0")
        if self.delta < 1:
            raise TopologyError("geometric spec needs delta >= 1")


class Topology:
    """Immutable undirected graph with positions and a degree bound."""

    __slots__ = ("delta", "adjacency", "positions", "radius", "_hood_cache", "_dist_cache")

    def __init__(
        self,
        delta: int,
        adjacency: Mapping[NodeId, Iterable[NodeId]],
        positions: Mapping[NodeId, Tuple[float, float]],
        radius: Optional[float] = None,
    ) -> None:
        if delta < 1:
            raise TopologyError("delta must be >= 1")
        adj: Dict[NodeId, FrozenSet[NodeId]] = {
            int(p): frozenset(int(q) for q in qs) for p, qs in adjacency.items()
        }
        pos = {int(p): (float(x), float(y)) for p, (x, y) in positions.items()}
        if set(pos) != set(adj):
            raise TopologyError("positions and adjacency must cover the same nodes")
        for p, qs in adj.items():
            if p in qs:
                raise TopologyError(f"self-loop at node {p}")
            if len(qs) > delta:
                raise TopologyError(f"node {p} has degree {len(qs)} > delta {delta}")
            for q in qs:
                if q not in adj:
                    raise TopologyError(f"edge {p}-{q} references unknown node {q}")
                if p not in adj[q]:
                    raise TopologyError(f"edge {p}-{q} is not symmetric")
        self.delta = delta
        self.adjacency = adj
        self.positions = pos
        self.radius = radius
        self._hood_cache: Dict[Tuple[NodeId, int], FrozenSet[NodeId]] = {}
        self._dist_cache: Dict[int, Dict[NodeId, Dict[NodeId, int]]] = {}

    # -- basic views ---------------------------------------------------------

    @property
    def nodes(self) -> Tuple[NodeId, ...]:
        return tuple(sorted(self.adjacency))

    def __len__(self) -> int:
        return len(self.adjacency)

    def __contains__(self, p: NodeId) -> bool:
        return p in self.adjacency

    def degree(self, p: NodeId) -> int:
        return len(self.neighbors(p))

    def neighbors(self, p: NodeId) -> FrozenSet[NodeId]:
        try:
            return self.adjacency[p]
        except KeyError:
            raise TopologyError(f"unknown node {p}") from None

    def edges(self) -> Iterator[Tuple[NodeId, NodeId]]:
        for p in sorted(self.adjacency):
            for q in sorted(self.adjacency[p]):
                if p < q:
                    yield (p, q)

    def neighborhood(self, p: NodeId, i: int) -> FrozenSet[NodeId]:
        """Distance-``i`` neighborhood by the expansion rule, i in {1, 2, 3}.

        N^1 is the plain neighbor set (never contains ``p``); each further
        level unions in the neighbors of the previous level, so for i >= 2 the
        result contains ``p`` itself whenever ``p`` has any neighbor.
        """
        if i not in (1, 2, 3):
            raise TopologyError(f"neighborhood level must be 1, 2 or 3, got {i}")
        key = (p, i)
        got = self._hood_cache.get(key)
        if got is not None:
            return got
        cur = set(self.neighbors(p))
        for _ in range(i - 1):
            grown = set(cur)
            for q in cur:
                grown |= self.adjacency[q]
            cur = grown
        out = frozenset(cur)
        self._hood_cache[key] = out
        return out

    def hop_distances(self, limit: int) -> Dict[NodeId, Dict[NodeId, int]]:
        """BFS hop distances up to ``limit`` for every node (cached)."""
        got = self._dist_cache.get(limit)
        if got is not None:
            return got
        out: Dict[NodeId, Dict[NodeId, int]] = {}
        for p in self.adjacency:
            dist = {p: 0}
            frontier = [p]
            for d in range(1, limit + 1):
                nxt = []
                for q in frontier:
                    for r in self.adjacency[q]:
                        if r not in dist:
                            dist[r] = d
                            nxt.append(r)
                frontier = nxt
                if not frontier:
                    break
            out[p] = dist
        self._dist_cache[limit] = out
        return out

    # -- mutation (returns new topologies) -----------------------------------

    def add_node(self, p: NodeId, x: float, y: float) -> "Topology":
        if p in self.adjacency:
            raise TopologyError(f"node {p} already exists")
        if self.radius is None:
            raise TopologyError("add_node needs a geometric topology (radius set)")
        pos = dict(self.positions)
        pos[p] = (float(x), float(y))
        return _from_positions(pos, self.radius, self.delta)

    def remove_node(self, p: NodeId) -> "Topology":
        if p not in self.adjacency:
            raise TopologyError(f"unknown node {p}")
        adj = {
            q: (qs - {p}) for q, qs in self.adjacency.items() if q != p
        }
        pos = {q: xy for q, xy in self.positions.items() if q != p}
        return Topology(self.delta, adj, pos, radius=self.radius)

    def move_node(self, p: NodeId, x: float, y: float) -> "Topology":
        if p not in self.adjacency:
            raise TopologyError(f"unknown node {p}")
        if self.radius is None:
            raise TopologyError("move_node needs a geometric topology (radius set)")
        pos = dict(self.positions)
        pos[p] = (float(x), float(y))
        return _from_positions(pos, self.radius, self.delta)

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        out = {
            "delta": self.delta,
            "nodes": [
                {"id": p, "x": self.positions[p][0], "y": self.positions[p][1]}
                for p in self.nodes
            ],
            "edges": [[a, b] for a, b in self.edges()],
        }
        if self.radius is not None:
            out["radius"] = self.radius
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        try:
            delta = int(data["delta"])
            raw_nodes = data["nodes"]
            raw_edges = data["edges"]
        except (KeyError, TypeError) as exc:
            raise TopologyError(f"topology file missing field: {exc}") from None
        positions: Dict[NodeId, Tuple[float, float]] = {}
        for item in raw_nodes:
            p = int(item["id"])
            if p in positions:
                raise TopologyError(f"duplicate node id {p}")
            positions[p] = (float(item["x"]), float(item["y"]))
        adj: Dict[NodeId, set] = {p: set() for p in positions}
        for pair in raw_edges:
            a, b = int(pair[0]), int(pair[1])
            if a == b:
                raise TopologyError(f"self-loop edge [{a}, {b}]")
            if a not in adj or b not in adj:
                raise TopologyError(f"edge [{a}, {b}] references unknown node")
            if b in adj[a]:
                raise TopologyError(f"duplicate edge [{a}, {b}]")
            adj[a].add(b)
            adj[b].add(a)
        radius = data.get("radius")
        return cls(delta, adj, positions, radius=None if radius is None else float(radius))

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "Topology":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _from_positions(
    positions: Mapping[NodeId, Tuple[float, float]], radius: float, delta: int
) -> Topology:
    """Connect nodes within ``radius``, then prune longest edges over-degree.

    Pruning walks candidate edges from longest to shortest (ties broken by the
    smaller id pair) and drops an edge whenever either endpoint still exceeds
    ``delta``; each node therefore loses exactly its longest excess edges.
    """
    ids = sorted(positions)
    cand = []
    for i, a in enumerate(ids):
        ax, ay = positions[a]
        for b in ids[i + 1 :]:
            bx, by = positions[b]
            d = math.dist((ax, ay), (bx, by))
            if d <= radius:
                cand.append((d, a, b))
    cand.sort(key=lambda e: (-e[0], e[1], e[2]))
    adj: Dict[NodeId, set] = {p: set() for p in ids}
    for _, a, b in cand:
        adj[a].add(b)
        adj[b].add(a)
    for _, a, b in cand:
        if len(adj[a]) > delta or len(adj[b]) > delta:
            adj[a].discard(b)
            adj[b].discard(a)
    return Topology(delta, adj, dict(positions), radius=radius)


def generate_geometric(spec: GeometricSpec) -> Topology:
    """Seeded random geometric topology per ``spec`` (ids 0..n-1)."""
    rng = random.Random(f"geo:{spec.seed}")
    positions = {p: (rng.random(), rng.random()) for p in range(spec.n)}
    return _from_positions(positions, spec.radius, spec.delta)


def star_chain_topology() -> Topology:
    """13-node reference network: an 8-spoke star with a 4-node chain attached.

    Node 0 is the hub; nodes 1..8 are its spokes; nodes 9..12 form a chain
    hanging off spoke 2. The hub's two-hop neighborhood is a 9-clique in the
    square graph, which forces 9 colors in any distance-two coloring.
    """
    pos = {
        0: (2.0, 2.0),
        1: (0.5, 2.0),
        2: (3.5, 2.0),
        3: (2.0, 3.5),
        4: (2.0, 0.5),
        5: (3.0, 3.0),
        6: (3.0, 1.0),
        7: (1.0, 1.0),
        8: (1.0, 3.0),
        9: (5.0, 2.0),
        10: (6.5, 2.0),
        11: (8.0, 2.0),
        12: (9.5, 2.0),
    }
    pos = {p: (x / 10.0, y / 10.0) for p, (x, y) in pos.items()}
    edges = [(0, s) for s in range(1, 9)] + [(2, 9), (9, 10), (10, 11), (11, 12)]
    adj: Dict[NodeId, set] = {p: set() for p in pos}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    return Topology(8, adj, pos)


def path_topology(n: int, delta: int = 2) -> Topology:
    """Path on ``n`` nodes laid out on a line."""
    if n < 1:
        raise TopologyError("path needs n >= 1")
    pos = {p: (p / max(1, n - 1), 0.0) for p in range(n)}
    adj: Dict[NodeId, set] = {p: set() for p in range(n)}
    for p in range(n - 1):
        adj[p].add(p + 1)
        adj[p + 1].add(p)
    return Topology(max(delta, 2), adj, pos)
