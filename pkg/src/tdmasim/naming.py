"""Unique naming over a namespace polynomially larger than the 3-ball.

A node redraws its name only while the name collides with its candidate set
(every name currently cached, any tier). Redraws are rejection-sampled
uniformly from the namespace minus the candidate set, so the draw is always a
fresh name some cached node is not already using.

``uniq`` is the layer's stability predicate. Beyond the obvious clauses
(self-avoidance, distinctness across the 3-ball, mutual knowledge) it also
rejects states in which a belief that is still propagating could re-trigger a
redraw later: a foreign belief carrying p's name violates when it sits close
enough to reach someone in p's 3-ball before going stale, and a stale belief
about p itself violates when it can reach a node that would echo it back into
p's candidate set. Without those closure clauses the predicate would briefly
hold and then flip while old gossip drains, which the fault-free guarantees
forbid.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Set

from .state import NodeState
from .topology import NodeId, Topology


class NamespaceExhausted(RuntimeError):
    """No name outside the candidate set remains; the namespace is too small."""


@dataclass(frozen=True)
class NamingParams:
    """Namespace sizing: ceil(delta**t) floored at one past the cache capacity.

    The floor guarantees a redraw can never exhaust the namespace: the
    candidate set is built from cached names and a cache holds at most
    delta**3 + delta**2 + delta entries, so one spare name always remains even
    when every entry claims a distinct name. The nominal delta**t dominates
    for every delta >= 2 at the default t.
    """

    delta: int
    t: int = 6

    def __post_init__(self) -> None:
        if self.delta < 1:
            raise ValueError("delta must be >= 1")
        if self.t <= 3:
            raise ValueError("t must exceed 3")

    @property
    def namespace(self) -> int:
        d = self.delta
        return max(math.ceil(d**self.t), d**3 + d**2 + d + 1)

    @property
    def Delta(self) -> int:
        return self.namespace


def new_id(current: int, cids: Iterable[int], namespace: int, rng: random.Random) -> int:
    """Uniform draw from the namespace minus ``cids`` via rejection sampling."""
    taken = set(cids)
    if sum(1 for c in taken if 0 <= c < namespace) >= namespace:
        raise NamespaceExhausted(f"all {namespace} names are candidates")
    while True:
        candidate = rng.randrange(namespace)
        if candidate not in taken:
            return candidate


def longest_increasing_path(topology: Topology, names: Mapping[NodeId, int]) -> int:
    """Node count of the longest path with strictly increasing names.

    Ties break nothing: equal-name edges are not increasing. With distinct
    names inside every 3-ball this is bounded by the namespace-derived cap the
    experiments assert.
    """
    order = sorted(topology.nodes, key=lambda p: (names[p], p))
    best: Dict[NodeId, int] = {}
    for p in order:
        prev = [
            best[q]
            for q in topology.neighbors(p)
            if names[q] < names[p]
        ]
        best[p] = 1 + max(prev, default=0)
    return max(best.values(), default=0)


def _holders_of(states: Mapping[NodeId, NodeState], origin: NodeId) -> List[NodeId]:
    return sorted(
        x for x, st in states.items() if origin in st.cache.entries
    )


def uniq(
    topology: Topology,
    states: Mapping[NodeId, NodeState],
    p: NodeId,
    holders: Optional[Mapping[NodeId, Set[NodeId]]] = None,
) -> bool:
    """Naming stability at ``p``: held, mutually known, and flap-proof.

    Knowledge of ``p``'s name only counts when the recorded hop tier is
    plausible (``hops >= d(q, p)``).  Arbitrary initial states can seed
    caches with the right name at an impossible tier; such an entry can
    never be refreshed (the tier rule rejects weaker-tier updates), so it
    would silently age out later and un-stabilize the predicate.  Entries
    at a *higher* tier than the true distance are genuine — they arrived
    along a longer path and get promoted once the shortest path delivers.

    ``holders`` is an optional origin -> cache-owner index; without it the
    reverse lookup scans every cache (fine for tests, slow in the simulator).
    """
    my = states[p].shared.name
    if my in states[p].cache.names():
        return False

    dist = topology.hop_distances(6)[p]

    ball3 = topology.neighborhood(p, 3) if topology.degree(p) else frozenset()
    for q in ball3:
        if q == p:
            continue
        st_q = states[q]
        if st_q.shared.name == my:
            return False
        entry = st_q.cache.entries.get(p)
        if entry is None or entry.snap.name != my:
            return False
        if entry.hops < dist.get(q, 7):
            # a belief cannot genuinely arrive in fewer hops than the true
            # distance, so this is an initialization artifact; the tier rule
            # blocks genuine refreshes of it, and counting it as knowledge
            # would let its eventual expiry regress the predicate
            return False
        if my not in st_q.cache.names():
            return False

    # Conflicting foreign beliefs near p: a cached name equal to p's, held at
    # x about some other origin, violates when hops + d(x, p) <= 3.
    ball2 = topology.neighborhood(p, 2) if topology.degree(p) else frozenset()
    for x in ball2:
        d = dist.get(x, 7) if x != p else 0
        for origin, hops in states[x].cache.beliefs_named(my):
            if origin != p and hops <= 3 - d:
                return False

    # Stale beliefs about p anywhere: wrong cached name for p at x violates
    # when it can still be echoed into p's candidate set (hops + d(x, p) <= 6).
    if holders is not None:
        holding = sorted(holders.get(p, ()))
    else:
        holding = _holders_of(states, p)
    for x in holding:
        entry = states[x].cache.entries.get(p)
        if entry is None or entry.snap.name == my:
            continue
        if entry.hops <= 6 - dist.get(x, 7):
            return False
    return True


def uniq_all(
    topology: Topology,
    states: Mapping[NodeId, NodeState],
    holders: Optional[Mapping[NodeId, Set[NodeId]]] = None,
) -> Dict[NodeId, bool]:
    return {p: uniq(topology, states, p, holders) for p in topology.nodes}
