"""Maximal-independent-set layer: local rules and the legitimacy predicate.

A node joins the set when every known direct neighbor orders above it, leaves
when a smaller-ordered neighbor is already in, and re-joins when every
smaller-ordered neighbor is out. Ordering is by (name, id), so the layer keeps
making progress even while names are still being repaired.
"""
from __future__ import annotations

from typing import Iterable, List, Mapping, Sequence, Tuple

from .state import NameRef
from .topology import Topology


def mis_step(me: NameRef, neighbors: Sequence[Tuple[NameRef, bool]], leader: bool) -> bool:
    """One evaluation of the three membership rules for a single node.

    ``neighbors`` pairs each cached direct neighbor's (name, id) ref with its
    cached leader flag. Rules fire in fixed order and at most one applies.
    """
    if not leader and all(ref > me for ref, _ in neighbors):
        return True
    if leader and any(flag and ref < me for ref, flag in neighbors):
        return False
    if (
        not leader
        and any(ref < me for ref, _ in neighbors)
        and all(not flag for ref, flag in neighbors if ref < me)
    ):
        return True
    return leader


def mis_problems(topology: Topology, leaders: Mapping[int, bool]) -> List[str]:
    """Independence plus maximality violations, empty when legitimate."""
    problems = []
    for a, b in topology.edges():
        if leaders[a] and leaders[b]:
            problems.append(f"adjacent leaders {a} and {b}")
    for p in topology.nodes:
        if not leaders[p] and not any(leaders[q] for q in topology.neighbors(p)):
            problems.append(f"node {p} undominated")
    return problems


def mis_valid(topology: Topology, leaders: Mapping[int, bool]) -> bool:
    return not mis_problems(topology, leaders)
