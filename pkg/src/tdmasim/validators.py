"""Omniscient oracles and legitimacy tracking.

Three kinds of truth live here: exhaustive brute-force references for small
graphs, a layered fixed-point oracle that predicts the converged state from
names alone (the protocol's fixed point is unique given distinct names), and
a convergence tracker that evaluates per-node legitimacy predicates every
superframe and derives retrospective local-convergence stamps.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

from . import coloring, naming, slots
from .slots import IntervalSet
from .state import NameRef, NodeState
from .topology import NodeId, Topology

GUARD_BAND = 50


# -- brute force ---------------------------------------------------------------


def _check_size(topology: Topology, max_nodes: int) -> None:
    if len(topology.nodes) > max_nodes:
        raise ValueError(
            f"brute force capped at {max_nodes} nodes, got {len(topology.nodes)}"
        )


def brute_force_mis(topology: Topology, max_nodes: int = 10) -> FrozenSet[FrozenSet[NodeId]]:
    """Every maximal independent set, by subset enumeration."""
    _check_size(topology, max_nodes)
    nodes = topology.nodes
    result = set()
    for r in range(len(nodes) + 1):
        for combo in itertools.combinations(nodes, r):
            chosen = set(combo)
            if any(b in chosen for a in combo for b in topology.neighbors(a)):
                continue
            if all(
                p in chosen or any(q in chosen for q in topology.neighbors(p))
                for p in nodes
            ):
                result.add(frozenset(chosen))
    return frozenset(result)


def _square_adjacency(topology: Topology) -> Dict[NodeId, Set[NodeId]]:
    adj: Dict[NodeId, Set[NodeId]] = {}
    for p in topology.nodes:
        ball = topology.neighborhood(p, 2) if topology.degree(p) else frozenset()
        adj[p] = {q for q in ball if q != p}
    return adj


def brute_force_min_d2_coloring(topology: Topology, max_nodes: int = 10) -> int:
    """Exact minimum color count under the distance-two constraint.

    Backtracking over the square graph, nodes in descending square-degree
    order, growing k until a proper coloring exists.
    """
    _check_size(topology, max_nodes)
    nodes = sorted(topology.nodes)
    if not nodes:
        return 0
    adj = _square_adjacency(topology)
    order = sorted(nodes, key=lambda p: (-len(adj[p]), p))

    def colorable(k: int) -> bool:
        assigned: Dict[NodeId, int] = {}

        def place(i: int) -> bool:
            if i == len(order):
                return True
            p = order[i]
            taken = {assigned[q] for q in adj[p] if q in assigned}
            cap = min(k, len(assigned) + 1)  # symmetry: first use of a color
            for c in range(cap):
                if c in taken:
                    continue
                assigned[p] = c
                if place(i + 1):
                    return True
                del assigned[p]
            return False

        return place(0)

    k = 1
    while not colorable(k):
        k += 1
    return k


# -- layered fixed-point oracle --------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    """Predicted converged state for given names."""

    names: Dict[NodeId, int]
    refs: Dict[NodeId, NameRef]
    leaders: Dict[NodeId, bool]
    min_leaders: Dict[NodeId, Optional[NameRef]]
    setcols: Dict[NodeId, Tuple[Tuple[NodeId, int], ...]]
    colors: Dict[NodeId, int]
    bases: Dict[NodeId, int]
    itvls: Dict[NodeId, IntervalSet]


def _two_ball(topology: Topology, p: NodeId) -> FrozenSet[NodeId]:
    return topology.neighborhood(p, 2) if topology.degree(p) else frozenset()


def _three_ball(topology: Topology, p: NodeId) -> FrozenSet[NodeId]:
    return topology.neighborhood(p, 3) if topology.degree(p) else frozenset()


def fixed_point_oracle(topology: Topology, names: Mapping[NodeId, int]) -> OracleResult:
    """Predict the unique fixed point reached once names are distinct in every
    3-ball: greedy MIS in ref order, block coloring in leader-ref order with
    the smaller-assigner used-set, then interval claiming in priority order."""
    refs = {p: NameRef(names[p], p) for p in topology.nodes}

    leaders: Dict[NodeId, bool] = {}
    for p in sorted(topology.nodes, key=lambda q: refs[q]):
        leaders[p] = not any(
            leaders.get(q, False) and refs[q] < refs[p] for q in topology.neighbors(p)
        )

    min_leaders: Dict[NodeId, Optional[NameRef]] = {}
    for p in topology.nodes:
        cands = [refs[q] for q in topology.neighbors(p) if leaders[q]]
        if leaders[p]:
            cands.append(refs[p])
        min_leaders[p] = min(cands) if cands else None

    colors: Dict[NodeId, int] = {}
    setcols: Dict[NodeId, Tuple[Tuple[NodeId, int], ...]] = {
        p: () for p in topology.nodes
    }
    for lead in sorted((p for p in topology.nodes if leaders[p]), key=lambda q: refs[q]):
        dom = sorted(
            [refs[lead]]
            + [
                refs[q]
                for q in topology.neighbors(lead)
                if min_leaders[q] is not None and min_leaders[q].node == lead
            ]
        )
        # claims travel two hops past their publisher (publishers relay their
        # 1-hop ring, readers scan every cached spectrum), so a leader sees
        # every smaller-assigner color within its 3-ball
        used = {
            colors[x]
            for x in _three_ball(topology, lead)
            if x != lead
            and x in colors
            and min_leaders[x] is not None
            and min_leaders[x] < refs[lead]
        }
        assigned = coloring.f_assign(dom, used)
        setcols[lead] = tuple(sorted((r.node, c) for r, c in zip(dom, assigned)))
        for r, c in zip(dom, assigned):
            colors[r.node] = c

    bases: Dict[NodeId, int] = {}
    for p in topology.nodes:
        seen = {colors[p]} | {colors[q] for q in _two_ball(topology, p)}
        bases[p] = len(seen)

    itvls: Dict[NodeId, IntervalSet] = {}
    keyed = sorted(
        topology.nodes, key=lambda p: slots.priority_key(bases[p], colors[p], refs[p])
    )
    for p in keyed:
        my_key = slots.priority_key(bases[p], colors[p], refs[p])
        blocked = slots.constrained_set(
            my_key,
            (
                (slots.priority_key(bases[q], colors[q], refs[q]), itvls[q])
                for q in _two_ball(topology, p)
                if q != p and q in itvls
            ),
        )
        itvls[p] = slots.g_assign(slots.share_bound(bases[p]), blocked)

    return OracleResult(
        names=dict(names),
        refs=refs,
        leaders=leaders,
        min_leaders=min_leaders,
        setcols=setcols,
        colors=colors,
        bases=bases,
        itvls=itvls,
    )


def oracle_mismatches(
    oracle: OracleResult, states: Mapping[NodeId, NodeState]
) -> List[str]:
    """Field-by-field comparison of a run's final shared state to the oracle."""
    out = []
    for p, st in sorted(states.items()):
        sv = st.shared
        if sv.name != oracle.names[p]:
            out.append(f"{p}: name {sv.name} != {oracle.names[p]}")
        if sv.leader != oracle.leaders[p]:
            out.append(f"{p}: leader {sv.leader} != {oracle.leaders[p]}")
        if sv.min_leader != oracle.min_leaders[p]:
            out.append(f"{p}: min_leader {sv.min_leader} != {oracle.min_leaders[p]}")
        if sv.color != oracle.colors[p]:
            out.append(f"{p}: color {sv.color} != {oracle.colors[p]}")
        if sv.setcol != oracle.setcols[p]:
            out.append(f"{p}: setcol {sv.setcol} != {oracle.setcols[p]}")
        if sv.base != oracle.bases[p]:
            out.append(f"{p}: base {sv.base} != {oracle.bases[p]}")
        if sv.itvl != oracle.itvls[p]:
            out.append(f"{p}: itvl {sv.itvl} != {oracle.itvls[p]}")
    return out


# -- per-superframe legitimacy tracking ------------------------------------------

LAYERS = ("naming", "mis", "coloring", "slots")


@dataclass
class LegitimacyReport:
    """Per-node predicate outcomes and retrospective convergence stamps.

    ``stamps[layer][node]`` is the earliest superframe from which the
    predicates of that layer and every layer below held for the rest of the
    recorded run (None if never, or if the converged suffix is shorter than
    the guard band). ``uniq_flaps`` records every true->false transition of
    the naming predicate with its superframe.
    """

    stamps: Dict[str, Dict[NodeId, Optional[int]]]
    overall: Dict[NodeId, Optional[int]]
    global_time: Optional[int]
    final_ok: Dict[str, Dict[NodeId, bool]]
    uniq_flaps: List[Tuple[int, NodeId]]
    recorded_superframes: int
    guard_band: int


class ConvergenceTracker:
    """Evaluates the four per-node legitimacy predicates each superframe.

    Only nodes whose dependency footprint changed are re-evaluated: predicate
    inputs live within the 3-ball plus the entries a changed cache holds, so
    a quiescent network costs nothing per superframe.
    """

    def __init__(self, topology: Topology, holders: Optional[Dict[NodeId, set]] = None):
        self.topology = topology
        self.holders = holders
        self.nodes = topology.nodes
        self.ok = {layer: {p: False for p in self.nodes} for layer in LAYERS}
        self.last_false = {layer: {p: -1 for p in self.nodes} for layer in LAYERS}
        self.uniq_flaps: List[Tuple[int, NodeId]] = []
        self.superframes = 0

    def _dirty(self, states: Mapping[NodeId, NodeState], changed: Set[NodeId]) -> Set[NodeId]:
        dirty: Set[NodeId] = set()
        for x in changed:
            if x not in self.topology.adjacency:
                continue
            if self.topology.degree(x):
                dirty |= self.topology.neighborhood(x, 3)
            dirty.add(x)
            dirty |= states[x].cache.entries.keys()
        return dirty & set(self.nodes)

    def _predicates(self, states: Mapping[NodeId, NodeState], p: NodeId) -> Dict[str, bool]:
        topo = self.topology
        sv = states[p].shared
        ok_naming = naming.uniq(topo, states, p, self.holders)

        if sv.leader:
            ok_mis = not any(states[q].shared.leader for q in topo.neighbors(p))
        else:
            ok_mis = any(states[q].shared.leader for q in topo.neighbors(p))

        ball2 = _two_ball(topo, p)
        ok_color = sv.color is not None and all(
            states[q].shared.color is not None and states[q].shared.color != sv.color
            for q in ball2
            if q != p
        )

        ok_slots = False
        if ok_color:
            seen = {sv.color} | {states[q].shared.color for q in ball2}
            if sv.base == len(seen):
                my_key = slots.priority_key(sv.base, sv.color, sv.ref)
                cands = []
                for q in ball2:
                    if q == p:
                        continue
                    qv = states[q].shared
                    if qv.base is not None and qv.color is not None:
                        cands.append(
                            (slots.priority_key(qv.base, qv.color, qv.ref), qv.itvl)
                        )
                blocked = slots.constrained_set(my_key, cands)
                ok_slots = sv.itvl == slots.g_assign(slots.share_bound(sv.base), blocked)

        return {
            "naming": ok_naming,
            "mis": ok_mis,
            "coloring": ok_color,
            "slots": ok_slots,
        }

    def observe(
        self,
        superframe: int,
        states: Mapping[NodeId, NodeState],
        changed: Set[NodeId],
        force_all: bool = False,
    ) -> None:
        """Record predicate values at the end of ``superframe``."""
        self.superframes = superframe + 1
        targets = self.nodes if force_all else sorted(self._dirty(states, changed))
        for p in targets:
            vals = self._predicates(states, p)
            if self.ok["naming"][p] and not vals["naming"]:
                self.uniq_flaps.append((superframe, p))
            cumulative = True
            for layer in LAYERS:
                cumulative = cumulative and vals[layer]
                self.ok[layer][p] = cumulative
                if not cumulative:
                    self.last_false[layer][p] = superframe
        # nodes not re-evaluated keep previous values; a predicate that was
        # false and unevaluated stays false, so its last_false must advance
        for layer in LAYERS:
            lf = self.last_false[layer]
            okl = self.ok[layer]
            for p in self.nodes:
                if not okl[p] and lf[p] != superframe:
                    lf[p] = superframe

    def report(self, guard_band: int = GUARD_BAND) -> LegitimacyReport:
        total = self.superframes
        stamps: Dict[str, Dict[NodeId, Optional[int]]] = {}
        for layer in LAYERS:
            per: Dict[NodeId, Optional[int]] = {}
            for p in self.nodes:
                stamp = self.last_false[layer][p] + 1
                if stamp >= total or total - stamp < guard_band:
                    per[p] = None
                else:
                    per[p] = stamp
            stamps[layer] = per
        overall = dict(stamps["slots"])
        values = list(overall.values())
        global_time = None if any(v is None for v in values) or not values else max(values)
        return LegitimacyReport(
            stamps=stamps,
            overall=overall,
            global_time=global_time,
            final_ok={layer: dict(self.ok[layer]) for layer in LAYERS},
            uniq_flaps=list(self.uniq_flaps),
            recorded_superframes=total,
            guard_band=guard_band,
        )


# -- fault containment ------------------------------------------------------------


def containment_violations(
    topology: Topology,
    collisions: Iterable[Tuple[int, int, NodeId]],
    crashed: Set[NodeId],
    after_superframe: int,
) -> List[Tuple[int, int, NodeId]]:
    """Post-crash TDMA collisions at receivers outside the crashed 3-balls.

    ``collisions`` yields (superframe, slot, receiver) triples.
    """
    allowed: Set[NodeId] = set()
    for c in crashed:
        if c in topology.adjacency and topology.degree(c):
            allowed |= topology.neighborhood(c, 3)
        allowed.add(c)
    return [
        (sf, slot, r)
        for sf, slot, r in collisions
        if sf >= after_superframe and r not in allowed
    ]


def collision_containment(
    topology: Topology,
    collisions: Iterable[Tuple[int, int, NodeId]],
    crashed: Set[NodeId],
    after_superframe: int,
) -> bool:
    return not containment_violations(topology, collisions, crashed, after_superframe)
