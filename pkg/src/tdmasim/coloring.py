"""Distance-two coloring on top of the independent set.

Leaders color themselves and their dominated neighbors jointly (one block per
leader); non-leaders adopt whatever their smallest visible leader assigned
them and republish the colors they can see, tagged with the assigning
leader's (name, id) ref. ``used_colors`` honors only assignments made by
smaller-ordered leaders, which breaks symmetry between contending blocks.
"""
from __future__ import annotations

from typing import Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .state import NameRef, SharedVars, SpectrumEntry
from .topology import Topology


def compute_min_leader(
    me: NameRef,
    leader: bool,
    neighbors: Sequence[Tuple[NameRef, bool]],
) -> Optional[NameRef]:
    """Smallest (name, id) among visible leaders, including self when leading."""
    candidates = [ref for ref, flag in neighbors if flag]
    if leader:
        candidates.append(me)
    return min(candidates) if candidates else None


def used_colors(me: NameRef, spectra: Iterable[Sequence[SpectrumEntry]]) -> Set[int]:
    """Colors a leader must avoid: those assigned by strictly smaller leaders.

    Entries with a None assigner never block (an unassigned color carries no
    authority and will be re-derived anyway).
    """
    used: Set[int] = set()
    for spectrum in spectra:
        for color, assigner in spectrum:
            if assigner is not None and assigner < me:
                used.add(color)
    return used


def f_assign(dom: Sequence[NameRef], used: Set[int]) -> List[int]:
    """Smallest non-negative colors outside ``used``, one per dominated node.

    Callers pass ``dom`` sorted ascending; colors come back ascending and are
    matched positionally, so the smallest-named member gets the smallest color.
    """
    colors: List[int] = []
    candidate = 0
    while len(colors) < len(dom):
        if candidate not in used:
            colors.append(candidate)
        candidate += 1
    return colors


def adopt_color(
    me: int,
    min_leader: Optional[NameRef],
    leader_setcol: Optional[Tuple[Tuple[int, int], ...]],
    current: Optional[int],
) -> Optional[int]:
    """Non-leader color update: take the block assignment when visible."""
    if min_leader is None or leader_setcol is None:
        return current
    for node, color in leader_setcol:
        if node == me:
            return color
    return current


def coloring_problems(topology: Topology, colors: Mapping[int, Optional[int]]) -> List[str]:
    """Distance-two validity: all set, and distinct within every 2-ball."""
    problems = []
    for p in topology.nodes:
        if colors.get(p) is None:
            problems.append(f"node {p} uncolored")
    for p in topology.nodes:
        if colors.get(p) is None:
            continue
        hood = topology.neighborhood(p, 2) if topology.degree(p) else frozenset()
        for q in sorted(hood):
            if q <= p or colors.get(q) is None:
                continue
            if colors[p] == colors[q]:
                d = 1 if q in topology.neighbors(p) else 2
                problems.append(f"color {colors[p]} shared by {p} and {q} at distance {d}")
    return problems


def coloring_valid(topology: Topology, colors: Mapping[int, Optional[int]]) -> bool:
    return not coloring_problems(topology, colors)


def block_assignment_problems(
    topology: Topology, shared: Mapping[int, SharedVars]
) -> List[str]:
    """Leaders whose published block differs from f_assign of their used set.

    The used set is evaluated omnisciently at the radius the protocol reads
    it: every claim within three hops whose assigner is strictly smaller than
    the leader.
    """
    problems = []
    refs = {p: NameRef(sv.name, p) for p, sv in shared.items()}
    for lead in sorted(shared):
        sv = shared[lead]
        if not sv.leader:
            continue
        me = refs[lead]
        dom = sorted(
            [me]
            + [
                refs[q]
                for q in topology.neighbors(lead)
                if q in shared and shared[q].min_leader == me
            ]
        )
        used = {
            shared[x].color
            for x in topology.neighborhood(lead, 3)
            if x != lead
            and x in shared
            and shared[x].color is not None
            and shared[x].min_leader is not None
            and shared[x].min_leader < me
        }
        want = tuple(sorted((ref.node, c) for ref, c in zip(dom, f_assign(dom, used))))
        if sv.setcol != want:
            problems.append(f"leader {lead}: setcol {sv.setcol} != f_assign {want}")
        elif sv.color != dict(want)[lead]:
            problems.append(f"leader {lead}: color {sv.color} != own block entry")
    return problems


def coloring_locally_minimal(topology: Topology, shared: Mapping[int, SharedVars]) -> bool:
    """No node could take a strictly smaller color, and every leader's block
    equals f_assign of its used set."""
    colors = {p: sv.color for p, sv in shared.items()}
    if not coloring_valid(topology, colors):
        return False
    if minimality_gaps(topology, colors):
        return False
    return not block_assignment_problems(topology, shared)


def minimality_gaps(topology: Topology, colors: Mapping[int, int]) -> List[str]:
    """Nodes that could legally lower their color given everyone else's.

    The local rules do not promise to close every such gap (block assignment
    can strand a node above a hole opened by a remote block); this reports the
    gaps so experiments can quantify how often they survive at fixed points.
    """
    gaps = []
    for p in topology.nodes:
        if topology.degree(p) == 0:
            if colors[p] != 0:
                gaps.append(f"isolated node {p} has color {colors[p]} > 0")
            continue
        taken = {colors[q] for q in topology.neighborhood(p, 2) if q != p}
        lowest = 0
        while lowest in taken:
            lowest += 1
        if lowest < colors[p]:
            gaps.append(f"node {p} has color {colors[p]} but {lowest} is free in its 2-ball")
    return gaps
