"""Slot allocation: exact rational interval sets and the bandwidth rules.

Every node ends up owning a union of half-open subintervals of [0, 1), all
arithmetic in ``fractions.Fraction`` so disjointness and share totals are
exact. A node's share bound is 1/base, where base counts the distinct colors
in its two-hop neighborhood (own color included); more constrained nodes (by
descending base, then ascending color) claim first and everyone else fills
the leftmost remaining gaps.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

ZERO = Fraction(0)
ONE = Fraction(1)


class IntervalSet:
    """Immutable normalized union of half-open intervals within [0, 1)."""

    __slots__ = ("pairs",)

    def __init__(self, pairs: Iterable[Tuple[Fraction, Fraction]] = ()) -> None:
        items: List[Tuple[Fraction, Fraction]] = []
        for lo, hi in pairs:
            lo = Fraction(lo)
            hi = Fraction(hi)
            if lo < ZERO or hi > ONE:
                raise ValueError(f"interval [{lo}, {hi}) outside [0, 1)")
            if lo < hi:
                items.append((lo, hi))
        items.sort()
        merged: List[Tuple[Fraction, Fraction]] = []
        for lo, hi in items:
            if merged and lo <= merged[-1][1]:
                last_lo, last_hi = merged[-1]
                if hi > last_hi:
                    merged[-1] = (last_lo, hi)
            else:
                merged.append((lo, hi))
        object.__setattr__(self, "pairs", tuple(merged))

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("IntervalSet is immutable")

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.pairs == other.pairs

    def __hash__(self) -> int:
        return hash(self.pairs)

    def __bool__(self) -> bool:
        return bool(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __repr__(self) -> str:
        body = ", ".join(f"[{lo}, {hi})" for lo, hi in self.pairs)
        return f"IntervalSet({body})"

    def total(self) -> Fraction:
        return sum((hi - lo for lo, hi in self.pairs), ZERO)

    def union(self, *others: "IntervalSet") -> "IntervalSet":
        pairs = list(self.pairs)
        for o in others:
            pairs.extend(o.pairs)
        return IntervalSet(pairs)

    def intersects(self, other: "IntervalSet") -> bool:
        a, b = self.pairs, other.pairs
        i = j = 0
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                return True
            if a[i][1] <= b[j][1]:
                i += 1
            else:
                j += 1
        return False

    def gaps(self) -> "IntervalSet":
        """Complement within [0, 1)."""
        out = []
        cursor = ZERO
        for lo, hi in self.pairs:
            if cursor < lo:
                out.append((cursor, lo))
            cursor = hi
        if cursor < ONE:
            out.append((cursor, ONE))
        return IntervalSet(out)

    def contains_point(self, x: Fraction) -> bool:
        for lo, hi in self.pairs:
            if lo <= x < hi:
                return True
            if lo > x:
                break
        return False

    # canonical serialization: list of [lo, hi] fraction strings
    def to_json(self) -> List[List[str]]:
        return [[str(lo), str(hi)] for lo, hi in self.pairs]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[str]]) -> "IntervalSet":
        return cls((Fraction(lo), Fraction(hi)) for lo, hi in data)


EMPTY = IntervalSet()
FULL = IntervalSet([(ZERO, ONE)])


def g_assign(bound: Fraction, blocked: IntervalSet) -> IntervalSet:
    """Greedy maximal claim: leftmost gaps of ``blocked``, total at most ``bound``.

    The result is disjoint from ``blocked``, its total is min(bound, free
    space), and it is maximal: it can only fall short of ``bound`` when the
    gaps are exhausted.
    """
    bound = Fraction(bound)
    if bound <= ZERO:
        return EMPTY
    need = bound
    out = []
    for lo, hi in blocked.gaps():
        take = min(need, hi - lo)
        out.append((lo, lo + take))
        need -= take
        if need == ZERO:
            break
    return IntervalSet(out)


def discretize(itvl: IntervalSet, tdma_slots: int) -> FrozenSet[int]:
    """Slots whose midpoints fall inside ``itvl``.

    Slot k of T covers [k/T, (k+1)/T); ownership is decided by the midpoint
    (2k+1)/(2T), so disjoint interval sets always yield disjoint slot sets.
    """
    if tdma_slots < 1:
        raise ValueError("tdma_slots must be >= 1")
    owned = []
    for k in range(tdma_slots):
        mid = Fraction(2 * k + 1, 2 * tdma_slots)
        if itvl.contains_point(mid):
            owned.append(k)
    return frozenset(owned)


def compute_base(own_color: Optional[int], two_hop_colors: Iterable[Optional[int]]) -> Optional[int]:
    """Distinct color count over the two-hop view including self.

    Returns None when the own color or any cached color is missing; the
    caller then leaves its base unchanged.
    """
    if own_color is None:
        return None
    seen = {own_color}
    for c in two_hop_colors:
        if c is None:
            return None
        seen.add(c)
    return len(seen)


def priority_key(base: int, color: int, ref) -> tuple:
    """Total order on claim priority: smaller key claims earlier.

    Higher base first, then smaller color; the name pair breaks the ties that
    can only occur transiently, before the coloring is valid.
    """
    return (-base, color, ref)


def constrained_set(
    my_key: tuple, candidates: Iterable[Tuple[tuple, IntervalSet]]
) -> IntervalSet:
    """Union of intervals already claimed by strictly more constrained nodes."""
    blocked = [itvl for key, itvl in candidates if key < my_key]
    return EMPTY.union(*blocked)


def share_bound(base: int) -> Fraction:
    if base < 1:
        raise ValueError("base must be >= 1")
    return Fraction(1, base)


def slots_problems(
    topology,
    bases: Mapping[int, Optional[int]],
    colors: Mapping[int, Optional[int]],
    itvls: Mapping[int, IntervalSet],
    refs: Mapping[int, tuple],
) -> List[str]:
    """All violations of the converged slot-layer contract, empty when valid.

    Checks, for every node: base equals the true distinct-color count of its
    two-hop neighborhood; its interval set is disjoint from every node within
    distance two; its share total is exactly 1/base; and its interval set
    equals the greedy claim given the more constrained claims around it.
    """
    problems = []
    for p in topology.nodes:
        if colors.get(p) is None or bases.get(p) is None:
            problems.append(f"node {p}: unset color or base")
            continue
        hood = topology.neighborhood(p, 2) if topology.degree(p) else frozenset()
        truth = compute_base(colors[p], (colors.get(q) for q in hood))
        if truth is None:
            problems.append(f"node {p}: neighbor color unset in two-hop view")
            continue
        if bases[p] != truth:
            problems.append(f"node {p}: base {bases[p]} != recomputed {truth}")
        mine = itvls.get(p, EMPTY)
        if mine.total() != share_bound(bases[p]):
            problems.append(
                f"node {p}: share {mine.total()} != 1/{bases[p]}"
            )
        for q in sorted(hood - {p}):
            if mine.intersects(itvls.get(q, EMPTY)):
                problems.append(f"nodes {p} and {q}: overlapping intervals")
        my_key = priority_key(bases[p], colors[p], refs[p])
        cands = []
        for q in hood - {p}:
            if bases.get(q) is None or colors.get(q) is None:
                continue
            cands.append((priority_key(bases[q], colors[q], refs[q]), itvls.get(q, EMPTY)))
        expect = g_assign(share_bound(bases[p]), constrained_set(my_key, cands))
        if mine != expect:
            problems.append(f"node {p}: intervals {mine} != greedy claim {expect}")
    return problems


def slots_valid(topology, bases, colors, itvls, refs) -> bool:
    return not slots_problems(topology, bases, colors, itvls, refs)
