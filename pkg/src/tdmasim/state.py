"""Node-local state: shared variables, bounded neighbor caches, frame payloads.

Shared variables are immutable snapshots; a node replaces its ``SharedVars``
wholesale when a guarded command fires, so frames and cache entries can hold
references without copying. Caches map origin id to the freshest snapshot
heard for that origin, tagged with a hops tier (1 = heard directly, 2 = from a
neighbor's cache, 3 = name-only) and a refresh timestamp for aging.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, replace
from typing import Dict, FrozenSet, Iterable, Iterator, List, NamedTuple, Optional, Tuple

from .slots import EMPTY, IntervalSet


class NameRef(NamedTuple):
    """A name with its node id as tie-break; compares lexicographically."""

    name: int
    node: int


SpectrumEntry = Tuple[int, Optional[NameRef]]


def canon_spectrum(entries: Iterable[SpectrumEntry]) -> Tuple[SpectrumEntry, ...]:
    """Deduplicated, deterministically ordered spectrum (None assigners last)."""
    uniq = set(entries)
    return tuple(
        sorted(uniq, key=lambda e: (e[0], e[1] is None, e[1] if e[1] is not None else NameRef(0, 0)))
    )


@dataclass(frozen=True, slots=True)
class SharedVars:
    """One node's broadcast state.

    ``claimed`` is the advertised direct-neighbor id list; ``setcol`` maps
    dominated node id -> color (leaders only); ``spectrum`` pairs each locally
    visible color with the name of the leader that assigned it (None when the
    colored node saw no leader).
    """

    node: int
    claimed: Tuple[int, ...] = ()
    name: int = 0
    leader: bool = False
    min_leader: Optional[NameRef] = None
    color: Optional[int] = None
    setcol: Tuple[Tuple[int, int], ...] = ()
    spectrum: Tuple[SpectrumEntry, ...] = ()
    base: Optional[int] = None
    itvl: IntervalSet = EMPTY

    @property
    def ref(self) -> NameRef:
        return NameRef(self.name, self.node)

    def setcol_get(self, node: int) -> Optional[int]:
        for n, c in self.setcol:
            if n == node:
                return c
        return None


def name_stub(node: int, name: int) -> SharedVars:
    """Name-only snapshot used for hops-3 cache entries."""
    return SharedVars(node=node, name=name)


def shared_problems(sv: SharedVars) -> List[str]:
    """Violations of the SharedVars type invariants."""
    problems = []
    if list(sv.claimed) != sorted(set(sv.claimed)):
        problems.append("claimed not sorted/unique")
    if sv.node in sv.claimed:
        problems.append("claimed contains self")
    if sv.name < 0:
        problems.append("negative name")
    cols = [c for _, c in sv.setcol]
    if len(cols) != len(set(cols)):
        problems.append("setcol colors not distinct")
    if sv.setcol and not sv.leader:
        problems.append("setcol nonempty on non-leader")
    if [n for n, _ in sv.setcol] != sorted({n for n, _ in sv.setcol}):
        problems.append("setcol not sorted by node")
    if sv.spectrum != canon_spectrum(sv.spectrum):
        problems.append("spectrum not canonical")
    return problems


# -- canonical JSON round-trip -------------------------------------------------


def _ref_to_json(ref: Optional[NameRef]):
    return None if ref is None else [ref.name, ref.node]


def _ref_from_json(data) -> Optional[NameRef]:
    return None if data is None else NameRef(int(data[0]), int(data[1]))


def shared_to_json(sv: SharedVars) -> dict:
    return {
        "node": sv.node,
        "claimed": list(sv.claimed),
        "name": sv.name,
        "leader": sv.leader,
        "min_leader": _ref_to_json(sv.min_leader),
        "color": sv.color,
        "setcol": [[n, c] for n, c in sv.setcol],
        "spectrum": [[c, _ref_to_json(r)] for c, r in sv.spectrum],
        "base": sv.base,
        "itvl": sv.itvl.to_json(),
    }


def shared_from_json(data: dict) -> SharedVars:
    return SharedVars(
        node=int(data["node"]),
        claimed=tuple(int(x) for x in data["claimed"]),
        name=int(data["name"]),
        leader=bool(data["leader"]),
        min_leader=_ref_from_json(data["min_leader"]),
        color=None if data["color"] is None else int(data["color"]),
        setcol=tuple((int(n), int(c)) for n, c in data["setcol"]),
        spectrum=tuple((int(c), _ref_from_json(r)) for c, r in data["spectrum"]),
        base=None if data["base"] is None else int(data["base"]),
        itvl=IntervalSet.from_json(data["itvl"]),
    )


@dataclass(frozen=True, slots=True)
class FramePayload:
    """What one broadcast carries: own snapshot, the sender's direct-neighbor
    snapshots, and (id, name) pairs for the sender's two-hop entries."""

    sender_snap: SharedVars
    neighbor_snaps: Tuple[Tuple[int, SharedVars], ...] = ()
    far_names: Tuple[Tuple[int, int], ...] = ()


class CacheEntry:
    __slots__ = ("snap", "hops", "refreshed")

    def __init__(self, snap: SharedVars, hops: int, refreshed: int) -> None:
        self.snap = snap
        self.hops = hops
        self.refreshed = refreshed

    def age(self, now: int) -> int:
        return now - self.refreshed


class NodeCache:
    """Bounded per-node cache of overheard snapshots, indexed for the checkers.

    ``entries`` maps origin -> CacheEntry. ``_by_name`` maps name ->
    {origin: hops} for the stability checker's conflicting-belief scan.
    An optional shared ``holders`` index maps origin -> set of cache owners.
    ``version`` bumps on any content change (not on pure age refresh).
    """

    __slots__ = ("owner", "capacity", "entries", "version", "_by_name", "_names_memo",
                 "_memo_version", "holders")

    def __init__(self, owner: int, capacity: int, holders: Optional[Dict[int, set]] = None):
        self.owner = owner
        self.capacity = capacity
        self.entries: Dict[int, CacheEntry] = {}
        self.version = 0
        self._by_name: Dict[int, Dict[int, int]] = {}
        self._names_memo: FrozenSet[int] = frozenset()
        self._memo_version = -1
        self.holders = holders

    # -- index maintenance --

    def _index_add(self, origin: int, name: int, hops: int) -> None:
        self._by_name.setdefault(name, {})[origin] = hops
        if self.holders is not None:
            self.holders.setdefault(origin, set()).add(self.owner)

    def _index_drop(self, origin: int, name: int) -> None:
        bucket = self._by_name.get(name)
        if bucket is not None:
            bucket.pop(origin, None)
            if not bucket:
                del self._by_name[name]
        if self.holders is not None:
            owners = self.holders.get(origin)
            if owners is not None:
                owners.discard(self.owner)
                if not owners:
                    del self.holders[origin]

    def _remove(self, origin: int) -> None:
        e = self.entries.pop(origin)
        self._index_drop(origin, e.snap.name)

    def _evict_for(self, now: int) -> None:
        victim = max(
            self.entries.items(), key=lambda kv: (now - kv[1].refreshed, -kv[0])
        )[0]
        self._remove(victim)

    # -- mutation --

    def upsert(self, origin: int, snap: SharedVars, hops: int, now: int) -> bool:
        """Store/refresh a snapshot; returns True when cache content changed.

        A tier only refreshes an entry whose current hops label is >= the
        incoming one; a pure age refresh with identical content returns False.
        """
        if origin == self.owner:
            raise ValueError("cache never stores its owner")
        e = self.entries.get(origin)
        if e is None:
            if len(self.entries) >= self.capacity:
                self._evict_for(now)
            self.entries[origin] = CacheEntry(snap, hops, now)
            self._index_add(origin, snap.name, hops)
            self.version += 1
            return True
        if hops > e.hops:
            return False
        changed = e.hops != hops or (e.snap is not snap and e.snap != snap)
        if changed:
            self._index_drop(origin, e.snap.name)
            e.snap = snap
            e.hops = hops
            self._index_add(origin, snap.name, hops)
            self.version += 1
        e.refreshed = now
        return changed

    def upsert_name(self, origin: int, name: int, now: int) -> bool:
        """Hops-3 tier: refresh just a name belief (cheap path, no snapshot)."""
        if origin == self.owner:
            raise ValueError("cache never stores its owner")
        e = self.entries.get(origin)
        if e is None:
            if len(self.entries) >= self.capacity:
                self._evict_for(now)
            self.entries[origin] = CacheEntry(name_stub(origin, name), 3, now)
            self._index_add(origin, name, 3)
            self.version += 1
            return True
        if e.hops < 3:
            return False
        if e.snap.name != name:
            self._index_drop(origin, e.snap.name)
            e.snap = name_stub(origin, name)
            self._index_add(origin, name, 3)
            self.version += 1
            e.refreshed = now
            return True
        e.refreshed = now
        return False

    def expire(self, now: int, max_age: int) -> bool:
        """Drop every entry whose age exceeds ``max_age``."""
        if not self.entries:
            return False
        oldest = min(e.refreshed for e in self.entries.values())
        if now - oldest <= max_age:
            return False
        dead = [o for o, e in self.entries.items() if now - e.refreshed > max_age]
        for origin in dead:
            self._remove(origin)
        if dead:
            self.version += 1
        return bool(dead)

    def clear(self) -> None:
        for origin in list(self.entries):
            self._remove(origin)
        self.version += 1

    # -- views --

    def names(self) -> FrozenSet[int]:
        """Candidate-id set: every name currently cached (any tier)."""
        if self._memo_version != self.version:
            self._names_memo = frozenset(self._by_name)
            self._memo_version = self.version
        return self._names_memo

    def beliefs_named(self, name: int) -> Iterator[Tuple[int, int]]:
        """(origin, hops) pairs of entries currently carrying ``name``."""
        bucket = self._by_name.get(name)
        return iter(bucket.items()) if bucket else iter(())

    def tier_items(self, max_hops: int) -> List[Tuple[int, SharedVars]]:
        return [
            (o, e.snap)
            for o, e in sorted(self.entries.items())
            if e.hops <= max_hops
        ]


@dataclass(slots=True)
class NodeState:
    """Everything one node owns: shared vars, cache, RNG, broadcast schedule.

    The ``step_*``/``frame_*`` fields memoize the last rule evaluation and
    emitted frame; both are pure functions of (shared, cache content), so a
    node whose inputs are unchanged can skip re-evaluation. Fault injection
    must reset them when it rewrites state behind the protocol's back.
    """

    node: int
    shared: SharedVars
    cache: NodeCache
    rng: random.Random
    next_round: int = 0
    last_tx: Optional[int] = None
    alive: bool = True
    claimed_truncated: int = 0
    frames_dropped: int = 0
    step_cache_version: int = -1
    step_shared: Optional[SharedVars] = None
    frame_cache_version: int = -1
    frame_memo: Optional[object] = None

    def invalidate_memos(self) -> None:
        self.step_cache_version = -1
        self.step_shared = None
        self.frame_cache_version = -1
        self.frame_memo = None


def node_rng(seed: int, node: int, purpose: str = "node") -> random.Random:
    """Deterministic per-node stream, stable across platforms."""
    return random.Random(f"{purpose}:{seed}:{node}")
