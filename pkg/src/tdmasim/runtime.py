"""Per-node guarded-command executor and the broadcast/receive discipline.

A node's life is: wait out its kappa + beta backoff on the overhead clock,
evaluate every rule once in the fixed order N2, N3, R1..R11 (later rules see
earlier writes), broadcast the resulting snapshot, repeat. Frame receipt (N0)
and cache aging (N1) never touch shared variables.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, List, NamedTuple, Optional, Tuple

from . import coloring, slots
from .medium import Frame, SuperframeConfig
from .naming import NamingParams, new_id
from .state import FramePayload, NameRef, NodeState, SharedVars, canon_spectrum


@dataclass(frozen=True)
class ProtocolParams:
    delta: int
    naming: NamingParams
    config: SuperframeConfig

    @property
    def cache_capacity(self) -> int:
        d = self.delta
        return d**3 + d**2 + d

    @classmethod
    def make(cls, delta: int, config: Optional[SuperframeConfig] = None, t: int = 6):
        return cls(delta, NamingParams(delta, t), config or SuperframeConfig())


class _StepView:
    """Scratch assembled once per step: cache tiers plus working registers."""

    __slots__ = ("node", "params", "state", "regs", "hops1", "hops1_map", "hops12",
                 "flags", "dom")

    def __init__(self, state: NodeState, params: ProtocolParams):
        self.node = state.node
        self.params = params
        self.state = state
        sv = state.shared
        self.regs = {
            "claimed": sv.claimed,
            "name": sv.name,
            "leader": sv.leader,
            "min_leader": sv.min_leader,
            "color": sv.color,
            "setcol": sv.setcol,
            "spectrum": sv.spectrum,
            "base": sv.base,
            "itvl": sv.itvl,
        }
        self.hops1 = []
        self.hops12 = []
        for origin, entry in sorted(state.cache.entries.items()):
            if entry.hops == 1:
                self.hops1.append((origin, entry.snap))
            if entry.hops <= 2:
                self.hops12.append(entry.snap)
        self.hops1_map = dict(self.hops1)
        self.flags: List[Tuple[NameRef, bool]] = []
        self.dom: List[NameRef] = []

    @property
    def me(self) -> NameRef:
        return NameRef(self.regs["name"], self.node)


def _n2_claim_neighbors(v: _StepView) -> bool:
    cap = v.params.delta
    ids = [origin for origin, _ in v.hops1]
    if len(ids) > cap:
        v.state.claimed_truncated += len(ids) - cap
        ids = ids[:cap]
    new = tuple(ids)
    if new == v.regs["claimed"]:
        return False
    v.regs["claimed"] = new
    return True


def _n3_rename(v: _StepView) -> bool:
    cids = v.state.cache.names()
    if v.regs["name"] not in cids:
        return False
    v.regs["name"] = new_id(
        v.regs["name"], cids, v.params.naming.namespace, v.state.rng
    )
    return True


def _mis_prepare(v: _StepView) -> None:
    v.flags = [(snap.ref, snap.leader) for _, snap in v.hops1]


def _r1_join(v: _StepView) -> bool:
    me = v.me
    if v.regs["leader"] or not all(ref > me for ref, _ in v.flags):
        return False
    v.regs["leader"] = True
    return True


def _r2_yield(v: _StepView) -> bool:
    me = v.me
    if not v.regs["leader"] or not any(f and ref < me for ref, f in v.flags):
        return False
    v.regs["leader"] = False
    return True


def _r3_rejoin(v: _StepView) -> bool:
    me = v.me
    if v.regs["leader"]:
        return False
    smaller = [f for ref, f in v.flags if ref < me]
    if not smaller or any(smaller):
        return False
    v.regs["leader"] = True
    return True


def _r4_collect_dominated(v: _StepView) -> bool:
    if not v.regs["leader"]:
        v.dom = []
        return False
    dom = [v.me]
    for origin, snap in v.hops1:
        ml = snap.min_leader
        if ml is not None and ml.node == v.node:
            dom.append(snap.ref)
    dom.sort()
    v.dom = dom
    return False


def _r5_assign_block(v: _StepView) -> bool:
    if not v.regs["leader"]:
        if v.regs["setcol"]:
            v.regs["setcol"] = ()
            return True
        return False
    # scan every cached spectrum (a 2-hop radius): each publisher relays the
    # claims of its own 1-hop ring, so competing assignments up to three hops
    # away — the farthest that can collide with a dominated neighbor — are
    # all visible here
    used = coloring.used_colors(v.me, (snap.spectrum for snap in v.hops12))
    cols = coloring.f_assign(v.dom, used)
    setcol = tuple(sorted((ref.node, c) for ref, c in zip(v.dom, cols)))
    own = dict(setcol)[v.node]
    fired = False
    if setcol != v.regs["setcol"]:
        v.regs["setcol"] = setcol
        fired = True
    if own != v.regs["color"]:
        v.regs["color"] = own
        fired = True
    return fired


def _r6_min_leader(v: _StepView) -> bool:
    new = coloring.compute_min_leader(v.me, v.regs["leader"], v.flags)
    if new == v.regs["min_leader"]:
        return False
    v.regs["min_leader"] = new
    return True


def _r7_adopt(v: _StepView) -> bool:
    if v.regs["leader"]:
        return False
    ml = v.regs["min_leader"]
    if ml is None:
        return False
    snap = v.hops1_map.get(ml.node)
    if snap is None:
        return False
    new = coloring.adopt_color(v.node, ml, snap.setcol, v.regs["color"])
    if new == v.regs["color"]:
        return False
    v.regs["color"] = new
    return True


def _r8_spectrum(v: _StepView) -> bool:
    # every node publishes, leaders included: a leader's self-claim carries
    # its own ref as assigner, and relaying neighbours' claims keeps them
    # visible to assigners two hops past the publisher
    entries = []
    if v.regs["color"] is not None:
        entries.append((v.regs["color"], v.regs["min_leader"]))
    for _, snap in v.hops1:
        if snap.color is not None:
            entries.append((snap.color, snap.min_leader))
    new = canon_spectrum(entries)
    if new == v.regs["spectrum"]:
        return False
    v.regs["spectrum"] = new
    return True


def _r9_base(v: _StepView) -> bool:
    if v.regs["color"] is None:
        return False
    seen = {v.regs["color"]}
    for snap in v.hops12:
        if snap.color is None:
            return False
        seen.add(snap.color)
    new = len(seen)
    if new == v.regs["base"]:
        return False
    v.regs["base"] = new
    return True


def _r10_r11_claim(v: _StepView) -> bool:
    base, color = v.regs["base"], v.regs["color"]
    if base is None or color is None:
        return False
    my_key = slots.priority_key(base, color, v.me)
    blocked = slots.constrained_set(
        my_key,
        (
            (slots.priority_key(s.base, s.color, s.ref), s.itvl)
            for s in v.hops12
            if s.base is not None and s.color is not None
        ),
    )
    new = slots.g_assign(slots.share_bound(base), blocked)
    if new == v.regs["itvl"]:
        return False
    v.regs["itvl"] = new
    return True


class GuardedCommand(NamedTuple):
    label: str
    apply: Callable[[_StepView], bool]


RULES: Tuple[GuardedCommand, ...] = (
    GuardedCommand("N2", _n2_claim_neighbors),
    GuardedCommand("N3", _n3_rename),
    GuardedCommand("R1", _r1_join),
    GuardedCommand("R2", _r2_yield),
    GuardedCommand("R3", _r3_rejoin),
    GuardedCommand("R4", _r4_collect_dominated),
    GuardedCommand("R5", _r5_assign_block),
    GuardedCommand("R6", _r6_min_leader),
    GuardedCommand("R7", _r7_adopt),
    GuardedCommand("R8", _r8_spectrum),
    GuardedCommand("R9", _r9_base),
    GuardedCommand("R10+R11", _r10_r11_claim),
)


def step(
    state: NodeState, now: int, params: ProtocolParams
) -> Tuple[Frame, Tuple[str, ...]]:
    """Evaluate all rules once and emit the (possibly unchanged) snapshot.

    ``now`` is the overhead-clock instant of the broadcast. A step whose
    inputs (cache content, own snapshot) are unchanged since the previous
    step is skipped wholesale: every rule is a deterministic function of
    those inputs, and N3's draw only happens on a content-dependent guard.
    """
    cache = state.cache
    if cache.version == state.step_cache_version and state.shared is state.step_shared:
        return make_frame(state, params), ()

    view = _StepView(state, params)
    fired = []
    for rule in RULES:
        if rule.apply(view):
            fired.append(rule.label)
        if rule.label == "N3":
            _mis_prepare(view)

    if fired:
        state.shared = SharedVars(
            node=state.node,
            claimed=view.regs["claimed"],
            name=view.regs["name"],
            leader=view.regs["leader"],
            min_leader=view.regs["min_leader"],
            color=view.regs["color"],
            setcol=view.regs["setcol"],
            spectrum=view.regs["spectrum"],
            base=view.regs["base"],
            itvl=view.regs["itvl"],
        )
    state.step_cache_version = cache.version
    state.step_shared = state.shared
    return make_frame(state, params), tuple(fired)


def _capped_claim(snap: SharedVars, delta: int) -> SharedVars:
    if len(snap.claimed) <= delta:
        return snap
    return replace(snap, claimed=snap.claimed[:delta])


def make_frame(state: NodeState, params: ProtocolParams) -> Frame:
    """Snapshot frame: own vars, hops-1 snapshots, hops-2 (id, name) pairs.

    Claimed lists and payload tiers are capped at delta resp. delta**2
    entries, dropping largest ids first, so payload stays O(delta**2) ids
    even from garbage initial caches.
    """
    cache = state.cache
    if (
        cache.version == state.frame_cache_version
        and state.frame_memo is not None
        and state.frame_memo.payload.sender_snap is state.shared
    ):
        return state.frame_memo
    delta = params.delta
    near: List[Tuple[int, SharedVars]] = []
    far: List[Tuple[int, int]] = []
    for origin, entry in sorted(cache.entries.items()):
        if entry.hops == 1 and len(near) < delta:
            near.append((origin, _capped_claim(entry.snap, delta)))
        elif entry.hops == 2 and len(far) < delta * delta:
            far.append((origin, entry.snap.name))
    frame = Frame(
        sender=state.node,
        kind="overhead",
        payload=FramePayload(
            sender_snap=_capped_claim(state.shared, delta),
            neighbor_snaps=tuple(near),
            far_names=tuple(far),
        ),
    )
    state.frame_cache_version = cache.version
    state.frame_memo = frame
    return frame


def on_receive(state: NodeState, frame: Frame, now: int) -> bool:
    """N0: merge a cleanly received frame into the cache (never shared vars).

    Sender lands at hops 1, its neighbor snapshots at hops 2, far names at
    hops 3; entries about the receiver itself are skipped. Snapshots are
    stored exactly as the origin published them — a receiver-edited variant
    would differ per relay path and keep two-hop caches flapping between
    copies forever. Malformed frames are dropped and counted.
    """
    payload = frame.payload
    if not isinstance(payload, FramePayload) or payload.sender_snap.node != frame.sender:
        state.frames_dropped += 1
        return False
    me = state.node
    if frame.sender == me:
        state.frames_dropped += 1
        return False
    changed = state.cache.upsert(frame.sender, payload.sender_snap, 1, now)
    for origin, nsnap in payload.neighbor_snaps:
        if origin != me and origin == nsnap.node:
            changed |= state.cache.upsert(origin, nsnap, 2, now)
    for origin, name in payload.far_names:
        if origin != me:
            changed |= state.cache.upsert_name(origin, name, now)
    return changed


def age_and_expire(state: NodeState, now: int, config: SuperframeConfig) -> bool:
    """N1: drop cache entries not refreshed within max_age superframes."""
    return state.cache.expire(now, config.max_age)


# -- contention scheduling -------------------------------------------------------


def wants_step(state: NodeState, superframe: int) -> bool:
    return state.alive and superframe >= state.next_round


def schedule_after_tx(state: NodeState, config: SuperframeConfig, tx_clock: int) -> None:
    """After transmitting, wait kappa plus a uniform beta of mini-slots on
    the overhead clock, re-entering contention in the first round whose
    window starts at or after that instant."""
    state.last_tx = tx_clock
    beta = state.rng.randint(0, config.beta_max)
    ready = tx_clock + config.kappa + beta
    c = config.contention_minislots
    current_round = tx_clock // c
    state.next_round = max(-(-ready // c), current_round + 1)
